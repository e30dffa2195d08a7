#include "sparse_time/config.hpp"

#include "sparse_time/errors.hpp"
#include "sparse_time/format.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

namespace sparsetime {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

template <class T>
T parse_integer(const std::string& key, const std::string& v) {
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    }
    return out;
}

double parse_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&,
                                  const std::filesystem::path&)>;

const std::map<std::string, Setter>& setters() {
    using P = std::filesystem::path;
    static const std::map<std::string, Setter> table = {
        {"schema",
         [](RunConfig&, const std::string& k, const std::string& v, const P&) {
             if (parse_integer<int>(k, v) != kConfigSchema) {
                 throw ConfigError("unsupported config schema " + v + " (expected " +
                                   std::to_string(kConfigSchema) + ")");
             }
         }},
        {"seed", [](RunConfig& c, const std::string& k, const std::string& v,
                    const P&) { c.seed = parse_integer<std::uint64_t>(k, v); }},
        {"data.source",
         [](RunConfig& c, const std::string&, const std::string& v, const P&) {
             if (v == "synthetic") {
                 c.data.kind = SourceKind::Synthetic;
             } else if (v == "csv") {
                 c.data.kind = SourceKind::Csv;
             } else {
                 throw ConfigError("data.source must be 'synthetic' or 'csv', got '" + v + "'");
             }
         }},
        {"data.synthetic.kind",
         [](RunConfig& c, const std::string&, const std::string& v, const P&) {
             const auto kind = parse_synth_kind(v);
             if (!kind) {
                 throw ConfigError("data.synthetic.kind must be trend, spike, seasonal or "
                                   "random_walk, got '" + v + "'");
             }
             c.data.synth_kind = *kind;
         }},
        {"data.synthetic.length", [](RunConfig& c, const std::string& k, const std::string& v,
                                     const P&) { c.data.length = parse_integer<std::size_t>(k, v); }},
        {"data.synthetic.features",
         [](RunConfig& c, const std::string& k, const std::string& v, const P&) {
             c.data.features = parse_integer<std::size_t>(k, v);
         }},
        {"data.synthetic.seed",
         [](RunConfig& c, const std::string& k, const std::string& v, const P&) {
             c.data.seed = parse_integer<std::uint64_t>(k, v);
         }},
        {"data.synthetic.noise", [](RunConfig& c, const std::string& k, const std::string& v,
                                    const P&) { c.data.noise = parse_real(k, v); }},
        {"data.csv.path", [](RunConfig& c, const std::string&, const std::string& v,
                             const P& base) {
             const P p(v);
             c.data.csv_path = p.is_absolute() ? p : base / p;
         }},
        {"data.csv.features", [](RunConfig& c, const std::string&, const std::string& v,
                                 const P&) { c.data.csv.feature_columns = split_list(v); }},
        {"data.csv.target", [](RunConfig& c, const std::string&, const std::string& v,
                               const P&) { c.data.csv.target_column = v; }},
        {"data.csv.delimiter",
         [](RunConfig& c, const std::string&, const std::string& v, const P&) {
             if (v == "\\t" || v == "tab") {
                 c.data.csv.delimiter = '\t';
             } else if (v.size() == 1) {
                 c.data.csv.delimiter = v[0];
             } else {
                 throw ConfigError("data.csv.delimiter must be a single character");
             }
         }},
        {"data.csv.missing_sentinel",
         [](RunConfig& c, const std::string& k, const std::string& v, const P&) {
             c.data.csv.missing_sentinel = parse_real(k, v);
         }},
        {"data.target_index", [](RunConfig& c, const std::string& k, const std::string& v,
                                 const P&) {
             c.dataset.target_feature = parse_integer<std::size_t>(k, v);
         }},
        {"window", [](RunConfig& c, const std::string& k, const std::string& v,
                      const P&) { c.dataset.window_length = parse_integer<std::size_t>(k, v); }},
        {"smooth_window",
         [](RunConfig& c, const std::string& k, const std::string& v, const P&) {
             c.dataset.smooth_window = parse_integer<std::size_t>(k, v);
             c.train.smooth_window = c.dataset.smooth_window;
         }},
        {"hidden_dim", [](RunConfig& c, const std::string& k, const std::string& v,
                          const P&) { c.train.hidden_dim = parse_integer<std::size_t>(k, v); }},
        {"rank", [](RunConfig& c, const std::string& k, const std::string& v, const P&) {
             c.rank = parse_integer<std::size_t>(k, v);
         }},
        {"out", [](RunConfig& c, const std::string&, const std::string& v, const P& base) {
             const P p(v);
             c.out_dir = p.is_absolute() ? p : base / p;
         }},
        {"threads", [](RunConfig& c, const std::string& k, const std::string& v,
                       const P&) { c.threads = parse_integer<int>(k, v); }},
        {"train.learning_rate", [](RunConfig& c, const std::string& k, const std::string& v,
                                   const P&) { c.train.learning_rate = parse_real(k, v); }},
        {"train.weight_decay", [](RunConfig& c, const std::string& k, const std::string& v,
                                  const P&) { c.train.weight_decay = parse_real(k, v); }},
        {"train.decay_mode",
         [](RunConfig& c, const std::string&, const std::string& v, const P&) {
             if (v == "decoupled") {
                 c.train.decay_mode = DecayMode::Decoupled;
             } else if (v == "l2") {
                 c.train.decay_mode = DecayMode::L2;
             } else {
                 throw ConfigError("train.decay_mode must be 'decoupled' or 'l2'");
             }
         }},
        {"train.beta1", [](RunConfig& c, const std::string& k, const std::string& v,
                           const P&) { c.train.beta1 = parse_real(k, v); }},
        {"train.beta2", [](RunConfig& c, const std::string& k, const std::string& v,
                           const P&) { c.train.beta2 = parse_real(k, v); }},
        {"train.eps", [](RunConfig& c, const std::string& k, const std::string& v,
                         const P&) { c.train.eps = parse_real(k, v); }},
        {"train.batch_size", [](RunConfig& c, const std::string& k, const std::string& v,
                                const P&) { c.train.batch_size = parse_integer<std::size_t>(k, v); }},
        {"train.max_epochs", [](RunConfig& c, const std::string& k, const std::string& v,
                                const P&) { c.train.max_epochs = parse_integer<std::size_t>(k, v); }},
        {"train.patience", [](RunConfig& c, const std::string& k, const std::string& v,
                              const P&) { c.train.patience = parse_integer<std::size_t>(k, v); }},
        {"decompose.start", [](RunConfig& c, const std::string& k, const std::string& v,
                               const P&) { c.decompose_start = parse_integer<std::size_t>(k, v); }},
        {"bench.lengths",
         [](RunConfig& c, const std::string& k, const std::string& v, const P&) {
             c.bench_lengths.clear();
             for (const auto& item : split_list(v)) {
                 c.bench_lengths.push_back(parse_integer<std::size_t>(k, item));
             }
         }},
        {"bench.features", [](RunConfig& c, const std::string& k, const std::string& v,
                              const P&) { c.bench_features = parse_integer<std::size_t>(k, v); }},
        {"bench.rank", [](RunConfig& c, const std::string& k, const std::string& v,
                          const P&) { c.bench_rank = parse_integer<std::size_t>(k, v); }},
        {"predict.checkpoint", [](RunConfig& c, const std::string&, const std::string& v,
                                  const P& base) {
             const P p(v);
             c.checkpoint = p.is_absolute() ? p : base / p;
         }},
        {"report.timing", [](RunConfig& c, const std::string& k, const std::string& v,
                             const P&) { c.report_timing = parse_bool(k, v); }},
    };
    return table;
}

void apply(RunConfig& c, const KeyValues& values, const std::filesystem::path& base) {
    for (const auto& [key, value] : values) {
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw ConfigError("unknown config key '" + key + "'");
        }
        it->second(c, key, value, base);
    }
}

} // namespace

KeyValues parse_key_values(std::istream& in) {
    KeyValues out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        }
        if (!out.emplace(key, value).second) {
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key +
                              "'");
        }
    }
    return out;
}

RunConfig make_run_config(const KeyValues& file_values, const KeyValues& overrides,
                          const std::filesystem::path& base_dir) {
    if (!file_values.empty() && !file_values.contains("schema")) {
        throw ConfigError("config file must declare 'schema = " + std::to_string(kConfigSchema) +
                          "'");
    }
    RunConfig c;
    apply(c, file_values, base_dir);
    apply(c, overrides, std::filesystem::current_path());
    if (c.seed) {
        c.train.seed = *c.seed;
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const KeyValues& overrides) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    return make_run_config(parse_key_values(in), overrides, path.parent_path());
}

KeyValues RunConfig::echo() const {
    KeyValues e;
    e["schema"] = std::to_string(kConfigSchema);
    e["seed"] = seed ? std::to_string(*seed) : "";
    e["data.source"] = data.kind == SourceKind::Csv ? "csv" : "synthetic";
    if (data.kind == SourceKind::Synthetic) {
        e["data.synthetic.kind"] = to_string(data.synth_kind);
        e["data.synthetic.length"] = std::to_string(data.length);
        e["data.synthetic.features"] = std::to_string(data.features);
        e["data.synthetic.seed"] = data.seed ? std::to_string(*data.seed) : "";
        e["data.synthetic.noise"] = data.noise ? format_double(*data.noise) : "";
    } else {
        e["data.csv.path"] = data.csv_path.filename().string();
        std::string feats;
        for (const auto& f : data.csv.feature_columns) {
            feats += (feats.empty() ? "" : ",") + f;
        }
        e["data.csv.features"] = feats;
        e["data.csv.target"] = data.csv.target_column;
    }
    e["data.target_index"] = std::to_string(dataset.target_feature);
    e["window"] = std::to_string(dataset.window_length);
    e["smooth_window"] = std::to_string(dataset.smooth_window);
    e["hidden_dim"] = std::to_string(train.hidden_dim);
    e["rank"] = std::to_string(rank);
    e["train.learning_rate"] = format_double(train.learning_rate);
    e["train.weight_decay"] = format_double(train.weight_decay);
    e["train.decay_mode"] = to_string(train.decay_mode);
    e["train.beta1"] = format_double(train.beta1);
    e["train.beta2"] = format_double(train.beta2);
    e["train.eps"] = format_double(train.eps);
    e["train.batch_size"] = std::to_string(train.batch_size);
    e["train.max_epochs"] = std::to_string(train.max_epochs);
    e["train.patience"] = std::to_string(train.patience);
    return e;
}

} // namespace sparsetime
