#include "sparse_time/data.hpp"

#include "sparse_time/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>

namespace sparsetime {

namespace {

// Splits one logical CSV record. Quoted fields may contain the delimiter,
// doubled quotes and newlines, so the reader may consume several lines.
bool read_record(std::istream& in, char delim, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == delim) {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (!any) {
        return false;
    }
    fields.push_back(std::move(field));
    return true;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) {
        return std::nullopt;
    }
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') {
        ++first;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

bool is_blank(const std::vector<std::string>& fields) {
    return std::all_of(fields.begin(), fields.end(),
                       [](const std::string& f) { return trim(f).empty(); });
}

} // namespace

std::size_t RawTable::column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
        throw DataError(DataError::Kind::MissingColumn, "column '" + name + "' not in table");
    }
    return static_cast<std::size_t>(it - columns.begin());
}

RawTable ingest_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError(DataError::Kind::MissingFile, "cannot open CSV file " + path.string());
    }
    return parse_csv(in, options);
}

RawTable parse_csv(std::istream& in, const CsvOptions& options) {
    std::vector<std::string> header;
    if (!read_record(in, options.delimiter, header) || is_blank(header)) {
        throw DataError(DataError::Kind::NoRows, "CSV has no header row");
    }
    for (auto& h : header) {
        h = trim(h);
    }

    std::vector<std::vector<std::optional<double>>> cells;
    std::vector<std::string> fields;
    while (read_record(in, options.delimiter, fields)) {
        if (is_blank(fields)) {
            continue;
        }
        std::vector<std::optional<double>> row(header.size());
        for (std::size_t j = 0; j < header.size() && j < fields.size(); ++j) {
            auto v = parse_number(fields[j]);
            if (v && options.missing_sentinel && *v == *options.missing_sentinel) {
                v.reset();
            }
            row[j] = v;
        }
        cells.push_back(std::move(row));
    }
    if (cells.empty()) {
        throw DataError(DataError::Kind::NoRows, "CSV has a header but no data rows");
    }

    auto find_header = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw DataError(DataError::Kind::MissingColumn, "CSV has no column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    auto has_numeric = [&](std::size_t j) {
        return std::any_of(cells.begin(), cells.end(),
                           [j](const auto& row) { return row[j].has_value(); });
    };

    std::vector<std::size_t> selected;
    if (options.feature_columns.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (has_numeric(j)) {
                selected.push_back(j);
            }
        }
    } else {
        for (const auto& name : options.feature_columns) {
            selected.push_back(find_header(name));
        }
    }
    if (!options.target_column.empty()) {
        const std::size_t t = find_header(options.target_column);
        if (std::find(selected.begin(), selected.end(), t) == selected.end()) {
            selected.push_back(t);
        }
    }
    if (selected.empty()) {
        throw DataError(DataError::Kind::Malformed, "CSV has no numeric columns");
    }

    const std::size_t T = cells.size();
    const std::size_t d = selected.size();
    RawTable table;
    table.values = Matrix(T, d);
    table.missing.assign(T * d, 0);
    for (std::size_t c = 0; c < d; ++c) {
        const std::size_t j = selected[c];
        table.columns.push_back(header[j]);
        if (!has_numeric(j)) {
            throw DataError(DataError::Kind::Malformed,
                            "column '" + header[j] + "' has no numeric values");
        }
        std::optional<double> last;
        for (std::size_t t = 0; t < T; ++t) {
            if (cells[t][j]) {
                last = cells[t][j];
                table.values(t, c) = *last;
            } else {
                table.missing[t * d + c] = 1;
                if (last) {
                    table.values(t, c) = *last;
                }
            }
        }
        // Back-fill the leading gap from the first observed value.
        std::size_t first = 0;
        while (table.missing[first * d + c]) {
            ++first;
        }
        for (std::size_t t = 0; t < first; ++t) {
            table.values(t, c) = table.values(first, c);
        }
    }
    table.target_index =
        options.target_column.empty() ? 0 : table.column_index(options.target_column);
    return table;
}

} // namespace sparsetime
