#include <doctest.h>

#include "sparse_time/data.hpp"
#include "sparse_time/errors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

using namespace sparsetime;

namespace {

RawTable parse(const std::string& text, const CsvOptions& opts = {}) {
    std::istringstream in(text);
    return parse_csv(in, opts);
}

DataError::Kind error_kind(const std::string& text, const CsvOptions& opts = {}) {
    try {
        parse(text, opts);
    } catch (const DataError& e) {
        return e.kind();
    }
    FAIL("expected DataError");
    return DataError::Kind::Malformed;
}

} // namespace

TEST_CASE("parse_csv: plain table") {
    const RawTable t = parse("time,a,b\n0,1.5,2\n1,2.5,3\n2,3.5,4\n");
    CHECK(t.columns == std::vector<std::string>{"time", "a", "b"});
    CHECK(t.values == Matrix::from_rows({{0, 1.5, 2}, {1, 2.5, 3}, {2, 3.5, 4}}));
    CHECK(t.missing == std::vector<std::uint8_t>(9, 0));
    CHECK(t.column_index("b") == 2);
}

TEST_CASE("parse_csv: feature selection, quoting and delimiter") {
    CsvOptions opts;
    opts.delimiter = ';';
    opts.feature_columns = {"b"};
    opts.target_column = "a";
    const RawTable t = parse("\"a\";\"b;c\";b\n1;\"x;y\";10\n2;z;20\n", opts);
    CHECK(t.columns == std::vector<std::string>{"b", "a"});
    CHECK(t.target_index == 1);
    CHECK(t.values == Matrix::from_rows({{10, 1}, {20, 2}}));
}

TEST_CASE("parse_csv: missing cells are forward- then back-filled") {
    const RawTable t = parse("a\n1.0\nNaN\n3.0\n");
    CHECK(t.values == Matrix::from_rows({{1.0}, {1.0}, {3.0}}));
    CHECK(t.missing == std::vector<std::uint8_t>{0, 1, 0});

    const RawTable lead = parse("a,b\n,1\n,2\n5,\n6,4\n");
    CHECK(lead.values == Matrix::from_rows({{5, 1}, {5, 2}, {5, 2}, {6, 4}}));

    CsvOptions sentinel;
    sentinel.missing_sentinel = -200.0;
    const RawTable s = parse("a\n7\n-200\n-200\n9\n", sentinel);
    CHECK(s.values == Matrix::from_rows({{7}, {7}, {7}, {9}}));
    CHECK(s.missing == std::vector<std::uint8_t>{0, 1, 1, 0});

    // Partial numbers are not numbers.
    CHECK(parse("a\n1\n2x\n").values == Matrix::from_rows({{1}, {1}}));
}

TEST_CASE("ingest_csv: distinct error kinds") {
    CHECK_THROWS_AS(ingest_csv("/nonexistent/file.csv", {}), DataError);
    try {
        ingest_csv("/nonexistent/file.csv", {});
    } catch (const DataError& e) {
        CHECK(e.kind() == DataError::Kind::MissingFile);
    }
    CsvOptions target;
    target.target_column = "nope";
    CHECK(error_kind("a\n1\n", target) == DataError::Kind::MissingColumn);
    CHECK(error_kind("a,b\n") == DataError::Kind::NoRows);
    CHECK(error_kind("") == DataError::Kind::NoRows);
    CHECK(error_kind("a,b\nx,y\n") == DataError::Kind::Malformed);

    const auto path = std::filesystem::temp_directory_path() / "sparse_time_ingest.csv";
    std::ofstream(path) << "a\n4\n5\n";
    CHECK(ingest_csv(path, {}).values == Matrix::from_rows({{4}, {5}}));
    std::filesystem::remove(path);
}

TEST_CASE("zscore: examples") {
    const Matrix x = Matrix::from_rows({{0}, {2}, {4}});
    const auto [z, stats] = zscore(x, RowRange{0, 3});
    CHECK(stats.mean[0] == 2.0);
    CHECK(stats.stddev[0] == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-15));
    CHECK(z(0, 0) == doctest::Approx(-2.0 / (std::sqrt(8.0 / 3.0) + 1e-8)).epsilon(1e-15));

    const auto [flat, flat_stats] = zscore(Matrix(5, 2, 3.25), RowRange{0, 5});
    CHECK(flat == Matrix(5, 2, 0.0));
    CHECK(flat_stats.stddev == std::vector<double>{0.0, 0.0});
}

TEST_CASE("zscore: training rows are standardized, inverse recovers input") {
    const Matrix raw = synth_series(SynthKind::RandomWalk, 200, 3, 11);
    const RowRange train{0, 140};
    const auto [z, stats] = zscore(raw, train);
    for (std::size_t j = 0; j < 3; ++j) {
        double sum = 0.0;
        double sq = 0.0;
        for (std::size_t t = train.begin; t < train.end; ++t) {
            sum += z(t, j);
            sq += z(t, j) * z(t, j);
        }
        const double n = static_cast<double>(train.size());
        CHECK(std::abs(sum / n) < 1e-12);
        CHECK(std::abs(sq / n - 1.0) < 1e-6);
    }
    CHECK(frobenius_norm(stats.invert(z) - raw) < 1e-10 * (1.0 + frobenius_norm(raw)));
    CHECK(stats.invert_value(z(150, 1), 1) == doctest::Approx(raw(150, 1)).epsilon(1e-12));
}

TEST_CASE("make_windows: examples") {
    const Matrix x = Matrix::from_rows({{1, 10}, {2, 20}, {3, 30}, {4, 40}, {5, 50}});
    const auto w = make_windows(x, 2, 1);
    REQUIRE(w.size() == 3);
    CHECK(w[0].x == Matrix::from_rows({{1, 10}, {2, 20}}));
    CHECK(w[0].target == 30);
    CHECK(w[2].x == Matrix::from_rows({{3, 30}, {4, 40}}));
    CHECK(w[2].target == 50);
    CHECK_THROWS_AS(make_windows(x, 5, 0), DataError);
    CHECK_THROWS_AS(make_windows(x, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_windows(x, 2, 2), std::invalid_argument);
}

TEST_CASE("chrono_split: examples") {
    const ChronoSplit a = chrono_split(100);
    CHECK(a.train == RowRange{0, 70});
    CHECK(a.validation == RowRange{70, 85});
    CHECK(a.test == RowRange{85, 100});
    const ChronoSplit b = chrono_split(101);
    CHECK(b.train.size() == 70);
    CHECK(b.validation.size() == 15);
    CHECK(b.test.size() == 16);
    CHECK_THROWS_AS(chrono_split(9), DataError);
    for (std::size_t T = 10; T < 500; ++T) {
        const ChronoSplit s = chrono_split(T);
        CHECK(s.train.size() + s.validation.size() + s.test.size() == T);
        CHECK(s.train.end == s.validation.begin);
        CHECK(s.validation.end == s.test.begin);
    }
}

TEST_CASE("build_dataset: window counts and split boundaries") {
    const Matrix raw = synth_series(SynthKind::Seasonal, 400, 2, 3);
    const SplitDataset ds = build_dataset(raw, DatasetOptions{12, 5, 1});
    CHECK(ds.train.size() == 280 - 12);
    CHECK(ds.validation.size() == 60 - 12);
    CHECK(ds.test.size() == 60 - 12);
    for (const Sample& s : ds.validation) {
        CHECK(s.first_row >= 280);
        CHECK(s.first_row + 12 < 340);
    }
    CHECK(ds.train.back().target == doctest::Approx(ds.stats.apply(raw)(279, 1)).epsilon(1e-15));
    CHECK_THROWS_AS(build_dataset(raw, DatasetOptions{60, 5, 0}), DataError);
}

TEST_CASE("build_dataset: no information flows backwards across splits") {
    const Matrix raw = synth_series(SynthKind::RandomWalk, 300, 2, 21);
    const DatasetOptions opts{10, 5, 0};
    const SplitDataset base = build_dataset(raw, opts);

    Matrix later = raw;
    for (std::size_t t = base.ranges.validation.begin; t < raw.rows(); ++t) {
        later(t, 0) += 1000.0;
        later(t, 1) *= -3.0;
    }
    const SplitDataset changed = build_dataset(later, opts);
    CHECK(changed.stats == base.stats);
    CHECK(fingerprint(changed.train) == fingerprint(base.train));
    CHECK(fingerprint(changed.validation) != fingerprint(base.validation));

    Matrix test_only = raw;
    for (std::size_t t = base.ranges.test.begin; t < raw.rows(); ++t) {
        test_only(t, 0) = 0.0;
    }
    const SplitDataset changed_test = build_dataset(test_only, opts);
    CHECK(fingerprint(changed_test.train) == fingerprint(base.train));
    CHECK(fingerprint(changed_test.validation) == fingerprint(base.validation));
}

TEST_CASE("synth_series: determinism and shape") {
    for (SynthKind k : {SynthKind::TrendDominant, SynthKind::SpikeDominant, SynthKind::Seasonal,
                        SynthKind::RandomWalk}) {
        const Matrix a = synth_series(k, 100, 3, 7);
        CHECK(a.rows() == 100);
        CHECK(a.cols() == 3);
        CHECK(all_finite(a));
        CHECK(synth_series(k, 100, 3, 7) == a);
        CHECK_FALSE(synth_series(k, 100, 3, 8) == a);
        CHECK(parse_synth_kind(to_string(k)) == k);
    }
    CHECK_FALSE(parse_synth_kind("bogus").has_value());
    CHECK_THROWS_AS(synth_series(SynthKind::Seasonal, 19, 1, 1), std::invalid_argument);
}

TEST_CASE("synth_series: noiseless trend is exactly linear") {
    const Matrix x = synth_series(SynthKind::TrendDominant, 200, 2, 4, SynthOptions{0.0});
    for (std::size_t j = 0; j < 2; ++j) {
        const double slope = x(1, j) - x(0, j);
        CHECK(slope > 0.0);
        for (std::size_t t = 2; t < 200; ++t) {
            CHECK(std::abs((x(t, j) - x(t - 1, j)) - slope) < 1e-12);
        }
    }
}

TEST_CASE("synth_series: random walk steps are standard normal on average") {
    constexpr std::size_t T = 20000;
    const Matrix x = synth_series(SynthKind::RandomWalk, T, 1, 5);
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t t = 1; t < T; ++t) {
        const double step = x(t, 0) - x(t - 1, 0);
        sum += step;
        sq += step * step;
    }
    const double n = static_cast<double>(T - 1);
    CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(sq / n - 1.0) < 0.05);
}
