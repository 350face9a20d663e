#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <doctest.h>

#include "chirality_lab/experiments.hpp"

using namespace chirality_lab;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig small(const std::string& experiment, int grid_n = 16) {
    ExperimentConfig c;
    c.experiment = experiment;
    c.grid_n = grid_n;
    return c;
}

class ScopedThreads {
public:
    explicit ScopedThreads(const char* value) {
        if (const char* old = std::getenv("CHIRALITY_LAB_THREADS")) saved_ = old;
        setenv("CHIRALITY_LAB_THREADS", value, 1);
    }
    ~ScopedThreads() {
        if (saved_.empty()) unsetenv("CHIRALITY_LAB_THREADS");
        else setenv("CHIRALITY_LAB_THREADS", saved_.c_str(), 1);
    }

private:
    std::string saved_;
};

RunReport sample_report() {
    RunReport r;
    r.experiment = "ops-verify";
    r.config = small("ops-verify");
    r.check("small", 1e-15, Relation::less, 1e-12, "hodge-decomposition");
    r.check("large", 3.0, Relation::greater_equal, 2.0, "wente-estimate");
    r.record("missing", std::numeric_limits<double>::quiet_NaN(), "morrey-decay");
    r.record("third", 1.0 / 3.0, "");
    r.anchors = {"hodge-decomposition", "morrey-decay", "wente-estimate"};
    Table t{"series", {"x", "y"}, {{1.0, 0.1}, {2.0, std::numeric_limits<double>::infinity()}}, std::nullopt};
    t.plot = PlotSpec{"y against x", 0, {1}, true, false};
    r.tables.push_back(t);
    r.wall_ms = 12.5;
    return r;
}

}  // namespace

TEST_SUITE("experiments") {
    TEST_CASE("config text: comments, whitespace and later keys winning") {
        ExperimentConfig c;
        apply_config_text(c, "# header\n experiment = jms  \n\ngrid_n=32 # inline\neps0 = 0.05\ngrid_n = 128\n"
                             "seed = 7\nlength = 3.5\ntol=1e-9\noutput_dir = results/a\n");
        CHECK(c.experiment == "jms");
        CHECK(c.grid_n == 128);
        CHECK(c.eps0 == 0.05);
        CHECK(c.seed == 7);
        CHECK(c.length == 3.5);
        CHECK(c.tol == 1e-9);
        CHECK(c.output_dir == "results/a");
        CHECK_NOTHROW(validate(c));
    }

    TEST_CASE("config text round trips through to_text") {
        ExperimentConfig c = small("wente-check", 96);
        c.eps0 = 0.1 + 1e-17;
        c.r0 = std::exp(4.0) * 3.0;
        c.seed = 123456789012345ULL;
        ExperimentConfig back;
        apply_config_text(back, c.to_text());
        CHECK(back == c);
    }

    TEST_CASE("malformed config is rejected") {
        ExperimentConfig c;
        CHECK_THROWS_AS(apply_config_text(c, "grid_n 64\n"), ConfigError);
        CHECK_THROWS_AS(apply_config_text(c, "= 3\n"), ConfigError);
        CHECK_THROWS_AS(apply_config_text(c, "colour = blue\n"), ConfigError);
        CHECK_THROWS_AS(apply_config_text(c, "grid_n = 6.5\n"), ConfigError);
        CHECK_THROWS_AS(apply_config_text(c, "grid_n = 64x\n"), ConfigError);
        CHECK_THROWS_AS(apply_config_text(c, "eps0 =\n"), ConfigError);
        CHECK_THROWS_AS(apply_config_text(c, "seed = -4\n"), ConfigError);
        try {
            apply_config_text(c, "grid_n = 64\n\neps0 = abc\n");
            FAIL("expected a ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
        CHECK_THROWS_AS(load_config("/nonexistent/config.txt"), ConfigError);
    }

    TEST_CASE("validation") {
        CHECK_NOTHROW(validate(ExperimentConfig{}));
        for (const auto& name : experiment_names()) CHECK_NOTHROW(validate(small(name)));
        CHECK_THROWS_AS(validate(small("no-such-experiment")), ConfigError);
        CHECK_THROWS_AS(validate(small("jms", 0)), ConfigError);
        CHECK_THROWS_AS(validate(small("jms", 6)), ConfigError);
        CHECK_THROWS_AS(validate(small("jms", 33)), ConfigError);
        ExperimentConfig c;
        c.eps0 = -0.1;
        CHECK_THROWS_AS(validate(c), ConfigError);
        c = ExperimentConfig{};
        c.tol = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(validate(c), ConfigError);
        c = ExperimentConfig{};
        c.seed = 0;
        CHECK_THROWS_AS(validate(c), ConfigError);
        c = ExperimentConfig{};
        c.output_dir.clear();
        CHECK_THROWS_AS(validate(c), ConfigError);
        CHECK_THROWS_AS(run_experiment(small("jms", 6)), ConfigError);
    }

    TEST_CASE("metrics: thresholds, records and NaN") {
        RunReport r;
        r.check("a", 0.5, Relation::less, 1.0, "");
        r.check("b", 1.0, Relation::less, 1.0, "");
        r.check("c", 1.0, Relation::less_equal, 1.0, "");
        r.check("d", 1.0, Relation::greater, 1.0, "");
        r.check("e", std::numeric_limits<double>::quiet_NaN(), Relation::less, 1.0, "");
        r.record("f", std::numeric_limits<double>::quiet_NaN(), "");
        CHECK(r.find("a")->pass);
        CHECK_FALSE(r.find("b")->pass);
        CHECK(r.find("c")->pass);
        CHECK_FALSE(r.find("d")->pass);
        CHECK_FALSE(r.find("e")->pass);
        CHECK(r.find("f")->pass);
        CHECK(r.find("g") == nullptr);
        CHECK_FALSE(r.passed());
        RunReport empty;
        CHECK(empty.passed());
    }

    TEST_CASE("CSV uses full precision and the header order") {
        const Table t{"t", {"a", "b"}, {{0.1, -2.0}, {1e-300, std::numeric_limits<double>::quiet_NaN()}}, std::nullopt};
        CHECK(t.to_csv() == "a,b\n0.10000000000000001,-2\n1e-300,nan\n");
    }

    TEST_CASE("JSON: schema keys, non-finite values and round trip") {
        const RunReport r = sample_report();
        const std::string text = to_json(r);
        for (const char* key : {"\"experiment\"", "\"config\"", "\"anchors\"", "\"metrics\"", "\"wall_ms\"",
                                "\"threshold\"", "\"pass\""})
            CHECK(text.find(key) != std::string::npos);
        CHECK(text.find("NaN") == std::string::npos);
        CHECK(text.find("null") != std::string::npos);

        const RunReport back = report_from_json(text);
        CHECK(equivalent(r, back));
        CHECK(back.config == r.config);
        CHECK(std::isnan(back.find("missing")->value));
        CHECK(std::isnan(back.tables[0].rows[1][1]));
        REQUIRE(back.tables[0].plot.has_value());
        CHECK(back.tables[0].plot->log_x);
        CHECK(back.wall_ms == 12.5);

        RunReport other = r;
        other.metrics[3].value = 1.0 / 3.0 + 1e-16;
        CHECK_FALSE(equivalent(r, other));
        other = r;
        other.wall_ms = 99.0;
        CHECK_FALSE(equivalent(r, other));
        CHECK(to_json(r, false) == to_json(other, false));
        CHECK(std::isnan(report_from_json(to_json(r, false)).wall_ms));
    }

    TEST_CASE("anchor catalog is unique kebab-case") {
        const auto& cat = anchor_catalog();
        CHECK(std::set<std::string>(cat.begin(), cat.end()).size() == cat.size());
        for (const auto& a : cat) {
            CHECK_FALSE(a.empty());
            for (char ch : a) CHECK(((ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '-'));
        }
    }

    TEST_CASE("worker pool: every index once, lowest failing index rethrown") {
        const ScopedThreads threads("3");
        CHECK(worker_count() == 3);
        std::vector<std::atomic<int>> hits(257);
        parallel_for(257, [&](int k) { hits[k].fetch_add(1); });
        for (const auto& h : hits) CHECK(h.load() == 1);
        parallel_for(0, [](int) { throw std::logic_error("never called"); });
        try {
            parallel_for(40, [](int k) {
                if (k % 7 == 5) throw std::runtime_error("index " + std::to_string(k));
            });
            FAIL("expected a rethrow");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()) == "index 5");
        }
    }

    TEST_CASE("worker count falls back on invalid settings") {
        const ScopedThreads threads("zero");
        CHECK(worker_count() >= 1);
        const ScopedThreads negative("-2");
        CHECK(worker_count() >= 1);
    }

    TEST_CASE("results do not depend on the pool size") {
        RunReport serial, pooled;
        {
            const ScopedThreads threads("1");
            serial = run_experiment(small("hodge-check"));
        }
        {
            const ScopedThreads threads("4");
            pooled = run_experiment(small("hodge-check"));
        }
        CHECK(serial.passed());
        CHECK(to_json(serial, false) == to_json(pooled, false));
    }

    TEST_CASE("repeat runs are byte-identical apart from the wall clock") {
        for (const char* name : {"ops-verify", "bootstrap-demo"}) {
            CAPTURE(name);
            const RunReport a = run_experiment(small(name)), b = run_experiment(small(name));
            CHECK(a.passed());
            CHECK(to_json(a, false) == to_json(b, false));
        }
        ExperimentConfig other = small("ops-verify");
        other.seed = 2;
        CHECK(run_experiment(other).config.seed == 2);
    }

    TEST_CASE("outputs: JSON, CSV and SVG files") {
        const auto dir = std::filesystem::temp_directory_path() / "chirality_lab_outputs_test";
        std::filesystem::remove_all(dir);
        const RunReport r = sample_report();
        const auto paths = write_outputs(r, (dir / "nested").string(), {});
        CHECK(paths.size() == 3);
        const auto json = dir / "nested" / "ops-verify.json";
        REQUIRE(std::filesystem::exists(json));
        CHECK(equivalent(report_from_json(slurp(json)), r));
        CHECK(slurp(dir / "nested" / "ops-verify_series.csv") == r.tables[0].to_csv());
        const std::string svg = slurp(dir / "nested" / "ops-verify_series.svg");
        CHECK(svg.rfind("<svg", 0) == 0);
        CHECK(svg.find("</svg>") != std::string::npos);
        for (const auto& entry : std::filesystem::directory_iterator(dir / "nested"))
            CHECK(entry.path().extension() != ".tmp");

        std::filesystem::remove_all(dir);
        CHECK(write_outputs(r, dir.string(), {true, false}).size() == 1);
        CHECK_FALSE(std::filesystem::exists(dir / "ops-verify_series.csv"));
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("line chart handles log axes and empty input") {
        const std::string chart =
            svg_line_chart("t", "x", "y", {{"a", {1, 10, 100}, {1e-3, 1e-2, 1e-1}}, {"b", {1, 10}, {0.0, 1.0}}}, true, true);
        CHECK(chart.find("<polyline") != std::string::npos);
        CHECK(chart.find("nan") == std::string::npos);
        CHECK(svg_line_chart("empty", "x", "y", {}, false, false).find("</svg>") != std::string::npos);
    }
}
