#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "chirality_lab/experiments.hpp"
#include "chirality_lab/io.hpp"

namespace chirality_lab {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) throw ConfigError("invalid value for " + key + ": '" + value + "'");
    return out;
}

const char* relation_name(Relation r) {
    switch (r) {
        case Relation::less: return "<";
        case Relation::less_equal: return "<=";
        case Relation::greater: return ">";
        case Relation::greater_equal: return ">=";
        case Relation::record: return "record";
    }
    return "record";
}

Relation relation_from(const std::string& s) {
    if (s == "<") return Relation::less;
    if (s == "<=") return Relation::less_equal;
    if (s == ">") return Relation::greater;
    if (s == ">=") return Relation::greater_equal;
    if (s == "record") return Relation::record;
    throw std::invalid_argument("unknown relation '" + s + "'");
}

ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

double number_from(const ordered_json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

ordered_json config_json(const ExperimentConfig& c) {
    ordered_json j;
    j["experiment"] = c.experiment;
    j["grid_n"] = c.grid_n;
    j["length"] = c.length;
    j["eps0"] = c.eps0;
    j["beta"] = c.beta;
    j["r0"] = c.r0;
    j["tol"] = c.tol;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    return j;
}

ExperimentConfig config_from(const ordered_json& j) {
    ExperimentConfig c;
    c.experiment = j.at("experiment").get<std::string>();
    c.grid_n = j.at("grid_n").get<int>();
    c.length = j.at("length").get<double>();
    c.eps0 = j.at("eps0").get<double>();
    c.beta = j.at("beta").get<double>();
    c.r0 = j.at("r0").get<double>();
    c.tol = j.at("tol").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.output_dir = j.at("output_dir").get<std::string>();
    return c;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"ops-verify", "hodge-check",  "bb-check",       "wente-check",
                                                "gauge-solve", "reformulate", "contraction",    "morrey-decay",
                                                "bootstrap-demo", "jms",      "full-chain"};
    return names;
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream out;
    out << "experiment = " << experiment << "\n"
        << "grid_n = " << grid_n << "\n"
        << "length = " << fmt17(length) << "\n"
        << "eps0 = " << fmt17(eps0) << "\n"
        << "beta = " << fmt17(beta) << "\n"
        << "r0 = " << fmt17(r0) << "\n"
        << "tol = " << fmt17(tol) << "\n"
        << "seed = " << seed << "\n"
        << "output_dir = " << output_dir << "\n";
    return out.str();
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    if (value.empty()) throw ConfigError("empty value for " + key);
    if (key == "experiment") c.experiment = value;
    else if (key == "grid_n") c.grid_n = parse_number<int>(key, value);
    else if (key == "length") c.length = parse_number<double>(key, value);
    else if (key == "eps0") c.eps0 = parse_number<double>(key, value);
    else if (key == "beta") c.beta = parse_number<double>(key, value);
    else if (key == "r0") c.r0 = parse_number<double>(key, value);
    else if (key == "tol") c.tol = parse_number<double>(key, value);
    else if (key == "seed") {
        if (value.front() == '-') throw ConfigError("seed must be positive");
        c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "output_dir") c.output_dir = value;
    else throw ConfigError("unknown key '" + key + "'");
}

void apply_config_text(ExperimentConfig& c, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": missing key");
        try {
            apply_setting(c, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    ExperimentConfig c;
    apply_config_text(c, text);
    return c;
}

void validate(const ExperimentConfig& c) {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end())
        throw ConfigError("unknown experiment '" + c.experiment + "'");
    auto positive = [](const char* name, double v) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
    };
    positive("grid_n", c.grid_n);
    positive("length", c.length);
    positive("eps0", c.eps0);
    positive("beta", c.beta);
    positive("r0", c.r0);
    positive("tol", static_cast<double>(c.tol));
    positive("seed", static_cast<double>(c.seed));
    if (c.grid_n < 8 || c.grid_n % 2 != 0) throw ConfigError("grid_n must be even and at least 8");
    if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

std::string Table::to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + fmt17(row[i]);
        out += "\n";
    }
    return out;
}

bool RunReport::passed() const {
    return std::all_of(metrics.begin(), metrics.end(), [](const Metric& m) { return m.pass; });
}

const Metric* RunReport::find(const std::string& name) const {
    for (const auto& m : metrics)
        if (m.name == name) return &m;
    return nullptr;
}

void RunReport::check(const std::string& name, double value, Relation relation, double threshold,
                      const std::string& anchor) {
    bool ok = false;
    switch (relation) {
        case Relation::less: ok = value < threshold; break;
        case Relation::less_equal: ok = value <= threshold; break;
        case Relation::greater: ok = value > threshold; break;
        case Relation::greater_equal: ok = value >= threshold; break;
        case Relation::record: ok = true; break;
    }
    metrics.push_back({name, value, threshold, relation, ok, anchor});
}

void RunReport::record(const std::string& name, double value, const std::string& anchor) {
    metrics.push_back({name, value, std::nullopt, Relation::record, true, anchor});
}

std::string to_json(const RunReport& r, bool include_wall_clock) {
    ordered_json j;
    j["experiment"] = r.experiment;
    j["config"] = config_json(r.config);
    j["anchors"] = r.anchors;
    j["passed"] = r.passed();
    ordered_json metrics = ordered_json::array();
    for (const auto& m : r.metrics) {
        ordered_json e;
        e["name"] = m.name;
        e["value"] = number(m.value);
        e["threshold"] = m.threshold ? number(*m.threshold) : ordered_json(nullptr);
        e["relation"] = relation_name(m.relation);
        e["pass"] = m.pass;
        e["anchor"] = m.anchor;
        metrics.push_back(e);
    }
    j["metrics"] = metrics;
    ordered_json tables = ordered_json::array();
    for (const auto& t : r.tables) {
        ordered_json e;
        e["name"] = t.name;
        e["header"] = t.header;
        ordered_json rows = ordered_json::array();
        for (const auto& row : t.rows) {
            ordered_json jr = ordered_json::array();
            for (double v : row) jr.push_back(number(v));
            rows.push_back(jr);
        }
        e["rows"] = rows;
        if (t.plot) {
            e["plot"] = {{"title", t.plot->title},
                         {"x_column", t.plot->x_column},
                         {"y_columns", t.plot->y_columns},
                         {"log_x", t.plot->log_x},
                         {"log_y", t.plot->log_y}};
        }
        tables.push_back(e);
    }
    j["tables"] = tables;
    j["wall_ms"] = include_wall_clock ? number(r.wall_ms) : ordered_json(nullptr);
    return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
    const ordered_json j = ordered_json::parse(text);
    RunReport r;
    r.experiment = j.at("experiment").get<std::string>();
    r.config = config_from(j.at("config"));
    r.anchors = j.at("anchors").get<std::vector<std::string>>();
    for (const auto& e : j.at("metrics")) {
        Metric m;
        m.name = e.at("name").get<std::string>();
        m.value = number_from(e.at("value"));
        m.relation = relation_from(e.at("relation").get<std::string>());
        if (m.relation != Relation::record) m.threshold = number_from(e.at("threshold"));
        m.pass = e.at("pass").get<bool>();
        m.anchor = e.at("anchor").get<std::string>();
        r.metrics.push_back(m);
    }
    for (const auto& e : j.at("tables")) {
        Table t;
        t.name = e.at("name").get<std::string>();
        t.header = e.at("header").get<std::vector<std::string>>();
        for (const auto& row : e.at("rows")) {
            std::vector<double> v;
            for (const auto& x : row) v.push_back(number_from(x));
            t.rows.push_back(v);
        }
        if (e.contains("plot")) {
            const auto& p = e.at("plot");
            t.plot = PlotSpec{p.at("title").get<std::string>(), p.at("x_column").get<int>(),
                              p.at("y_columns").get<std::vector<int>>(), p.at("log_x").get<bool>(),
                              p.at("log_y").get<bool>()};
        }
        r.tables.push_back(t);
    }
    r.wall_ms = number_from(j.at("wall_ms"));
    return r;
}

bool equivalent(const RunReport& a, const RunReport& b) { return to_json(a) == to_json(b); }

const std::vector<std::string>& anchor_catalog() {
    static const std::vector<std::string> anchors{
        "chirality-regularity",     "holomorphic-splitting",     "planar-complex-equation",
        "dirac-form",               "bootstrap-obstruction",     "pseudo-riemannian-energy",
        "lp-reconstruction",        "real-from-imaginary-identity", "inverse-dzbar-squared-kernel",
        "l2-reconstruction",        "hodge-decomposition",       "cauchy-kernel-solve",
        "frame-conjugation",        "irregular-counterexample",  "conjugate-potential",
        "adapted-frame-system",     "quaternion-reformulation",  "contraction-chain-planar",
        "gauge-operator",           "gauge-linearization",       "gauge-potential",
        "wente-estimate",           "morrey-decay",              "frame-potentials",
        "plus-minus-potentials",    "block-sign-rule",           "doubled-system",
        "doubled-coefficients",     "anti-self-duality",         "hyper-unitary-structure",
        "matrix-gauge-potential",   "contraction-chain-matrix"};
    return anchors;
}

int worker_count() {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap <= 0) cap = 1;
    if (const char* env = std::getenv("CHIRALITY_LAB_THREADS")) {
        int v = 0;
        const std::string s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) cap = v;
    }
    return cap;
}

void parallel_for(int count, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    const int workers = std::min(worker_count(), count);
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex mu;
    int failed_index = count;
    std::exception_ptr failure;
    auto work = [&]() {
        for (int i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<SvgSeries>& series, bool log_x, bool log_y) {
    const double width = 640, height = 420, left = 80, right = 160, top = 40, bottom = 60;
    auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!log_x || x > 0) && (!log_y || y > 0);
    };
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            xmin = std::min(xmin, tx(s.x[i]));
            xmax = std::max(xmax, tx(s.x[i]));
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    if (xmin > xmax) xmin = 0, xmax = 1;
    if (ymin > ymax) ymin = 0, ymax = 1;
    if (xmax - xmin < 1e-12) xmin -= 0.5, xmax += 0.5;
    if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double v) { return top + ph - (v - ymin) / (ymax - ymin) * ph; };
    auto num = [](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.3g", v);
        return std::string(b);
    };
    auto escape = [](const std::string& s) {
        std::string o;
        for (char c : s) {
            if (c == '<') o += "&lt;";
            else if (c == '>') o += "&gt;";
            else if (c == '&') o += "&amp;";
            else o += c;
        }
        return o;
    };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 4.0, yv = ymin + (ymax - ymin) * k / 4.0;
        o << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
          << (log_x ? "1e" + num(xv) : num(xv)) << "</text>\n";
        o << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
          << (log_y ? "1e" + num(yv) : num(yv)) << "</text>\n";
    }
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">" << escape(x_label)
      << "</text>\n";
    o << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + ph / 2 << ")\">" << escape(y_label) << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % 6];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i)
            if (usable(series[s].x[i], series[s].y[i]))
                o << num(px(tx(series[s].x[i]))) << "," << num(py(ty(series[s].y[i]))) << " ";
        o << "\"/>\n";
        o << "<text x=\"" << left + pw + 10 << "\" y=\"" << top + 16 + 18 * s << "\" fill=\"" << color << "\">"
          << escape(series[s].label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::vector<std::string> write_outputs(const RunReport& report, const std::string& dir, const OutputSelection& sel) {
    namespace fs = std::filesystem;
    std::vector<std::string> written;
    const fs::path base(dir);
    if (sel.csv) {
        for (const auto& t : report.tables) {
            const fs::path csv = base / (report.experiment + "_" + t.name + ".csv");
            atomic_write(csv.string(), t.to_csv());
            written.push_back(csv.string());
            if (!t.plot) continue;
            std::vector<SvgSeries> series;
            for (int c : t.plot->y_columns) {
                SvgSeries s{t.header[c], {}, {}};
                for (const auto& row : t.rows) {
                    s.x.push_back(row[t.plot->x_column]);
                    s.y.push_back(row[c]);
                }
                series.push_back(s);
            }
            const fs::path svg = base / (report.experiment + "_" + t.name + ".svg");
            atomic_write(svg.string(), svg_line_chart(t.plot->title, t.header[t.plot->x_column], "value", series,
                                                      t.plot->log_x, t.plot->log_y));
            written.push_back(svg.string());
        }
    }
    if (sel.json) {
        const fs::path json = base / (report.experiment + ".json");
        atomic_write(json.string(), to_json(report));
        written.push_back(json.string());
    }
    return written;
}

}  // namespace chirality_lab
