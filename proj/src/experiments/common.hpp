#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "chirality_lab/experiments.hpp"
#include "chirality_lab/field.hpp"

namespace chirality_lab::detail {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline RunReport begin_report(const ExperimentConfig& config) {
    RunReport r;
    r.experiment = config.experiment;
    r.config = config;
    return r;
}

// Collects anchors from the metrics and stamps the wall clock.
inline RunReport finish_report(RunReport r, const Stopwatch& clock) {
    r.anchors.clear();
    for (const auto& m : r.metrics)
        if (!m.anchor.empty()) r.anchors.push_back(m.anchor);
    std::sort(r.anchors.begin(), r.anchors.end());
    r.anchors.erase(std::unique(r.anchors.begin(), r.anchors.end()), r.anchors.end());
    r.wall_ms = clock.elapsed_ms();
    return r;
}

inline double max_of(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::isnan(x) ? x : std::max(m, x);
    return m;
}

inline double min_of(const std::vector<double>& v) {
    double m = std::numeric_limits<double>::infinity();
    for (double x : v) m = std::isnan(x) ? x : std::min(m, x);
    return m;
}

// (max - min) / max over positive samples.
inline double spread(const std::vector<double>& v) {
    const double hi = max_of(v), lo = min_of(v);
    return (hi - lo) / hi;
}

inline double rel_l2(const RealField& a, const RealField& b) { return l2(a - b) / std::max(l2(b), 1e-300); }

}  // namespace chirality_lab::detail
