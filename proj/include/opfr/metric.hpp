#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "opfr/common.hpp"
#include "opfr/dataset.hpp"

namespace opfr {

using DistanceFn = double (*)(std::span<const double>, std::span<const double>);

namespace metrics {

inline double euclidean(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

inline double squared_euclidean(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

inline double manhattan(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
}

}  // namespace metrics

/// Named distance function. Registered functions must be nonnegative,
/// symmetric, and zero on identical vectors; the triangle inequality is not
/// required by the path-cost machinery.
struct MetricId {
    std::string name;
    DistanceFn fn = nullptr;
};

inline std::map<std::string, DistanceFn>& metric_registry() {
    static std::map<std::string, DistanceFn> registry = {
        {"euclidean", &metrics::euclidean},
        {"manhattan", &metrics::manhattan},
        {"sqeuclidean", &metrics::squared_euclidean},
    };
    return registry;
}

inline void register_metric(const std::string& name, DistanceFn fn) {
    metric_registry()[name] = fn;
}

inline MetricId metric_by_name(const std::string& name) {
    auto& reg = metric_registry();
    auto it = reg.find(name);
    if (it == reg.end()) throw ParseError("unknown metric '" + name + "'");
    return MetricId{it->first, it->second};
}

inline double distance(std::span<const double> a, std::span<const double> b,
                       const MetricId& metric) {
    if (a.size() != b.size())
        throw DimensionMismatch("distance: dimensions " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
    return metric.fn(a, b);
}

/// Symmetric pairwise distances with exact zero diagonal.
struct DistanceMatrix {
    std::size_t n = 0;
    std::vector<double> values;  // row-major n*n

    double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

inline DistanceMatrix pairwise_matrix(const std::vector<LabeledSample>& samples,
                                      const MetricId& metric) {
    DistanceMatrix m;
    m.n = samples.size();
    m.values.assign(m.n * m.n, 0.0);
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = i + 1; j < m.n; ++j) {
            double d = distance(samples[i].features, samples[j].features, metric);
            m.values[i * m.n + j] = d;
            m.values[j * m.n + i] = d;
        }
    }
    return m;
}

}  // namespace opfr
