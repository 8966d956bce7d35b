#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

#include "opfr/common.hpp"
#include "opfr/dataset.hpp"
#include "opfr/forest.hpp"
#include "opfr/metric.hpp"

namespace opfr {

struct MstEdge {
    int u = -1;
    int v = -1;
    double weight = 0.0;
};

// Precompute the full matrix only while it fits the budget; otherwise
// evaluate distances on demand. Results are identical either way.
inline constexpr std::size_t kDefaultMatrixBudgetBytes = std::size_t(1) << 30;

namespace detail {

class DistanceSource {
public:
    DistanceSource(const Dataset& ds, const MetricId& metric, std::size_t budget_bytes)
        : ds_(ds), metric_(metric) {
        std::size_t n = ds.samples.size();
        if (n * n * sizeof(double) <= budget_bytes) matrix_ = pairwise_matrix(ds.samples, metric);
    }

    double operator()(std::size_t i, std::size_t j) const {
        if (matrix_.n > 0) return matrix_.at(i, j);
        return metric_.fn(ds_.samples[i].features, ds_.samples[j].features);
    }

private:
    const Dataset& ds_;
    MetricId metric_;
    DistanceMatrix matrix_;
};

}  // namespace detail

/// Prim's algorithm over the complete graph. Ties broken by smallest
/// candidate position, then smallest partner position.
inline std::vector<MstEdge> build_mst(const Dataset& train, const MetricId& metric,
                                      std::size_t budget_bytes = kDefaultMatrixBudgetBytes) {
    const std::size_t n = train.samples.size();
    if (n < 2) throw InfeasibleSplit("minimum spanning tree needs at least 2 samples");
    detail::DistanceSource dist(train, metric, budget_bytes);

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> key(n, kInf);
    std::vector<int> parent(n, -1);
    std::vector<char> in_tree(n, 0);
    key[0] = 0.0;

    std::vector<MstEdge> edges;
    edges.reserve(n - 1);
    for (std::size_t step = 0; step < n; ++step) {
        int u = -1;
        for (std::size_t i = 0; i < n; ++i)
            if (!in_tree[i] && (u < 0 || key[i] < key[static_cast<std::size_t>(u)])) u = static_cast<int>(i);
        in_tree[static_cast<std::size_t>(u)] = 1;
        if (parent[static_cast<std::size_t>(u)] >= 0)
            edges.push_back({parent[static_cast<std::size_t>(u)], u, key[static_cast<std::size_t>(u)]});
        for (std::size_t v = 0; v < n; ++v) {
            if (in_tree[v]) continue;
            double d = dist(static_cast<std::size_t>(u), v);
            if (d < key[v] || (d == key[v] && u < parent[v])) {
                key[v] = d;
                parent[v] = u;
            }
        }
    }
    return edges;
}

/// Both endpoints of every inter-class MST edge become prototypes.
inline std::vector<int> elect_prototypes(const std::vector<MstEdge>& mst,
                                         const std::vector<int>& labels) {
    bool multi_class = false;
    for (std::size_t i = 1; i < labels.size(); ++i)
        if (labels[i] != labels[0]) {
            multi_class = true;
            break;
        }
    if (!multi_class) throw SingleClassTraining("training set contains a single class");

    std::vector<int> protos;
    for (const auto& e : mst) {
        if (labels[static_cast<std::size_t>(e.u)] != labels[static_cast<std::size_t>(e.v)]) {
            protos.push_back(e.u);
            protos.push_back(e.v);
        }
    }
    std::sort(protos.begin(), protos.end());
    protos.erase(std::unique(protos.begin(), protos.end()), protos.end());
    return protos;
}

/// f_max competition: cost(v) = min over paths from any prototype of the
/// maximum edge weight along the path. Best-first over the complete graph;
/// ties on the next settled node go to the smallest position.
inline TrainedForest train_cg(const Dataset& train, const MetricId& metric,
                              std::size_t budget_bytes = kDefaultMatrixBudgetBytes) {
    const std::size_t n = train.samples.size();
    if (n < 2) throw InfeasibleSplit("CG-OPF training needs at least 2 samples");

    TrainedForest forest;
    forest.variant = Variant::CG;
    forest.metric = metric;
    forest.samples = train;
    forest.samples.validate();

    detail::DistanceSource dist(forest.samples, metric, budget_bytes);
    auto mst = build_mst(forest.samples, metric, budget_bytes);
    auto labels = forest.samples.labels();
    forest.prototypes = elect_prototypes(mst, labels);

    constexpr double kInf = std::numeric_limits<double>::infinity();
    forest.cost.assign(n, kInf);
    forest.pred.assign(n, -1);
    forest.root.assign(n, -1);
    forest.label.assign(n, -1);
    for (int p : forest.prototypes) {
        auto i = static_cast<std::size_t>(p);
        forest.cost[i] = 0.0;
        forest.root[i] = p;
        forest.label[i] = labels[i];
    }

    std::vector<char> settled(n, 0);
    forest.order.reserve(n);
    for (std::size_t step = 0; step < n; ++step) {
        int u = -1;
        for (std::size_t i = 0; i < n; ++i)
            if (!settled[i] && (u < 0 || forest.cost[i] < forest.cost[static_cast<std::size_t>(u)]))
                u = static_cast<int>(i);
        auto ui = static_cast<std::size_t>(u);
        settled[ui] = 1;
        forest.order.push_back(u);
        for (std::size_t v = 0; v < n; ++v) {
            if (settled[v]) continue;
            double offer = std::max(forest.cost[ui], dist(ui, v));
            if (offer < forest.cost[v]) {
                forest.cost[v] = offer;
                forest.pred[v] = u;
                forest.root[v] = forest.root[ui];
                forest.label[v] = forest.label[ui];
            }
        }
    }
    forest.order_index.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        forest.order_index[static_cast<std::size_t>(forest.order[i])] = static_cast<int>(i);
    return forest;
}

/// One entry per training node: max(C(v), d(v, q)). Unsorted.
inline std::vector<OfferedCost> offered_costs_cg(const TrainedForest& forest,
                                                 std::span<const double> features) {
    if (static_cast<int>(features.size()) != forest.samples.dim)
        throw DimensionMismatch("query dimension " + std::to_string(features.size()) +
                                " != model dimension " + std::to_string(forest.samples.dim));
    std::vector<OfferedCost> offers;
    offers.reserve(forest.size());
    for (std::size_t v = 0; v < forest.size(); ++v) {
        double d = forest.metric.fn(forest.samples.samples[v].features, features);
        offers.push_back({static_cast<int>(v), std::max(forest.cost[v], d)});
    }
    return offers;
}

/// Argmin over training nodes of max(C(v), d(v, t)); ties go to the node
/// settled earliest during training.
inline ClassifyResult classify_cg(const TrainedForest& forest, std::span<const double> features) {
    auto offers = offered_costs_cg(forest, features);
    int best = -1;
    for (const auto& o : offers) {
        if (best < 0 || o.value < offers[static_cast<std::size_t>(best)].value ||
            (o.value == offers[static_cast<std::size_t>(best)].value &&
             forest.order_index[static_cast<std::size_t>(o.node)] <
                 forest.order_index[static_cast<std::size_t>(offers[static_cast<std::size_t>(best)].node)]))
            best = o.node;
    }
    auto bi = static_cast<std::size_t>(best);
    return {forest.label[bi], offers[bi].value, best};
}

}  // namespace opfr
