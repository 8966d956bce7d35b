#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <vector>

#include "opfr/common.hpp"
#include "opfr/dataset.hpp"
#include "opfr/forest.hpp"
#include "opfr/metric.hpp"

namespace opfr {

/// k-nearest-neighbor arcs. neighbors[u] holds exactly min(k, n-1) entries
/// sorted by distance, then by position.
struct KnnAdjacency {
    int k = 0;
    std::vector<std::vector<std::pair<int, double>>> neighbors;
    double d_max = 0.0;
};

inline KnnAdjacency knn_adjacency(const Dataset& train, int k, const MetricId& metric) {
    const std::size_t n = train.samples.size();
    if (n < 2) throw InfeasibleSplit("k-NN adjacency needs at least 2 samples");
    if (k < 1) throw InfeasibleSplit("k must be positive");
    if (k > static_cast<int>(n) - 1) {
        std::cerr << "opfr: warning: k=" << k << " clamped to " << n - 1 << " (n=" << n << ")\n";
        k = static_cast<int>(n) - 1;
    }

    KnnAdjacency adj;
    adj.k = k;
    adj.neighbors.resize(n);
    adj.d_max = 0.0;
    std::vector<std::pair<double, int>> cand;
    for (std::size_t u = 0; u < n; ++u) {
        cand.clear();
        for (std::size_t v = 0; v < n; ++v) {
            if (v == u) continue;
            cand.emplace_back(metric.fn(train.samples[u].features, train.samples[v].features),
                              static_cast<int>(v));
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        adj.neighbors[u].reserve(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) {
            adj.neighbors[u].emplace_back(cand[static_cast<std::size_t>(j)].second,
                                          cand[static_cast<std::size_t>(j)].first);
            adj.d_max = std::max(adj.d_max, cand[static_cast<std::size_t>(j)].first);
        }
    }
    return adj;
}

namespace detail {

inline double gaussian_density(std::span<const double> arc_distances, double sigma, int k) {
    double sum = 0.0;
    for (double d : arc_distances) sum += std::exp(-d / (2.0 * sigma * sigma));
    return sum / std::sqrt(2.0 * std::numbers::pi * sigma * sigma * static_cast<double>(k));
}

}  // namespace detail

/// rho(u) = (1/sqrt(2*pi*sigma^2*k)) * sum over neighbors of
/// exp(-d(u,v) / (2*sigma^2)), with sigma = d_max / 3. The exponent uses the
/// raw distance, not its square.
inline DensityField compute_density(const KnnAdjacency& adj) {
    if (adj.d_max <= 0.0)
        throw DegenerateDensity("all adjacency arcs have zero distance (sigma = 0)");
    DensityField field;
    field.k = adj.k;
    field.d_max = adj.d_max;
    field.sigma = adj.d_max / 3.0;
    field.rho.reserve(adj.neighbors.size());
    std::vector<double> dists;
    for (const auto& nbrs : adj.neighbors) {
        dists.clear();
        for (const auto& [v, d] : nbrs) dists.push_back(d);
        field.rho.push_back(detail::gaussian_density(dists, field.sigma, adj.k));
    }
    return field;
}

namespace detail {

using KnnQueueEntry = std::pair<double, int>;  // (cost, position)

struct KnnQueueOrder {
    // Highest cost pops first; smaller position on ties.
    bool operator()(const KnnQueueEntry& a, const KnnQueueEntry& b) const {
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second;
    }
};

/// Root election. Nodes start at rho - 1 and compete; a node popped while
/// still unconquered is a local density maximum and becomes a root. The
/// first-popped node of each density plateau/maximum seeds a tree.
inline std::vector<int> elect_knn_roots(const KnnAdjacency& adj, const std::vector<double>& rho) {
    const std::size_t n = rho.size();
    std::vector<double> cost(n);
    std::vector<int> pred(n, -1);
    std::vector<int> roots;
    for (std::size_t v = 0; v < n; ++v) cost[v] = rho[v] - 1.0;

    std::priority_queue<KnnQueueEntry, std::vector<KnnQueueEntry>, KnnQueueOrder> queue;
    for (std::size_t v = 0; v < n; ++v) queue.emplace(cost[v], static_cast<int>(v));
    std::vector<char> settled(n, 0);
    while (!queue.empty()) {
        auto [c, u] = queue.top();
        queue.pop();
        auto ui = static_cast<std::size_t>(u);
        if (settled[ui] || c != cost[ui]) continue;
        settled[ui] = 1;
        if (pred[ui] < 0) {  // never conquered when popped
            cost[ui] = rho[ui];
            roots.push_back(u);
        }
        for (const auto& [v, d] : adj.neighbors[ui]) {
            auto vi = static_cast<std::size_t>(v);
            if (settled[vi]) continue;
            double offer = std::min(cost[ui], rho[vi]);
            if (offer > cost[vi]) {
                cost[vi] = offer;
                pred[vi] = u;
                queue.emplace(offer, v);
            }
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace detail

/// f_min (max-min) competition over the k-NN arcs. Roots are elected first
/// (see elect_knn_roots), then final costs are propagated from all roots at
/// once so every node holds its true optimum: starting costs are rho on
/// roots and -inf elsewhere, and the election pass alone could leave a node
/// below its optimum when a root emerges after that node has settled.
inline TrainedForest train_knn(const Dataset& train, int k, const MetricId& metric) {
    TrainedForest forest;
    forest.variant = Variant::Knn;
    forest.metric = metric;
    forest.samples = train;
    forest.samples.validate();

    KnnAdjacency adj = knn_adjacency(forest.samples, k, metric);
    forest.k = adj.k;
    forest.density = compute_density(adj);
    const std::size_t n = forest.size();
    const auto& rho = forest.density.rho;
    auto labels = forest.samples.labels();

    forest.prototypes = detail::elect_knn_roots(adj, rho);

    forest.cost.assign(n, -std::numeric_limits<double>::infinity());
    forest.pred.assign(n, -1);
    forest.root.assign(n, -1);
    forest.label.assign(n, -1);
    std::priority_queue<detail::KnnQueueEntry, std::vector<detail::KnnQueueEntry>,
                        detail::KnnQueueOrder>
        queue;
    for (int r : forest.prototypes) {
        auto ri = static_cast<std::size_t>(r);
        forest.cost[ri] = rho[ri];
        forest.root[ri] = r;
        forest.label[ri] = labels[ri];
        queue.emplace(forest.cost[ri], r);
    }

    std::vector<char> settled(n, 0);
    forest.order.reserve(n);
    while (!queue.empty()) {
        auto [c, u] = queue.top();
        queue.pop();
        auto ui = static_cast<std::size_t>(u);
        if (settled[ui] || c != forest.cost[ui]) continue;
        settled[ui] = 1;
        forest.order.push_back(u);
        for (const auto& [v, d] : adj.neighbors[ui]) {
            auto vi = static_cast<std::size_t>(v);
            if (settled[vi]) continue;
            double offer = std::min(forest.cost[ui], rho[vi]);
            if (offer > forest.cost[vi]) {
                forest.cost[vi] = offer;
                forest.pred[vi] = u;
                forest.root[vi] = forest.root[ui];
                forest.label[vi] = forest.label[ui];
                queue.emplace(offer, v);
            }
        }
    }
    forest.order_index.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        forest.order_index[static_cast<std::size_t>(forest.order[i])] = static_cast<int>(i);
    return forest;
}

namespace detail {

/// Query-side view: the k nearest training nodes and the query density
/// computed from them with the trained sigma.
struct QueryNeighborhood {
    std::vector<std::pair<int, double>> neighbors;
    double rho = 0.0;
};

inline QueryNeighborhood query_neighborhood(const TrainedForest& forest,
                                            std::span<const double> features) {
    if (static_cast<int>(features.size()) != forest.samples.dim)
        throw DimensionMismatch("query dimension " + std::to_string(features.size()) +
                                " != model dimension " + std::to_string(forest.samples.dim));
    const std::size_t n = forest.size();
    int k = std::min<int>(forest.k, static_cast<int>(n));
    std::vector<std::pair<double, int>> cand;
    cand.reserve(n);
    for (std::size_t v = 0; v < n; ++v)
        cand.emplace_back(forest.metric.fn(forest.samples.samples[v].features, features),
                          static_cast<int>(v));
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());

    QueryNeighborhood q;
    std::vector<double> dists;
    for (int j = 0; j < k; ++j) {
        q.neighbors.emplace_back(cand[static_cast<std::size_t>(j)].second,
                                 cand[static_cast<std::size_t>(j)].first);
        dists.push_back(cand[static_cast<std::size_t>(j)].first);
    }
    q.rho = gaussian_density(dists, forest.density.sigma, forest.k);
    return q;
}

}  // namespace detail

/// Exactly the query's k nearest training nodes, valued min(C(v), rho(t)).
/// Higher value = stronger connection.
inline std::vector<OfferedCost> offered_costs_knn(const TrainedForest& forest,
                                                  std::span<const double> features) {
    auto q = detail::query_neighborhood(forest, features);
    std::vector<OfferedCost> offers;
    offers.reserve(q.neighbors.size());
    for (const auto& [v, d] : q.neighbors)
        offers.push_back({v, std::min(forest.cost[static_cast<std::size_t>(v)], q.rho)});
    return offers;
}

/// Argmax over the query's k nearest training nodes of min(C(v), rho(t)).
/// Value ties are common here (every neighbor whose cost exceeds rho(t)
/// offers exactly rho(t)), so ties go to the smallest id, the same rule the
/// ranking layer uses — rank 1 and the classification conqueror must agree.
inline ClassifyResult classify_knn(const TrainedForest& forest, std::span<const double> features) {
    auto offers = offered_costs_knn(forest, features);
    const OfferedCost* best = nullptr;
    for (const auto& o : offers) {
        if (!best || o.value > best->value || (o.value == best->value && o.node < best->node))
            best = &o;
    }
    return {forest.label[static_cast<std::size_t>(best->node)], best->value, best->node};
}

/// Train at each k in 1..min(k_max, n-1) and keep the k with the highest
/// training self-classification accuracy, smallest k on ties.
inline int select_k(const Dataset& train, int k_max, const MetricId& metric) {
    if (k_max < 1) throw InfeasibleSplit("k_max must be positive");
    const int upper = std::min<int>(k_max, static_cast<int>(train.samples.size()) - 1);
    int best_k = 1;
    int best_correct = -1;
    for (int k = 1; k <= upper; ++k) {
        TrainedForest forest = train_knn(train, k, metric);
        int correct = 0;
        for (const auto& s : train.samples)
            if (classify_knn(forest, s.features).label == s.label) ++correct;
        if (correct > best_correct) {
            best_correct = correct;
            best_k = k;
        }
    }
    return best_k;
}

}  // namespace opfr
