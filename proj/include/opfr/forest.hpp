#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opfr/dataset.hpp"
#include "opfr/metric.hpp"

namespace opfr {

enum class Variant { CG, Knn };

inline std::string variant_name(Variant v) { return v == Variant::CG ? "cg" : "knn"; }

/// Per-node Gaussian density values for the k-NN variant.
struct DensityField {
    std::vector<double> rho;
    double sigma = 0.0;
    double d_max = 0.0;
    int k = 0;
};

/// Outcome of training either variant. All per-node vectors are indexed by
/// position in `samples` (which is id-sorted); pred/root hold positions, -1
/// meaning none.
struct TrainedForest {
    Variant variant = Variant::CG;
    MetricId metric;
    Dataset samples;

    std::vector<double> cost;
    std::vector<int> pred;
    std::vector<int> root;
    std::vector<int> label;        // propagated class = true label of root
    std::vector<int> prototypes;   // positions, ascending
    std::vector<int> order;        // order[i] = position settled i-th
    std::vector<int> order_index;  // inverse of order

    // k-NN variant only
    int k = 0;
    DensityField density;

    std::size_t size() const { return samples.size(); }

    bool is_prototype(int pos) const {
        return std::binary_search(prototypes.begin(), prototypes.end(), pos);
    }
};

/// Classification outcome: conquering node (position), its propagated label,
/// and the optimal offered value.
struct ClassifyResult {
    int label = -1;
    double value = 0.0;
    int node = -1;
};

/// (training position, offered value) pair produced during ranking.
struct OfferedCost {
    int node = -1;
    double value = 0.0;
};

}  // namespace opfr
