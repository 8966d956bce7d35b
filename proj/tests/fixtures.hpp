#pragma once

// Shared test fixtures. Deterministic generators only: all randomness comes
// from an explicit mt19937_64 so fixtures are identical across runs.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "opfr/dataset.hpp"

namespace fixtures {

/// 4 samples on a line: x = 0, 1 (class 0) and 3, 4 (class 1).
inline opfr::Dataset toy1d() {
    opfr::Dataset ds;
    ds.n_classes = 2;
    ds.dim = 1;
    ds.samples = {
        {0, 0, {0.0}},
        {1, 0, {1.0}},
        {2, 1, {3.0}},
        {3, 1, {4.0}},
    };
    ds.validate();
    return ds;
}

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double gaussian(std::mt19937_64& rng) {
    // Box-Muller, one value per call
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

/// Uniform features in [0,1)^d; the first n_classes samples pin one sample
/// per class so the dataset always validates.
inline opfr::Dataset random_dataset(std::mt19937_64& rng, int n, int d, int n_classes) {
    opfr::Dataset ds;
    ds.n_classes = n_classes;
    ds.dim = d;
    for (int i = 0; i < n; ++i) {
        opfr::LabeledSample s;
        s.id = i;
        s.label = i < n_classes ? i : static_cast<int>(rng() % static_cast<std::uint64_t>(n_classes));
        for (int j = 0; j < d; ++j) s.features.push_back(uniform01(rng));
        ds.samples.push_back(std::move(s));
    }
    ds.validate();
    return ds;
}

/// Isotropic Gaussian blobs, one per class, centers on a scaled 2-D grid so
/// every pair is at least `center_gap` apart.
inline opfr::Dataset gaussian_blobs(int n_per_class, int n_classes, double sigma,
                                    double center_gap, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    opfr::Dataset ds;
    ds.n_classes = n_classes;
    ds.dim = 2;
    int id = 0;
    int grid = 1;
    while (grid * grid < n_classes) ++grid;
    for (int c = 0; c < n_classes; ++c) {
        double cx = static_cast<double>(c % grid) * center_gap;
        double cy = static_cast<double>(c / grid) * center_gap;
        for (int i = 0; i < n_per_class; ++i) {
            opfr::LabeledSample s;
            s.id = id++;
            s.label = c;
            s.features = {cx + sigma * gaussian(rng), cy + sigma * gaussian(rng)};
            ds.samples.push_back(std::move(s));
        }
    }
    ds.validate();
    return ds;
}

/// The acceptance retrieval fixture: 4 classes, 200 samples, 2-D, centers
/// 10 units apart with unit-ish spread far below the gap.
inline opfr::Dataset acceptance_blobs() {
    return gaussian_blobs(50, 4, 0.5, 10.0, 20240817);
}

}  // namespace fixtures
