#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "opfr/common.hpp"
#include "opfr/dataset.hpp"
#include "opfr/ranking.hpp"

namespace opfr {

/// rel[i] = 1 iff the candidate at rank i+1 shares the query's label.
inline std::vector<int> judge_relevance(const RankingList& ranking, int query_label,
                                        const Dataset& train) {
    std::vector<int> rel;
    rel.reserve(ranking.entries.size());
    for (const auto& e : ranking.entries) {
        int idx = train.index_of(e.candidate_id);
        if (idx < 0)
            throw ParseError("unknown candidate id " + std::to_string(e.candidate_id));
        rel.push_back(train.samples[static_cast<std::size_t>(idx)].label == query_label ? 1 : 0);
    }
    return rel;
}

/// DCG_r = sum over positions i (1-based) of (2^rel_i - 1) / log2(i + 1).
inline double dcg(const std::vector<int>& rel) {
    double total = 0.0;
    for (std::size_t i = 0; i < rel.size(); ++i)
        total += (std::pow(2.0, rel[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    return total;
}

/// DCG normalized by the relevance-sorted ideal; 0 when the ideal is 0.
inline double ndcg(const std::vector<int>& rel) {
    std::vector<int> ideal = rel;
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double denom = dcg(ideal);
    if (denom == 0.0) return 0.0;
    return dcg(rel) / denom;
}

inline double precision_at(const std::vector<int>& rel, int r) {
    if (r < 1 || static_cast<std::size_t>(r) > rel.size())
        throw InfeasibleSplit("precision_at: r out of range");
    int hits = 0;
    for (int i = 0; i < r; ++i) hits += rel[static_cast<std::size_t>(i)];
    return static_cast<double>(hits) / static_cast<double>(r);
}

/// Mean of P@r over the relevant positions; 0 when nothing is relevant.
inline double average_precision(const std::vector<int>& rel) {
    int relevant = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < rel.size(); ++i) {
        if (rel[i] != 1) continue;
        ++relevant;
        sum += precision_at(rel, static_cast<int>(i) + 1);
    }
    if (relevant == 0) return 0.0;
    return sum / static_cast<double>(relevant);
}

inline double mean_average_precision(const std::vector<double>& aps) {
    if (aps.empty()) throw NotApplicable("MAP over an empty query set");
    return std::accumulate(aps.begin(), aps.end(), 0.0) / static_cast<double>(aps.size());
}

struct SignificanceResult {
    double statistic = 0.0;  // W = sum of positive-difference ranks
    int n_effective = 0;
    double p_value = 1.0;
    bool significant = false;
};

namespace detail {

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace detail

/// Wilcoxon signed-rank test, discard-zeros variant, average ranks on ties.
/// Exact two-sided p by sign-pattern enumeration when n_eff <= 12, otherwise
/// a normal approximation with continuity correction and tie-corrected
/// variance.
inline SignificanceResult wilcoxon_signed_rank(const std::vector<double>& x,
                                               const std::vector<double>& y, double alpha) {
    if (x.size() != y.size()) throw DimensionMismatch("wilcoxon: paired lists differ in length");
    if (x.empty()) throw NotApplicable("wilcoxon: empty input");

    std::vector<double> diffs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty()) throw NotApplicable("wilcoxon: all paired differences are zero");
    const int n = static_cast<int>(diffs.size());

    // Average ranks of |d|; doubled so they stay exact integers.
    std::vector<std::size_t> order(diffs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(diffs[a]) < std::fabs(diffs[b]);
    });
    std::vector<long long> rank2(diffs.size(), 0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() &&
               std::fabs(diffs[order[j + 1]]) == std::fabs(diffs[order[i]]))
            ++j;
        long long doubled = static_cast<long long>(i + 1 + j + 1);  // 2 * average rank
        for (std::size_t t = i; t <= j; ++t) rank2[order[t]] = doubled;
        i = j + 1;
    }

    long long w2 = 0;
    for (std::size_t t = 0; t < diffs.size(); ++t)
        if (diffs[t] > 0.0) w2 += rank2[t];

    SignificanceResult result;
    result.statistic = static_cast<double>(w2) / 2.0;
    result.n_effective = n;

    if (n <= 12) {
        const std::uint64_t total = std::uint64_t(1) << n;
        std::uint64_t count_le = 0, count_ge = 0;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            long long w = 0;
            for (int b = 0; b < n; ++b)
                if (mask & (std::uint64_t(1) << b)) w += rank2[static_cast<std::size_t>(b)];
            if (w <= w2) ++count_le;
            if (w >= w2) ++count_ge;
        }
        double p = 2.0 * static_cast<double>(std::min(count_le, count_ge)) /
                   static_cast<double>(total);
        result.p_value = std::min(1.0, p);
    } else {
        double mean = static_cast<double>(n) * (n + 1) / 4.0;
        double var = static_cast<double>(n) * (n + 1) * (2 * n + 1) / 24.0;
        // Tie correction: subtract sum(t^3 - t) / 48 over tie groups.
        std::map<long long, int> groups;
        for (long long r2v : rank2) ++groups[r2v];
        for (const auto& [r2v, count] : groups) {
            double t = count;
            var -= (t * t * t - t) / 48.0;
        }
        double w = result.statistic;
        double cc = w > mean ? -0.5 : (w < mean ? 0.5 : 0.0);
        double z = (w - mean + cc) / std::sqrt(var);
        result.p_value = std::min(1.0, 2.0 * detail::normal_sf(std::fabs(z)));
    }
    result.significant = result.p_value < alpha;
    return result;
}

}  // namespace opfr
