#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "opfr/common.hpp"
#include "opfr/dataset.hpp"
#include "opfr/forest.hpp"
#include "opfr/metric.hpp"
#include "opfr/opf_cg.hpp"
#include "opfr/opf_knn.hpp"

namespace opfr {

/// Top-r candidates for one query. Scores are path costs (lower is better,
/// CG and distance) or connection strengths (higher is better, k-NN).
struct RankingList {
    struct Entry {
        int candidate_id = -1;
        double score = 0.0;
        int rank = 0;
        int candidate_label = -1;
    };

    int query_id = -1;
    std::vector<Entry> entries;
    bool higher_is_better = false;
    bool truncated = false;
};

namespace detail {

inline RankingList sort_and_truncate(std::vector<OfferedCost> offers, const Dataset& train,
                                     int query_id, int r, bool higher_is_better) {
    if (r < 1) throw InfeasibleSplit("ranking size r must be positive");
    std::sort(offers.begin(), offers.end(), [&](const OfferedCost& a, const OfferedCost& b) {
        if (a.value != b.value) return higher_is_better ? a.value > b.value : a.value < b.value;
        return a.node < b.node;  // positions are id-ordered
    });
    RankingList list;
    list.query_id = query_id;
    list.higher_is_better = higher_is_better;
    list.truncated = offers.size() < static_cast<std::size_t>(r);
    std::size_t take = std::min<std::size_t>(offers.size(), static_cast<std::size_t>(r));
    for (std::size_t i = 0; i < take; ++i) {
        const auto& sample = train.samples[static_cast<std::size_t>(offers[i].node)];
        list.entries.push_back({sample.id, offers[i].value, static_cast<int>(i) + 1, sample.label});
    }
    return list;
}

}  // namespace detail

/// Sorted offered path-costs from the forest's variant, truncated to r.
inline RankingList rank_opf(const TrainedForest& forest, const LabeledSample& query, int r) {
    if (forest.variant == Variant::CG)
        return detail::sort_and_truncate(offered_costs_cg(forest, query.features), forest.samples,
                                         query.id, r, /*higher_is_better=*/false);
    return detail::sort_and_truncate(offered_costs_knn(forest, query.features), forest.samples,
                                     query.id, r, /*higher_is_better=*/true);
}

/// Baseline: training samples sorted by ascending distance to the query.
inline RankingList rank_distance(const Dataset& train, const LabeledSample& query, int r,
                                 const MetricId& metric) {
    std::vector<OfferedCost> offers;
    offers.reserve(train.samples.size());
    for (std::size_t v = 0; v < train.samples.size(); ++v)
        offers.push_back({static_cast<int>(v),
                          distance(train.samples[v].features, query.features, metric)});
    return detail::sort_and_truncate(std::move(offers), train, query.id, r,
                                     /*higher_is_better=*/false);
}

inline std::string write_rankings_csv(const std::vector<RankingList>& rankings) {
    std::string out = "query_id,rank,candidate_id,score,candidate_label\n";
    for (const auto& list : rankings) {
        for (const auto& e : list.entries) {
            out += std::to_string(list.query_id) + "," + std::to_string(e.rank) + "," +
                   std::to_string(e.candidate_id) + "," + format_double(e.score) + "," +
                   std::to_string(e.candidate_label) + "\n";
        }
    }
    return out;
}

/// Parses the CSV emitted by write_rankings_csv. Polarity is not recorded in
/// the file; entries are kept in their stored rank order.
inline std::vector<RankingList> parse_rankings_csv(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    int line_no = 0;
    std::vector<RankingList> rankings;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "query_id,rank,candidate_id,score,candidate_label")
                throw ParseError("line 1: unexpected rankings CSV header");
            continue;
        }
        std::string ctx = "line " + std::to_string(line_no);
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 5) throw ParseError(ctx + ": expected 5 CSV fields");
        RankingList::Entry e;
        int query_id = static_cast<int>(parse_int(fields[0], ctx));
        e.rank = static_cast<int>(parse_int(fields[1], ctx));
        e.candidate_id = static_cast<int>(parse_int(fields[2], ctx));
        e.score = parse_double(fields[3], ctx);
        e.candidate_label = static_cast<int>(parse_int(fields[4], ctx));
        if (rankings.empty() || rankings.back().query_id != query_id) {
            RankingList list;
            list.query_id = query_id;
            rankings.push_back(list);
        }
        if (e.rank != static_cast<int>(rankings.back().entries.size()) + 1)
            throw ParseError(ctx + ": ranks must be consecutive from 1 per query");
        rankings.back().entries.push_back(e);
    }
    return rankings;
}

}  // namespace opfr
