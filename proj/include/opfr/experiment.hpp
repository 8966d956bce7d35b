#pragma once

#include <chrono>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "opfr/common.hpp"
#include "opfr/dataset.hpp"
#include "opfr/evaluation.hpp"
#include "opfr/model_io.hpp"
#include "opfr/ranking.hpp"

namespace opfr {

struct ExperimentConfig {
    struct DatasetEntry {
        std::string name;
        std::string path;
        std::string metric = "euclidean";
    };

    std::vector<DatasetEntry> datasets;
    std::vector<std::string> techniques = {"cg-opf", "knn-opf", "distance"};
    std::vector<double> train_fractions = {0.25, 0.5, 0.75};
    std::vector<int> top_r = {10, 15, 20};
    int n_runs = 10;
    std::uint64_t base_seed = 0;
    int k_max = 20;
    double alpha = 0.05;
    bool timing = false;

    void validate() const {
        if (datasets.empty()) throw ParseError("config: no datasets");
        if (techniques.empty()) throw ParseError("config: no techniques");
        if (train_fractions.empty()) throw ParseError("config: no train_fractions");
        if (top_r.empty()) throw ParseError("config: no top_r values");
        for (int r : top_r)
            if (r < 1) throw ParseError("config: top_r values must be positive");
        for (const auto& t : techniques)
            if (t != "cg-opf" && t != "knn-opf" && t != "distance")
                throw ParseError("config: unknown technique '" + t + "'");
        if (n_runs < 1) throw ParseError("config: n_runs must be positive");
    }
};

inline ExperimentConfig config_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ExperimentConfig cfg;
    for (const auto& d : j.at("datasets")) {
        ExperimentConfig::DatasetEntry e;
        e.name = d.at("name").get<std::string>();
        e.path = d.value("path", std::string());
        e.metric = d.value("metric", std::string("euclidean"));
        cfg.datasets.push_back(e);
    }
    if (j.contains("techniques")) cfg.techniques = j["techniques"].get<std::vector<std::string>>();
    if (j.contains("train_fractions"))
        cfg.train_fractions = j["train_fractions"].get<std::vector<double>>();
    if (j.contains("top_r")) cfg.top_r = j["top_r"].get<std::vector<int>>();
    cfg.n_runs = j.value("n_runs", cfg.n_runs);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.k_max = j.value("k_max", cfg.k_max);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.timing = j.value("timing", cfg.timing);
    cfg.validate();
    return cfg;
}

struct ExperimentReport {
    struct Cell {
        std::string dataset;
        double fraction = 0.0;
        std::string technique;
        int top_r = 0;
        std::vector<double> run_ndcg;  // per-run means over queries
        std::vector<double> run_map;
        double mean_ndcg = 0.0;
        double mean_map = 0.0;
        double mean_rank_seconds = 0.0;  // 0 when timing disabled
    };
    struct Significance {
        std::string dataset;
        double fraction = 0.0;
        int top_r = 0;
        std::string metric_name;  // "ndcg" or "map"
        std::string tech_a;
        std::string tech_b;
        double statistic = 0.0;
        int n_effective = 0;
        double p_value = 1.0;
        bool significant = false;
        bool applicable = true;  // false when all paired differences are zero
    };

    ExperimentConfig config;
    std::vector<Cell> cells;
    std::vector<Significance> significance;
};

namespace detail {

struct RunMetrics {
    // indexed by top_r position
    std::vector<double> mean_ndcg;
    std::vector<double> mean_ap;
    double rank_seconds = 0.0;
};

inline RunMetrics evaluate_run(const std::vector<RankingList>& rankings, const SplitPair& split,
                               const std::vector<int>& top_r) {
    RunMetrics rm;
    rm.mean_ndcg.assign(top_r.size(), 0.0);
    rm.mean_ap.assign(top_r.size(), 0.0);
    const auto& queries = split.queries.samples;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        auto rel = judge_relevance(rankings[qi], queries[qi].label, split.train);
        for (std::size_t ri = 0; ri < top_r.size(); ++ri) {
            std::size_t len = std::min<std::size_t>(rel.size(),
                                                    static_cast<std::size_t>(top_r[ri]));
            std::vector<int> prefix(rel.begin(), rel.begin() + static_cast<long>(len));
            rm.mean_ndcg[ri] += ndcg(prefix);
            rm.mean_ap[ri] += average_precision(prefix);
        }
    }
    for (std::size_t ri = 0; ri < top_r.size(); ++ri) {
        rm.mean_ndcg[ri] /= static_cast<double>(queries.size());
        rm.mean_ap[ri] /= static_cast<double>(queries.size());
    }
    return rm;
}

}  // namespace detail

/// Hold-out protocol: split, train each technique once per run, rank every
/// query at max(top_r), derive smaller lists by prefix, judge relevance and
/// aggregate NDCG/MAP per run and across runs. Wilcoxon compares paired
/// per-run means between every technique pair. Timing, when enabled, wraps
/// the ranking loop only.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                       const std::map<std::string, Dataset>& preloaded = {}) {
    cfg.validate();
    ExperimentReport report;
    report.config = cfg;
    int r_max = *std::max_element(cfg.top_r.begin(), cfg.top_r.end());

    for (const auto& entry : cfg.datasets) {
        Dataset ds;
        auto pre = preloaded.find(entry.name);
        if (pre != preloaded.end())
            ds = pre->second;
        else
            ds = load_dataset_file(entry.path);
        MetricId metric = metric_by_name(entry.metric);

        for (double fraction : cfg.train_fractions) {
            // technique -> per-run metrics
            std::map<std::string, std::vector<detail::RunMetrics>> per_tech;
            for (int run = 0; run < cfg.n_runs; ++run) {
                SplitPair split;
                try {
                    split = split_dataset(ds, fraction, cfg.base_seed +
                                                            static_cast<std::uint64_t>(run));
                } catch (const std::exception& e) {
                    throw InfeasibleSplit("dataset '" + entry.name + "', run " +
                                          std::to_string(run) + ": " + e.what());
                }
                if (split.queries.samples.empty())
                    throw InfeasibleSplit("dataset '" + entry.name + "', fraction " +
                                          format_double(fraction) + ": no query samples");

                TrainedForest cg, knn;
                bool want_cg = false, want_knn = false;
                for (const auto& t : cfg.techniques) {
                    want_cg |= t == "cg-opf";
                    want_knn |= t == "knn-opf";
                }
                try {
                    if (want_cg) cg = train_cg(split.train, metric);
                    if (want_knn) {
                        int k = select_k(split.train, cfg.k_max, metric);
                        knn = train_knn(split.train, k, metric);
                    }
                } catch (const std::exception& e) {
                    throw SingleClassTraining("dataset '" + entry.name + "', run " +
                                              std::to_string(run) + ": " + e.what());
                }

                for (const auto& tech : cfg.techniques) {
                    std::vector<RankingList> rankings;
                    rankings.reserve(split.queries.samples.size());
                    auto t0 = std::chrono::steady_clock::now();
                    for (const auto& q : split.queries.samples) {
                        if (tech == "cg-opf")
                            rankings.push_back(rank_opf(cg, q, r_max));
                        else if (tech == "knn-opf")
                            rankings.push_back(rank_opf(knn, q, r_max));
                        else
                            rankings.push_back(rank_distance(split.train, q, r_max, metric));
                    }
                    auto t1 = std::chrono::steady_clock::now();
                    auto rm = detail::evaluate_run(rankings, split, cfg.top_r);
                    if (cfg.timing)
                        rm.rank_seconds = std::chrono::duration<double>(t1 - t0).count();
                    per_tech[tech].push_back(std::move(rm));
                }
            }

            for (const auto& tech : cfg.techniques) {
                const auto& runs = per_tech[tech];
                for (std::size_t ri = 0; ri < cfg.top_r.size(); ++ri) {
                    ExperimentReport::Cell cell;
                    cell.dataset = entry.name;
                    cell.fraction = fraction;
                    cell.technique = tech;
                    cell.top_r = cfg.top_r[ri];
                    for (const auto& rm : runs) {
                        cell.run_ndcg.push_back(rm.mean_ndcg[ri]);
                        cell.run_map.push_back(rm.mean_ap[ri]);
                        cell.mean_rank_seconds += rm.rank_seconds;
                    }
                    cell.mean_ndcg = mean_average_precision(cell.run_ndcg);
                    cell.mean_map = mean_average_precision(cell.run_map);
                    cell.mean_rank_seconds /= static_cast<double>(runs.size());
                    report.cells.push_back(std::move(cell));
                }
            }

            for (std::size_t a = 0; a < cfg.techniques.size(); ++a) {
                for (std::size_t b = a + 1; b < cfg.techniques.size(); ++b) {
                    for (std::size_t ri = 0; ri < cfg.top_r.size(); ++ri) {
                        for (const char* metric_name : {"ndcg", "map"}) {
                            std::vector<double> xs, ys;
                            for (int run = 0; run < cfg.n_runs; ++run) {
                                const auto& ra = per_tech[cfg.techniques[a]][static_cast<std::size_t>(run)];
                                const auto& rb = per_tech[cfg.techniques[b]][static_cast<std::size_t>(run)];
                                bool is_ndcg = std::string(metric_name) == "ndcg";
                                xs.push_back(is_ndcg ? ra.mean_ndcg[ri] : ra.mean_ap[ri]);
                                ys.push_back(is_ndcg ? rb.mean_ndcg[ri] : rb.mean_ap[ri]);
                            }
                            ExperimentReport::Significance sig;
                            sig.dataset = entry.name;
                            sig.fraction = fraction;
                            sig.top_r = cfg.top_r[ri];
                            sig.metric_name = metric_name;
                            sig.tech_a = cfg.techniques[a];
                            sig.tech_b = cfg.techniques[b];
                            try {
                                auto res = wilcoxon_signed_rank(xs, ys, cfg.alpha);
                                sig.statistic = res.statistic;
                                sig.n_effective = res.n_effective;
                                sig.p_value = res.p_value;
                                sig.significant = res.significant;
                            } catch (const NotApplicable&) {
                                sig.applicable = false;
                            }
                            report.significance.push_back(std::move(sig));
                        }
                    }
                }
            }
        }
    }
    return report;
}

enum class ReportFormat { TableText, Csv };

inline std::string emit_report(const ExperimentReport& report, ReportFormat format) {
    std::string out;
    if (format == ReportFormat::Csv) {
        out = "dataset,fraction,technique,top_r,metric,value\n";
        for (const auto& c : report.cells) {
            auto prefix = c.dataset + "," + format_double(c.fraction) + "," + c.technique + "," +
                          std::to_string(c.top_r) + ",";
            out += prefix + "ndcg," + format_double(c.mean_ndcg) + "\n";
            out += prefix + "map," + format_double(c.mean_map) + "\n";
            if (report.config.timing)
                out += prefix + "rank_seconds," + format_double(c.mean_rank_seconds) + "\n";
        }
        return out;
    }

    char buf[256];
    out += "# Experiment report (base_seed " + std::to_string(report.config.base_seed) +
           ", runs " + std::to_string(report.config.n_runs) + ", alpha " +
           format_double(report.config.alpha) + ", k_max " +
           std::to_string(report.config.k_max) + ")\n\n";
    out += "dataset          fraction  technique  top-r    NDCG     MAP";
    if (report.config.timing) out += "   rank[s]";
    out += "\n";
    for (const auto& c : report.cells) {
        std::snprintf(buf, sizeof(buf), "%-16s %7.2f  %-9s %6d  %6.4f  %6.4f", c.dataset.c_str(),
                      c.fraction, c.technique.c_str(), c.top_r, c.mean_ndcg, c.mean_map);
        out += buf;
        if (report.config.timing) {
            std::snprintf(buf, sizeof(buf), "  %8.4f", c.mean_rank_seconds);
            out += buf;
        }
        out += "\n";
    }
    out += "\n# Wilcoxon signed-rank (two-sided, alpha " + format_double(report.config.alpha) +
           ")\n";
    out += "dataset          fraction  top-r  metric  pair                      W       p  verdict\n";
    for (const auto& s : report.significance) {
        std::string pair = s.tech_a + " vs " + s.tech_b;
        std::string verdict = s.applicable ? (s.significant ? "significant" : "ns") : "n/a";
        std::snprintf(buf, sizeof(buf), "%-16s %7.2f %6d  %-6s  %-22s %6.1f  %6.4f  %s\n",
                      s.dataset.c_str(), s.fraction, s.top_r, s.metric_name.c_str(), pair.c_str(),
                      s.statistic, s.p_value, verdict.c_str());
        out += buf;
    }
    return out;
}

struct BenchmarkResult {
    double mean_seconds = 0.0;
    double min_seconds = 0.0;
    double max_seconds = 0.0;
    std::vector<double> raw_seconds;  // one per repetition, warm-up excluded
};

/// Times fn(), which must run one full ranking pass. One untimed warm-up
/// pass precedes the measured repetitions.
template <typename Fn>
BenchmarkResult benchmark(Fn&& fn, int repetitions) {
    if (repetitions < 1) throw NotApplicable("benchmark needs at least one repetition");
    BenchmarkResult result;
    fn();  // warm-up
    for (int rep = 0; rep < repetitions; ++rep) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        result.raw_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    result.min_seconds = *std::min_element(result.raw_seconds.begin(), result.raw_seconds.end());
    result.max_seconds = *std::max_element(result.raw_seconds.begin(), result.raw_seconds.end());
    for (double s : result.raw_seconds) result.mean_seconds += s;
    result.mean_seconds /= static_cast<double>(result.raw_seconds.size());
    return result;
}

inline BenchmarkResult benchmark_model(const TrainedForest& forest, const Dataset& queries, int r,
                                       int repetitions) {
    return benchmark(
        [&] {
            for (const auto& q : queries.samples) rank_opf(forest, q, r);
        },
        repetitions);
}

inline BenchmarkResult benchmark_distance(const Dataset& train, const Dataset& queries, int r,
                                          const MetricId& metric, int repetitions) {
    return benchmark(
        [&] {
            for (const auto& q : queries.samples) rank_distance(train, q, r, metric);
        },
        repetitions);
}

}  // namespace opfr
