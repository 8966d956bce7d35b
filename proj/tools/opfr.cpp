// Command-line frontend for the OPF ranking library.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "opfr/opfr.hpp"

namespace {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw opfr::ParseError("cannot write file: " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw opfr::ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(int argc, char** argv) {
    CLI::App app{"Optimum-path-forest information ranking"};
    app.require_subcommand(1);

    // split
    auto* split_cmd = app.add_subcommand("split", "Split a dataset into train and query sets");
    std::string split_input, split_train_out, split_queries_out;
    double split_fraction = 0.5;
    std::uint64_t split_seed = 0;
    bool split_stratified = false;
    split_cmd->add_option("--input", split_input, "dataset file (.ds)")->required();
    split_cmd->add_option("--fraction", split_fraction, "train fraction in (0,1]")->required();
    split_cmd->add_option("--seed", split_seed, "split seed")->required();
    split_cmd->add_flag("--stratified", split_stratified, "per-class proportional draw");
    split_cmd->add_option("--train", split_train_out, "output train file (default <input>.train.ds)");
    split_cmd->add_option("--queries", split_queries_out,
                          "output queries file (default <input>.queries.ds)");

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a CG or k-NN forest");
    std::string train_input, train_variant, train_metric = "euclidean", train_model;
    int train_k = 0, train_kmax = 20;
    train_cmd->add_option("--input", train_input, "training dataset (.ds)")->required();
    train_cmd->add_option("--variant", train_variant, "cg or knn")
        ->required()
        ->check(CLI::IsMember({"cg", "knn"}));
    train_cmd->add_option("--metric", train_metric, "euclidean|manhattan|sqeuclidean");
    train_cmd->add_option("--k", train_k, "fixed k for the knn variant");
    train_cmd->add_option("--kmax", train_kmax, "search best k in 1..kmax (knn variant)");
    train_cmd->add_option("--model", train_model, "output model path")->required();

    // rank
    auto* rank_cmd = app.add_subcommand("rank", "Rank query samples against a trained model");
    std::string rank_model, rank_queries, rank_output;
    int rank_top = 10;
    rank_cmd->add_option("--model", rank_model, "model path")->required();
    rank_cmd->add_option("--queries", rank_queries, "query dataset (.ds)")->required();
    rank_cmd->add_option("--top", rank_top, "ranking length r")->required();
    rank_cmd->add_option("--output", rank_output, "output CSV path")->required();

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Score ranking CSV with NDCG and MAP");
    std::string eval_rankings, eval_queries, eval_train;
    eval_cmd->add_option("--rankings", eval_rankings, "ranking CSV")->required();
    eval_cmd->add_option("--queries", eval_queries, "query dataset (.ds)")->required();
    eval_cmd->add_option("--train", eval_train, "training dataset (.ds)")->required();

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "Run the hold-out protocol from a config");
    std::string exp_config, exp_out;
    std::int64_t exp_seed = -1;
    exp_cmd->add_option("--config", exp_config, "JSON config file")->required();
    exp_cmd->add_option("--seed", exp_seed, "override base_seed");
    exp_cmd->add_option("--out", exp_out, "output directory")->required();

    // benchmark
    auto* bench_cmd = app.add_subcommand("benchmark", "Time the ranking loop");
    std::string bench_model, bench_queries;
    int bench_top = 10, bench_reps = 10;
    bool bench_distance = false;
    bench_cmd->add_option("--model", bench_model, "model path")->required();
    bench_cmd->add_option("--queries", bench_queries, "query dataset (.ds)")->required();
    bench_cmd->add_option("--top", bench_top, "ranking length r")->required();
    bench_cmd->add_option("--reps", bench_reps, "timed repetitions");
    bench_cmd->add_flag("--with-distance", bench_distance,
                        "also time the distance baseline over the model's training set");

    CLI11_PARSE(app, argc, argv);

    if (*split_cmd) {
        auto ds = opfr::load_dataset_file(split_input);
        auto pair = opfr::split_dataset(ds, split_fraction, split_seed, split_stratified);
        std::string stem = split_input;
        if (stem.size() > 3 && stem.substr(stem.size() - 3) == ".ds")
            stem = stem.substr(0, stem.size() - 3);
        if (split_train_out.empty()) split_train_out = stem + ".train.ds";
        if (split_queries_out.empty()) split_queries_out = stem + ".queries.ds";
        opfr::save_dataset_file(pair.train, split_train_out);
        if (pair.queries.samples.empty())
            std::cerr << "opfr: note: query set is empty, not writing " << split_queries_out
                      << "\n";
        else
            opfr::save_dataset_file(pair.queries, split_queries_out);
        std::cout << "train: " << pair.train.size() << " samples -> " << split_train_out << "\n"
                  << "queries: " << pair.queries.size() << " samples\n";
        return 0;
    }

    if (*train_cmd) {
        auto ds = opfr::load_dataset_file(train_input);
        auto metric = opfr::metric_by_name(train_metric);
        opfr::TrainedForest forest;
        if (train_variant == "cg") {
            forest = opfr::train_cg(ds, metric);
        } else {
            int k = train_k > 0 ? train_k : opfr::select_k(ds, train_kmax, metric);
            forest = opfr::train_knn(ds, k, metric);
            std::cout << "k = " << forest.k << "\n";
        }
        opfr::save_model(forest, train_model);
        std::cout << "trained " << train_variant << " forest over " << forest.size()
                  << " samples, " << forest.prototypes.size() << " prototypes -> " << train_model
                  << "\n";
        return 0;
    }

    if (*rank_cmd) {
        auto forest = opfr::load_model(rank_model);
        auto queries = opfr::load_dataset_file(rank_queries);
        std::vector<opfr::RankingList> rankings;
        rankings.reserve(queries.size());
        for (const auto& q : queries.samples) rankings.push_back(opfr::rank_opf(forest, q, rank_top));
        write_text_file(rank_output, opfr::write_rankings_csv(rankings));
        std::cout << "ranked " << queries.size() << " queries (top-" << rank_top << ") -> "
                  << rank_output << "\n";
        return 0;
    }

    if (*eval_cmd) {
        auto rankings = opfr::parse_rankings_csv(read_text_file(eval_rankings));
        auto queries = opfr::load_dataset_file(eval_queries);
        auto train = opfr::load_dataset_file(eval_train);
        double ndcg_sum = 0.0;
        std::vector<double> aps;
        for (const auto& list : rankings) {
            int qi = queries.index_of(list.query_id);
            if (qi < 0)
                throw opfr::ParseError("query id " + std::to_string(list.query_id) +
                                       " not in query dataset");
            auto rel = opfr::judge_relevance(list, queries.samples[static_cast<std::size_t>(qi)].label,
                                             train);
            ndcg_sum += opfr::ndcg(rel);
            aps.push_back(opfr::average_precision(rel));
        }
        if (aps.empty()) throw opfr::NotApplicable("no rankings to evaluate");
        std::cout << "queries: " << aps.size() << "\n"
                  << "NDCG: " << opfr::format_double(ndcg_sum / static_cast<double>(aps.size()))
                  << "\n"
                  << "MAP: " << opfr::format_double(opfr::mean_average_precision(aps)) << "\n";
        return 0;
    }

    if (*exp_cmd) {
        auto cfg = opfr::config_from_json(read_text_file(exp_config));
        if (exp_seed >= 0) cfg.base_seed = static_cast<std::uint64_t>(exp_seed);
        auto report = opfr::run_experiment(cfg);
        std::filesystem::create_directories(exp_out);
        write_text_file(exp_out + "/report.txt",
                        opfr::emit_report(report, opfr::ReportFormat::TableText));
        write_text_file(exp_out + "/report.csv",
                        opfr::emit_report(report, opfr::ReportFormat::Csv));
        std::cout << "report written to " << exp_out << "/report.{txt,csv}\n";
        return 0;
    }

    if (*bench_cmd) {
        auto forest = opfr::load_model(bench_model);
        auto queries = opfr::load_dataset_file(bench_queries);
        auto print = [](const std::string& name, const opfr::BenchmarkResult& r) {
            std::cout << name << ": mean " << opfr::format_double(r.mean_seconds) << " s, min "
                      << opfr::format_double(r.min_seconds) << " s, max "
                      << opfr::format_double(r.max_seconds) << " s over " << r.raw_seconds.size()
                      << " reps\n";
        };
        print(opfr::variant_name(forest.variant) + "-opf",
              opfr::benchmark_model(forest, queries, bench_top, bench_reps));
        if (bench_distance)
            print("distance", opfr::benchmark_distance(forest.samples, queries, bench_top,
                                                       forest.metric, bench_reps));
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "opfr: error: " << e.what() << "\n";
        return 1;
    }
}
