#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "opfr/common.hpp"
#include "opfr/forest.hpp"
#include "opfr/metric.hpp"

namespace opfr {

// Versioned text format. Header:
//   opfr v1 cg  <metric> <n> <d>
//   opfr v1 knn <metric> <n> <d> <k> <sigma> <dmax>
// Then one line per node, in settlement order:
//   <id> <label> <cost> [<rho>] <pred|-> <root> <proto 0|1> <features...>
// label is the sample's true label; the propagated label is recovered as the
// true label of the root. pred/root hold sample ids.

inline std::string serialize_model(const TrainedForest& forest) {
    std::string out = "opfr v1 " + variant_name(forest.variant) + " " + forest.metric.name + " " +
                      std::to_string(forest.size()) + " " + std::to_string(forest.samples.dim);
    if (forest.variant == Variant::Knn)
        out += " " + std::to_string(forest.k) + " " + format_double(forest.density.sigma) + " " +
               format_double(forest.density.d_max);
    out += "\n";
    for (int pos : forest.order) {
        auto i = static_cast<std::size_t>(pos);
        const auto& s = forest.samples.samples[i];
        out += std::to_string(s.id) + " " + std::to_string(s.label) + " " +
               format_double(forest.cost[i]);
        if (forest.variant == Variant::Knn) out += " " + format_double(forest.density.rho[i]);
        out += " ";
        if (forest.pred[i] < 0)
            out += "-";
        else
            out += std::to_string(forest.samples.samples[static_cast<std::size_t>(forest.pred[i])].id);
        out += " " +
               std::to_string(forest.samples.samples[static_cast<std::size_t>(forest.root[i])].id) +
               " " + (forest.is_prototype(pos) ? std::string("1") : std::string("0"));
        for (double f : s.features) out += " " + format_double(f);
        out += "\n";
    }
    return out;
}

namespace detail {

inline TrainedForest deserialize_model_impl(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) throw ModelIoError("empty model file");

    std::istringstream hs(line);
    std::vector<std::string> head;
    std::string tok;
    while (hs >> tok) head.push_back(tok);
    if (head.size() < 2 || head[0] != "opfr") throw ModelIoError("line 1: not an opfr model file");
    if (head[1] != "v1") throw ModelIoError("line 1: unsupported model version '" + head[1] + "'");
    if (head.size() < 6) throw ModelIoError("line 1: truncated model header");

    TrainedForest forest;
    if (head[2] == "cg")
        forest.variant = Variant::CG;
    else if (head[2] == "knn")
        forest.variant = Variant::Knn;
    else
        throw ModelIoError("line 1: unknown variant '" + head[2] + "'");
    forest.metric = metric_by_name(head[3]);
    auto n = static_cast<std::size_t>(parse_int(head[4], "line 1"));
    int dim = static_cast<int>(parse_int(head[5], "line 1"));
    if (forest.variant == Variant::Knn) {
        if (head.size() != 9) throw ModelIoError("line 1: knn header needs k, sigma, dmax");
        forest.k = static_cast<int>(parse_int(head[6], "line 1"));
        forest.density.sigma = parse_double(head[7], "line 1");
        forest.density.d_max = parse_double(head[8], "line 1");
        forest.density.k = forest.k;
    } else if (head.size() != 6) {
        throw ModelIoError("line 1: cg header has trailing fields");
    }

    struct Row {
        int id, label, pred_id, root_id;
        bool proto;
        double cost, rho;
        std::vector<double> features;
    };
    std::vector<Row> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::string ctx = "line " + std::to_string(line_no);
        std::istringstream ls(line);
        std::vector<std::string> f;
        while (ls >> tok) f.push_back(tok);
        std::size_t fixed = forest.variant == Variant::Knn ? 7 : 6;
        if (f.size() != fixed + static_cast<std::size_t>(dim))
            throw ModelIoError(ctx + ": expected " + std::to_string(fixed + dim) +
                               " fields, found " + std::to_string(f.size()));
        Row row;
        std::size_t at = 0;
        row.id = static_cast<int>(parse_int(f[at++], ctx));
        row.label = static_cast<int>(parse_int(f[at++], ctx));
        row.cost = parse_double(f[at++], ctx);
        row.rho = 0.0;
        if (forest.variant == Variant::Knn) row.rho = parse_double(f[at++], ctx);
        row.pred_id = f[at] == "-" ? -1 : static_cast<int>(parse_int(f[at], ctx));
        ++at;
        row.root_id = static_cast<int>(parse_int(f[at++], ctx));
        row.proto = f[at] == "1";
        if (f[at] != "0" && f[at] != "1") throw ModelIoError(ctx + ": prototype flag must be 0 or 1");
        ++at;
        row.features.reserve(static_cast<std::size_t>(dim));
        for (int j = 0; j < dim; ++j) row.features.push_back(parse_double(f[at++], ctx));
        rows.push_back(std::move(row));
    }
    if (rows.size() != n)
        throw ModelIoError("model declares " + std::to_string(n) + " nodes, file has " +
                           std::to_string(rows.size()));

    forest.samples.dim = dim;
    int max_label = 0;
    for (const auto& row : rows) max_label = std::max(max_label, row.label);
    forest.samples.n_classes = max_label + 1;
    for (const auto& row : rows)
        forest.samples.samples.push_back({row.id, row.label, row.features});
    forest.samples.validate();

    forest.cost.resize(n);
    forest.pred.resize(n);
    forest.root.resize(n);
    forest.label.resize(n);
    forest.order.reserve(n);
    if (forest.variant == Variant::Knn) forest.density.rho.resize(n);
    for (const auto& row : rows) {
        int pos = forest.samples.index_of(row.id);
        auto pi = static_cast<std::size_t>(pos);
        forest.order.push_back(pos);
        forest.cost[pi] = row.cost;
        if (forest.variant == Variant::Knn) forest.density.rho[pi] = row.rho;
        forest.pred[pi] = row.pred_id < 0 ? -1 : forest.samples.index_of(row.pred_id);
        forest.root[pi] = forest.samples.index_of(row.root_id);
        if (forest.root[pi] < 0 || (row.pred_id >= 0 && forest.pred[pi] < 0))
            throw ModelIoError("node " + std::to_string(row.id) + " references an unknown node");
        if (row.proto) forest.prototypes.push_back(pos);
    }
    std::sort(forest.prototypes.begin(), forest.prototypes.end());
    forest.order_index.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        forest.order_index[static_cast<std::size_t>(forest.order[i])] = static_cast<int>(i);
    for (std::size_t i = 0; i < n; ++i)
        forest.label[i] =
            forest.samples.samples[static_cast<std::size_t>(forest.root[i])].label;
    return forest;
}

}  // namespace detail

inline TrainedForest deserialize_model(const std::string& content) {
    try {
        return detail::deserialize_model_impl(content);
    } catch (const ParseError& e) {
        throw ModelIoError(e.what());
    }
}

inline void save_model(const TrainedForest& forest, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelIoError("cannot write model file: " + path);
    out << serialize_model(forest);
}

inline TrainedForest load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelIoError("cannot open model file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return deserialize_model(ss.str());
    } catch (const ModelIoError& e) {
        throw ModelIoError(path + ": " + e.what());
    }
}

}  // namespace opfr
