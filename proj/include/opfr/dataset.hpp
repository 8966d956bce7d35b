#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "opfr/common.hpp"

namespace opfr {

struct LabeledSample {
    int id = 0;
    int label = 0;
    std::vector<double> features;
};

/// Labeled feature-vector collection. Samples are kept sorted by id so that
/// positional index order equals id order everywhere downstream.
struct Dataset {
    std::vector<LabeledSample> samples;
    int n_classes = 0;
    int dim = 0;

    std::size_t size() const { return samples.size(); }

    // `partial` marks subsets (e.g. the query side of a split) that may be
    // empty or miss whole classes; full datasets must cover every class.
    void validate(bool partial = false) {
        if (samples.empty()) {
            if (partial) return;
            throw ParseError("dataset has no samples");
        }
        std::sort(samples.begin(), samples.end(),
                  [](const LabeledSample& a, const LabeledSample& b) { return a.id < b.id; });
        std::vector<bool> seen(static_cast<std::size_t>(n_classes), false);
        int prev_id = -1;
        for (const auto& s : samples) {
            if (s.id < 0) throw ParseError("negative sample id " + std::to_string(s.id));
            if (s.id == prev_id) throw ParseError("duplicate sample id " + std::to_string(s.id));
            prev_id = s.id;
            if (s.label < 0 || s.label >= n_classes)
                throw ParseError("label " + std::to_string(s.label) + " out of range [0, " +
                                 std::to_string(n_classes) + ") for sample " + std::to_string(s.id));
            if (static_cast<int>(s.features.size()) != dim)
                throw ParseError("sample " + std::to_string(s.id) + " has " +
                                 std::to_string(s.features.size()) + " features, expected " +
                                 std::to_string(dim));
            for (double f : s.features)
                if (!std::isfinite(f))
                    throw ParseError("non-finite feature in sample " + std::to_string(s.id));
            seen[static_cast<std::size_t>(s.label)] = true;
        }
        if (!partial)
            for (int c = 0; c < n_classes; ++c)
                if (!seen[static_cast<std::size_t>(c)])
                    throw ParseError("class " + std::to_string(c) + " has no samples");
    }

    std::vector<int> labels() const {
        std::vector<int> out;
        out.reserve(samples.size());
        for (const auto& s : samples) out.push_back(s.label);
        return out;
    }

    /// Positional index of a sample id, or -1.
    int index_of(int id) const {
        auto it = std::lower_bound(samples.begin(), samples.end(), id,
                                   [](const LabeledSample& s, int v) { return s.id < v; });
        if (it == samples.end() || it->id != id) return -1;
        return static_cast<int>(it - samples.begin());
    }
};

// File format: line 1 "<n_samples> <n_classes> <n_features>", then one line
// per sample "<id> <label> <f_1> ... <f_d>". Lines starting with '#' ignored.
inline Dataset parse_dataset(const std::string& content) {
    Dataset ds;
    std::istringstream in(content);
    std::string line;
    int line_no = 0;
    long long declared = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::string ctx = "line " + std::to_string(line_no);
        std::istringstream ls(line);
        std::vector<std::string> fields;
        std::string tok;
        while (ls >> tok) fields.push_back(tok);
        if (declared < 0) {
            if (fields.size() != 3)
                throw ParseError(ctx + ": header must be '<n_samples> <n_classes> <n_features>'");
            declared = parse_int(fields[0], ctx);
            ds.n_classes = static_cast<int>(parse_int(fields[1], ctx));
            ds.dim = static_cast<int>(parse_int(fields[2], ctx));
            if (declared <= 0 || ds.n_classes <= 0 || ds.dim <= 0)
                throw ParseError(ctx + ": header values must be positive");
            continue;
        }
        if (fields.size() != static_cast<std::size_t>(ds.dim) + 2)
            throw ParseError(ctx + ": row has " + std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(ds.dim + 2));
        LabeledSample s;
        s.id = static_cast<int>(parse_int(fields[0], ctx));
        s.label = static_cast<int>(parse_int(fields[1], ctx));
        if (s.label < 0 || s.label >= ds.n_classes)
            throw ParseError(ctx + ": label " + std::to_string(s.label) + " out of range [0, " +
                             std::to_string(ds.n_classes) + ")");
        s.features.reserve(static_cast<std::size_t>(ds.dim));
        for (int j = 0; j < ds.dim; ++j) {
            double v = parse_double(fields[static_cast<std::size_t>(j) + 2], ctx);
            if (!std::isfinite(v)) throw ParseError(ctx + ": non-finite feature value");
            s.features.push_back(v);
        }
        ds.samples.push_back(std::move(s));
    }
    if (declared < 0) throw ParseError("empty dataset file");
    if (declared != static_cast<long long>(ds.samples.size()))
        throw ParseError("header declares " + std::to_string(declared) + " samples, file has " +
                         std::to_string(ds.samples.size()));
    ds.validate();
    return ds;
}

/// Canonical serialization: rows sorted by id, shortest round-trip decimals.
inline std::string write_dataset(const Dataset& ds) {
    if (ds.samples.empty()) throw ParseError("cannot write dataset with no samples");
    std::string out;
    out += std::to_string(ds.samples.size()) + " " + std::to_string(ds.n_classes) + " " +
           std::to_string(ds.dim) + "\n";
    std::vector<const LabeledSample*> rows;
    rows.reserve(ds.samples.size());
    for (const auto& s : ds.samples) rows.push_back(&s);
    std::sort(rows.begin(), rows.end(),
              [](const LabeledSample* a, const LabeledSample* b) { return a->id < b->id; });
    for (const auto* s : rows) {
        out += std::to_string(s->id) + " " + std::to_string(s->label);
        for (double f : s->features) {
            out += " ";
            out += format_double(f);
        }
        out += "\n";
    }
    return out;
}

inline Dataset load_dataset_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open dataset file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_dataset(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline void save_dataset_file(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write dataset file: " + path);
    out << write_dataset(ds);
}

struct SplitPair {
    Dataset train;    // Z1
    Dataset queries;  // Z2
    std::uint64_t seed = 0;
    double train_fraction = 0.0;
};

namespace detail {

inline Dataset subset(const Dataset& ds, const std::vector<char>& in_train, bool take_train) {
    Dataset out;
    out.n_classes = ds.n_classes;
    out.dim = ds.dim;
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
        if ((in_train[i] != 0) == take_train) out.samples.push_back(ds.samples[i]);
    return out;
}

}  // namespace detail

inline SplitPair split_dataset(const Dataset& ds, double train_fraction, std::uint64_t seed,
                               bool stratified = false) {
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw InfeasibleSplit("train fraction must be in (0, 1]");
    const std::size_t n = ds.samples.size();
    std::size_t n_train =
        std::min<std::size_t>(n, std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(
                                                              train_fraction * static_cast<double>(n)))));
    if (train_fraction == 1.0) n_train = n;
    if (n_train < static_cast<std::size_t>(ds.n_classes))
        throw InfeasibleSplit("train fraction leaves fewer samples (" + std::to_string(n_train) +
                              ") than classes (" + std::to_string(ds.n_classes) + ")");

    std::mt19937_64 rng(seed);
    std::vector<char> in_train(n, 0);

    if (stratified) {
        std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.n_classes));
        for (std::size_t i = 0; i < n; ++i)
            by_class[static_cast<std::size_t>(ds.samples[i].label)].push_back(i);
        for (auto& members : by_class) {
            std::size_t want = std::max<std::size_t>(
                1, static_cast<std::size_t>(
                       std::llround(train_fraction * static_cast<double>(members.size()))));
            want = std::min(want, members.size());
            if (train_fraction == 1.0) want = members.size();
            shuffle_deterministic(members, rng);
            for (std::size_t j = 0; j < want; ++j) in_train[members[j]] = 1;
        }
    } else {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        shuffle_deterministic(order, rng);
        for (std::size_t j = 0; j < n_train; ++j) in_train[order[j]] = 1;

        // Repair: every class must appear in train (MST prototypes need it).
        std::vector<int> train_count(static_cast<std::size_t>(ds.n_classes), 0);
        for (std::size_t i = 0; i < n; ++i)
            if (in_train[i]) ++train_count[static_cast<std::size_t>(ds.samples[i].label)];
        for (int c = 0; c < ds.n_classes; ++c) {
            if (train_count[static_cast<std::size_t>(c)] > 0) continue;
            std::vector<std::size_t> donors, victims;
            for (std::size_t i = 0; i < n; ++i) {
                if (!in_train[i] && ds.samples[i].label == c) donors.push_back(i);
                if (in_train[i] && train_count[static_cast<std::size_t>(ds.samples[i].label)] > 1)
                    victims.push_back(i);
            }
            std::size_t donor = donors[draw_bounded(rng, donors.size())];
            std::size_t victim = victims[draw_bounded(rng, victims.size())];
            in_train[donor] = 1;
            in_train[victim] = 0;
            ++train_count[static_cast<std::size_t>(c)];
            --train_count[static_cast<std::size_t>(ds.samples[victim].label)];
        }
    }

    SplitPair pair;
    pair.train = detail::subset(ds, in_train, true);
    pair.queries = detail::subset(ds, in_train, false);
    pair.seed = seed;
    pair.train_fraction = train_fraction;
    pair.train.validate();
    pair.queries.validate(/*partial=*/true);
    return pair;
}

/// Run i of the hold-out schedule uses seed base_seed + i.
inline std::vector<SplitPair> holdout_runs(const Dataset& ds, double train_fraction,
                                           std::uint64_t base_seed, int n_runs,
                                           bool stratified = false) {
    if (n_runs < 1) throw InfeasibleSplit("n_runs must be positive");
    std::vector<SplitPair> runs;
    runs.reserve(static_cast<std::size_t>(n_runs));
    for (int i = 0; i < n_runs; ++i)
        runs.push_back(split_dataset(ds, train_fraction, base_seed + static_cast<std::uint64_t>(i),
                                     stratified));
    return runs;
}

}  // namespace opfr
