#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "fixtures.hpp"
#include "opfr/opf_cg.hpp"
#include "oracles.hpp"

using namespace opfr;

namespace {

std::vector<std::vector<double>> weight_grid(const Dataset& ds, const MetricId& metric) {
    auto m = pairwise_matrix(ds.samples, metric);
    std::vector<std::vector<double>> w(m.n, std::vector<double>(m.n, 0.0));
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = 0; j < m.n; ++j) w[i][j] = m.at(i, j);
    return w;
}

double total_weight(const std::vector<MstEdge>& edges) {
    double total = 0.0;
    for (const auto& e : edges) total += e.weight;
    return total;
}

}  // namespace

TEST_CASE("MST of the toy line") {
    auto ds = fixtures::toy1d();
    auto edges = build_mst(ds, metric_by_name("euclidean"));
    REQUIRE(edges.size() == 3);
    std::map<std::pair<int, int>, double> got;
    for (const auto& e : edges) got[{std::min(e.u, e.v), std::max(e.u, e.v)}] = e.weight;
    REQUIRE(got.size() == 3);
    CHECK(got.at({0, 1}) == 1.0);
    CHECK(got.at({1, 2}) == 2.0);
    CHECK(got.at({2, 3}) == 1.0);
}

TEST_CASE("MST of two nodes is the single edge") {
    Dataset ds;
    ds.n_classes = 2;
    ds.dim = 1;
    ds.samples = {{0, 0, {0.0}}, {1, 1, {2.0}}};
    ds.validate();
    auto edges = build_mst(ds, metric_by_name("euclidean"));
    REQUIRE(edges.size() == 1);
    CHECK(edges[0].weight == 2.0);
}

TEST_CASE("MST weight matches exhaustive spanning-tree enumeration") {
    std::mt19937_64 rng(41);
    auto metric = metric_by_name("euclidean");
    for (int trial = 0; trial < 50; ++trial) {
        int n = 3 + static_cast<int>(rng() % 5);  // up to 7 nodes
        auto ds = fixtures::random_dataset(rng, n, 2, 2);
        auto edges = build_mst(ds, metric);
        REQUIRE(edges.size() == static_cast<std::size_t>(n - 1));
        double brute = oracles::brute_force_mst_weight(weight_grid(ds, metric));
        CHECK_THAT(total_weight(edges), Catch::Matchers::WithinAbs(brute, 1e-12));
    }
}

TEST_CASE("prototypes are the endpoints of inter-class MST edges") {
    auto ds = fixtures::toy1d();
    auto edges = build_mst(ds, metric_by_name("euclidean"));
    auto protos = elect_prototypes(edges, ds.labels());
    CHECK(protos == std::vector<int>{1, 2});
}

TEST_CASE("single-class training set is rejected") {
    Dataset ds;
    ds.n_classes = 1;
    ds.dim = 1;
    ds.samples = {{0, 0, {0.0}}, {1, 0, {1.0}}, {2, 0, {2.0}}};
    ds.validate();
    auto edges = build_mst(ds, metric_by_name("euclidean"));
    CHECK_THROWS_AS(elect_prototypes(edges, ds.labels()), SingleClassTraining);
}

TEST_CASE("every class owns at least one prototype") {
    std::mt19937_64 rng(43);
    auto metric = metric_by_name("euclidean");
    for (int trial = 0; trial < 100; ++trial) {
        int classes = 2 + static_cast<int>(rng() % 3);
        int n = classes + 2 + static_cast<int>(rng() % 20);
        auto ds = fixtures::random_dataset(rng, n, 3, classes);
        auto protos = elect_prototypes(build_mst(ds, metric), ds.labels());
        std::set<int> covered;
        for (int p : protos) covered.insert(ds.samples[static_cast<std::size_t>(p)].label);
        CHECK(covered.size() == static_cast<std::size_t>(classes));
    }
}

TEST_CASE("train_cg on the toy line") {
    auto forest = train_cg(fixtures::toy1d(), metric_by_name("euclidean"));
    CHECK(forest.cost == std::vector<double>{1, 0, 0, 1});
    CHECK(forest.label == std::vector<int>{0, 0, 1, 1});
    CHECK(forest.root == std::vector<int>{1, 1, 2, 2});
    CHECK(forest.prototypes == std::vector<int>{1, 2});
    for (int p : forest.prototypes) {
        CHECK(forest.cost[static_cast<std::size_t>(p)] == 0.0);
        CHECK(forest.pred[static_cast<std::size_t>(p)] == -1);
    }
}

TEST_CASE("training costs equal the minimax closure oracle") {
    std::mt19937_64 rng(47);
    auto metric = metric_by_name("euclidean");
    for (int trial = 0; trial < 100; ++trial) {
        int classes = 2 + static_cast<int>(rng() % 3);
        int n = classes + 2 + static_cast<int>(rng() % 28);  // up to 32
        auto ds = fixtures::random_dataset(rng, n, 1 + static_cast<int>(rng() % 8), classes);
        auto forest = train_cg(ds, metric);
        auto oracle =
            oracles::minimax_costs_from_prototypes(weight_grid(ds, metric), forest.prototypes);
        for (std::size_t v = 0; v < forest.size(); ++v)
            CHECK_THAT(forest.cost[v], Catch::Matchers::WithinAbs(oracle[v], 1e-9));
    }
}

TEST_CASE("pred chains reach a prototype within n steps") {
    std::mt19937_64 rng(53);
    auto ds = fixtures::random_dataset(rng, 30, 4, 3);
    auto forest = train_cg(ds, metric_by_name("euclidean"));
    for (std::size_t v = 0; v < forest.size(); ++v) {
        int node = static_cast<int>(v);
        int steps = 0;
        while (forest.pred[static_cast<std::size_t>(node)] >= 0) {
            node = forest.pred[static_cast<std::size_t>(node)];
            REQUIRE(++steps <= static_cast<int>(forest.size()));
        }
        CHECK(forest.is_prototype(node));
        CHECK(node == forest.root[v]);
    }
}

TEST_CASE("classify_cg on the toy line") {
    auto forest = train_cg(fixtures::toy1d(), metric_by_name("euclidean"));
    std::vector<double> query = {2.0};
    auto res = classify_cg(forest, query);
    CHECK(res.value == 1.0);
    CHECK(res.node == 1);  // tie with node 2 broken by settlement order
    CHECK(res.label == 0);

    // query at a prototype has cost 0
    auto at_proto = classify_cg(forest, std::vector<double>{1.0});
    CHECK(at_proto.value == 0.0);
    CHECK(at_proto.node == 1);
}

TEST_CASE("classifying training samples is self-consistent") {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 20; ++trial) {
        auto ds = fixtures::random_dataset(rng, 5 + static_cast<int>(rng() % 25), 3, 2);
        auto forest = train_cg(ds, metric_by_name("euclidean"));
        for (std::size_t v = 0; v < forest.size(); ++v) {
            auto res = classify_cg(forest, forest.samples.samples[v].features);
            CHECK(res.value == forest.cost[v]);
            CHECK(res.label == forest.label[v]);
        }
    }
}

TEST_CASE("offered_costs_cg on the toy line") {
    auto forest = train_cg(fixtures::toy1d(), metric_by_name("euclidean"));
    auto offers = offered_costs_cg(forest, std::vector<double>{2.0});
    REQUIRE(offers.size() == 4);
    CHECK(offers[0].value == 2.0);
    CHECK(offers[1].value == 1.0);
    CHECK(offers[2].value == 1.0);
    CHECK(offers[3].value == 2.0);

    // at a prototype the prototype's entry is 0
    auto at_proto = offered_costs_cg(forest, std::vector<double>{3.0});
    CHECK(at_proto[2].value == 0.0);

    // min over entries equals the classify cost
    double best = offers[0].value;
    for (const auto& o : offers) best = std::min(best, o.value);
    CHECK(best == classify_cg(forest, std::vector<double>{2.0}).value);
}

TEST_CASE("offered-cost argsort is invariant under positive rescaling") {
    std::mt19937_64 rng(61);
    for (const char* name : {"euclidean", "manhattan"}) {
        auto metric = metric_by_name(name);
        auto ds = fixtures::random_dataset(rng, 20, 3, 2);
        Dataset scaled = ds;
        const double c = 4.25;
        for (auto& s : scaled.samples)
            for (auto& f : s.features) f *= c;
        auto forest = train_cg(ds, metric);
        auto forest_scaled = train_cg(scaled, metric);
        std::vector<double> q = {0.3, 0.7, 0.1}, qs = {c * 0.3, c * 0.7, c * 0.1};
        auto a = offered_costs_cg(forest, q);
        auto b = offered_costs_cg(forest_scaled, qs);
        auto perm = [](std::vector<OfferedCost> offers) {
            std::stable_sort(offers.begin(), offers.end(),
                             [](const OfferedCost& x, const OfferedCost& y) {
                                 if (x.value != y.value) return x.value < y.value;
                                 return x.node < y.node;
                             });
            std::vector<int> ids;
            for (const auto& o : offers) ids.push_back(o.node);
            return ids;
        };
        CHECK(perm(a) == perm(b));
    }
}

TEST_CASE("cg training rejects degenerate inputs") {
    Dataset one;
    one.n_classes = 1;
    one.dim = 1;
    one.samples = {{0, 0, {0.0}}};
    one.validate();
    CHECK_THROWS(train_cg(one, metric_by_name("euclidean")));
    CHECK_THROWS_AS(offered_costs_cg(train_cg(fixtures::toy1d(), metric_by_name("euclidean")),
                                     std::vector<double>{1.0, 2.0}),
                    DimensionMismatch);
}

TEST_CASE("duplicate points with different labels still elect prototypes") {
    Dataset ds;
    ds.n_classes = 2;
    ds.dim = 1;
    ds.samples = {{0, 0, {1.0}}, {1, 1, {1.0}}, {2, 0, {0.0}}, {3, 1, {2.0}}};
    ds.validate();
    auto forest = train_cg(ds, metric_by_name("euclidean"));
    CHECK(forest.prototypes.size() >= 2);
    std::set<int> proto_labels;
    for (int p : forest.prototypes) proto_labels.insert(ds.samples[static_cast<std::size_t>(p)].label);
    CHECK(proto_labels.size() == 2);
}
