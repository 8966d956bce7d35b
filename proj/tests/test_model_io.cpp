#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "opfr/model_io.hpp"
#include "opfr/opf_cg.hpp"
#include "opfr/opf_knn.hpp"

using namespace opfr;

TEST_CASE("cg model serialization round-trips exactly") {
    std::mt19937_64 rng(131);
    auto ds = fixtures::random_dataset(rng, 20, 3, 2);
    auto forest = train_cg(ds, metric_by_name("euclidean"));
    std::string text = serialize_model(forest);
    auto back = deserialize_model(text);

    CHECK(back.variant == Variant::CG);
    CHECK(back.metric.name == forest.metric.name);
    CHECK(back.cost == forest.cost);
    CHECK(back.pred == forest.pred);
    CHECK(back.root == forest.root);
    CHECK(back.label == forest.label);
    CHECK(back.prototypes == forest.prototypes);
    CHECK(back.order == forest.order);
    CHECK(serialize_model(back) == text);

    // identical classification of random queries
    for (int i = 0; i < 100; ++i) {
        std::vector<double> q = {fixtures::uniform01(rng), fixtures::uniform01(rng),
                                 fixtures::uniform01(rng)};
        auto a = classify_cg(forest, q);
        auto b = classify_cg(back, q);
        CHECK(a.label == b.label);
        CHECK(a.value == b.value);
        CHECK(a.node == b.node);
    }
}

TEST_CASE("knn model serialization round-trips exactly") {
    std::mt19937_64 rng(137);
    auto ds = fixtures::random_dataset(rng, 18, 2, 2);
    auto forest = train_knn(ds, 3, metric_by_name("euclidean"));
    std::string text = serialize_model(forest);
    auto back = deserialize_model(text);

    CHECK(back.variant == Variant::Knn);
    CHECK(back.k == forest.k);
    CHECK(back.density.sigma == forest.density.sigma);
    CHECK(back.density.d_max == forest.density.d_max);
    CHECK(back.density.rho == forest.density.rho);
    CHECK(back.cost == forest.cost);
    CHECK(back.order == forest.order);
    CHECK(serialize_model(back) == text);

    for (int i = 0; i < 50; ++i) {
        std::vector<double> q = {fixtures::uniform01(rng), fixtures::uniform01(rng)};
        auto a = classify_knn(forest, q);
        auto b = classify_knn(back, q);
        CHECK(a.label == b.label);
        CHECK(a.value == b.value);
        CHECK(a.node == b.node);
    }
}

TEST_CASE("truncated model files are rejected") {
    auto forest = train_cg(fixtures::toy1d(), metric_by_name("euclidean"));
    std::string text = serialize_model(forest);
    std::string truncated = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
    CHECK_THROWS_AS(deserialize_model(truncated), ModelIoError);
    std::string clipped_line = text.substr(0, text.size() - 3) + "\n";
    CHECK_THROWS_AS(deserialize_model(clipped_line), ModelIoError);
}

TEST_CASE("wrong version or magic is rejected") {
    auto forest = train_cg(fixtures::toy1d(), metric_by_name("euclidean"));
    std::string text = serialize_model(forest);
    std::string v2 = text;
    v2.replace(v2.find("v1"), 2, "v2");
    CHECK_THROWS_WITH(deserialize_model(v2), Catch::Matchers::ContainsSubstring("version"));
    CHECK_THROWS_AS(deserialize_model("not a model\n"), ModelIoError);
    CHECK_THROWS_AS(deserialize_model(""), ModelIoError);
}
