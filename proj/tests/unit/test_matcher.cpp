#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "scene_analogy/matcher.hpp"

using namespace scene_analogy;

namespace {

GraphEdge edge(double length, Eigen::VectorXd feature) {
    GraphEdge e;
    e.a = 0;
    e.b = 1;
    e.length = length;
    e.feature = std::move(feature);
    return e;
}

struct PermutedPair {
    SceneBundle tgt, ref;
    std::vector<std::size_t> perm;  // target i -> reference perm[i]
};

PermutedPair permuted_pair(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec3> cs;
    std::vector<Eigen::VectorXd> es;
    for (std::size_t i = 0; i < n; ++i) {
        cs.emplace_back(u(rng), u(rng), 0.5 * u(rng));
        es.push_back(oracle::random_unit(rng, 16));
    }
    PermutedPair out;
    out.tgt = fixtures::point_objects(cs, es, "t");
    out.perm.resize(n);
    std::iota(out.perm.begin(), out.perm.end(), std::size_t{0});
    std::shuffle(out.perm.begin(), out.perm.end(), rng);
    const Eigen::Matrix3d r = oracle::random_rotation(rng, 180.0);
    const Vec3 t(u(rng) * 3, u(rng) * 3, u(rng));
    std::vector<Vec3> rc(n);
    std::vector<Eigen::VectorXd> re(n);
    for (std::size_t i = 0; i < n; ++i) {
        rc[out.perm[i]] = r * cs[i] + t;
        re[out.perm[i]] = es[i];
    }
    out.ref = fixtures::point_objects(rc, re, "r");
    return out;
}

}  // namespace

TEST_CASE("node affinity is cosine similarity") {
    CHECK(node_affinity(Eigen::Vector2d(2, 1), Eigen::Vector2d(2, 1)) == doctest::Approx(1.0));
    CHECK(node_affinity(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == doctest::Approx(0.0));
    CHECK(std::abs(node_affinity(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 0)) - 1.0 / std::sqrt(2.0)) < 1e-6);
    CHECK_THROWS_AS(node_affinity(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)), ArgumentError);
}

TEST_CASE("pairwise affinity") {
    AffinityConfig cfg;
    cfg.edge_feature_weight = 0.8;
    const Eigen::Vector3d f(1, 2, 3);
    CHECK(pairwise_affinity(edge(1.0, f), edge(1.0, f), cfg) == doctest::Approx(0.8));
    CHECK(pairwise_affinity(edge(1.0, f), edge(1.0 + cfg.length_sigma, f), cfg) ==
          doctest::Approx(0.8 * std::exp(-0.5)).epsilon(1e-12));
    CHECK(pairwise_affinity(edge(1.0, f), edge(1.0, -f), cfg) == 0.0);
}

TEST_CASE("config checks") {
    AffinityConfig c;
    c.length_sigma = 0;
    CHECK_THROWS_AS(c.check(), ArgumentError);
    c = {};
    c.node_weight = 1.5;
    CHECK_THROWS_AS(c.check(), ArgumentError);
}

TEST_CASE("single node pair scores node_weight") {
    const Eigen::VectorXd e = Eigen::Vector3d(0, 0.6, 0.8);
    AffinityConfig cfg;
    cfg.node_weight = 0.7;
    const auto m = match_graphs(build_graph(fixtures::point_objects({{0, 0, 0}}, {e})),
                                build_graph(fixtures::point_objects({{5, 1, 0}}, {e})), cfg);
    REQUIRE(m.size() == 1);
    CHECK(m.pairs[0].score == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("no candidates above the cutoff gives an empty match set") {
    const Eigen::VectorXd a = Eigen::Vector2d(1, 0), b = Eigen::Vector2d(0, 1);
    AffinityConfig cfg;
    cfg.min_node_affinity = 0.5;
    const auto m = match_graphs(build_graph(fixtures::point_objects({{0, 0, 0}, {1, 0, 0}}, {a, a})),
                                build_graph(fixtures::point_objects({{0, 0, 0}, {1, 0, 0}}, {b, b})), cfg);
    CHECK(m.empty());
}

TEST_CASE("permuted 4-node graphs recover the permutation, as the exhaustive oracle does") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto pp = permuted_pair(rng, 4);
        const auto gt = build_graph(pp.tgt), gr = build_graph(pp.ref);
        const auto m = match_graphs(gt, gr);

        oracle::GraphSpec ts, rs;
        for (const auto& o : pp.tgt.objects) ts.centroids.push_back(o.centroid), ts.embeddings.push_back(o.embedding);
        for (const auto& o : pp.ref.objects) rs.centroids.push_back(o.centroid), rs.embeddings.push_back(o.embedding);
        const auto best = oracle::best_assignment(ts, rs, {});
        CHECK(best == pp.perm);

        REQUIRE(m.size() == 4);
        for (const auto& p : m.pairs) {
            const auto ti = *pp.tgt.find(p.target_id);
            CHECK(*pp.ref.find(p.reference_id) == pp.perm[ti]);
        }
    }
}

TEST_CASE("matches are injective and sorted on random inputs") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> size(1, 7);
    for (int trial = 0; trial < 100; ++trial) {
        // a few shared labels make many competing candidates
        std::vector<Eigen::VectorXd> pool;
        for (int i = 0; i < 3; ++i) pool.push_back(oracle::random_unit(rng, 4));
        auto make = [&](int n) {
            std::uniform_real_distribution<double> u(-1, 1);
            std::uniform_int_distribution<int> pick(0, 2);
            std::vector<Vec3> cs;
            std::vector<Eigen::VectorXd> es;
            for (int i = 0; i < n; ++i) {
                cs.emplace_back(u(rng), u(rng), u(rng));
                es.push_back(pool[pick(rng)]);
            }
            return build_graph(fixtures::point_objects(cs, es));
        };
        const auto m = match_graphs(make(size(rng)), make(size(rng)));
        std::set<std::string> ts, rs;
        for (std::size_t i = 0; i < m.size(); ++i) {
            CHECK(ts.insert(m.pairs[i].target_id).second);
            CHECK(rs.insert(m.pairs[i].reference_id).second);
            CHECK(std::isfinite(m.pairs[i].score));
            if (i > 0) CHECK(m.pairs[i].score <= m.pairs[i - 1].score);
        }
    }
}

TEST_CASE("disconnected parts of a scene are all matched") {
    std::mt19937_64 rng(13);
    std::vector<Vec3> cs{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0.5}, {6, 0, 0}, {6.8, 0.3, 0}};
    std::vector<Eigen::VectorXd> es;
    for (std::size_t i = 0; i < cs.size(); ++i) es.push_back(oracle::random_unit(rng, 16));
    const auto g = build_graph(fixtures::point_objects(cs, es));
    const auto m = match_graphs(g, g);
    REQUIRE(m.size() == cs.size());
    for (const auto& p : m.pairs) CHECK(p.target_id == p.reference_id);
}

TEST_CASE("relabeling object ids relabels the matches") {
    std::mt19937_64 rng(14);
    auto pp = permuted_pair(rng, 6);
    const auto m1 = match_graphs(build_graph(pp.tgt), build_graph(pp.ref));
    auto renamed = pp.tgt;
    for (auto& o : renamed.objects) o.id = "x_" + o.id;
    const auto m2 = match_graphs(build_graph(renamed), build_graph(pp.ref));
    REQUIRE(m1.size() == m2.size());
    for (std::size_t i = 0; i < m1.size(); ++i) {
        CHECK("x_" + m1.pairs[i].target_id == m2.pairs[i].target_id);
        CHECK(m1.pairs[i].reference_id == m2.pairs[i].reference_id);
    }
}
