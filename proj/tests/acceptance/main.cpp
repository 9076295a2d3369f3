// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here and never read from the command line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "scene_analogy/coarse_align.hpp"
#include "scene_analogy/evaluation.hpp"
#include "scene_analogy/feature_field.hpp"
#include "scene_analogy/fine_align.hpp"
#include "scene_analogy/matcher.hpp"
#include "scene_analogy/pipeline.hpp"
#include "scene_analogy/testkit.hpp"
#include "scene_analogy/tps.hpp"
#include "scene_analogy/transfer.hpp"

namespace fs = std::filesystem;
using namespace scene_analogy;

namespace {

// identity fixed point
constexpr int kIdentityScenes = 10;
constexpr int kIdentityProbes = 1000;
constexpr double kIdentityTol = 1e-3;
constexpr double kIdentityBudgetSeconds = 60.0;
// rigid recovery
constexpr int kRigidPairs = 10;
constexpr double kRigidMaxAngleDeg = 45.0;
constexpr double kRigidMaxTranslation = 3.0;
constexpr double kRigidMeanErrorTol = 0.10;
constexpr double kRigidMinAcc025 = 0.95;
// multi-group recovery
constexpr int kMultiSeeds = 10;
constexpr int kMultiRequired = 9;
constexpr double kMultiGroupGap = 2.0;
constexpr double kMultiCentroidTol = 0.10;
// graph matching
constexpr int kMatchTrials = 200;
constexpr std::size_t kMatchMaxNodes = 8;
constexpr double kMatchAgreement = 0.95;
// dbscan
constexpr int kDbscanTrials = 1000;
constexpr int kDbscanMaxPoints = 12;
// idw
constexpr double kIdwInterpTol = 1e-9;
constexpr double kIdwExampleTol = 1e-12;
// optimizer
constexpr double kOptimIdentityTol = 1e-9;
// tps
constexpr double kTpsInterpTol = 1e-6;
constexpr double kTpsKernelTol = 1e-7;
constexpr double kTpsSideTol = 1e-7;
constexpr double kTpsRoundTripRel = 1e-12;
// a*
constexpr int kAstarGrids = 100;
constexpr double kAstarCostRel = 1e-12;  // summation-order slack only
// chamfer
constexpr int kChamferTrials = 100;
constexpr int kChamferMaxPoints = 2000;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string num(double v, int prec = 4) {
    std::ostringstream ss;
    ss.precision(prec);
    ss << v;
    return ss.str();
}

PipelineConfig suite_config() { return fixtures::quick_config(); }

// Optimizer statistics gathered from every pipeline run in the suite.
struct OptimTally {
    std::size_t points = 0;
    std::size_t worse = 0;
    double identity_worst = 0.0;
} g_optim;

void tally(const PipelineRun& run, bool identical) {
    for (const auto& e : run.displacements.entries) {
        ++g_optim.points;
        if (e.cost_after > e.cost_before) ++g_optim.worse;
    }
    if (identical) {
        g_optim.identity_worst = std::max(g_optim.identity_worst, run.displacements.total_cost_after());
    }
}

Outcome identity_fixed_point() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    int perfect = 0;
    std::mt19937_64 rng(1001);
    for (int seed = 0; seed < kIdentityScenes; ++seed) {
        const auto scene = testkit::gen_scene(testkit::random_layout(100 + seed, 2));
        const auto run = run_pipeline(scene, scene, suite_config());
        tally(run, true);
        const auto pts = all_points(scene);
        Vec3 lo = pts[0], hi = pts[0];
        for (const auto& p : pts) lo = lo.cwiseMin(p), hi = hi.cwiseMax(p);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < kIdentityProbes; ++i) {
            const Vec3 q = lo + Vec3(u(rng), u(rng), u(rng)).cwiseProduct(hi - lo);
            worst = std::max(worst, (run.map.apply(q) - q).norm());
        }
        const auto rep = evaluate_map(run.map, scene, scene);
        if (rep.accuracies == std::vector<double>{1.0, 1.0, 1.0}) ++perfect;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {worst <= kIdentityTol && perfect == kIdentityScenes && secs <= kIdentityBudgetSeconds,
            "max deviation " + num(worst) + " m, 1.00/1.00/1.00 in " + std::to_string(perfect) + "/" +
                std::to_string(kIdentityScenes) + ", " + num(secs, 3) + " s"};
}

Outcome rigid_recovery() {
    std::mt19937_64 rng(2002);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_err = 0.0, worst_acc = 1.0;
    int ok = 0;
    for (int i = 0; i < kRigidPairs; ++i) {
        const auto spec = testkit::random_layout(200 + i, 3);
        const auto target = testkit::gen_scene(spec);
        const Vec3 c = mean_point(all_points(target));
        const Mat3 r = oracle::random_rotation(rng, kRigidMaxAngleDeg);
        Vec3 t(u(rng), u(rng), u(rng));
        t *= kRigidMaxTranslation * std::abs(u(rng)) / t.norm();
        testkit::GroupTransform all;
        for (std::size_t k = 0; k < spec.layout.size(); ++k) all.objects.push_back(k);
        all.transform.A = r;
        all.transform.b = c + t - r * c;
        all.transform.kind = AffineKind::similarity;
        const auto pair = testkit::gen_pair(spec, {all});
        const auto run = run_pipeline(pair.target, pair.reference, suite_config());
        tally(run, false);
        double err = 0.0;
        const auto pts = all_points(pair.target);
        for (const auto& p : pts) err += (run.map.apply(p) - pair.truth.map(p)).norm();
        err /= static_cast<double>(pts.size());
        const double acc = evaluate_map(run.map, pair.target, pair.reference).accuracies.back();
        worst_err = std::max(worst_err, err);
        worst_acc = std::min(worst_acc, acc);
        if (err <= kRigidMeanErrorTol && acc >= kRigidMinAcc025) ++ok;
    }
    return {ok == kRigidPairs, std::to_string(ok) + "/" + std::to_string(kRigidPairs) + " pairs, worst mean error " +
                                   num(worst_err) + " m, worst acc@0.25 " + num(worst_acc, 3)};
}

Outcome multi_group_recovery() {
    std::mt19937_64 rng(3003);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int ok = 0;
    double worst = 0.0;
    std::size_t min_clusters = 1000;
    for (int i = 0; i < kMultiSeeds; ++i) {
        const auto spec = testkit::random_layout(300 + i, 4);
        testkit::GroupTransform ga, gb;
        ga.objects = {0, 1};
        gb.objects = {2, 3};
        ga.transform.b = Vec3(0.3 * u(rng), 0.3 * u(rng), 0.0);
        ga.transform.kind = AffineKind::translation;
        // push group b away from group a, at least kMultiGroupGap further
        const double ang = std::atan2(1.0, 0.0) + 0.5 * u(rng);
        const Vec3 dir(std::cos(ang), std::sin(ang), 0.0);
        gb.transform.b = ga.transform.b + (kMultiGroupGap + 0.5 * std::abs(u(rng))) * dir;
        gb.transform.kind = AffineKind::translation;
        const auto pair = testkit::gen_pair(spec, {ga, gb});
        const auto run = run_pipeline(pair.target, pair.reference, suite_config());
        tally(run, false);
        std::size_t real_clusters = 0;
        for (const auto& c : run.map.provenance.clusters) real_clusters += c.cluster_id != kNoise ? 1 : 0;
        min_clusters = std::min(min_clusters, real_clusters);
        double seed_worst = 0.0;
        for (const auto* g : {&ga, &gb}) {
            Vec3 mapped = Vec3::Zero(), truth = Vec3::Zero();
            std::size_t n = 0;
            for (auto k : g->objects) {
                for (const auto& p : pair.target.objects[k].points) {
                    mapped += run.map.apply(p);
                    truth += g->transform.apply(p);
                    ++n;
                }
            }
            seed_worst = std::max(seed_worst, (mapped - truth).norm() / static_cast<double>(n));
        }
        worst = std::max(worst, seed_worst);
        if (real_clusters >= 2 && seed_worst <= kMultiCentroidTol) ++ok;
    }
    return {ok >= kMultiRequired, std::to_string(ok) + "/" + std::to_string(kMultiSeeds) +
                                      " seeds, min clusters " + std::to_string(min_clusters) +
                                      ", worst group centroid error " + num(worst) + " m"};
}

Outcome graph_matching_oracle() {
    std::mt19937_64 rng(4004);
    std::uniform_int_distribution<std::size_t> size(2, kMatchMaxNodes);
    std::uniform_real_distribution<double> u(0.0, 2.0), v(-3.0, 3.0);
    int agree = 0, injective = 0;
    for (int trial = 0; trial < kMatchTrials; ++trial) {
        const std::size_t n = size(rng);
        oracle::GraphSpec gt, gr;
        std::vector<Eigen::VectorXd> emb;
        for (std::size_t i = 0; i < n; ++i) {
            gt.centroids.emplace_back(u(rng), u(rng), u(rng));
            emb.push_back(oracle::random_unit(rng, 16));
        }
        gt.embeddings = emb;
        const Mat3 r = oracle::random_rotation(rng, 180.0);
        const Vec3 t(v(rng), v(rng), v(rng));
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        gr.centroids.resize(n);
        gr.embeddings.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            gr.centroids[perm[i]] = r * gt.centroids[i] + t;
            gr.embeddings[perm[i]] = gt.embeddings[i];
        }
        const auto st = fixtures::point_objects(gt.centroids, gt.embeddings, "t");
        const auto sr = fixtures::point_objects(gr.centroids, gr.embeddings, "r");
        const auto ms = match_graphs(build_graph(st), build_graph(sr));
        const auto best = oracle::best_assignment(gt, gr, {});

        std::set<std::string> seen_t, seen_r;
        bool inj = true;
        for (const auto& m : ms.pairs) {
            inj = inj && seen_t.insert(m.target_id).second && seen_r.insert(m.reference_id).second;
        }
        injective += inj ? 1 : 0;
        bool same = ms.pairs.size() == n;
        for (const auto& m : ms.pairs) {
            const auto ti = std::stoul(m.target_id.substr(1));
            const auto ri = std::stoul(m.reference_id.substr(1));
            same = same && best[ti] == ri;
        }
        agree += same ? 1 : 0;
    }
    const double rate = static_cast<double>(agree) / kMatchTrials;
    return {rate >= kMatchAgreement && injective == kMatchTrials,
            "agreement " + num(100 * rate, 4) + "%, injective " + std::to_string(injective) + "/" +
                std::to_string(kMatchTrials)};
}

Outcome dbscan_oracle() {
    std::mt19937_64 rng(5005);
    std::uniform_int_distribution<int> size(1, kDbscanMaxPoints), minp(1, 5), dim(1, 3);
    std::uniform_real_distribution<double> u(0.0, 1.0), e(0.02, 0.6);
    int exact = 0;
    for (int trial = 0; trial < kDbscanTrials; ++trial) {
        const int n = size(rng), d = dim(rng);
        std::vector<Eigen::VectorXd> pts;
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd p(d);
            for (int k = 0; k < d; ++k) p[k] = u(rng);
            pts.push_back(p);
        }
        const double eps = e(rng);
        const auto mp = static_cast<std::size_t>(minp(rng));
        if (dbscan(pts, eps, mp) == oracle::dbscan(pts, eps, mp)) ++exact;
    }
    return {exact == kDbscanTrials, std::to_string(exact) + "/" + std::to_string(kDbscanTrials) + " exact"};
}

Outcome idw_properties() {
    std::mt19937_64 rng(6006);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double interp = 0.0;
    bool hull = true;
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 200;
        std::vector<Vec3> pos;
        FeatureField::FeatureMatrix m(static_cast<Eigen::Index>(n), 4);
        for (std::size_t i = 0; i < n; ++i) {
            pos.emplace_back(u(rng), u(rng), u(rng));
            for (int d = 0; d < 4; ++d) m(static_cast<Eigen::Index>(i), d) = u(rng);
        }
        const FeatureField f(pos, m);
        for (std::size_t i = 0; i < n; ++i) {
            interp = std::max(interp, (f.query(pos[i]) - m.row(static_cast<Eigen::Index>(i)).transpose()).norm());
        }
        for (int q = 0; q < 200; ++q) {
            const Vec3 x(1.3 * u(rng), 1.3 * u(rng), 1.3 * u(rng));
            const auto val = f.query(x);
            const auto hits = oracle::brute_knn(pos, x, f.effective_k());
            for (int d = 0; d < 4; ++d) {
                double lo = INFINITY, hi = -INFINITY;
                for (const auto& h : hits) {
                    lo = std::min(lo, m(static_cast<Eigen::Index>(h.index), d));
                    hi = std::max(hi, m(static_cast<Eigen::Index>(h.index), d));
                }
                hull = hull && val[d] >= lo && val[d] <= hi;
            }
        }
    }
    FeatureField::FeatureMatrix two(2, 2);
    two << 1, 0, 0, 1;
    const FeatureField ex({{0, 0, 0}, {1, 0, 0}}, two);
    const auto v = ex.query({0.25, 0, 0});
    const double ex_err = std::max(std::abs(v[0] - 0.9), std::abs(v[1] - 0.1));
    return {interp <= kIdwInterpTol && hull && ex_err <= kIdwExampleTol,
            "interpolation " + num(interp) + ", hull " + (hull ? "held" : "violated") + ", example error " +
                num(ex_err)};
}

Outcome optimizer() {
    // translated-field check on its own
    const auto spec = testkit::random_layout(700, 2);
    testkit::GroupTransform g;
    g.objects = {0, 1};
    g.transform.b = Vec3(0.1, 0.0, 0.0);
    const auto pair = testkit::gen_pair(spec, {g});
    const auto ft = build_field(pair.target);
    const auto fr = build_field(pair.reference);
    std::map<std::string, AffineMap> ident;
    for (const auto& o : pair.target.objects) ident.emplace(o.id, AffineMap::identity());
    const auto cfg = suite_config().optim;
    const auto sol = optimize_displacements(pair.target, ft, fr, ident, cfg);
    double err = 0.0;
    for (const auto& e : sol.entries) {
        ++g_optim.points;
        if (e.cost_after > e.cost_before) ++g_optim.worse;
        err += (e.delta - g.transform.b).norm();
    }
    err /= static_cast<double>(sol.entries.size());
    return {g_optim.worse == 0 && g_optim.identity_worst <= kOptimIdentityTol && err <= cfg.grid_step,
            std::to_string(g_optim.worse) + " of " + std::to_string(g_optim.points) +
                " points got worse, identical-pair C_fine " + num(g_optim.identity_worst) +
                ", translated offset error " + num(err) + " m"};
}

Outcome tps() {
    std::mt19937_64 rng(8008);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double interp = 0.0, kernel = 0.0, side = 0.0, round = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<PointPair> pairs, affine_pairs;
        Mat3 a = Mat3::Identity();
        for (int i = 0; i < 9; ++i) a(i / 3, i % 3) += 0.3 * u(rng);
        const Vec3 b(u(rng), u(rng), u(rng));
        for (int i = 0; i < 30; ++i) {
            const Vec3 p(u(rng), u(rng), u(rng));
            pairs.push_back({p, p + 0.2 * Vec3(u(rng), u(rng), u(rng))});
            affine_pairs.push_back({p, a * p + b});
        }
        const auto s0 = fit_tps(pairs, 0.0);
        for (const auto& p : pairs) interp = std::max(interp, (s0.apply(p.source) - p.target).norm());
        side = std::max(side, s0.side_condition_residual());
        const auto sl = fit_tps(pairs, kDefaultTpsLambda);
        side = std::max(side, sl.side_condition_residual());
        kernel = std::max(kernel, fit_tps(affine_pairs, kDefaultTpsLambda).kernel_weights.cwiseAbs().maxCoeff());

        SceneMap m;
        m.spline = sl;
        const auto back = scene_map_from_json(nlohmann::json::parse(scene_map_to_json(m).dump()));
        const double scale = std::max(sl.kernel_weights.cwiseAbs().maxCoeff(), 1.0);
        round = std::max(round, (back.spline.kernel_weights - sl.kernel_weights).cwiseAbs().maxCoeff() / scale);
        round = std::max(round, (back.spline.A - sl.A).cwiseAbs().maxCoeff());
        round = std::max(round, (back.spline.b - sl.b).cwiseAbs().maxCoeff() / std::max(sl.b.norm(), 1.0));
    }
    return {interp <= kTpsInterpTol && kernel <= kTpsKernelTol && side <= kTpsSideTol && round <= kTpsRoundTripRel,
            "interpolation " + num(interp) + " m, affine kernel " + num(kernel) + ", side " + num(side) +
                ", round trip " + num(round)};
}

Outcome astar_optimality() {
    std::mt19937_64 rng(9009);
    std::bernoulli_distribution wall(0.25);
    std::uniform_int_distribution<int> cell(0, 13);
    int matched = 0, unreachable_ok = 0, reachable = 0, interior_ok = 0;
    for (int trial = 0; trial < kAstarGrids; ++trial) {
        OccupancyGrid g(Vec3::Zero(), 0.05, {14, 14, 4}, 0.0);
        for (std::size_t i = 0; i < g.cell_count(); ++i)
            if (wall(rng)) g.set_occupied(g.unlinear(i));
        const CellIndex s{cell(rng), cell(rng), 0}, e{cell(rng), cell(rng), 3};
        g.set_occupied(s, false);
        g.set_occupied(e, false);
        const auto ref = oracle::dijkstra(g, s, e);
        try {
            const auto p = astar(g, g.center(s), g.center(e), 0.0);
            ++reachable;
            if (ref && std::abs(p.cost - *ref) <= kAstarCostRel * std::max(*ref, 1.0)) ++matched;
            bool free = true;
            for (const auto& c : p.cells) free = free && !g.occupied(c);
            interior_ok += free ? 1 : 0;
        } catch (const UnreachableError&) {
            if (!ref) ++unreachable_ok;
        }
    }
    // sealed goals: a free cell wrapped in a closed shell
    int sealed_ok = 0;
    const int sealed_cases = 10;
    for (int k = 0; k < sealed_cases; ++k) {
        OccupancyGrid g(Vec3::Zero(), 0.05, {12, 12, 12}, 0.0);
        const CellIndex c{3 + k % 6, 4, 5 + k % 4};
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz)
                    if (dx || dy || dz) g.set_occupied({c[0] + dx, c[1] + dy, c[2] + dz});
        try {
            astar(g, g.center({0, 0, 0}), g.center(c), 0.0);
        } catch (const UnreachableError&) {
            ++sealed_ok;
        }
    }
    const bool pass = matched == reachable && interior_ok == reachable &&
                      matched + unreachable_ok == kAstarGrids && sealed_ok == sealed_cases;
    return {pass, std::to_string(matched) + "/" + std::to_string(reachable) + " costs equal, " +
                      std::to_string(kAstarGrids - reachable) + " unreachable (" + std::to_string(unreachable_ok) +
                      " confirmed), interior free " + std::to_string(interior_ok) + "/" + std::to_string(reachable) +
                      ", sealed " + std::to_string(sealed_ok) + "/" + std::to_string(sealed_cases)};
}

Outcome chamfer_metric() {
    std::mt19937_64 rng(10010);
    std::uniform_int_distribution<int> size(1, kChamferMaxPoints);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::vector<double> ts{0.02, 0.05, 0.1, 0.15, 0.2, 0.25};
    int equal = 0, monotone = 0;
    for (int trial = 0; trial < kChamferTrials; ++trial) {
        std::vector<Vec3> a(static_cast<std::size_t>(size(rng))), b(static_cast<std::size_t>(size(rng)));
        for (auto& p : a) p = Vec3(u(rng), u(rng), u(rng));
        for (auto& p : b) p = Vec3(u(rng), u(rng), u(rng));
        const auto rep = chamfer_accuracy(a, b, ts);
        equal += rep.accuracies == oracle::brute_accuracy(a, b, ts) ? 1 : 0;
        monotone += std::is_sorted(rep.accuracies.begin(), rep.accuracies.end()) ? 1 : 0;
    }
    return {equal == kChamferTrials && monotone == kChamferTrials,
            std::to_string(equal) + "/" + std::to_string(kChamferTrials) + " equal to oracle, " +
                std::to_string(monotone) + " monotone"};
}

// ---- CLI determinism ----

int sh(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    return rc;
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome cli_determinism(const std::string& cli, const fs::path& work) {
    if (cli.empty()) return {false, "no --cli given"};
    fs::remove_all(work);
    fs::create_directories(work);
    const auto spec = work / "spec.json";
    {
        auto s = testkit::random_layout(1111, 3);
        testkit::GroupTransform ga, gb;
        ga.objects = {0, 1};
        gb.objects = {2};
        gb.transform.b = Vec3(0.2, 0.1, 0.0);
        write_json_file(testkit::spec_to_json(s, {ga, gb}), spec);
    }
    std::vector<std::string> artifacts{"synth/target.json", "synth/reference.json", "synth/oracle.json",
                                       "map.json",          "report.json",          "short.json",
                                       "long.json"};
    for (const char* threads : {"1", "8"}) {
        const auto dir = work / (std::string("t") + threads);
        fs::create_directories(dir);
        const std::string env = "SA_THREADS=" + std::string(threads) + " " + quote(cli) + " ";
        const auto tgt = dir / "synth" / "target.json";
        const auto ref = dir / "synth" / "reference.json";
        {
            const auto s = testkit::gen_scene(testkit::random_layout(1111, 3));
            const Vec3 c0 = s.objects[0].centroid, c2 = s.objects[2].centroid;
            double top = 0.0;
            for (const auto& p : all_points(s)) top = std::max(top, p.z());
            const double z = top + 0.3;
            write_json_file({{"frame_id", "map"}, {"points", {{c0.x(), c0.y(), z}, {c2.x(), c2.y(), z}}}},
                            dir / "traj.json");
        }
        const std::string quiet = " > /dev/null 2>&1";
        const std::vector<std::string> cmds{
            env + "synth " + quote(spec) + " -o " + quote(dir / "synth"),
            env + "map " + quote(tgt) + " " + quote(ref) + " -o " + quote(dir / "map.json") +
                " --set fine.sample_spacing=0.15",
            env + "eval " + quote(dir / "map.json") + " " + quote(tgt) + " " + quote(ref) + " -o " +
                quote(dir / "report.json"),
            env + "transfer " + quote(dir / "map.json") + " " + quote(dir / "traj.json") + " -o " +
                quote(dir / "short.json"),
            env + "transfer " + quote(dir / "map.json") + " " + quote(dir / "traj.json") + " -m long -r " +
                quote(ref) + " -o " + quote(dir / "long.json"),
        };
        for (const auto& c : cmds) {
            if (sh(c + quiet) != 0) return {false, "command failed: " + c};
        }
    }
    int same = 0;
    std::string differing;
    for (const auto& a : artifacts) {
        const auto x = fixtures::read_file(work / "t1" / a);
        const auto y = fixtures::read_file(work / "t8" / a);
        if (!x.empty() && x == y) {
            ++same;
        } else {
            differing += " " + a;
        }
    }
    return {same == static_cast<int>(artifacts.size()),
            std::to_string(same) + "/" + std::to_string(artifacts.size()) +
                " artifacts byte-identical across SA_THREADS=1,8" + (differing.empty() ? "" : ";" + differing)};
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli;
    fs::path work = fs::temp_directory_path() / "sa_acceptance";
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string key = argv[i];
        if (key == "--cli") cli = argv[i + 1];
        if (key == "--work") work = argv[i + 1];
    }

    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"identity fixed point", identity_fixed_point},
        {"rigid recovery", rigid_recovery},
        {"multi-group recovery", multi_group_recovery},
        {"graph matching oracle", graph_matching_oracle},
        {"dbscan oracle", dbscan_oracle},
        {"idw properties", idw_properties},
        {"displacement optimizer", optimizer},
        {"thin-plate spline", tps},
        {"a* optimality", astar_optimality},
        {"chamfer metric", chamfer_metric},
        {"cli determinism", [&] { return cli_determinism(cli, work); }},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
              << " criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
