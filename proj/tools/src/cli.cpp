#include "scene_analogy_cli/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "scene_analogy/errors.hpp"
#include "scene_analogy/parallel.hpp"
#include "scene_analogy/pipeline.hpp"
#include "scene_analogy/scene.hpp"
#include "scene_analogy/testkit.hpp"
#include "scene_analogy/transfer.hpp"

#ifndef SA_VERSION
#define SA_VERSION "0.0.0"
#endif

namespace scene_analogy::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ConfigArgs {
    std::string path;
    std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
    cmd->add_option("-c,--config", args.path, "pipeline config JSON (defaults used when omitted)")
        ->check(CLI::ExistingFile);
    cmd->add_option("-s,--set", args.overrides, "override a config value, e.g. --set fine.grid_step=0.1")
        ->take_all();
}

// --config wins over `fallback` (the config embedded in a map artifact),
// then every --set is applied in order.
PipelineConfig resolve_config(const ConfigArgs& args, const std::optional<PipelineConfig>& fallback = {}) {
    PipelineConfig cfg = !args.path.empty() ? PipelineConfig::load(args.path) : fallback.value_or(PipelineConfig{});
    for (const auto& o : args.overrides) cfg.apply_override(o);
    cfg.check();
    return cfg;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void describe_scene(std::ostream& out, const char* role, const SceneBundle& s) {
    out << role << ": " << s.scene_id << " (" << s.objects.size() << " objects, " << s.total_points()
        << " points)\n";
}

int cmd_map(const std::string& tgt_path, const std::string& ref_path, const ConfigArgs& cargs,
            const std::string& out_path, std::ostream& out, std::ostream& err) {
    const auto cfg = resolve_config(cargs);
    const auto tgt = load_scene(tgt_path);
    const auto ref = load_scene(ref_path);
    for (const auto* s : {&tgt, &ref}) {
        for (const auto& d : validate_scene(*s)) err << "warning: " << s->scene_id << ": " << d.to_string() << '\n';
    }
    describe_scene(out, "target", tgt);
    describe_scene(out, "reference", ref);

    const auto run = run_pipeline(tgt, ref, cfg);
    const auto& p = run.map.provenance;
    out << "matches: " << p.matches.size() << '\n';
    out << "clusters: " << p.clusters.size() << '\n';
    out << "mean |delta|: " << fmt("%.4f", p.displacement.mean_delta) << " m over " << p.displacement.count
        << " points\n";
    out << "C_fine before: " << fmt("%.6g", p.displacement.cost_before) << '\n';
    out << "C_fine after: " << fmt("%.6g", p.displacement.cost_after) << '\n';
    out << "control points: " << run.map.spline.control_points.size() << '\n';
    out << "fallback: " << to_string(p.fallback) << '\n';
    for (const auto& d : p.diagnostics) err << "warning: " << d << '\n';

    save_scene_map(run.map, out_path);
    out << "wrote " << out_path << '\n';
    if (p.fallback == MapFallback::dominant_affine) {
        err << "error: pipeline degenerate; wrote map using fallback '" << to_string(p.fallback) << "'\n";
        return kDegenerate;
    }
    return kOk;
}

int cmd_eval(const std::string& map_path, const std::string& tgt_path, const std::string& ref_path,
             const ConfigArgs& cargs, const std::string& report_path, std::ostream& out) {
    const auto map = load_scene_map(map_path);
    const auto cfg = resolve_config(cargs, map.config);
    const auto tgt = load_scene(tgt_path);
    const auto ref = load_scene(ref_path);
    const auto report = evaluate_map(map, tgt, ref, cfg.eval_thresholds);

    out << report.to_table("Chamfer Acc.");
    out << report.accuracy_row() << '\n';
    if (!report_path.empty()) {
        json doc = report.to_json();
        doc["map"] = fs::path(map_path).filename().string();
        doc["target_scene"] = tgt.scene_id;
        doc["reference_scene"] = ref.scene_id;
        doc["config"] = cfg.to_json();
        write_json_file(doc, report_path);
        out << "wrote " << report_path << '\n';
    }
    return kOk;
}

int cmd_transfer(const std::string& map_path, const std::string& traj_path, const std::string& ref_path,
                 const std::string& mode, const ConfigArgs& cargs, const std::string& out_path, std::ostream& out) {
    const auto map = load_scene_map(map_path);
    const auto cfg = resolve_config(cargs, map.config);
    const auto traj = load_trajectory(traj_path);

    json doc;
    if (mode == "short") {
        doc = trajectory_to_json(transfer_short(traj, map.spline));
        doc["mode"] = "short";
    } else {
        if (ref_path.empty()) throw ArgumentError("long mode needs --reference for the occupancy grid");
        const auto ref = load_scene(ref_path);
        const auto& pc = cfg.planning;
        const auto grid = build_occupancy(ref, pc.resolution, pc.inflation_radius, pc.bounds_margin);
        const auto result = transfer_long(traj, map.spline, grid, pc.waypoint_stride, pc.snap_radius);
        doc = trajectory_to_json(result.trajectory);
        doc["mode"] = "long";
        json wps = json::array();
        for (const auto& w : result.mapped_waypoints) wps.push_back({w.x(), w.y(), w.z()});
        doc["waypoints"] = wps;
        doc["segment_costs"] = result.segment_costs;
        double total = 0.0;
        for (double c : result.segment_costs) total += c;
        out << "segments: " << result.segment_costs.size() << ", path cost " << fmt("%.4f", total) << " m\n";
    }
    doc["config"] = cfg.to_json();
    write_json_file(doc, out_path);
    out << "points: " << doc["points"].size() << '\n';
    out << "wrote " << out_path << '\n';
    return kOk;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir, std::ostream& out) {
    testkit::SynthSpec spec;
    std::vector<testkit::GroupTransform> groups;
    if (spec_path.empty()) {
        spec = testkit::default_spec();
        groups = testkit::groups_from_json(json::object(), spec.layout.size());
    } else {
        const auto j = read_json_file(spec_path);
        spec = testkit::spec_from_json(j);
        groups = testkit::groups_from_json(j, spec.layout.size());
    }
    const auto pair = testkit::gen_pair(spec, groups);

    fs::create_directories(out_dir);
    const auto dir = fs::path(out_dir);
    save_scene(pair.target, dir / "target.json");
    save_scene(pair.reference, dir / "reference.json");
    json oracle = pair.truth.to_json(pair.target);
    oracle["spec"] = testkit::spec_to_json(spec, groups);
    write_json_file(oracle, dir / "oracle.json");
    describe_scene(out, "target", pair.target);
    describe_scene(out, "reference", pair.reference);
    out << "wrote " << (dir / "target.json").string() << ", " << (dir / "reference.json").string() << ", "
        << (dir / "oracle.json").string() << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Estimate 3D scene analogies and transfer trajectories between scenes.\n"
                 "Environment: SA_THREADS caps worker threads (0 or unset = all cores).",
                 "scene-analogy"};
    app.set_version_flag("--version", std::string("scene-analogy ") + SA_VERSION);
    app.require_subcommand(1);

    std::string tgt, ref, map_path, out_path, traj, mode = "short", spec_path, report_path;
    ConfigArgs cargs;

    auto* map_cmd = app.add_subcommand("map", "estimate a scene map from target to reference");
    map_cmd->add_option("target", tgt, "target scene bundle")->required()->check(CLI::ExistingFile);
    map_cmd->add_option("reference", ref, "reference scene bundle")->required()->check(CLI::ExistingFile);
    map_cmd->add_option("-o,--out", out_path, "output map artifact")->required();
    add_config_options(map_cmd, cargs);

    auto* eval_cmd = app.add_subcommand("eval", "score a map with Chamfer accuracy");
    eval_cmd->add_option("map", map_path, "map artifact")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("target", tgt, "target scene bundle")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("reference", ref, "reference scene bundle")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("-o,--out", report_path, "output JSON report");
    add_config_options(eval_cmd, cargs);

    auto* transfer_cmd = app.add_subcommand("transfer", "carry a trajectory through a map");
    transfer_cmd->add_option("map", map_path, "map artifact")->required()->check(CLI::ExistingFile);
    transfer_cmd->add_option("trajectory", traj, "trajectory JSON in target space")
        ->required()
        ->check(CLI::ExistingFile);
    transfer_cmd->add_option("-m,--mode", mode, "short: map each point; long: map waypoints and replan")
        ->check(CLI::IsMember({"short", "long"}));
    transfer_cmd->add_option("-r,--reference", ref, "reference scene bundle (long mode)")
        ->check(CLI::ExistingFile);
    transfer_cmd->add_option("-o,--out", out_path, "output trajectory JSON")->required();
    add_config_options(transfer_cmd, cargs);

    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scene pair with ground truth");
    synth_cmd->add_option("spec", spec_path, "synthesis spec JSON (built-in living room when omitted)")
        ->check(CLI::ExistingFile);
    synth_cmd->add_option("-o,--out-dir", out_path, "output directory")->required();

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kInputError;
    }

    try {
        if (*map_cmd) return cmd_map(tgt, ref, cargs, out_path, out, err);
        if (*eval_cmd) return cmd_eval(map_path, tgt, ref, cargs, report_path, out);
        if (*transfer_cmd) return cmd_transfer(map_path, traj, ref, mode, cargs, out_path, out);
        if (*synth_cmd) return cmd_synth(spec_path, out_path, out);
    } catch (const ValidationError& e) {
        err << "error: invalid scene:\n";
        for (const auto& d : e.diagnostics()) err << "  " << d.to_string() << '\n';
        return kInputError;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const DegenerateError& e) {
        err << "error: degenerate input: " << e.what() << '\n';
        return kDegenerate;
    } catch (const NumericalError& e) {
        err << "error: numerical failure: " << e.what() << '\n';
        return kDegenerate;
    } catch (const UnreachableError& e) {
        err << "error: unreachable: " << e.what() << '\n';
        return kUnreachable;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}

}  // namespace scene_analogy::cli
