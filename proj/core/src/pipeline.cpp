#include "scene_analogy/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <type_traits>

namespace scene_analogy {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

namespace {

using Setter = std::function<void(PipelineConfig&, const json&)>;
using Getter = std::function<json(const PipelineConfig&)>;

struct Field {
    const char* section;  // nullptr for top-level keys
    const char* key;
    Setter set;
    Getter get;
};

// nlohmann converts -1 to a huge unsigned value and 2.5 to 2; reject both.
template <typename T>
T convert(const json& v) {
    if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
        if (!v.is_number_unsigned()) throw FormatError("config", "expected a non-negative integer, got " + v.dump());
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw FormatError("config", "expected an integer, got " + v.dump());
    }
    return v.get<T>();
}

template <typename T>
Field field(const char* section, const char* key, T PipelineConfig::*member) {
    return {section, key, [member](PipelineConfig& c, const json& v) { c.*member = convert<T>(v); },
            [member](const PipelineConfig& c) { return json(c.*member); }};
}

template <typename Sub, typename T>
Field nested(const char* section, const char* key, Sub PipelineConfig::*sub, T Sub::*member) {
    return {section, key, [sub, member](PipelineConfig& c, const json& v) { (c.*sub).*member = convert<T>(v); },
            [sub, member](const PipelineConfig& c) { return json((c.*sub).*member); }};
}

const std::vector<Field>& config_fields() {
    static const std::vector<Field> fields{
        field(nullptr, "seed", &PipelineConfig::seed),
        field("graph", "edge_threshold", &PipelineConfig::edge_threshold),
        nested("matching", "node_weight", &PipelineConfig::affinity, &AffinityConfig::node_weight),
        nested("matching", "edge_feature_weight", &PipelineConfig::affinity, &AffinityConfig::edge_feature_weight),
        nested("matching", "length_sigma", &PipelineConfig::affinity, &AffinityConfig::length_sigma),
        nested("matching", "min_node_affinity", &PipelineConfig::affinity, &AffinityConfig::min_node_affinity),
        field("clustering", "eps", &PipelineConfig::cluster_eps),
        field("clustering", "min_pts", &PipelineConfig::cluster_min_pts),
        nested("field", "k", &PipelineConfig::field, &FieldConfig::k),
        nested("field", "power", &PipelineConfig::field, &FieldConfig::power),
        nested("field", "epsilon", &PipelineConfig::field, &FieldConfig::epsilon),
        nested("fine", "sample_spacing", &PipelineConfig::optim, &OptimConfig::sample_spacing),
        nested("fine", "search_radius", &PipelineConfig::optim, &OptimConfig::search_radius),
        nested("fine", "grid_step", &PipelineConfig::optim, &OptimConfig::grid_step),
        nested("fine", "descent_iters", &PipelineConfig::optim, &OptimConfig::descent_iters),
        nested("fine", "descent_step0", &PipelineConfig::optim, &OptimConfig::descent_step0),
        nested("fine", "fd_epsilon", &PipelineConfig::optim, &OptimConfig::fd_epsilon),
        field("tps", "lambda", &PipelineConfig::tps_lambda),
        field("tps", "max_control_points", &PipelineConfig::max_control_points),
        field("eval", "thresholds", &PipelineConfig::eval_thresholds),
        nested("planning", "resolution", &PipelineConfig::planning, &PlanningConfig::resolution),
        nested("planning", "inflation_radius", &PipelineConfig::planning, &PlanningConfig::inflation_radius),
        nested("planning", "bounds_margin", &PipelineConfig::planning, &PlanningConfig::bounds_margin),
        nested("planning", "waypoint_stride", &PipelineConfig::planning, &PlanningConfig::waypoint_stride),
        nested("planning", "snap_radius", &PipelineConfig::planning, &PlanningConfig::snap_radius),
    };
    return fields;
}

const Field* find_field(const std::string& section, const std::string& key) {
    for (const auto& f : config_fields()) {
        const std::string fs = f.section ? f.section : "";
        if (fs == section && key == f.key) return &f;
    }
    return nullptr;
}

bool is_section(const std::string& name) {
    for (const auto& f : config_fields()) {
        if (f.section && name == f.section) return true;
    }
    return false;
}

void set_field(PipelineConfig& cfg, const Field& f, const json& value, const std::string& where) {
    try {
        f.set(cfg, value);
    } catch (const json::exception& e) {
        throw FormatError(where, std::string("bad value: ") + e.what());
    }
}

}  // namespace

void PipelineConfig::check() const {
    if (!(edge_threshold > 0.0)) throw ArgumentError("graph.edge_threshold must be positive");
    affinity.check();
    if (!(cluster_eps > 0.0)) throw ArgumentError("clustering.eps must be positive");
    if (cluster_min_pts < 1) throw ArgumentError("clustering.min_pts must be at least 1");
    field.check();
    optim.check();
    if (!(tps_lambda >= 0.0)) throw ArgumentError("tps.lambda must be non-negative");
    if (eval_thresholds.empty()) throw ArgumentError("eval.thresholds must not be empty");
    for (double t : eval_thresholds) {
        if (!(t > 0.0)) throw ArgumentError("eval.thresholds must be positive");
    }
    planning.check();
}

json PipelineConfig::to_json() const {
    json out = json::object();
    for (const auto& f : config_fields()) {
        if (f.section) {
            out[f.section][f.key] = f.get(*this);
        } else {
            out[f.key] = f.get(*this);
        }
    }
    return out;
}

PipelineConfig PipelineConfig::from_json(const json& j) {
    if (!j.is_object()) throw FormatError("config", "expected a JSON object");
    PipelineConfig cfg;
    for (const auto& [name, value] : j.items()) {
        if (const auto* f = find_field("", name)) {
            set_field(cfg, *f, value, name);
            continue;
        }
        if (!is_section(name)) throw FormatError("config", "unknown key '" + name + "'");
        if (!value.is_object()) throw FormatError(name, "expected an object");
        for (const auto& [key, v] : value.items()) {
            const auto* f = find_field(name, key);
            if (!f) throw FormatError(name, "unknown key '" + key + "'");
            set_field(cfg, *f, v, name + "." + key);
        }
    }
    cfg.check();
    return cfg;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    return from_json(read_json_file(path));
}

void PipelineConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw FormatError(assignment, "override must look like section.key=value");
    const auto path = assignment.substr(0, eq);
    const auto dot = path.find('.');
    const std::string section = dot == std::string::npos ? "" : path.substr(0, dot);
    const std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
    const auto* f = find_field(section, key);
    if (!f) throw FormatError(path, "unknown config key");
    json value;
    try {
        value = json::parse(assignment.substr(eq + 1));
    } catch (const json::parse_error& e) {
        throw FormatError(path, std::string("value is not valid JSON: ") + e.what());
    }
    set_field(*this, *f, value, path);
    check();
}

const char* to_string(MapFallback f) {
    switch (f) {
        case MapFallback::none: return "none";
        case MapFallback::identity: return "identity";
        case MapFallback::dominant_affine: return "dominant_affine";
    }
    return "none";
}

namespace {

MapFallback fallback_from_string(const std::string& s) {
    for (auto f : {MapFallback::none, MapFallback::identity, MapFallback::dominant_affine}) {
        if (s == to_string(f)) return f;
    }
    throw FormatError("provenance.fallback", "unknown fallback '" + s + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// Pipeline

PipelineRun run_pipeline(const SceneBundle& scene_tgt, const SceneBundle& scene_ref, const PipelineConfig& cfg) {
    cfg.check();
    for (const auto* s : {&scene_tgt, &scene_ref}) {
        auto diagnostics = validate_scene(*s);
        if (has_errors(diagnostics)) throw ValidationError(std::move(diagnostics));
    }
    if (scene_tgt.feature_dim != scene_ref.feature_dim) {
        throw ArgumentError("target and reference feature_dim differ (" + std::to_string(scene_tgt.feature_dim) +
                            " vs " + std::to_string(scene_ref.feature_dim) + ")");
    }

    PipelineRun run;
    auto& map = run.map;
    auto& prov = map.provenance;
    map.config = cfg;
    prov.target_scene = scene_tgt.scene_id;
    prov.reference_scene = scene_ref.scene_id;

    run.graph_tgt = build_graph(scene_tgt, cfg.edge_threshold);
    run.graph_ref = build_graph(scene_ref, cfg.edge_threshold);
    prov.matches = match_graphs(run.graph_tgt, run.graph_ref, cfg.affinity);

    if (prov.matches.empty()) {
        prov.fallback = MapFallback::identity;
        prov.diagnostics.push_back("no object matches between the scenes; using the identity map");
        map.spline = ThinPlateSpline::from_affine(AffineMap::identity());
        for (const auto& o : scene_tgt.objects) {
            run.object_maps.emplace(o.id, AffineMap::identity());
            prov.object_kinds.emplace(o.id, AffineKind::identity);
        }
        return run;
    }

    prov.clusters = cluster_matches(prov.matches, run.graph_tgt, run.graph_ref, cfg.cluster_eps, cfg.cluster_min_pts);
    for (const auto& c : prov.clusters) prov.cluster_fits.push_back(fit_affine(c, run.graph_tgt, run.graph_ref));
    run.object_maps = assign_object_maps(scene_tgt, prov.clusters, prov.cluster_fits, run.graph_tgt);
    for (const auto& [id, m] : run.object_maps) prov.object_kinds.emplace(id, m.kind);

    const auto field_tgt = build_field(scene_tgt, cfg.field);
    const auto field_ref = build_field(scene_ref, cfg.field);
    run.displacements = optimize_displacements(scene_tgt, field_tgt, field_ref, run.object_maps, cfg.optim);

    auto& stats = prov.displacement;
    stats.count = run.displacements.entries.size();
    stats.mean_delta = run.displacements.mean_delta_norm();
    stats.cost_before = run.displacements.total_cost_before();
    stats.cost_after = run.displacements.total_cost_after();
    for (const auto& e : run.displacements.entries) {
        stats.max_delta_inf = std::max(stats.max_delta_inf, e.delta.cwiseAbs().maxCoeff());
    }

    std::vector<PointPair> pairs;
    const auto& entries = run.displacements.entries;
    prov.control_point_pairs = entries.size();
    for (auto i : uniform_subsample(entries.size(), cfg.max_control_points)) {
        pairs.push_back({entries[i].point, entries[i].mapped()});
    }
    try {
        map.spline = fit_tps(pairs, cfg.tps_lambda);
    } catch (const Error& e) {
        if (!dynamic_cast<const DegenerateError*>(&e) && !dynamic_cast<const NumericalError*>(&e)) throw;
        std::size_t dominant = 0;
        for (std::size_t c = 1; c < prov.clusters.size(); ++c) {
            if (prov.clusters[c].members.size() > prov.clusters[dominant].members.size()) dominant = c;
        }
        map.spline = ThinPlateSpline::from_affine(prov.cluster_fits[dominant]);
        prov.fallback = MapFallback::dominant_affine;
        prov.diagnostics.push_back(std::string("thin-plate spline fit failed (") + e.what() +
                                   "); using the affine map of cluster " + std::to_string(dominant));
    }
    return run;
}

SceneMap build_scene_map(const SceneBundle& scene_tgt, const SceneBundle& scene_ref, const PipelineConfig& cfg) {
    return run_pipeline(scene_tgt, scene_ref, cfg).map;
}

EvalReport evaluate_map(const SceneMap& map, const SceneBundle& scene_tgt, const SceneBundle& scene_ref,
                        std::span<const double> thresholds) {
    return evaluate_map(map.spline, scene_tgt, scene_ref, thresholds);
}

// ---------------------------------------------------------------------------
// Artifact

namespace {

json provenance_to_json(const MapProvenance& p) {
    json kinds = json::object();
    for (const auto& [id, k] : p.object_kinds) kinds[id] = to_string(k);
    const auto& d = p.displacement;
    return {{"target_scene", p.target_scene},
            {"reference_scene", p.reference_scene},
            {"matches", matches_to_json(p.matches)},
            {"clusters", clusters_to_json(p.clusters, p.cluster_fits)},
            {"object_kinds", kinds},
            {"displacement",
             {{"count", d.count},
              {"mean_delta", d.mean_delta},
              {"max_delta_inf", d.max_delta_inf},
              {"cost_before", d.cost_before},
              {"cost_after", d.cost_after}}},
            {"control_point_pairs", p.control_point_pairs},
            {"fallback", to_string(p.fallback)},
            {"diagnostics", p.diagnostics}};
}

std::vector<Match> matches_from_json(const json& arr) {
    std::vector<Match> out;
    for (const auto& m : arr) {
        out.push_back({m.at("target_id").get<std::string>(), m.at("reference_id").get<std::string>(),
                       m.at("score").get<double>()});
    }
    return out;
}

MapProvenance provenance_from_json(const json& j) {
    MapProvenance p;
    p.target_scene = j.at("target_scene").get<std::string>();
    p.reference_scene = j.at("reference_scene").get<std::string>();
    p.matches.pairs = matches_from_json(j.at("matches"));
    for (const auto& c : j.at("clusters")) {
        p.clusters.push_back({c.at("cluster_id").get<int>(), matches_from_json(c.at("members"))});
        if (c.contains("affine")) p.cluster_fits.push_back(affine_from_json(c.at("affine")));
    }
    for (const auto& [id, k] : j.at("object_kinds").items()) p.object_kinds.emplace(id, affine_kind_from_string(k));
    const auto& d = j.at("displacement");
    p.displacement = {d.at("count").get<std::size_t>(), d.at("mean_delta").get<double>(),
                      d.at("max_delta_inf").get<double>(), d.at("cost_before").get<double>(),
                      d.at("cost_after").get<double>()};
    p.control_point_pairs = j.at("control_point_pairs").get<std::size_t>();
    p.fallback = fallback_from_string(j.at("fallback").get<std::string>());
    p.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    return p;
}

}  // namespace

json scene_map_to_json(const SceneMap& map) {
    json out = tps_to_json(map.spline);
    out["format"] = "scene_analogy.map/1";
    out["provenance"] = provenance_to_json(map.provenance);
    out["config"] = map.config.to_json();
    return out;
}

SceneMap scene_map_from_json(const json& j) {
    SceneMap m;
    m.spline = tps_from_json(j);
    try {
        if (j.contains("provenance")) m.provenance = provenance_from_json(j.at("provenance"));
    } catch (const json::exception& e) {
        throw FormatError("provenance", e.what());
    }
    if (j.contains("config")) m.config = PipelineConfig::from_json(j.at("config"));
    return m;
}

void save_scene_map(const SceneMap& map, const std::filesystem::path& path) {
    write_json_file(scene_map_to_json(map), path);
}

SceneMap load_scene_map(const std::filesystem::path& path) { return scene_map_from_json(read_json_file(path)); }

void write_json_file(const json& doc, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path.string() + "' for writing");
    os << doc.dump(1) << '\n';
    if (!os) throw Error("failed writing '" + path.string() + "'");
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FormatError(path.string(), "cannot open file");
    std::ostringstream buf;
    buf << is.rdbuf();
    const auto text = buf.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto byte = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte ? byte - 1 : 0), '\n');
        throw FormatError(path.string() + ":" + std::to_string(line), e.what());
    }
}

}  // namespace scene_analogy
