#include "scene_analogy/scene.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace scene_analogy {

using nlohmann::json;

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : Error([&] {
          std::string msg = "scene validation failed";
          for (const auto& d : diagnostics) {
              if (d.severity == Severity::error) msg += "\n  " + d.to_string();
          }
          return msg;
      }()),
      diagnostics_(std::move(diagnostics)) {}

std::size_t SceneBundle::total_points() const {
    std::size_t n = 0;
    for (const auto& o : objects) n += o.points.size();
    return n;
}

std::optional<std::size_t> SceneBundle::find(const std::string& object_id) const {
    for (std::size_t i = 0; i < objects.size(); ++i) {
        if (objects[i].id == object_id) return i;
    }
    return std::nullopt;
}

std::string Diagnostic::to_string() const {
    std::ostringstream os;
    os << (severity == Severity::error ? "error" : "warning") << " [" << rule << "]";
    if (!object_id.empty()) os << " object '" << object_id << "'";
    if (point_index) os << " point " << *point_index;
    os << ": " << message;
    return os.str();
}

bool has_errors(std::span<const Diagnostic> diagnostics) {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::error; });
}

Vec3 mean_point(std::span<const Vec3> points) {
    Vec3 sum = Vec3::Zero();
    for (const auto& p : points) sum += p;
    return points.empty() ? sum : Vec3(sum / static_cast<double>(points.size()));
}

std::vector<Diagnostic> validate_scene(const SceneBundle& scene) {
    std::vector<Diagnostic> out;
    auto report = [&](Severity s, const std::string& obj, std::optional<std::size_t> idx,
                      std::string rule, std::string msg) {
        out.push_back({s, obj, idx, std::move(rule), std::move(msg)});
    };

    if (scene.feature_dim <= 0) {
        report(Severity::error, "", std::nullopt, "feature_dim", "feature_dim must be positive");
    }
    if (scene.embedding_dim <= 0) {
        report(Severity::error, "", std::nullopt, "embedding_dim", "embedding_dim must be positive");
    }
    if (scene.objects.empty()) {
        report(Severity::error, "", std::nullopt, "objects", "scene has no objects");
    }

    std::unordered_set<std::string> seen_ids;
    for (const auto& obj : scene.objects) {
        const auto& id = obj.id;
        if (!seen_ids.insert(id).second) {
            report(Severity::error, id, std::nullopt, "unique_id", "duplicate object id");
        }
        if (obj.points.empty()) {
            report(Severity::error, id, std::nullopt, "points", "object has no points");
        }
        if (obj.point_features.size() != obj.points.size()) {
            report(Severity::error, id, std::nullopt, "feature_rows",
                   std::to_string(obj.points.size()) + " points but " +
                       std::to_string(obj.point_features.size()) + " feature rows");
        }
        for (std::size_t i = 0; i < obj.points.size(); ++i) {
            if (!obj.points[i].allFinite()) {
                report(Severity::error, id, i, "finite_point", "non-finite coordinate");
            }
        }
        for (std::size_t i = 0; i < obj.point_features.size(); ++i) {
            const auto& f = obj.point_features[i];
            if (f.size() != scene.feature_dim) {
                report(Severity::error, id, i, "feature_dim",
                       "feature length " + std::to_string(f.size()) + " != feature_dim " +
                           std::to_string(scene.feature_dim));
            } else if (!f.allFinite()) {
                report(Severity::error, id, i, "finite_feature", "non-finite feature entry");
            }
        }
        if (obj.embedding.size() != scene.embedding_dim) {
            report(Severity::error, id, std::nullopt, "embedding_dim",
                   "embedding length " + std::to_string(obj.embedding.size()) +
                       " != embedding_dim " + std::to_string(scene.embedding_dim));
        } else if (!obj.embedding.allFinite()) {
            report(Severity::error, id, std::nullopt, "finite_embedding", "non-finite embedding entry");
        } else if (obj.embedding.norm() == 0.0) {
            report(Severity::warning, id, std::nullopt, "zero_embedding", "embedding has zero norm");
        }
        if (!obj.centroid.allFinite()) {
            report(Severity::error, id, std::nullopt, "centroid", "non-finite centroid");
        } else if (!obj.points.empty() &&
                   std::all_of(obj.points.begin(), obj.points.end(),
                               [](const Vec3& p) { return p.allFinite(); })) {
            const double gap = (obj.centroid - mean_point(obj.points)).norm();
            if (gap > 1e-6) {
                report(Severity::error, id, std::nullopt, "centroid",
                       "centroid is " + std::to_string(gap) + " m from the point mean");
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON form

namespace {

double number_at(const json& v, const std::string& where) {
    // null stands in for NaN, which JSON cannot spell; validation reports it.
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number()) throw FormatError(where, "expected a number");
    return v.get<double>();
}

Vec3 vec3_at(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) throw FormatError(where, "expected [x, y, z]");
    return {number_at(v[0], where + "[0]"), number_at(v[1], where + "[1]"),
            number_at(v[2], where + "[2]")};
}

Eigen::VectorXd vector_at(const json& v, const std::string& where) {
    if (!v.is_array()) throw FormatError(where, "expected an array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = number_at(v[i], where + "[" + std::to_string(i) + "]");
    }
    return out;
}

const json& member(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw FormatError(where, std::string("missing key '") + key + "'");
    return *it;
}

json number_json(double x) {
    return std::isfinite(x) ? json(x) : json(nullptr);
}

json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(number_json(v[i]));
    return arr;
}

}  // namespace

SceneBundle scene_from_json(const json& doc) {
    if (!doc.is_object()) throw FormatError("$", "scene bundle must be a JSON object");
    SceneBundle scene;
    const auto& sid = member(doc, "scene_id", "$");
    if (!sid.is_string()) throw FormatError("scene_id", "expected a string");
    scene.scene_id = sid.get<std::string>();
    for (const char* key : {"feature_dim", "embedding_dim"}) {
        const auto& v = member(doc, key, "$");
        if (!v.is_number_integer()) throw FormatError(key, "expected an integer");
        (std::string(key) == "feature_dim" ? scene.feature_dim : scene.embedding_dim) = v.get<int>();
    }
    const auto& objects = member(doc, "objects", "$");
    if (!objects.is_array()) throw FormatError("objects", "expected an array");

    for (std::size_t oi = 0; oi < objects.size(); ++oi) {
        const std::string where = "objects[" + std::to_string(oi) + "]";
        const auto& o = objects[oi];
        if (!o.is_object()) throw FormatError(where, "expected an object");
        ObjectInstance obj;
        const auto& id = member(o, "id", where);
        if (!id.is_string()) throw FormatError(where + ".id", "expected a string");
        obj.id = id.get<std::string>();
        if (auto it = o.find("label"); it != o.end() && !it->is_null()) {
            if (!it->is_string()) throw FormatError(where + ".label", "expected a string or null");
            obj.label = it->get<std::string>();
        }
        const auto& pts = member(o, "points", where);
        if (!pts.is_array()) throw FormatError(where + ".points", "expected an array");
        obj.points.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            obj.points.push_back(vec3_at(pts[i], where + ".points[" + std::to_string(i) + "]"));
        }
        const auto& feats = member(o, "point_features", where);
        if (!feats.is_array()) throw FormatError(where + ".point_features", "expected an array");
        obj.point_features.reserve(feats.size());
        for (std::size_t i = 0; i < feats.size(); ++i) {
            obj.point_features.push_back(
                vector_at(feats[i], where + ".point_features[" + std::to_string(i) + "]"));
        }
        obj.embedding = vector_at(member(o, "embedding", where), where + ".embedding");
        if (auto it = o.find("centroid"); it != o.end() && !it->is_null()) {
            obj.centroid = vec3_at(*it, where + ".centroid");
        } else {
            obj.centroid = mean_point(obj.points);
        }
        scene.objects.push_back(std::move(obj));
    }

    auto diagnostics = validate_scene(scene);
    if (has_errors(diagnostics)) throw ValidationError(std::move(diagnostics));
    return scene;
}

SceneBundle parse_scene_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into a line number.
        const auto byte = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte ? byte - 1 : 0), '\n');
        throw FormatError("line " + std::to_string(line), e.what());
    }
    return scene_from_json(doc);
}

json scene_to_json(const SceneBundle& scene) {
    json objects = json::array();
    for (const auto& o : scene.objects) {
        json pts = json::array();
        for (const auto& p : o.points) pts.push_back(vec_json(p));
        json feats = json::array();
        for (const auto& f : o.point_features) feats.push_back(vec_json(f));
        objects.push_back({{"id", o.id},
                           {"label", o.label ? json(*o.label) : json(nullptr)},
                           {"centroid", vec_json(o.centroid)},
                           {"points", std::move(pts)},
                           {"point_features", std::move(feats)},
                           {"embedding", vec_json(o.embedding)}});
    }
    return {{"scene_id", scene.scene_id},
            {"feature_dim", scene.feature_dim},
            {"embedding_dim", scene.embedding_dim},
            {"objects", std::move(objects)}};
}

// ---------------------------------------------------------------------------
// Binary sidecar

namespace {

constexpr std::array<char, 8> kBinaryMagic{'S', 'A', 'B', 'U', 'N', 'D', 'L', '1'};

template <typename T>
T byteswap_if_needed(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        std::array<unsigned char, sizeof(T)> raw;
        std::memcpy(raw.data(), &v, sizeof(T));
        std::reverse(raw.begin(), raw.end());
        std::memcpy(&v, raw.data(), sizeof(T));
    }
    return v;
}

class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& os) : os_(os) {}

    void u32(std::uint32_t v) { raw(byteswap_if_needed(v)); }
    void f32(double v) { raw(byteswap_if_needed(static_cast<float>(v))); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        os_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    void floats(const Eigen::Ref<const Eigen::VectorXd>& v) {
        u32(static_cast<std::uint32_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) f32(v[i]);
    }

private:
    template <typename T>
    void raw(T v) {
        os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    std::ostream& os_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::istream& is) : is_(is) {}

    std::uint32_t u32(const std::string& where) { return byteswap_if_needed(raw<std::uint32_t>(where)); }
    double f32(const std::string& where) { return byteswap_if_needed(raw<float>(where)); }
    std::string str(const std::string& where) {
        const auto n = u32(where);
        std::string s(n, '\0');
        if (!is_.read(s.data(), n)) throw FormatError(where, "truncated string");
        return s;
    }
    Eigen::VectorXd floats(const std::string& where) {
        const auto n = u32(where);
        Eigen::VectorXd v(n);
        for (std::uint32_t i = 0; i < n; ++i) v[i] = f32(where);
        return v;
    }

private:
    template <typename T>
    T raw(const std::string& where) {
        T v{};
        if (!is_.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError(where, "truncated file");
        return v;
    }
    std::istream& is_;
};

}  // namespace

void save_scene_binary(const SceneBundle& scene, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path.string() + "' for writing");
    os.write(kBinaryMagic.data(), kBinaryMagic.size());
    BinaryWriter w(os);
    w.str(scene.scene_id);
    w.u32(static_cast<std::uint32_t>(scene.feature_dim));
    w.u32(static_cast<std::uint32_t>(scene.embedding_dim));
    w.u32(static_cast<std::uint32_t>(scene.objects.size()));
    for (const auto& o : scene.objects) {
        w.str(o.id);
        w.u32(o.label ? 1u : 0u);
        if (o.label) w.str(*o.label);
        w.u32(static_cast<std::uint32_t>(o.points.size()));
        for (const auto& p : o.points) {
            for (int c = 0; c < 3; ++c) w.f32(p[c]);
        }
        w.u32(static_cast<std::uint32_t>(o.point_features.size()));
        for (const auto& f : o.point_features) w.floats(f);
        w.floats(o.embedding);
    }
}

SceneBundle load_scene_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError(path.string(), "cannot open file");
    std::array<char, 8> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kBinaryMagic) {
        throw FormatError(path.string(), "not a binary scene bundle");
    }
    BinaryReader r(is);
    SceneBundle scene;
    scene.scene_id = r.str("scene_id");
    scene.feature_dim = static_cast<int>(r.u32("feature_dim"));
    scene.embedding_dim = static_cast<int>(r.u32("embedding_dim"));
    const auto n_objects = r.u32("objects");
    for (std::uint32_t oi = 0; oi < n_objects; ++oi) {
        const std::string where = "objects[" + std::to_string(oi) + "]";
        ObjectInstance o;
        o.id = r.str(where + ".id");
        if (r.u32(where + ".label")) o.label = r.str(where + ".label");
        const auto n = r.u32(where + ".points");
        o.points.resize(n);
        for (auto& p : o.points) {
            for (int c = 0; c < 3; ++c) p[c] = r.f32(where + ".points");
        }
        const auto rows = r.u32(where + ".point_features");
        o.point_features.reserve(rows);
        for (std::uint32_t i = 0; i < rows; ++i) o.point_features.push_back(r.floats(where + ".point_features"));
        o.embedding = r.floats(where + ".embedding");
        o.centroid = mean_point(o.points);
        scene.objects.push_back(std::move(o));
    }
    auto diagnostics = validate_scene(scene);
    if (has_errors(diagnostics)) throw ValidationError(std::move(diagnostics));
    return scene;
}

SceneBundle load_scene(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError(path.string(), "cannot open file");
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (is.gcount() == static_cast<std::streamsize>(magic.size()) && magic == kBinaryMagic) {
        is.close();
        return load_scene_binary(path);
    }
    is.clear();
    is.seekg(0);
    std::ostringstream buffer;
    buffer << is.rdbuf();
    return parse_scene_json(buffer.str());
}

void save_scene(const SceneBundle& scene, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path.string() + "' for writing");
    os << scene_to_json(scene).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Surface resampling

namespace {

struct VoxelKey {
    std::int64_t x, y, z;
    bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
    std::size_t operator()(const VoxelKey& k) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (std::int64_t v : {k.x, k.y, k.z}) {
            h ^= static_cast<std::uint64_t>(v);
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

}  // namespace

std::vector<PointSample> resample_object_surface(const ObjectInstance& obj, double spacing) {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
        throw ArgumentError("resample spacing must be positive, got " + std::to_string(spacing));
    }
    if (obj.points.empty()) throw ArgumentError("object '" + obj.id + "' has no points");

    struct Best {
        std::size_t index;
        double dist2;
    };
    std::unordered_map<VoxelKey, Best, VoxelKeyHash> cells;
    cells.reserve(obj.points.size());
    for (std::size_t i = 0; i < obj.points.size(); ++i) {
        const Vec3& p = obj.points[i];
        const VoxelKey key{static_cast<std::int64_t>(std::floor(p.x() / spacing)),
                           static_cast<std::int64_t>(std::floor(p.y() / spacing)),
                           static_cast<std::int64_t>(std::floor(p.z() / spacing))};
        const Vec3 center((static_cast<double>(key.x) + 0.5) * spacing,
                          (static_cast<double>(key.y) + 0.5) * spacing,
                          (static_cast<double>(key.z) + 0.5) * spacing);
        const double d2 = (p - center).squaredNorm();
        auto [it, inserted] = cells.try_emplace(key, Best{i, d2});
        if (!inserted && d2 < it->second.dist2) it->second = Best{i, d2};
    }

    std::vector<std::size_t> kept;
    kept.reserve(cells.size());
    for (const auto& [key, best] : cells) kept.push_back(best.index);
    std::sort(kept.begin(), kept.end());

    std::vector<PointSample> out;
    out.reserve(kept.size());
    for (auto i : kept) {
        out.push_back({obj.points[i],
                       i < obj.point_features.size() ? obj.point_features[i] : Eigen::VectorXd{},
                       obj.id});
    }
    return out;
}

}  // namespace scene_analogy
