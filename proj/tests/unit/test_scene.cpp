#include <doctest.h>

#include <cmath>
#include <set>
#include <tuple>

#include "fixtures.hpp"
#include "scene_analogy/errors.hpp"
#include "scene_analogy/scene.hpp"
#include "scene_analogy/testkit.hpp"

using namespace scene_analogy;
using nlohmann::json;

namespace {

SceneBundle two_object_scene() {
    SceneBundle s;
    s.scene_id = "room";
    s.feature_dim = 2;
    s.embedding_dim = 3;
    auto a = fixtures::make_object("a", {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, Eigen::Vector3d(1, 0, 0));
    a.point_features = {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(0.5, 0.5)};
    auto b = fixtures::make_object("b", {{2, 2, 0}, {2, 3, 1}}, Eigen::Vector3d(0, 1, 0));
    b.label.reset();
    s.objects = {a, b};
    return s;
}

bool has_rule(const std::vector<Diagnostic>& ds, const std::string& rule) {
    for (const auto& d : ds) {
        if (d.rule == rule) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("well formed scene has no diagnostics") {
    CHECK(validate_scene(two_object_scene()).empty());
}

TEST_CASE("json round trip preserves every field") {
    const auto s = two_object_scene();
    const auto back = scene_from_json(scene_to_json(s));
    REQUIRE(back.objects.size() == 2);
    CHECK(back.scene_id == "room");
    CHECK(back.objects[0].label == std::optional<std::string>("a"));
    CHECK_FALSE(back.objects[1].label.has_value());
    for (std::size_t o = 0; o < 2; ++o) {
        CHECK(back.objects[o].points == s.objects[o].points);
        CHECK(back.objects[o].point_features == s.objects[o].point_features);
        CHECK(back.objects[o].embedding == s.objects[o].embedding);
        CHECK((back.objects[o].centroid - s.objects[o].centroid).norm() < 1e-15);
    }
    CHECK(scene_to_json(back) == scene_to_json(s));
}

TEST_CASE("missing centroid is filled with the point mean") {
    auto j = scene_to_json(two_object_scene());
    j["objects"][1].erase("centroid");
    const auto s = scene_from_json(j);
    CHECK((s.objects[1].centroid - Vec3(2, 2.5, 0.5)).norm() < 1e-15);
}

TEST_CASE("feature row count mismatch is a single error") {
    auto s = two_object_scene();
    s.objects[0].point_features.pop_back();
    const auto ds = validate_scene(s);
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].rule == "feature_rows");
    CHECK(ds[0].object_id == "a");
    CHECK(ds[0].severity == Severity::error);
}

TEST_CASE("each non-finite point is reported with its index") {
    auto s = two_object_scene();
    s.objects[0].points[1].y() = std::nan("");
    s.objects[0].points[2].z() = INFINITY;
    s.objects[0].centroid = mean_point(s.objects[0].points);
    const auto ds = validate_scene(s);
    std::set<std::size_t> idx;
    for (const auto& d : ds) {
        if (d.rule == "finite_point") idx.insert(*d.point_index);
    }
    CHECK(idx == std::set<std::size_t>{1, 2});
}

TEST_CASE("json null coordinate surfaces as a validation error naming the point") {
    auto j = scene_to_json(two_object_scene());
    j["objects"][0]["points"][2][0] = nullptr;
    j["objects"][0].erase("centroid");
    try {
        scene_from_json(j);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        REQUIRE_FALSE(e.diagnostics().empty());
        CHECK(e.diagnostics()[0].rule == "finite_point");
        CHECK(e.diagnostics()[0].point_index == std::optional<std::size_t>(2));
        CHECK(e.diagnostics()[0].to_string().find("a") != std::string::npos);
    }
}

TEST_CASE("zero embedding is a warning, not an error") {
    auto s = two_object_scene();
    s.objects[1].embedding.setZero();
    const auto ds = validate_scene(s);
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].severity == Severity::warning);
    CHECK_FALSE(has_errors(ds));
    CHECK_NOTHROW(scene_from_json(scene_to_json(s)));
}

TEST_CASE("structural rules") {
    SUBCASE("duplicate ids") {
        auto s = two_object_scene();
        s.objects[1].id = "a";
        CHECK(has_rule(validate_scene(s), "unique_id"));
    }
    SUBCASE("wrong feature length") {
        auto s = two_object_scene();
        s.objects[0].point_features[0] = Eigen::Vector3d(1, 2, 3);
        CHECK(has_rule(validate_scene(s), "feature_dim"));
    }
    SUBCASE("wrong embedding length") {
        auto s = two_object_scene();
        s.objects[0].embedding = Eigen::Vector2d(1, 0);
        CHECK(has_rule(validate_scene(s), "embedding_dim"));
    }
    SUBCASE("centroid off the point mean") {
        auto s = two_object_scene();
        s.objects[0].centroid.x() += 1e-3;
        CHECK(has_rule(validate_scene(s), "centroid"));
    }
    SUBCASE("empty object and empty scene") {
        auto s = two_object_scene();
        s.objects[1].points.clear();
        s.objects[1].point_features.clear();
        CHECK(has_rule(validate_scene(s), "points"));
        s.objects.clear();
        CHECK(has_rule(validate_scene(s), "objects"));
    }
}

TEST_CASE("syntax errors carry a line number") {
    const std::string text = "{\n  \"scene_id\": \"x\",\n  \"feature_dim\": 2,\n  oops\n}";
    try {
        parse_scene_json(text);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.context().find("line 4") != std::string::npos);
    }
}

TEST_CASE("schema errors carry a field path") {
    auto j = scene_to_json(two_object_scene());
    j["objects"][1]["points"][0] = "nope";
    try {
        scene_from_json(j);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.context().find("objects[1]") != std::string::npos);
    }
}

TEST_CASE("file round trips: json and binary") {
    const auto dir = fixtures::temp_dir("scene_io");
    const auto s = testkit::gen_scene(testkit::random_layout(3, 2, 0.1));
    save_scene(s, dir / "s.json");
    save_scene_binary(s, dir / "s.bin");
    const auto j = load_scene(dir / "s.json");
    const auto b = load_scene(dir / "s.bin");
    CHECK(scene_to_json(j) == scene_to_json(s));
    REQUIRE(b.objects.size() == s.objects.size());
    for (std::size_t o = 0; o < s.objects.size(); ++o) {
        for (std::size_t i = 0; i < s.objects[o].points.size(); ++i) {
            CHECK((b.objects[o].points[i] - s.objects[o].points[i]).norm() < 1e-6);
        }
        CHECK((b.objects[o].embedding - s.objects[o].embedding).norm() < 1e-6);
        CHECK(b.objects[o].label == s.objects[o].label);
    }
    CHECK(validate_scene(b).empty());
}

TEST_CASE("resampling keeps one representative per occupied voxel") {
    const auto scene = testkit::gen_scene(testkit::random_layout(5, 1, 0.03));
    const auto& obj = scene.objects[0];
    for (double spacing : {0.05, 0.1, 0.17}) {
        CAPTURE(spacing);
        using Key = std::tuple<long, long, long>;
        auto key = [&](const Vec3& p) {
            return Key{static_cast<long>(std::floor(p.x() / spacing)), static_cast<long>(std::floor(p.y() / spacing)),
                       static_cast<long>(std::floor(p.z() / spacing))};
        };
        std::set<Key> cells;
        for (const auto& p : obj.points) cells.insert(key(p));

        const auto samples = resample_object_surface(obj, spacing);
        CHECK(samples.size() == cells.size());
        std::set<Key> seen;
        for (const auto& s : samples) {
            CHECK(s.owner == obj.id);
            const auto k = key(s.position);
            CHECK(seen.insert(k).second);
            // brute force: no point of the same voxel sits closer to its center
            const Vec3 center = (Vec3(std::get<0>(k), std::get<1>(k), std::get<2>(k)) + Vec3::Constant(0.5)) * spacing;
            for (const auto& p : obj.points) {
                if (key(p) == k) CHECK((p - center).norm() >= (s.position - center).norm());
            }
        }
    }
    CHECK_THROWS_AS(resample_object_surface(obj, 0.0), ArgumentError);
}

TEST_CASE("resampling at a spacing finer than the data keeps every distinct point") {
    auto obj = fixtures::make_object("o", {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, Eigen::Vector3d(1, 0, 0));
    const auto samples = resample_object_surface(obj, 0.01);
    REQUIRE(samples.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(samples[i].position == obj.points[i]);
}
