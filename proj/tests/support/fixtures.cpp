#include "fixtures.hpp"

#include <fstream>
#include <sstream>

namespace fixtures {

scene_analogy::ObjectInstance make_object(const std::string& id, std::vector<Vec3> points,
                                          const Eigen::VectorXd& embedding, int feature_dim) {
    scene_analogy::ObjectInstance o;
    o.id = id;
    o.label = id;
    o.centroid = scene_analogy::mean_point(points);
    o.point_features.assign(points.size(), Eigen::VectorXd::Zero(feature_dim));
    o.points = std::move(points);
    o.embedding = embedding;
    return o;
}

scene_analogy::SceneBundle point_objects(const std::vector<Vec3>& centroids,
                                         const std::vector<Eigen::VectorXd>& embeddings, const std::string& scene_id) {
    scene_analogy::SceneBundle s;
    s.scene_id = scene_id;
    s.feature_dim = 2;
    s.embedding_dim = static_cast<int>(embeddings.front().size());
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        s.objects.push_back(make_object("o" + std::to_string(i), {centroids[i]}, embeddings[i]));
    }
    return s;
}

scene_analogy::PipelineConfig quick_config() {
    scene_analogy::PipelineConfig cfg;
    cfg.optim.sample_spacing = 0.15;
    return cfg;
}

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("sa_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace fixtures
