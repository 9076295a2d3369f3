#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scene_analogy/pipeline.hpp"
#include "scene_analogy/scene.hpp"
#include "scene_analogy/testkit.hpp"

namespace fixtures {

using scene_analogy::Vec3;

/// Object with the given points, zero features of length `feature_dim`, and
/// the supplied embedding; the centroid is the point mean.
scene_analogy::ObjectInstance make_object(const std::string& id, std::vector<Vec3> points,
                                          const Eigen::VectorXd& embedding, int feature_dim = 2);

/// Bundle of single-point objects at `centroids`, one embedding each.
scene_analogy::SceneBundle point_objects(const std::vector<Vec3>& centroids,
                                         const std::vector<Eigen::VectorXd>& embeddings,
                                         const std::string& scene_id = "s");

/// Pipeline settings sized for this test suite: a coarser fine-stage sample
/// spacing keeps runs short; every other value is the default.
scene_analogy::PipelineConfig quick_config();

/// A fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

std::string read_file(const std::filesystem::path& path);

}  // namespace fixtures
