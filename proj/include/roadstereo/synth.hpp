#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "roadstereo/disparity.hpp"
#include "roadstereo/geometry.hpp"
#include "roadstereo/image.hpp"

namespace roadstereo {

// World frame: origin at the left camera, X to the right, Y pointing down
// toward the road, Z forward along the road. The road is the plane
// Y = camera_height. Camera axes map to the world by rotation_matrix(pose).
struct Groove {
  double offset_x = 35.0;  // from the slab origin, mm
  double offset_z = 35.0;
  double size_x = 30.0;
  double size_z = 30.0;
  double depth = 8.0;
};

struct Slab {
  double x = 0.0;  // near-left corner on the road, mm
  double z = 0.0;
  double size_x = 100.0;
  double size_z = 100.0;
  double height = 10.0;
  std::optional<Groove> groove;
};

struct SceneSpec {
  int width = 1240;
  int height = 620;
  CameraRig rig;
  double pitch = 1.2217304763960306;  // 70 degrees
  double roll = 0.0;
  double camera_height = 470.0;       // mm
  std::uint64_t seed = 1;
  double texture_scale = 2.0;         // coarsest noise wavelength, mm
  int texture_octaves = 3;
  double texture_contrast = 100.0;
  std::vector<Slab> models;
};

void validate(const SceneSpec& spec);

// Model A analogue: 100 x 100 x 10 mm slab, optionally with a centered
// 30 x 30 x 8 mm groove, roughly 500 mm from the camera.
enum class ScenePreset { kPlane, kSlab, kGroove };
SceneSpec desk_scene(ScenePreset preset);

SceneSpec load_scene_spec(const std::filesystem::path& path);
SceneSpec parse_scene_spec(const std::string& text);

enum class Region : std::uint8_t {
  kNone = 0,
  kRoad = 1,
  kModelTop = 2,
  kGrooveFloor = 3,
  kModelSide = 4,
};

struct GroundTruth {
  int width = 0;
  int height = 0;
  std::vector<double> disparity;      // f Tc / Z of the left pixel
  std::vector<std::uint8_t> occluded; // hidden or out of frame in the right view
  std::vector<Region> region;

  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * width + u;
  }
};

struct RenderedPair {
  GrayImage left;
  GrayImage right;
  GroundTruth truth;
};

RenderedPair render(const SceneSpec& spec);

// Analytic v-disparity line of the bare road for the left view.
PlanePrior analytic_road_line(const SceneSpec& spec);

struct TruthMetrics {
  double bad_percent = 0.0;
  double mean_abs_error = 0.0;
  std::size_t count = 0;
};

// Over pixels that are valid in est and not occluded in truth.
TruthMetrics truth_compare(const DisparityField& est, const GroundTruth& truth,
                           double threshold);

void save_truth(const std::filesystem::path& dir, const RenderedPair& pair);
// Reads truth.dsp and occlusion.pgm (255 = occluded) from paths.
GroundTruth load_truth(const std::filesystem::path& disparity_path,
                       const std::filesystem::path& occlusion_path);

}  // namespace roadstereo
