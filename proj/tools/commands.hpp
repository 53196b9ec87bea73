#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "roadstereo/geometry.hpp"
#include "roadstereo/pipeline.hpp"
#include "roadstereo/synth.hpp"

namespace roadstereo::cli {

namespace fs = std::filesystem;

// Writes left.pgm, right.pgm, truth.dsp, occlusion.pgm, regions.pgm, rig.cfg.
RenderedPair cmd_synth(const SceneSpec& spec, const fs::path& out_dir);

// Writes disparity.png, disparity.dsp, mask.pgm, prior.txt, report.txt.
PipelineResult cmd_disparity(const fs::path& left, const fs::path& right,
                             const PipelineConfig& config,
                             const fs::path& out_dir, std::ostream& log);

struct ReconstructOptions {
  fs::path disparity;                // DSP1 or 16-bit PNG
  std::optional<fs::path> prior;     // pitch source; refit from d if absent
  CameraRig rig;
  bool zero_pose = false;
  std::optional<PixelRect> roll_patch;
  fs::path out;
};

struct ReconstructResult {
  Pose pose;
  PointCloud cloud;
};

ReconstructResult cmd_reconstruct(const ReconstructOptions& options);

// Writes "count,bad_percent,mean_abs_error" CSV when csv is non-empty.
TruthMetrics cmd_eval(const fs::path& estimate, const fs::path& truth,
                      const fs::path& occlusion, double threshold,
                      const fs::path& csv);

struct MeasureOptions {
  fs::path cloud;
  std::vector<std::pair<int, int>> corner_pixels;
  std::vector<Eigen::Vector3d> corner_points;
  std::optional<PixelRect> probe_rect;
  std::vector<std::pair<int, int>> probe_pixels;
  bool depth = false;         // report distances below the plane as positive
  std::size_t samples = 0;    // 0 = every probe
  std::uint64_t seed = 1;
  fs::path out;               // CSV, optional
};

struct MeasureResult {
  std::vector<Eigen::Vector3d> probes;
  std::vector<double> distances;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

MeasureResult cmd_measure(const MeasureOptions& options);

// "u,v;u,v;..." -> pixel list.
std::vector<std::pair<int, int>> parse_pixel_list(const std::string& text);
// "x,y,z;x,y,z;..." -> points.
std::vector<Eigen::Vector3d> parse_point_list(const std::string& text);
// "u0,v0,u1,v1" -> [u0,u1) x [v0,v1).
PixelRect parse_rect(const std::string& text);

}  // namespace roadstereo::cli
