#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "roadstereo/disparity.hpp"
#include "roadstereo/geometry.hpp"
#include "roadstereo/image.hpp"
#include "roadstereo/plane_prior.hpp"
#include "roadstereo/refiner.hpp"

namespace roadstereo {

struct PipelineConfig {
  int rho = 5;
  int tau = 1;
  double epsilon = 1.0;
  double delta = 20.0;
  double lambda = 1.0 / std::sqrt(2.0);
  double sigma_d = 1.0;
  double sigma_r = 5.0;
  int iterations = 3;
  double lrc_threshold = 1.0;
  // Unset: 2 delta with the perspective shift, the full row without it.
  std::optional<int> d_max;
  CameraRig rig;
  bool enable_pt = true;
  bool enable_cmv = true;
  bool enable_lrc = true;
  bool enable_refine = true;
  SparseMatchSettings sparse;

  RefineParams refine_params() const;
  int resolved_d_max(int image_width) const;
};

void validate(const PipelineConfig& config);
// Applies recognised keys; unknown keys throw kConfig.
void apply_config(PipelineConfig& config, const std::filesystem::path& path);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineReport {
  double mean_correlation = 0.0;  // winning cost, left map after verification
  double density_percent = 0.0;   // final valid / processable pixels
  std::size_t valid_pixels = 0;
  std::size_t lrc_rejected = 0;
  std::size_t clamp_rejected = 0;  // refined onto d_int +- 1
  std::size_t correspondences = 0;
  std::vector<StageTiming> timings;

  double total_seconds() const;
  std::string to_text(const PipelineConfig& config,
                      const PlanePrior& prior) const;
};

struct PipelineResult {
  PlanePrior prior;          // identity prior (alpha0 = delta) without PT
  DisparityField matching;   // subpixel + refined, in the shifted domain
  DisparityField final;      // after undo_pt
  PipelineReport report;
};

PipelineResult run_pipeline(const GrayImage& left, const GrayImage& right,
                            const PipelineConfig& config,
                            const KeypointMatcher* matcher = nullptr);

}  // namespace roadstereo
