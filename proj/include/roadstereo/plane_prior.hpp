#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "roadstereo/disparity.hpp"
#include "roadstereo/image.hpp"

namespace roadstereo {

struct Correspondence {
  double u_l = 0.0;
  double v_l = 0.0;
  double u_r = 0.0;
  double v_r = 0.0;
  double score = 0.0;

  double disparity() const { return u_l - u_r; }
};

// v-disparity line d = alpha0 + alpha1 v and the residual offset delta left
// after the perspective shift s(v) = alpha0 + alpha1 v - delta.
struct PlanePrior {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double delta = 20.0;

  double line(double v) const { return alpha0 + alpha1 * v; }
  double shift(double v) const { return alpha0 + alpha1 * v - delta; }
  std::vector<double> row_shifts(int height) const;
};

// Throws kConfig if s(v) < 0 on any row in [0, height).
void validate_prior(const PlanePrior& prior, int height);

void save_prior(const std::filesystem::path& path, const PlanePrior& prior);
PlanePrior load_prior(const std::filesystem::path& path);

struct SparseMatchSettings {
  int rho = 5;
  // One interest point per cell: the block-variance maximum inside it.
  int cell = 64;
  double min_sigma = 4.0;
  // Candidate rows v_r in [v_l - row_tolerance, v_l + row_tolerance].
  int row_tolerance = 1;
  // Largest u_l - u_r searched; negative means the whole row.
  int max_disparity = -1;
  // Smallest u_l - u_r searched.
  int min_disparity = 0;
  double min_score = 0.8;
  // Best score must beat the best candidate more than 2 px away by this much.
  double uniqueness = 0.05;
  // Keep a match only if the right block's best left match on the same row
  // lies within 1 px of the original left point.
  bool cross_check = true;
};

class KeypointMatcher {
 public:
  virtual ~KeypointMatcher() = default;
  virtual std::vector<Correspondence> match(const GrayImage& left,
                                            const GrayImage& right) const = 0;
};

// Interest points at local block-variance maxima, described by their raw
// (2rho+1)^2 patch and matched by NCC along nearby rows. The matched right
// column is refined to subpixel by a parabola through the NCC scores.
class PatchNccMatcher : public KeypointMatcher {
 public:
  explicit PatchNccMatcher(SparseMatchSettings settings = {})
      : settings_(settings) {}

  std::vector<Correspondence> match(const GrayImage& left,
                                    const GrayImage& right) const override;

  // Exposed for tests.
  std::vector<std::pair<int, int>> detect(const GrayImage& img,
                                          const BlockStats& stats) const;

 private:
  SparseMatchSettings settings_;
};

std::vector<Correspondence> match_sparse(const GrayImage& left,
                                         const GrayImage& right,
                                         const SparseMatchSettings& settings);

// Keeps matches with |v_l - v_r| <= epsilon and u_l - u_r >= 0.
std::vector<Correspondence> filter_correspondences(
    const std::vector<Correspondence>& matches, double epsilon);

// Ordinary least squares fit of d = alpha0 + alpha1 v. delta is left at its
// default. Throws kInsufficientPlaneEvidence on fewer than two points or when
// all v coincide.
PlanePrior fit_vdisparity_line(const std::vector<Correspondence>& matches);

enum class Reference { kLeft, kRight };

// Shifts every row of the target image by s(v). With the left image as
// reference the right image moves right, out(u) = in(u - s); with the right
// image as reference the left image moves left, out(u) = in(u + s).
// Fractional shifts interpolate linearly; samples taken from outside the
// frame are marked invalid.
GrayImage apply_pt(const GrayImage& target, const PlanePrior& prior,
                   Reference reference);

// Adds s(v) to every valid disparity on row v.
DisparityField undo_pt(const DisparityField& field, const PlanePrior& prior);

// match_sparse -> filter_correspondences -> fit_vdisparity_line.
PlanePrior estimate_plane_prior(const GrayImage& left, const GrayImage& right,
                                const KeypointMatcher& matcher, double epsilon,
                                double delta);

}  // namespace roadstereo
