#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "roadstereo/disparity.hpp"
#include "roadstereo/image.hpp"

namespace roadstereo {

// NCC between the left block centered at (u, v) and the right block centered
// at (u - d, v), using precomputed block means and deviations so that only
// the dot product is evaluated per call:
//
//   c = (sum(i_l * i_r) - n mu_l mu_r) / (n sigma_l sigma_r)
//
// Returns nullopt when either block is undefined or has zero deviation.
std::optional<double> try_ncc_cost(const GrayImage& left,
                                   const GrayImage& right,
                                   const BlockStats& stats_l,
                                   const BlockStats& stats_r, int u, int v,
                                   int d);

// As above but throws kTexturelessBlock for zero deviation and
// kInvalidArgument when a block does not fit.
double ncc_cost(const GrayImage& left, const GrayImage& right,
                const BlockStats& stats_l, const BlockStats& stats_r, int u,
                int v, int d);

// Owns the block statistics of one rectified pair and evaluates c(u, v, d)
// for d in [0, d_max].
class NccCostVolume {
 public:
  NccCostVolume(const GrayImage& left, const GrayImage& right, int rho,
                int d_max);

  std::optional<double> cost(int u, int v, int d) const;

  int width() const { return left_->width(); }
  int height() const { return left_->height(); }
  int rho() const { return rho_; }
  int d_max() const { return d_max_; }
  // Block of the left image is defined and textured.
  bool textured(int u, int v) const;
  const BlockStats& stats_left() const { return stats_l_; }
  const BlockStats& stats_right() const { return stats_r_; }

 private:
  const GrayImage* left_;
  const GrayImage* right_;
  int rho_;
  int d_max_;
  BlockStats stats_l_;
  BlockStats stats_r_;
};

// Sorted set of candidate disparities.
using SearchRange = std::vector<int>;

// Union of [l_k - tau, l_k + tau] over the valid neighbors on the row below,
// clipped at zero. Throws kInvalidArgument ("propagation hole") when no
// neighbor is valid.
SearchRange propagate_range(std::span<const std::optional<int>, 3> neighbors,
                            int tau);

struct SrpParams {
  int rho = 5;
  int tau = 1;
  int d_max = 40;
};

// Winner-take-all over d in [0, d_max] for every pixel of one row. Writes
// d, d_int, valid and the evaluated costs around the winner into field.
void full_search_row(const NccCostVolume& volume, int row,
                     DisparityField& field);

// Integer disparities by search-range propagation from the bottom row up.
// The bottom processable row runs a full search; each higher row runs WTA
// over the range propagated from the row below. Pixels with no valid
// neighbor below take the range of the nearest propagated pixel on the same
// row; a row with no propagated pixel at all falls back to a full search.
// Ties break toward the smaller disparity.
DisparityField srp_estimate(const NccCostVolume& volume, int tau);
DisparityField srp_estimate(const GrayImage& left, const GrayImage& right,
                            const SrpParams& params);

// Walks each valid pixel uphill in d until c(d) is a strict local maximum,
// evaluating missing costs on demand. Pixels whose walk leaves [0, d_max],
// hits an undefined cost, sits in a valley or on a plateau are invalidated.
// On return costs[i] holds the three bracketing costs of every valid pixel.
DisparityField cmv(const DisparityField& field, const NccCostVolume& volume);
// Same walk over an arbitrary cost accessor; nullopt marks costs outside the
// searchable range.
using CostFn = std::function<std::optional<double>(int u, int v, int d)>;
DisparityField cmv(const DisparityField& field, const CostFn& cost);

// Keeps a left pixel iff its match in the right map is in bounds, valid and
// agrees to within threshold. row_shift[v] is the perspective shift that
// was applied on row v (empty = none); both fields must be in the same
// shifted domain.
DisparityField lrc_check(const DisparityField& left_field,
                         const DisparityField& right_field, double threshold,
                         std::span<const double> row_shift = {});

// Parabola vertex through the three bracketing costs of every valid pixel.
// Requires the post-CMV local-maximum property; throws kInternal otherwise.
DisparityField subpixel(const DisparityField& field);

// Drops valid pixels that are not a strict local maximum, for runs where
// verification was disabled.
DisparityField keep_local_maxima(const DisparityField& field,
                                 const NccCostVolume& volume);

// Disparities for the right view: ranges are searched from right pixel u_r
// towards left pixel u_r + d. Implemented by mirroring both images.
DisparityField srp_estimate_right(const GrayImage& left, const GrayImage& right,
                                  const SrpParams& params, bool verify);

}  // namespace roadstereo
