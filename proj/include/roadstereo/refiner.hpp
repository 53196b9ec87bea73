#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "roadstereo/disparity.hpp"

namespace roadstereo {

struct RefineParams {
  double lambda = 1.0 / std::sqrt(2.0);
  double sigma_d = 1.0;
  double sigma_r = 5.0;
  int iterations = 3;
  // Spatial length of each four-connected edge.
  double edge_length = 1.0;
};

void validate(const RefineParams& params);

// Correlation parabolas used as MRF labels.
struct ParabolaField {
  int width = 0;
  int height = 0;
  std::vector<Parabola> parabola;
  std::vector<double> d_s;
  std::vector<int> d_int;
  std::vector<std::uint8_t> valid;

  ParabolaField() = default;
  ParabolaField(int width, int height);

  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * width + u;
  }
};

ParabolaField to_parabola_field(const DisparityField& field);
// Writes d_s and parabolas back into a copy of field.
DisparityField apply_refinement(const DisparityField& field,
                                const ParabolaField& refined);

// exp(-|E|^2 / sigma_d^2) * exp(-(d_n - d_p)^2 / sigma_r^2)
double neighbor_weight(double d_center, double d_neighbor, double edge_length,
                       const RefineParams& params);

// Coefficients of E(d) = -f_p(d) - lambda sum_m w_m f_m(d) over the valid
// four-connected neighbors of (u, v).
Parabola aggregate_energy(const ParabolaField& field, int u, int v,
                          const RefineParams& params);

// One synchronous update: every valid pixel moves to the minimum of its
// aggregated energy, clamped to [d_int - 1, d_int + 1], and its label is
// replaced with the aggregate normalized by 1 + lambda sum_m w_m.
ParabolaField refine_once(const ParabolaField& field,
                          const RefineParams& params);

ParabolaField refine(const ParabolaField& field, const RefineParams& params);

}  // namespace roadstereo
