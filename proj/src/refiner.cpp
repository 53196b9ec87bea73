#include "roadstereo/refiner.hpp"

#include <algorithm>
#include <cmath>

#include "roadstereo/error.hpp"

namespace roadstereo {

void validate(const RefineParams& params) {
  if (!(params.sigma_d > 0.0) || !(params.sigma_r > 0.0)) {
    throw Error(ErrorKind::kConfig, "sigma_d and sigma_r must be positive");
  }
  if (params.iterations < 0) {
    throw Error(ErrorKind::kConfig, "iterations must be >= 0");
  }
  if (!(params.lambda >= 0.0)) {
    throw Error(ErrorKind::kConfig, "lambda must be >= 0");
  }
}

ParabolaField::ParabolaField(int width_, int height_)
    : width(width_), height(height_) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  parabola.assign(n, Parabola{});
  d_s.assign(n, 0.0);
  d_int.assign(n, 0);
  valid.assign(n, 0);
}

ParabolaField to_parabola_field(const DisparityField& field) {
  ParabolaField out(field.width, field.height);
  for (std::size_t i = 0; i < field.d.size(); ++i) {
    out.valid[i] = field.valid[i] && field.has_parabola[i];
    out.parabola[i] = field.parabola[i];
    out.d_s[i] = field.d[i];
    out.d_int[i] = field.d_int[i];
  }
  return out;
}

DisparityField apply_refinement(const DisparityField& field,
                                const ParabolaField& refined) {
  DisparityField out = field;
  for (std::size_t i = 0; i < out.d.size(); ++i) {
    if (!refined.valid[i]) continue;
    out.d[i] = refined.d_s[i];
    out.parabola[i] = refined.parabola[i];
  }
  return out;
}

double neighbor_weight(double d_center, double d_neighbor, double edge_length,
                       const RefineParams& params) {
  const double dd = d_neighbor - d_center;
  return std::exp(-(edge_length * edge_length) /
                  (params.sigma_d * params.sigma_d)) *
         std::exp(-(dd * dd) / (params.sigma_r * params.sigma_r));
}

namespace {

constexpr int kOffsets[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};

// sum_m w_m f_m and sum_m w_m over the valid four-connected neighbors.
std::pair<Parabola, double> weighted_neighbors(const ParabolaField& field,
                                               int u, int v,
                                               const RefineParams& params) {
  const std::size_t c = field.index(u, v);
  Parabola sum;
  double weights = 0.0;
  for (const auto& [du, dv] : kOffsets) {
    const int x = u + du;
    const int y = v + dv;
    if (x < 0 || y < 0 || x >= field.width || y >= field.height) continue;
    const std::size_t n = field.index(x, y);
    if (!field.valid[n]) continue;
    const double w =
        neighbor_weight(field.d_s[c], field.d_s[n], params.edge_length, params);
    sum.b0 += w * field.parabola[n].b0;
    sum.b1 += w * field.parabola[n].b1;
    sum.b2 += w * field.parabola[n].b2;
    weights += w;
  }
  return {sum, weights};
}

}  // namespace

Parabola aggregate_energy(const ParabolaField& field, int u, int v,
                          const RefineParams& params) {
  const auto [sum, weights] = weighted_neighbors(field, u, v, params);
  const Parabola& f = field.parabola[field.index(u, v)];
  return {-f.b0 - params.lambda * sum.b0, -f.b1 - params.lambda * sum.b1,
          -f.b2 - params.lambda * sum.b2};
}

ParabolaField refine_once(const ParabolaField& field,
                          const RefineParams& params) {
  ParabolaField out = field;
  for (int v = 0; v < field.height; ++v) {
    for (int u = 0; u < field.width; ++u) {
      const std::size_t i = field.index(u, v);
      if (!field.valid[i]) continue;
      const auto [sum, weights] = weighted_neighbors(field, u, v, params);
      const Parabola& f = field.parabola[i];
      const Parabola energy{-f.b0 - params.lambda * sum.b0,
                            -f.b1 - params.lambda * sum.b1,
                            -f.b2 - params.lambda * sum.b2};
      if (!(energy.b2 > 0.0)) continue;  // only reachable with b2 >= 0 labels
      const double lo = field.d_int[i] - 1.0;
      const double hi = field.d_int[i] + 1.0;
      out.d_s[i] = std::clamp(energy.vertex(), lo, hi);
      const double norm = 1.0 + params.lambda * weights;
      out.parabola[i] = {-energy.b0 / norm, -energy.b1 / norm,
                         -energy.b2 / norm};
    }
  }
  return out;
}

ParabolaField refine(const ParabolaField& field, const RefineParams& params) {
  validate(params);
  ParabolaField current = field;
  for (int k = 0; k < params.iterations; ++k) {
    current = refine_once(current, params);
  }
  return current;
}

}  // namespace roadstereo
