#pragma once

#include <optional>

#include "roadstereo/image.hpp"

namespace roadstereo::detail {

// NCC between the left block at (ul, vl) and the right block at (ur, vr).
inline std::optional<double> block_ncc(const GrayImage& left,
                                       const BlockStats& stats_l, int ul,
                                       int vl, const GrayImage& right,
                                       const BlockStats& stats_r, int ur,
                                       int vr) {
  if (!stats_l.is_defined(ul, vl) || !stats_r.is_defined(ur, vr)) {
    return std::nullopt;
  }
  const double sl = stats_l.stddev(ul, vl);
  const double sr = stats_r.stddev(ur, vr);
  if (sl <= 0.0 || sr <= 0.0) return std::nullopt;

  const int rho = stats_l.rho;
  const int side = 2 * rho + 1;
  double dot = 0.0;
  for (int y = -rho; y <= rho; ++y) {
    const double* pl = left.row(vl + y).data() + (ul - rho);
    const double* pr = right.row(vr + y).data() + (ur - rho);
    double acc = 0.0;
    for (int x = 0; x < side; ++x) acc += pl[x] * pr[x];
    dot += acc;
  }
  const double n = static_cast<double>(side) * side;
  return (dot - n * stats_l.mean(ul, vl) * stats_r.mean(ur, vr)) /
         (n * sl * sr);
}

}  // namespace roadstereo::detail
