#include "roadstereo/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ncc_internal.hpp"
#include "roadstereo/error.hpp"

namespace roadstereo {

std::optional<double> try_ncc_cost(const GrayImage& left,
                                   const GrayImage& right,
                                   const BlockStats& stats_l,
                                   const BlockStats& stats_r, int u, int v,
                                   int d) {
  return detail::block_ncc(left, stats_l, u, v, right, stats_r, u - d, v);
}

double ncc_cost(const GrayImage& left, const GrayImage& right,
                const BlockStats& stats_l, const BlockStats& stats_r, int u,
                int v, int d) {
  if (!stats_l.is_defined(u, v) || !stats_r.is_defined(u - d, v)) {
    throw Error(ErrorKind::kInvalidArgument,
                "block does not fit at (" + std::to_string(u) + ", " +
                    std::to_string(v) + ") with d = " + std::to_string(d));
  }
  auto c = try_ncc_cost(left, right, stats_l, stats_r, u, v, d);
  if (!c) throw Error(ErrorKind::kTexturelessBlock, "textureless block");
  return *c;
}

NccCostVolume::NccCostVolume(const GrayImage& left, const GrayImage& right,
                             int rho, int d_max)
    : left_(&left),
      right_(&right),
      rho_(rho),
      d_max_(d_max),
      stats_l_(compute_block_stats(left, rho)),
      stats_r_(compute_block_stats(right, rho)) {
  if (left.width() != right.width() || left.height() != right.height()) {
    throw Error(ErrorKind::kInvalidArgument,
                "stereo pair must have equal dimensions");
  }
  if (d_max < 0) {
    throw Error(ErrorKind::kInvalidArgument, "d_max must be >= 0");
  }
}

std::optional<double> NccCostVolume::cost(int u, int v, int d) const {
  if (d < 0 || d > d_max_) return std::nullopt;
  return detail::block_ncc(*left_, stats_l_, u, v, *right_, stats_r_, u - d,
                           v);
}

bool NccCostVolume::textured(int u, int v) const {
  return stats_l_.is_defined(u, v) && stats_l_.stddev(u, v) > 0.0;
}

SearchRange propagate_range(std::span<const std::optional<int>, 3> neighbors,
                            int tau) {
  SearchRange range;
  for (const auto& n : neighbors) {
    if (!n) continue;
    for (int d = std::max(0, *n - tau); d <= *n + tau; ++d) range.push_back(d);
  }
  if (range.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "propagation hole");
  }
  std::sort(range.begin(), range.end());
  range.erase(std::unique(range.begin(), range.end()), range.end());
  return range;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// WTA over a sorted candidate list. Strict comparison keeps the smaller
// disparity on ties.
void solve_pixel(const NccCostVolume& volume, int u, int v,
                 const SearchRange& range, DisparityField& field,
                 std::vector<double>& scratch) {
  const std::size_t i = field.index(u, v);
  field.invalidate(i);
  if (!volume.textured(u, v)) return;

  scratch.assign(range.size(), kNaN);
  int best = -1;
  double best_cost = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < range.size(); ++k) {
    const auto c = volume.cost(u, v, range[k]);
    if (!c) continue;
    scratch[k] = *c;
    if (*c > best_cost) {
      best_cost = *c;
      best = static_cast<int>(k);
    }
  }
  if (best < 0) return;

  const int d = range[best];
  auto lookup = [&](int target) {
    auto it = std::lower_bound(range.begin(), range.end(), target);
    return (it != range.end() && *it == target) ? scratch[it - range.begin()]
                                                : kNaN;
  };
  field.valid[i] = 1;
  field.d_int[i] = d;
  field.d[i] = d;
  field.costs[i] = {lookup(d - 1), best_cost, lookup(d + 1)};
}

}  // namespace

void full_search_row(const NccCostVolume& volume, int row,
                     DisparityField& field) {
  SearchRange range(volume.d_max() + 1);
  for (int d = 0; d <= volume.d_max(); ++d) range[d] = d;
  std::vector<double> scratch;
  for (int u = 0; u < volume.width(); ++u) {
    solve_pixel(volume, u, row, range, field, scratch);
  }
}

DisparityField srp_estimate(const NccCostVolume& volume, int tau) {
  if (tau < 0) throw Error(ErrorKind::kInvalidArgument, "tau must be >= 0");
  const int w = volume.width();
  const int h = volume.height();
  const int rho = volume.rho();
  DisparityField field(w, h);

  const int bottom = h - 1 - rho;
  full_search_row(volume, bottom, field);

  std::vector<SearchRange> ranges(w);
  std::vector<int> source(w);
  std::vector<double> scratch;
  for (int v = bottom - 1; v >= rho; --v) {
    bool any = false;
    for (int u = 0; u < w; ++u) {
      std::optional<int> below[3];
      for (int k = -1; k <= 1; ++k) {
        const int x = u + k;
        if (x >= 0 && x < w && field.is_valid(x, v + 1)) {
          below[k + 1] = field.d_int[field.index(x, v + 1)];
        }
      }
      ranges[u].clear();
      if (below[0] || below[1] || below[2]) {
        ranges[u] = propagate_range(std::span<const std::optional<int>, 3>(below),
                                    tau);
        const auto last = std::upper_bound(ranges[u].begin(), ranges[u].end(),
                                           volume.d_max());
        ranges[u].erase(last, ranges[u].end());
      }
      if (!ranges[u].empty()) any = true;
    }
    if (!any) {
      full_search_row(volume, v, field);
      continue;
    }

    // Holes take the range of the nearest propagated pixel on this row.
    std::fill(source.begin(), source.end(), -1);
    int last = -1;
    for (int u = 0; u < w; ++u) {
      if (!ranges[u].empty()) last = u;
      source[u] = last;
    }
    last = -1;
    for (int u = w - 1; u >= 0; --u) {
      if (!ranges[u].empty()) last = u;
      if (last >= 0 && (source[u] < 0 || last - u < u - source[u])) {
        source[u] = last;
      }
    }

    for (int u = 0; u < w; ++u) {
      solve_pixel(volume, u, v, ranges[source[u]], field, scratch);
    }
  }
  return field;
}

DisparityField srp_estimate(const GrayImage& left, const GrayImage& right,
                            const SrpParams& params) {
  NccCostVolume volume(left, right, params.rho, params.d_max);
  return srp_estimate(volume, params.tau);
}

DisparityField cmv(const DisparityField& field, const NccCostVolume& volume) {
  return cmv(field, [&volume](int u, int v, int d) { return volume.cost(u, v, d); });
}

DisparityField cmv(const DisparityField& field, const CostFn& cost) {
  DisparityField out = field;
  for (int v = 0; v < field.height; ++v) {
    for (int u = 0; u < field.width; ++u) {
      const std::size_t i = field.index(u, v);
      if (!field.valid[i]) continue;
      const int d = field.d_int[i];
      const auto& known = field.costs[i];
      auto cost_at = [&](int x) -> std::optional<double> {
        const int k = x - d + 1;
        if (k >= 0 && k <= 2 && !std::isnan(known[k])) return known[k];
        return cost(u, v, x);
      };

      const auto c0 = cost_at(d);
      const auto cm = cost_at(d - 1);
      const auto cp = cost_at(d + 1);
      if (!c0 || !cm || !cp) {
        out.invalidate(i);
        continue;
      }
      if (*c0 > std::max(*cm, *cp)) {
        out.costs[i] = {*cm, *c0, *cp};
        continue;
      }

      int step = 0;
      if (*cm < *c0 && *c0 < *cp) {
        step = 1;
      } else if (*cm > *c0 && *c0 > *cp) {
        step = -1;
      }
      if (step == 0) {  // valley or tie
        out.invalidate(i);
        continue;
      }

      // Walk until c(d + k step) < c(d + (k-1) step).
      double before = *c0;
      double peak = step > 0 ? *cp : *cm;
      int at = d + step;
      bool ok = false;
      while (true) {
        const auto next = cost_at(at + step);
        if (!next || *next == peak) break;
        if (*next < peak) {
          ok = true;
          out.d_int[i] = at;
          out.d[i] = at;
          out.costs[i] = step > 0 ? std::array<double, 3>{before, peak, *next}
                                  : std::array<double, 3>{*next, peak, before};
          break;
        }
        before = peak;
        peak = *next;
        at += step;
      }
      if (!ok) out.invalidate(i);
    }
  }
  return out;
}

DisparityField keep_local_maxima(const DisparityField& field,
                                 const NccCostVolume& volume) {
  DisparityField out = field;
  for (int v = 0; v < field.height; ++v) {
    for (int u = 0; u < field.width; ++u) {
      const std::size_t i = field.index(u, v);
      if (!field.valid[i]) continue;
      const int d = field.d_int[i];
      auto& c = out.costs[i];
      for (int k = 0; k < 3; ++k) {
        if (std::isnan(c[k])) {
          c[k] = volume.cost(u, v, d + k - 1).value_or(kNaN);
        }
      }
      if (std::isnan(c[0]) || std::isnan(c[2]) || !(c[1] > c[0]) ||
          !(c[1] > c[2])) {
        out.invalidate(i);
      }
    }
  }
  return out;
}

DisparityField lrc_check(const DisparityField& left_field,
                         const DisparityField& right_field, double threshold,
                         std::span<const double> row_shift) {
  if (left_field.width != right_field.width ||
      left_field.height != right_field.height) {
    throw Error(ErrorKind::kInvalidArgument,
                "left and right disparity fields differ in size");
  }
  if (!row_shift.empty() &&
      row_shift.size() != static_cast<std::size_t>(left_field.height)) {
    throw Error(ErrorKind::kInvalidArgument, "row_shift length != height");
  }
  DisparityField out = left_field;
  for (int v = 0; v < left_field.height; ++v) {
    const double shift = row_shift.empty() ? 0.0 : row_shift[v];
    for (int u = 0; u < left_field.width; ++u) {
      const std::size_t i = left_field.index(u, v);
      if (!left_field.valid[i]) continue;
      const double full = left_field.d[i] + shift;
      const long ur = std::lround(u - full);
      bool keep = false;
      if (ur >= 0 && ur < right_field.width) {
        const std::size_t j = right_field.index(static_cast<int>(ur), v);
        keep = right_field.valid[j] &&
               std::abs(full - (right_field.d[j] + shift)) <= threshold;
      }
      if (!keep) out.invalidate(i);
    }
  }
  return out;
}

DisparityField subpixel(const DisparityField& field) {
  DisparityField out = field;
  for (std::size_t i = 0; i < field.valid.size(); ++i) {
    if (!field.valid[i]) continue;
    const auto [cm, c0, cp] = field.costs[i];
    const double den = 2.0 * cm + 2.0 * cp - 4.0 * c0;
    if (!(den < 0.0) || !(c0 > cm) || !(c0 > cp)) {
      throw Error(ErrorKind::kInternal,
                  "subpixel interpolation on a pixel that is not a verified "
                  "correlation maximum");
    }
    const int d = field.d_int[i];
    out.d[i] = d + (cm - cp) / den;
    out.parabola[i] = parabola_through(d, cm, c0, cp);
    out.has_parabola[i] = 1;
  }
  return out;
}

DisparityField srp_estimate_right(const GrayImage& left, const GrayImage& right,
                                  const SrpParams& params, bool verify) {
  const GrayImage mirrored_ref = flip_horizontal(right);
  const GrayImage mirrored_target = flip_horizontal(left);
  NccCostVolume volume(mirrored_ref, mirrored_target, params.rho,
                       params.d_max);
  DisparityField field = srp_estimate(volume, params.tau);
  field = verify ? cmv(field, volume) : keep_local_maxima(field, volume);
  return flip_horizontal(field);
}

}  // namespace roadstereo
