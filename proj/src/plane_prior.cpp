#include "roadstereo/plane_prior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <string>

#include "ncc_internal.hpp"
#include "roadstereo/error.hpp"
#include "roadstereo/keyvalue.hpp"

namespace roadstereo {

std::vector<double> PlanePrior::row_shifts(int height) const {
  std::vector<double> out(height);
  for (int v = 0; v < height; ++v) out[v] = shift(v);
  return out;
}

void validate_prior(const PlanePrior& prior, int height) {
  const double lowest = std::min(prior.shift(0), prior.shift(height - 1));
  if (!std::isfinite(lowest) || lowest < 0.0) {
    throw Error(ErrorKind::kConfig,
                "delta must keep disparities positive: alpha0 + alpha1 v - "
                "delta reaches " +
                    std::to_string(lowest));
  }
}

void save_prior(const std::filesystem::path& path, const PlanePrior& prior) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << std::setprecision(17) << "alpha0 = " << prior.alpha0 << "\n"
      << "alpha1 = " << prior.alpha1 << "\n"
      << "delta = " << prior.delta << "\n";
}

PlanePrior load_prior(const std::filesystem::path& path) {
  const auto kv = KeyValueFile::read(path);
  PlanePrior prior;
  prior.alpha0 = kv.require_double("alpha0");
  prior.alpha1 = kv.require_double("alpha1");
  prior.delta = kv.require_double("delta");
  return prior;
}

std::vector<std::pair<int, int>> PatchNccMatcher::detect(
    const GrayImage& img, const BlockStats& stats) const {
  std::vector<std::pair<int, int>> points;
  const int cell = std::max(1, settings_.cell);
  for (int cy = 0; cy < img.height(); cy += cell) {
    for (int cx = 0; cx < img.width(); cx += cell) {
      double best = settings_.min_sigma;
      int bu = -1, bv = -1;
      for (int v = cy; v < std::min(cy + cell, img.height()); ++v) {
        for (int u = cx; u < std::min(cx + cell, img.width()); ++u) {
          if (!stats.is_defined(u, v)) continue;
          const double s = stats.stddev(u, v);
          if (s > best) {
            best = s;
            bu = u;
            bv = v;
          }
        }
      }
      if (bu >= 0) points.emplace_back(bu, bv);
    }
  }
  return points;
}

std::vector<Correspondence> PatchNccMatcher::match(
    const GrayImage& left, const GrayImage& right) const {
  if (left.width() != right.width() || left.height() != right.height()) {
    throw Error(ErrorKind::kInvalidArgument,
                "stereo pair must have equal dimensions");
  }
  const int rho = settings_.rho;
  const BlockStats stats_l = compute_block_stats(left, rho);
  const BlockStats stats_r = compute_block_stats(right, rho);
  const int w = left.width();
  const int h = left.height();
  const int tol = std::max(0, settings_.row_tolerance);

  std::vector<Correspondence> matches;
  std::vector<double> scores;
  for (const auto& [ul, vl] : detect(left, stats_l)) {
    const int lo = settings_.max_disparity >= 0
                       ? std::max(rho, ul - settings_.max_disparity)
                       : rho;
    const int hi = std::min(w - 1 - rho, ul - settings_.min_disparity);
    if (hi < lo) continue;
    const int span = hi - lo + 1;
    const int rows = 2 * tol + 1;
    scores.assign(static_cast<std::size_t>(span) * rows,
                  -std::numeric_limits<double>::infinity());

    double best = -std::numeric_limits<double>::infinity();
    int best_u = -1, best_row = -1;
    for (int r = 0; r < rows; ++r) {
      const int vr = vl - tol + r;
      if (vr < rho || vr >= h - rho) continue;
      for (int ur = lo; ur <= hi; ++ur) {
        const auto c =
            detail::block_ncc(left, stats_l, ul, vl, right, stats_r, ur, vr);
        if (!c) continue;
        scores[static_cast<std::size_t>(r) * span + (ur - lo)] = *c;
        if (*c > best) {
          best = *c;
          best_u = ur;
          best_row = r;
        }
      }
    }
    if (best_u < 0 || best < settings_.min_score) continue;

    double runner_up = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < rows; ++r) {
      for (int ur = lo; ur <= hi; ++ur) {
        if (std::abs(ur - best_u) <= 2) continue;
        runner_up = std::max(
            runner_up, scores[static_cast<std::size_t>(r) * span + (ur - lo)]);
      }
    }
    if (runner_up > best - settings_.uniqueness) continue;

    const int vr_best = vl - tol + best_row;
    if (settings_.cross_check) {
      // Reverse search: left columns u with u - best_u in the same range.
      const int back_lo = std::max(rho, best_u + settings_.min_disparity);
      const int back_hi = settings_.max_disparity >= 0
                              ? std::min(w - 1 - rho, best_u + settings_.max_disparity)
                              : w - 1 - rho;
      double back_best = -std::numeric_limits<double>::infinity();
      int back_u = -1;
      for (int u = back_lo; u <= back_hi; ++u) {
        const auto c = detail::block_ncc(left, stats_l, u, vl, right, stats_r,
                                         best_u, vr_best);
        if (c && *c > back_best) {
          back_best = *c;
          back_u = u;
        }
      }
      if (back_u < 0 || std::abs(back_u - ul) > 1) continue;
    }

    double sub = 0.0;
    if (best_u > lo && best_u < hi) {
      const double* row = &scores[static_cast<std::size_t>(best_row) * span];
      const double cm = row[best_u - 1 - lo];
      const double cp = row[best_u + 1 - lo];
      const double den = 2.0 * cm + 2.0 * cp - 4.0 * best;
      if (std::isfinite(cm) && std::isfinite(cp) && den < 0.0) {
        sub = (cm - cp) / den;
      }
    }
    matches.push_back({static_cast<double>(ul), static_cast<double>(vl),
                       best_u + sub, static_cast<double>(vr_best),
                       best});
  }
  return matches;
}

std::vector<Correspondence> match_sparse(const GrayImage& left,
                                         const GrayImage& right,
                                         const SparseMatchSettings& settings) {
  return PatchNccMatcher(settings).match(left, right);
}

std::vector<Correspondence> filter_correspondences(
    const std::vector<Correspondence>& matches, double epsilon) {
  if (epsilon < 0.0) {
    throw Error(ErrorKind::kInvalidArgument, "epsilon must be >= 0");
  }
  std::vector<Correspondence> kept;
  std::copy_if(matches.begin(), matches.end(), std::back_inserter(kept),
               [epsilon](const Correspondence& m) {
                 return std::abs(m.v_l - m.v_r) <= epsilon &&
                        m.u_l - m.u_r >= 0.0;
               });
  return kept;
}

PlanePrior fit_vdisparity_line(const std::vector<Correspondence>& matches) {
  if (matches.size() < 2) {
    throw Error(ErrorKind::kInsufficientPlaneEvidence,
                "insufficient plane evidence: " +
                    std::to_string(matches.size()) + " correspondences");
  }
  const double n = static_cast<double>(matches.size());
  double mean_v = 0.0, mean_d = 0.0;
  for (const auto& m : matches) {
    mean_v += m.v_l;
    mean_d += m.disparity();
  }
  mean_v /= n;
  mean_d /= n;
  double svv = 0.0, svd = 0.0;
  for (const auto& m : matches) {
    const double dv = m.v_l - mean_v;
    svv += dv * dv;
    svd += dv * (m.disparity() - mean_d);
  }
  if (svv <= 1e-12 * n) {
    throw Error(ErrorKind::kInsufficientPlaneEvidence,
                "insufficient plane evidence: all correspondences on one row");
  }
  PlanePrior prior;
  prior.alpha1 = svd / svv;
  prior.alpha0 = mean_d - prior.alpha1 * mean_v;
  return prior;
}

GrayImage apply_pt(const GrayImage& target, const PlanePrior& prior,
                   Reference reference) {
  const int w = target.width();
  GrayImage out(w, target.height());
  for (int v = 0; v < target.height(); ++v) {
    const double s = prior.shift(v);
    for (int u = 0; u < w; ++u) {
      const double x = reference == Reference::kLeft ? u - s : u + s;
      const double x0 = std::floor(x);
      const double t = x - x0;
      bool ok = x0 >= 0.0 && x0 <= w - 1;
      double value = 0.0;
      if (ok) {
        const int i0 = static_cast<int>(x0);
        if (t == 0.0) {
          ok = target.valid(i0, v);
          value = target(i0, v);
        } else {
          ok = i0 + 1 <= w - 1 && target.valid(i0, v) &&
               target.valid(i0 + 1, v);
          if (ok) value = (1.0 - t) * target(i0, v) + t * target(i0 + 1, v);
        }
      }
      out(u, v) = ok ? value : 0.0;
      if (!ok) out.set_valid(u, v, false);
    }
  }
  return out;
}

DisparityField undo_pt(const DisparityField& field, const PlanePrior& prior) {
  DisparityField out = field;
  for (int v = 0; v < field.height; ++v) {
    const double s = prior.shift(v);
    out.row_offset[v] += s;
    for (int u = 0; u < field.width; ++u) {
      const std::size_t i = field.index(u, v);
      if (!field.valid[i]) continue;
      out.d[i] += s;
      if (field.has_parabola[i]) out.parabola[i] = field.parabola[i].shifted(s);
    }
  }
  return out;
}

PlanePrior estimate_plane_prior(const GrayImage& left, const GrayImage& right,
                                const KeypointMatcher& matcher, double epsilon,
                                double delta) {
  const auto matches = filter_correspondences(matcher.match(left, right),
                                              epsilon);
  PlanePrior prior = fit_vdisparity_line(matches);
  prior.delta = delta;
  return prior;
}

}  // namespace roadstereo
