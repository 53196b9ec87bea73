#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "roadstereo/disparity.hpp"
#include "roadstereo/error.hpp"
#include "roadstereo/image_io.hpp"
#include "roadstereo/keyvalue.hpp"

namespace roadstereo::cli {

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

// OLS line d = a0 + a1 v over every valid pixel.
PlanePrior fit_line_from_field(const DisparityField& field) {
  std::vector<Correspondence> pts;
  pts.reserve(field.count_valid());
  for (int v = 0; v < field.height; ++v) {
    for (int u = 0; u < field.width; ++u) {
      const std::size_t i = field.index(u, v);
      if (!field.valid[i]) continue;
      pts.push_back({static_cast<double>(u), static_cast<double>(v),
                     u - field.d[i], static_cast<double>(v), 1.0});
    }
  }
  return fit_vdisparity_line(pts);
}

// Mean of the reconstructed points within a (2r+1)^2 pixel window.
std::optional<Eigen::Vector3d> point_at(
    const std::vector<const CloudPoint*>& grid, int w, int h, int u, int v,
    int r) {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  int n = 0;
  for (int y = std::max(0, v - r); y <= std::min(h - 1, v + r); ++y) {
    for (int x = std::max(0, u - r); x <= std::min(w - 1, u + r); ++x) {
      if (const CloudPoint* p = grid[static_cast<std::size_t>(y) * w + x]) {
        sum += p->p;
        ++n;
      }
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace

RenderedPair cmd_synth(const SceneSpec& spec, const fs::path& out_dir) {
  RenderedPair pair = render(spec);
  ensure_dir(out_dir);
  save_pgm(out_dir / "left.pgm", pair.left);
  save_pgm(out_dir / "right.pgm", pair.right);
  save_truth(out_dir, pair);
  save_rig(out_dir / "rig.cfg", spec.rig);
  return pair;
}

PipelineResult cmd_disparity(const fs::path& left_path,
                             const fs::path& right_path,
                             const PipelineConfig& config,
                             const fs::path& out_dir, std::ostream& log) {
  const GrayImage left = load_image(left_path);
  const GrayImage right = load_image(right_path);
  if (left.width() != right.width() || left.height() != right.height()) {
    throw Error(ErrorKind::kInvalidArgument,
                "stereo pair must have equal dimensions");
  }
  PipelineResult result = run_pipeline(left, right, config);
  ensure_dir(out_dir);
  const std::size_t overflow =
      save_disparity_png(out_dir / "disparity.png", result.final);
  save_dsp1(out_dir / "disparity.dsp", result.final);
  save_mask_pgm(out_dir / "mask.pgm", result.final);
  save_prior(out_dir / "prior.txt", result.prior);
  const std::string text = result.report.to_text(config, result.prior);
  auto out = open_out(out_dir / "report.txt");
  out << text << "png_overflow_pixels = " << overflow << "\n";
  log << text;
  if (overflow > 0) {
    log << "warning: " << overflow
        << " disparities exceed the 16-bit PNG range and were written as "
           "invalid there; disparity.dsp keeps them\n";
  }
  return result;
}

ReconstructResult cmd_reconstruct(const ReconstructOptions& o) {
  validate(o.rig);
  const DisparityField field = load_disparity(o.disparity);
  if (field.count_valid() == 0) {
    throw Error(ErrorKind::kInsufficientRollEvidence,
                "empty disparity: no valid pixel to reconstruct");
  }
  ReconstructResult r;
  if (!o.zero_pose) {
    const PlanePrior prior = o.prior ? load_prior(*o.prior) : fit_line_from_field(field);
    r.pose.pitch = estimate_pitch(prior, o.rig);
    const PixelRect patch =
        o.roll_patch.value_or(default_roll_patch(field.width, field.height));
    r.pose.roll = estimate_roll(field, patch);
  }
  r.cloud = reproject(field, o.rig, r.pose);
  if (!o.out.empty()) save_ply(o.out, r.cloud);
  return r;
}

TruthMetrics cmd_eval(const fs::path& estimate, const fs::path& truth_path,
                      const fs::path& occlusion, double threshold,
                      const fs::path& csv) {
  const DisparityField est = load_disparity(estimate);
  const GroundTruth truth = load_truth(truth_path, occlusion);
  const TruthMetrics m = truth_compare(est, truth, threshold);
  if (!csv.empty()) {
    auto out = open_out(csv);
    out << std::setprecision(9) << "count,bad_percent,mean_abs_error\n"
        << m.count << "," << m.bad_percent << "," << m.mean_abs_error << "\n";
  }
  return m;
}

MeasureResult cmd_measure(const MeasureOptions& o) {
  const PointCloud cloud = load_ply(o.cloud);
  int w = 0, h = 0;
  for (const auto& p : cloud.points) {
    w = std::max(w, p.u + 1);
    h = std::max(h, p.v + 1);
  }
  std::vector<const CloudPoint*> grid(static_cast<std::size_t>(w) * h, nullptr);
  for (const auto& p : cloud.points) {
    if (p.u >= 0 && p.v >= 0) grid[static_cast<std::size_t>(p.v) * w + p.u] = &p;
  }
  const bool needs_pixels = !o.corner_pixels.empty() || o.probe_rect ||
                            !o.probe_pixels.empty();
  if (needs_pixels && grid.empty()) {
    throw Error(ErrorKind::kInvalidArgument,
                "point cloud carries no pixel coordinates");
  }

  std::vector<Eigen::Vector3d> corners = o.corner_points;
  for (const auto& [u, v] : o.corner_pixels) {
    const auto p = point_at(grid, w, h, u, v, 2);
    if (!p) {
      throw Error(ErrorKind::kDegeneratePlane,
                  "degenerate reference plane: no reconstructed point near "
                  "corner (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    }
    corners.push_back(*p);
  }

  MeasureResult r;
  if (o.probe_rect) {
    const PixelRect& rect = *o.probe_rect;
    for (int v = std::max(0, rect.v_begin); v < std::min(h, rect.v_end); ++v) {
      for (int u = std::max(0, rect.u_begin); u < std::min(w, rect.u_end); ++u) {
        if (const CloudPoint* p = grid[static_cast<std::size_t>(v) * w + u]) {
          r.probes.push_back(p->p);
        }
      }
    }
  }
  for (const auto& [u, v] : o.probe_pixels) {
    if (u < 0 || v < 0 || u >= w || v >= h) continue;
    if (const CloudPoint* p = grid[static_cast<std::size_t>(v) * w + u]) {
      r.probes.push_back(p->p);
    }
  }
  if (!o.probe_rect && o.probe_pixels.empty()) {
    for (const auto& p : cloud.points) r.probes.push_back(p.p);
  }
  if (o.samples > 0 && o.samples < r.probes.size()) {
    std::mt19937_64 rng(o.seed);
    std::vector<Eigen::Vector3d> picked;
    std::sample(r.probes.begin(), r.probes.end(), std::back_inserter(picked),
                o.samples, rng);
    r.probes = std::move(picked);
  }
  if (r.probes.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "no probe points in the cloud");
  }

  r.distances = measure_offsets(corners, r.probes);
  if (o.depth) {
    for (auto& d : r.distances) d = -d;
  }
  const auto [lo, hi] = std::minmax_element(r.distances.begin(), r.distances.end());
  r.min = *lo;
  r.max = *hi;
  r.mean = std::accumulate(r.distances.begin(), r.distances.end(), 0.0) /
           static_cast<double>(r.distances.size());

  if (!o.out.empty()) {
    auto out = open_out(o.out);
    out << std::setprecision(9) << "probe_index,x,y,z,signed_distance_mm\n";
    for (std::size_t k = 0; k < r.probes.size(); ++k) {
      const auto& p = r.probes[k];
      out << k << "," << p.x() << "," << p.y() << "," << p.z() << ","
          << r.distances[k] << "\n";
    }
  }
  return r;
}

std::vector<std::pair<int, int>> parse_pixel_list(const std::string& text) {
  std::vector<std::pair<int, int>> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto n = parse_numbers(item, "pixel");
    if (n.size() != 2) {
      throw Error(ErrorKind::kConfig, "pixel must be 'u,v': '" + item + "'");
    }
    out.emplace_back(static_cast<int>(n[0]), static_cast<int>(n[1]));
  }
  return out;
}

std::vector<Eigen::Vector3d> parse_point_list(const std::string& text) {
  std::vector<Eigen::Vector3d> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto n = parse_numbers(item, "point");
    if (n.size() != 3) {
      throw Error(ErrorKind::kConfig, "point must be 'x,y,z': '" + item + "'");
    }
    out.emplace_back(n[0], n[1], n[2]);
  }
  return out;
}

PixelRect parse_rect(const std::string& text) {
  const auto n = parse_numbers(text, "rectangle");
  if (n.size() != 4 || n[2] <= n[0] || n[3] <= n[1]) {
    throw Error(ErrorKind::kConfig,
                "rectangle must be 'u0,v0,u1,v1' with u1 > u0 and v1 > v0");
  }
  return {static_cast<int>(n[0]), static_cast<int>(n[1]),
          static_cast<int>(n[2]), static_cast<int>(n[3])};
}

}  // namespace roadstereo::cli
