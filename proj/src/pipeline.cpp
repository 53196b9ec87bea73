#include "roadstereo/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "roadstereo/error.hpp"
#include "roadstereo/keyvalue.hpp"
#include "roadstereo/matcher.hpp"

namespace roadstereo {

RefineParams PipelineConfig::refine_params() const {
  RefineParams p;
  p.lambda = lambda;
  p.sigma_d = sigma_d;
  p.sigma_r = sigma_r;
  p.iterations = iterations;
  return p;
}

int PipelineConfig::resolved_d_max(int image_width) const {
  if (d_max) return *d_max;
  if (enable_pt) return std::max(1, static_cast<int>(std::lround(2.0 * delta)));
  return std::max(1, image_width - 1);
}

void validate(const PipelineConfig& c) {
  if (c.rho < 1) throw Error(ErrorKind::kConfig, "rho must be >= 1");
  if (c.tau < 0) throw Error(ErrorKind::kConfig, "tau must be >= 0");
  if (!(c.epsilon >= 0.0)) throw Error(ErrorKind::kConfig, "epsilon must be >= 0");
  if (!std::isfinite(c.delta) || c.delta < 0.0 || (c.enable_pt && c.delta == 0.0)) {
    throw Error(ErrorKind::kConfig,
                "delta must keep disparities positive (delta > 0 required)");
  }
  if (!(c.lrc_threshold >= 0.0)) {
    throw Error(ErrorKind::kConfig, "lrc_threshold must be >= 0");
  }
  if (c.d_max && *c.d_max < 1) throw Error(ErrorKind::kConfig, "d_max must be >= 1");
  validate(c.refine_params());
  validate(c.rig);
}

void apply_config(PipelineConfig& c, const std::filesystem::path& path) {
  const auto kv = KeyValueFile::read(path);
  static const std::vector<std::string> known = {
      "rho", "tau", "epsilon", "delta", "lambda", "sigma_d", "sigma_r",
      "iterations", "lrc_threshold", "d_max", "f", "u0", "v0", "baseline",
      "pt", "cmv", "lrc", "refine", "sparse_cell", "sparse_min_sigma",
      "sparse_min_score", "sparse_uniqueness", "sparse_row_tolerance"};
  for (const auto& [k, v] : kv.entries()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw Error(ErrorKind::kConfig, "unknown config key: " + k);
    }
  }
  c.rho = kv.get_int("rho", c.rho);
  c.tau = kv.get_int("tau", c.tau);
  c.epsilon = kv.get_double("epsilon", c.epsilon);
  c.delta = kv.get_double("delta", c.delta);
  c.lambda = kv.get_double("lambda", c.lambda);
  c.sigma_d = kv.get_double("sigma_d", c.sigma_d);
  c.sigma_r = kv.get_double("sigma_r", c.sigma_r);
  c.iterations = kv.get_int("iterations", c.iterations);
  c.lrc_threshold = kv.get_double("lrc_threshold", c.lrc_threshold);
  if (kv.get("d_max")) c.d_max = kv.get_int("d_max", 0);
  c.rig.f = kv.get_double("f", c.rig.f);
  c.rig.u0 = kv.get_double("u0", c.rig.u0);
  c.rig.v0 = kv.get_double("v0", c.rig.v0);
  c.rig.baseline = kv.get_double("baseline", c.rig.baseline);
  c.enable_pt = kv.get_bool("pt", c.enable_pt);
  c.enable_cmv = kv.get_bool("cmv", c.enable_cmv);
  c.enable_lrc = kv.get_bool("lrc", c.enable_lrc);
  c.enable_refine = kv.get_bool("refine", c.enable_refine);
  c.sparse.cell = kv.get_int("sparse_cell", c.sparse.cell);
  c.sparse.min_sigma = kv.get_double("sparse_min_sigma", c.sparse.min_sigma);
  c.sparse.min_score = kv.get_double("sparse_min_score", c.sparse.min_score);
  c.sparse.uniqueness = kv.get_double("sparse_uniqueness", c.sparse.uniqueness);
  c.sparse.row_tolerance =
      kv.get_int("sparse_row_tolerance", c.sparse.row_tolerance);
}

double PipelineReport::total_seconds() const {
  double t = 0.0;
  for (const auto& s : timings) t += s.seconds;
  return t;
}

std::string PipelineReport::to_text(const PipelineConfig& config,
                                    const PlanePrior& prior) const {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "perspective_transform = " << (config.enable_pt ? "on" : "off") << "\n"
      << "alpha0 = " << prior.alpha0 << "\n"
      << "alpha1 = " << prior.alpha1 << "\n"
      << "delta = " << prior.delta << "\n"
      << "correspondences = " << correspondences << "\n"
      << "mean_correlation = " << mean_correlation << "\n"
      << "density_percent = " << density_percent << "\n"
      << "valid_pixels = " << valid_pixels << "\n"
      << "lrc_rejected = " << lrc_rejected << "\n"
      << "clamp_rejected = " << clamp_rejected << "\n";
  for (const auto& s : timings) {
    out << "time_" << s.stage << "_s = " << s.seconds << "\n";
  }
  out << "time_total_s = " << total_seconds() << "\n";
  return out.str();
}

namespace {

class Stopwatch {
 public:
  explicit Stopwatch(std::vector<StageTiming>& sink) : sink_(sink) {}
  void lap(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    sink_.push_back({stage, std::chrono::duration<double>(now - last_).count()});
    last_ = now;
  }

 private:
  std::vector<StageTiming>& sink_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

PipelineResult run_pipeline(const GrayImage& left, const GrayImage& right,
                            const PipelineConfig& config,
                            const KeypointMatcher* matcher) {
  validate(config);
  if (left.width() != right.width() || left.height() != right.height()) {
    throw Error(ErrorKind::kInvalidArgument,
                "stereo pair must have equal dimensions");
  }
  const int w = left.width(), h = left.height();
  PipelineResult result;
  PipelineReport& report = result.report;
  Stopwatch clock(report.timings);

  PlanePrior& prior = result.prior;
  prior.delta = config.delta;
  prior.alpha0 = config.delta;
  prior.alpha1 = 0.0;
  if (config.enable_pt) {
    SparseMatchSettings sparse = config.sparse;
    sparse.rho = config.rho;
    const PatchNccMatcher fallback(sparse);
    const KeypointMatcher& m = matcher ? *matcher : fallback;
    const auto kept =
        filter_correspondences(m.match(left, right), config.epsilon);
    report.correspondences = kept.size();
    prior = fit_vdisparity_line(kept);
    prior.delta = config.delta;
    validate_prior(prior, h);
  }
  clock.lap("plane_prior");

  const GrayImage right_warped =
      config.enable_pt ? apply_pt(right, prior, Reference::kLeft) : right;
  const GrayImage left_warped =
      config.enable_pt ? apply_pt(left, prior, Reference::kRight) : left;
  clock.lap("warp");

  const SrpParams srp{config.rho, config.tau, config.resolved_d_max(w)};
  const NccCostVolume volume(left, right_warped, srp.rho, srp.d_max);
  DisparityField field = srp_estimate(volume, srp.tau);
  clock.lap("srp_left");
  field = config.enable_cmv ? cmv(field, volume) : keep_local_maxima(field, volume);
  report.mean_correlation = field.mean_winning_cost();
  clock.lap("cmv_left");

  if (config.enable_lrc) {
    const DisparityField right_field =
        srp_estimate_right(left_warped, right, srp, config.enable_cmv);
    clock.lap("srp_right");
    const std::size_t before = field.count_valid();
    const auto shifts = config.enable_pt ? prior.row_shifts(h) : std::vector<double>{};
    field = lrc_check(field, right_field, config.lrc_threshold, shifts);
    report.lrc_rejected = before - field.count_valid();
    clock.lap("lrc");
  }

  field = subpixel(field);
  clock.lap("subpixel");
  if (config.enable_refine) {
    field = apply_refinement(field, refine(to_parabola_field(field),
                                           config.refine_params()));
    // Pinned on the clamp: the neighbours contest the integer match.
    for (std::size_t i = 0; i < field.d.size(); ++i) {
      if (field.valid[i] && std::abs(field.d[i] - field.d_int[i]) >= 1.0) {
        field.invalidate(i);
        ++report.clamp_rejected;
      }
    }
    clock.lap("refine");
  }
  result.matching = field;
  result.final = config.enable_pt ? undo_pt(field, prior) : field;
  clock.lap("undo_pt");

  report.valid_pixels = result.final.count_valid();
  const double processable =
      static_cast<double>(std::max(0, w - 2 * config.rho)) *
      std::max(0, h - 2 * config.rho);
  report.density_percent =
      processable > 0 ? 100.0 * report.valid_pixels / processable : 0.0;
  return result;
}

}  // namespace roadstereo
