#include <CLI11.hpp>

#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "commands.hpp"
#include "roadstereo/error.hpp"

using namespace roadstereo;
namespace fs = std::filesystem;

namespace {

template <typename T>
void override_with(T& target, const std::optional<T>& value) {
  if (value) target = *value;
}

ScenePreset preset_from(const std::string& name) {
  if (name == "plane") return ScenePreset::kPlane;
  if (name == "slab") return ScenePreset::kSlab;
  if (name == "groove") return ScenePreset::kGroove;
  throw Error(ErrorKind::kConfig, "unknown preset: " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Road-surface stereo: disparity, reconstruction and measurement"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "render a synthetic stereo pair");
  std::string spec_path, preset = "plane", synth_out;
  synth->add_option("--spec", spec_path, "scene spec (key = value)");
  synth->add_option("--preset", preset, "plane | slab | groove")
      ->check(CLI::IsMember({"plane", "slab", "groove"}));
  synth->add_option("--out-dir", synth_out, "output directory")->required();

  // disparity
  auto* disp = app.add_subcommand("disparity", "dense subpixel disparity");
  std::string left_path, right_path, disp_out, config_path, rig_path;
  std::optional<int> rho, tau, iterations, d_max;
  std::optional<double> epsilon, delta, lambda, sigma_d, sigma_r, lrc_thr;
  bool no_pt = false, no_cmv = false, no_lrc = false, no_refine = false;
  disp->add_option("left", left_path, "left image")->required();
  disp->add_option("right", right_path, "right image")->required();
  disp->add_option("--out-dir", disp_out, "output directory")->required();
  disp->add_option("--config", config_path, "pipeline config (key = value)");
  disp->add_option("--rig", rig_path, "camera rig file");
  disp->add_option("--rho", rho, "block half-width");
  disp->add_option("--tau", tau, "search-range bound");
  disp->add_option("--epsilon", epsilon, "row tolerance of sparse matches");
  disp->add_option("--delta", delta, "residual disparity after the shift");
  disp->add_option("--lambda", lambda, "smoothness weight");
  disp->add_option("--sigma-d", sigma_d, "spatial falloff");
  disp->add_option("--sigma-r", sigma_r, "disparity falloff");
  disp->add_option("--iterations", iterations, "refinement iterations");
  disp->add_option("--lrc-threshold", lrc_thr, "left-right tolerance, px");
  disp->add_option("--d-max", d_max, "bottom-row search limit");
  disp->add_flag("--no-pt", no_pt, "skip the perspective shift");
  disp->add_flag("--no-cmv", no_cmv, "skip maxima verification");
  disp->add_flag("--no-lrc", no_lrc, "skip the left-right check");
  disp->add_flag("--no-refine", no_refine, "skip refinement");

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "disparity to PLY point cloud");
  std::string recon_disp, recon_prior, recon_rig, recon_out, recon_patch;
  std::string recon_left, recon_right, recon_config;
  bool zero_pose = false;
  recon->add_option("--disparity", recon_disp, "DSP1 or 16-bit PNG disparity");
  recon->add_option("--left", recon_left, "left image (instead of --disparity)");
  recon->add_option("--right", recon_right, "right image");
  recon->add_option("--config", recon_config, "pipeline config for an image pair");
  recon->add_option("--prior", recon_prior, "prior.txt for the pitch");
  recon->add_option("--rig", recon_rig, "camera rig file")->required();
  recon->add_option("--roll-patch", recon_patch, "u0,v0,u1,v1");
  recon->add_option("--out", recon_out, "output PLY")->required();
  recon->add_flag("--zero-pose", zero_pose, "write the unrotated cloud");

  // eval
  auto* eval = app.add_subcommand("eval", "compare a disparity map with truth");
  std::string est_path, truth_path, occ_path, eval_csv;
  double threshold = 2.0;
  eval->add_option("estimate", est_path, "estimated disparity")->required();
  eval->add_option("truth", truth_path, "truth disparity")->required();
  eval->add_option("--occlusion", occ_path, "occlusion mask PGM");
  eval->add_option("--threshold", threshold, "bad-pixel threshold, px");
  eval->add_option("--csv", eval_csv, "write metrics CSV");

  // measure
  auto* measure = app.add_subcommand("measure", "distances to a corner plane");
  std::string ply_path, corners, corners_3d, probe_rect, probes, measure_out;
  cli::MeasureOptions mopt;
  measure->add_option("cloud", ply_path, "PLY cloud")->required();
  measure->add_option("--corners", corners, "u,v;u,v;u,v;u,v");
  measure->add_option("--corners-3d", corners_3d, "x,y,z;... (mm)");
  measure->add_option("--probe-rect", probe_rect, "u0,v0,u1,v1");
  measure->add_option("--probes", probes, "u,v;u,v;...");
  measure->add_flag("--depth", mopt.depth, "distances away from the camera are positive");
  measure->add_option("--samples", mopt.samples, "random probe subset size (0 = all)");
  measure->add_option("--seed", mopt.seed, "sampling seed");
  measure->add_option("--out", measure_out, "CSV output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const SceneSpec spec =
          spec_path.empty() ? desk_scene(preset_from(preset)) : load_scene_spec(spec_path);
      const RenderedPair pair = cli::cmd_synth(spec, synth_out);
      std::size_t occluded = 0;
      for (auto o : pair.truth.occluded) occluded += o;
      std::cout << "wrote " << synth_out << " (" << spec.width << "x"
                << spec.height << ", " << occluded << " occluded pixels)\n";
    } else if (disp->parsed()) {
      PipelineConfig config;
      if (!config_path.empty()) apply_config(config, config_path);
      if (!rig_path.empty()) config.rig = load_rig(rig_path);
      override_with(config.rho, rho);
      override_with(config.tau, tau);
      override_with(config.epsilon, epsilon);
      override_with(config.delta, delta);
      override_with(config.lambda, lambda);
      override_with(config.sigma_d, sigma_d);
      override_with(config.sigma_r, sigma_r);
      override_with(config.iterations, iterations);
      override_with(config.lrc_threshold, lrc_thr);
      if (d_max) config.d_max = d_max;
      if (no_pt) config.enable_pt = false;
      if (no_cmv) config.enable_cmv = false;
      if (no_lrc) config.enable_lrc = false;
      if (no_refine) config.enable_refine = false;
      cli::cmd_disparity(left_path, right_path, config, disp_out, std::cout);
    } else if (recon->parsed()) {
      cli::ReconstructOptions o;
      o.rig = load_rig(recon_rig);
      o.zero_pose = zero_pose;
      o.out = recon_out;
      if (!recon_patch.empty()) o.roll_patch = cli::parse_rect(recon_patch);
      if (!recon_prior.empty()) o.prior = recon_prior;
      if (recon_disp.empty()) {
        if (recon_left.empty() || recon_right.empty()) {
          throw Error(ErrorKind::kConfig,
                      "reconstruct needs --disparity or --left and --right");
        }
        PipelineConfig config;
        if (!recon_config.empty()) apply_config(config, recon_config);
        config.rig = o.rig;
        const fs::path dir = fs::path(recon_out).parent_path() / "disparity";
        cli::cmd_disparity(recon_left, recon_right, config, dir, std::cout);
        o.disparity = dir / "disparity.dsp";
        if (!o.prior) o.prior = dir / "prior.txt";
      } else {
        o.disparity = recon_disp;
      }
      const auto r = cli::cmd_reconstruct(o);
      std::cout << std::setprecision(6) << "pitch_rad = " << r.pose.pitch
                << "\nroll_rad = " << r.pose.roll << "\npoints = "
                << r.cloud.points.size() << "\nskipped = " << r.cloud.skipped
                << "\n";
    } else if (eval->parsed()) {
      const auto m = cli::cmd_eval(est_path, truth_path, occ_path, threshold, eval_csv);
      std::cout << std::setprecision(6) << "count,bad_percent,mean_abs_error\n"
                << m.count << "," << m.bad_percent << "," << m.mean_abs_error
                << "\n";
    } else if (measure->parsed()) {
      mopt.cloud = ply_path;
      if (!corners.empty()) mopt.corner_pixels = cli::parse_pixel_list(corners);
      if (!corners_3d.empty()) mopt.corner_points = cli::parse_point_list(corners_3d);
      if (!probe_rect.empty()) mopt.probe_rect = cli::parse_rect(probe_rect);
      if (!probes.empty()) mopt.probe_pixels = cli::parse_pixel_list(probes);
      mopt.out = measure_out;
      const auto r = cli::cmd_measure(mopt);
      std::cout << std::setprecision(6)
                << (mopt.depth ? "sign: positive = beyond the plane, away from the camera\n"
                               : "sign: positive = toward the camera from the plane\n")
                << "probes = " << r.distances.size() << "\nmin_mm = " << r.min
                << "\nmax_mm = " << r.max << "\nmean_mm = " << r.mean << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error [" << stage_name(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error [internal]: " << e.what() << "\n";
    return 70;
  }
  return 0;
}
