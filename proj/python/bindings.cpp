#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "roadstereo/error.hpp"
#include "roadstereo/geometry.hpp"
#include "roadstereo/matcher.hpp"
#include "roadstereo/pipeline.hpp"
#include "roadstereo/synth.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace roadstereo;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  const int h = static_cast<int>(a.shape(0));
  const int w = static_cast<int>(a.shape(1));
  return GrayImage(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

Array from_image(const GrayImage& img) {
  Array out({img.height(), img.width()});
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

// Disparity as a float array with NaN where invalid.
Array from_field(const DisparityField& f) {
  Array out({f.height, f.width});
  double* p = out.mutable_data();
  for (std::size_t i = 0; i < f.d.size(); ++i) {
    p[i] = f.valid[i] ? f.d[i] : std::nan("");
  }
  return out;
}

DisparityField to_field(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  DisparityField f(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  for (std::size_t i = 0; i < f.d.size(); ++i) {
    const double d = a.data()[i];
    if (std::isfinite(d)) {
      f.d[i] = d;
      f.d_int[i] = static_cast<int>(std::lround(d));
      f.valid[i] = 1;
    }
  }
  return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Road-surface stereo matching and reconstruction";

  static py::exception<Error> error(m, "RoadStereoError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(stage_name(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<CameraRig>(m, "CameraRig")
      .def(py::init<>())
      .def_readwrite("f", &CameraRig::f)
      .def_readwrite("u0", &CameraRig::u0)
      .def_readwrite("v0", &CameraRig::v0)
      .def_readwrite("baseline", &CameraRig::baseline);

  py::class_<PlanePrior>(m, "PlanePrior")
      .def(py::init<>())
      .def(py::init([](double a0, double a1, double delta) {
             return PlanePrior{a0, a1, delta};
           }),
           "alpha0"_a, "alpha1"_a, "delta"_a = 20.0)
      .def_readwrite("alpha0", &PlanePrior::alpha0)
      .def_readwrite("alpha1", &PlanePrior::alpha1)
      .def_readwrite("delta", &PlanePrior::delta)
      .def("shift", &PlanePrior::shift);

  py::class_<Pose>(m, "Pose")
      .def(py::init([](double pitch, double roll, double yaw) {
             return Pose{pitch, roll, yaw};
           }),
           "pitch"_a = 0.0, "roll"_a = 0.0, "yaw"_a = 0.0)
      .def_readwrite("pitch", &Pose::pitch)
      .def_readwrite("roll", &Pose::roll)
      .def_readwrite("yaw", &Pose::yaw);

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("rho", &PipelineConfig::rho)
      .def_readwrite("tau", &PipelineConfig::tau)
      .def_readwrite("epsilon", &PipelineConfig::epsilon)
      .def_readwrite("delta", &PipelineConfig::delta)
      .def_readwrite("lambda_", &PipelineConfig::lambda)
      .def_readwrite("sigma_d", &PipelineConfig::sigma_d)
      .def_readwrite("sigma_r", &PipelineConfig::sigma_r)
      .def_readwrite("iterations", &PipelineConfig::iterations)
      .def_readwrite("lrc_threshold", &PipelineConfig::lrc_threshold)
      .def_readwrite("d_max", &PipelineConfig::d_max)
      .def_readwrite("rig", &PipelineConfig::rig)
      .def_readwrite("enable_pt", &PipelineConfig::enable_pt)
      .def_readwrite("enable_cmv", &PipelineConfig::enable_cmv)
      .def_readwrite("enable_lrc", &PipelineConfig::enable_lrc)
      .def_readwrite("enable_refine", &PipelineConfig::enable_refine);

  m.def("ncc_cost",
        [](const Array& left, const Array& right, int rho, int u, int v, int d) {
          const GrayImage l = to_image(left), r = to_image(right);
          return ncc_cost(l, r, compute_block_stats(l, rho),
                          compute_block_stats(r, rho), u, v, d);
        },
        "left"_a, "right"_a, "rho"_a, "u"_a, "v"_a, "d"_a);

  m.def("block_stats",
        [](const Array& img, int rho) {
          const BlockStats s = compute_block_stats(to_image(img), rho);
          Array mu({s.height, s.width}), sigma({s.height, s.width});
          for (std::size_t i = 0; i < s.mu.size(); ++i) {
            mu.mutable_data()[i] = s.defined[i] ? s.mu[i] : std::nan("");
            sigma.mutable_data()[i] = s.defined[i] ? s.sigma[i] : std::nan("");
          }
          return py::make_tuple(mu, sigma);
        },
        "image"_a, "rho"_a);

  m.def("apply_pt",
        [](const Array& target, const PlanePrior& prior, bool left_reference) {
          return from_image(apply_pt(to_image(target), prior,
                                     left_reference ? Reference::kLeft
                                                    : Reference::kRight));
        },
        "target"_a, "prior"_a, "left_reference"_a = true);

  m.def("run_pipeline",
        [](const Array& left, const Array& right, const PipelineConfig& config) {
          const PipelineResult r = run_pipeline(to_image(left), to_image(right), config);
          py::dict report;
          report["mean_correlation"] = r.report.mean_correlation;
          report["density_percent"] = r.report.density_percent;
          report["valid_pixels"] = r.report.valid_pixels;
          report["lrc_rejected"] = r.report.lrc_rejected;
          report["clamp_rejected"] = r.report.clamp_rejected;
          report["correspondences"] = r.report.correspondences;
          report["total_seconds"] = r.report.total_seconds();
          return py::make_tuple(from_field(r.final), r.prior, report);
        },
        "left"_a, "right"_a, "config"_a = PipelineConfig{});

  m.def("render",
        [](const std::string& preset) {
          ScenePreset p = ScenePreset::kPlane;
          if (preset == "slab") p = ScenePreset::kSlab;
          else if (preset == "groove") p = ScenePreset::kGroove;
          else if (preset != "plane") throw py::value_error("unknown preset");
          const RenderedPair pair = render(desk_scene(p));
          const GroundTruth& t = pair.truth;
          Array disp({t.height, t.width});
          py::array_t<std::uint8_t> occ({t.height, t.width});
          std::copy(t.disparity.begin(), t.disparity.end(), disp.mutable_data());
          std::copy(t.occluded.begin(), t.occluded.end(), occ.mutable_data());
          return py::make_tuple(from_image(pair.left), from_image(pair.right),
                                disp, occ);
        },
        "preset"_a = "plane");

  m.def("analytic_road_line",
        [](const std::string& preset) {
          return analytic_road_line(desk_scene(
              preset == "plane" ? ScenePreset::kPlane : ScenePreset::kSlab));
        },
        "preset"_a = "plane");

  m.def("truth_compare",
        [](const Array& est, const Array& truth, py::array_t<std::uint8_t> occluded,
           double threshold) {
          const DisparityField f = to_field(est);
          GroundTruth t;
          t.width = f.width;
          t.height = f.height;
          t.disparity.assign(truth.data(), truth.data() + truth.size());
          t.occluded.assign(occluded.data(), occluded.data() + occluded.size());
          t.region.assign(t.disparity.size(), Region::kNone);
          if (t.disparity.size() != f.d.size() || t.occluded.size() != f.d.size()) {
            throw py::value_error("arrays differ in size");
          }
          const TruthMetrics mt = truth_compare(f, t, threshold);
          return py::make_tuple(mt.bad_percent, mt.mean_abs_error, mt.count);
        },
        "estimate"_a, "truth"_a, "occluded"_a, "threshold"_a = 2.0);

  m.def("estimate_pitch", &estimate_pitch, "prior"_a, "rig"_a);
  m.def("rotation_matrix", &rotation_matrix, "pose"_a);

  m.def("reproject",
        [](const Array& disparity, const CameraRig& rig, const Pose& pose) {
          const PointCloud c = reproject(to_field(disparity), rig, pose);
          Array out({static_cast<py::ssize_t>(c.points.size()), py::ssize_t{3}});
          for (std::size_t k = 0; k < c.points.size(); ++k) {
            for (int j = 0; j < 3; ++j) out.mutable_data()[3 * k + j] = c.points[k].p[j];
          }
          return out;
        },
        "disparity"_a, "rig"_a, "pose"_a = Pose{});

  m.def("measure_offsets",
        [](const std::vector<Eigen::Vector3d>& corners,
           const std::vector<Eigen::Vector3d>& probes) {
          return measure_offsets(corners, probes);
        },
        "corners"_a, "probes"_a);
}
