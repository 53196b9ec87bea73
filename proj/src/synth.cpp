#include "roadstereo/synth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "roadstereo/error.hpp"
#include "roadstereo/image_io.hpp"
#include "roadstereo/keyvalue.hpp"

namespace roadstereo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Axis-aligned rectangle lying in the plane p[axis] = coord.
struct Face {
  int axis = 1;
  double coord = 0.0;
  double lo[3] = {-kInf, -kInf, -kInf};
  double hi[3] = {kInf, kInf, kInf};
  bool has_hole = false;
  double hole_lo[3] = {0, 0, 0};
  double hole_hi[3] = {0, 0, 0};
  Region label = Region::kRoad;
};

struct Hit {
  double t = kInf;
  Eigen::Vector3d p;
  Region label = Region::kNone;
};

Face box_face(int axis, double coord, double x0, double x1, double y0,
              double y1, double z0, double z1, Region label) {
  Face f;
  f.axis = axis;
  f.coord = coord;
  f.lo[0] = x0, f.hi[0] = x1;
  f.lo[1] = y0, f.hi[1] = y1;
  f.lo[2] = z0, f.hi[2] = z1;
  f.label = label;
  return f;
}

std::vector<Face> build_faces(const SceneSpec& spec) {
  const double road = spec.camera_height;
  std::vector<Face> faces;
  Face ground;
  ground.axis = 1;
  ground.coord = road;
  ground.label = Region::kRoad;
  faces.push_back(ground);

  for (const Slab& s : spec.models) {
    const double top = road - s.height;
    const double x0 = s.x, x1 = s.x + s.size_x;
    const double z0 = s.z, z1 = s.z + s.size_z;
    Face cap = box_face(1, top, x0, x1, top, top, z0, z1, Region::kModelTop);
    faces.push_back(box_face(0, x0, x0, x0, top, road, z0, z1, Region::kModelSide));
    faces.push_back(box_face(0, x1, x1, x1, top, road, z0, z1, Region::kModelSide));
    faces.push_back(box_face(2, z0, x0, x1, top, road, z0, z0, Region::kModelSide));
    faces.push_back(box_face(2, z1, x0, x1, top, road, z1, z1, Region::kModelSide));
    if (s.groove) {
      const Groove& g = *s.groove;
      const double gx0 = x0 + g.offset_x, gx1 = gx0 + g.size_x;
      const double gz0 = z0 + g.offset_z, gz1 = gz0 + g.size_z;
      const double floor = top + g.depth;
      cap.has_hole = true;
      cap.hole_lo[0] = gx0, cap.hole_hi[0] = gx1;
      cap.hole_lo[2] = gz0, cap.hole_hi[2] = gz1;
      faces.push_back(
          box_face(1, floor, gx0, gx1, floor, floor, gz0, gz1, Region::kGrooveFloor));
      faces.push_back(box_face(0, gx0, gx0, gx0, top, floor, gz0, gz1, Region::kModelSide));
      faces.push_back(box_face(0, gx1, gx1, gx1, top, floor, gz0, gz1, Region::kModelSide));
      faces.push_back(box_face(2, gz0, gx0, gx1, top, floor, gz0, gz0, Region::kModelSide));
      faces.push_back(box_face(2, gz1, gx0, gx1, top, floor, gz1, gz1, Region::kModelSide));
    }
    faces.push_back(cap);
  }
  return faces;
}

Hit cast(const std::vector<Face>& faces, const Eigen::Vector3d& origin,
         const Eigen::Vector3d& dir) {
  Hit best;
  for (const Face& f : faces) {
    const double denom = dir[f.axis];
    if (denom == 0.0) continue;
    const double t = (f.coord - origin[f.axis]) / denom;
    if (!(t > 1e-9) || t >= best.t) continue;
    const Eigen::Vector3d p = origin + t * dir;
    bool inside = true;
    bool in_hole = f.has_hole;
    for (int a = 0; a < 3; ++a) {
      if (a == f.axis) continue;
      if (p[a] < f.lo[a] || p[a] > f.hi[a]) inside = false;
      if (f.has_hole && !(p[a] > f.hole_lo[a] && p[a] < f.hole_hi[a])) {
        in_hole = false;
      }
    }
    if (!inside || in_hole) continue;
    best.t = t;
    best.p = p;
    best.label = f.label;
  }
  return best;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double lattice(std::int64_t x, std::int64_t y, std::int64_t z,
               std::uint64_t seed) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ static_cast<std::uint64_t>(x));
  h = splitmix(h ^ static_cast<std::uint64_t>(y));
  h = splitmix(h ^ static_cast<std::uint64_t>(z));
  return static_cast<double>(h >> 11) * (2.0 / 9007199254740992.0) - 1.0;
}

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double value_noise(const Eigen::Vector3d& p, std::uint64_t seed) {
  const double fx = std::floor(p.x()), fy = std::floor(p.y()),
               fz = std::floor(p.z());
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const auto iz = static_cast<std::int64_t>(fz);
  const double tx = fade(p.x() - fx), ty = fade(p.y() - fy),
               tz = fade(p.z() - fz);
  double acc = 0.0;
  for (int c = 0; c < 8; ++c) {
    const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
    const double w = (dx ? tx : 1.0 - tx) * (dy ? ty : 1.0 - ty) *
                     (dz ? tz : 1.0 - tz);
    acc += w * lattice(ix + dx, iy + dy, iz + dz, seed);
  }
  return acc;
}

// Multi-octave solid texture; surfaces sample it at their world position so
// both views see the same pattern.
double texture(const SceneSpec& spec, const Eigen::Vector3d& p) {
  double sum = 0.0, norm = 0.0, amp = 1.0, scale = spec.texture_scale;
  for (int k = 0; k < spec.texture_octaves; ++k) {
    sum += amp * value_noise(p / scale, spec.seed * 131 + k);
    norm += amp;
    amp *= 0.5;
    scale *= 0.5;
  }
  const double value = 128.0 + spec.texture_contrast * sum / norm;
  return std::round(std::clamp(value, 0.0, 255.0));
}

}  // namespace

void validate(const SceneSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) {
    throw Error(ErrorKind::kDegenerateScene, "image size must be positive");
  }
  validate(spec.rig);
  if (!(spec.camera_height > 0.0)) {
    throw Error(ErrorKind::kDegenerateScene,
                "degenerate spec: road plane behind camera (camera_height <= 0)");
  }
  if (!(spec.pitch > 0.0) || spec.pitch > std::numbers::pi / 2.0 + 1e-12) {
    throw Error(ErrorKind::kDegenerateScene,
                "degenerate spec: pitch must be in (0, pi/2]");
  }
  if (!(spec.texture_scale > 0.0) || spec.texture_octaves < 1) {
    throw Error(ErrorKind::kDegenerateScene, "texture scale must be positive");
  }
  for (const Slab& s : spec.models) {
    if (!(s.size_x > 0.0) || !(s.size_z > 0.0) || !(s.height > 0.0)) {
      throw Error(ErrorKind::kDegenerateScene, "model sizes must be positive");
    }
    if (s.height >= spec.camera_height) {
      throw Error(ErrorKind::kDegenerateScene, "model reaches the camera");
    }
    if (s.groove) {
      const Groove& g = *s.groove;
      if (!(g.size_x > 0.0) || !(g.size_z > 0.0) || !(g.depth > 0.0) ||
          g.offset_x < 0.0 || g.offset_z < 0.0 ||
          g.offset_x + g.size_x > s.size_x ||
          g.offset_z + g.size_z > s.size_z || g.depth >= s.height) {
        throw Error(ErrorKind::kDegenerateScene,
                    "groove does not fit inside its slab");
      }
    }
  }
}

SceneSpec desk_scene(ScenePreset preset) {
  SceneSpec spec;
  if (preset == ScenePreset::kPlane) return spec;
  Slab slab;
  slab.x = 10.0;
  slab.z = 121.0;
  if (preset == ScenePreset::kGroove) slab.groove = Groove{};
  spec.models.push_back(slab);
  return spec;
}

SceneSpec parse_scene_spec(const std::string& text) {
  const auto kv = KeyValueFile::parse(text);
  SceneSpec spec;
  if (const auto preset = kv.get("preset")) {
    if (*preset == "plane") {
      spec = desk_scene(ScenePreset::kPlane);
    } else if (*preset == "slab") {
      spec = desk_scene(ScenePreset::kSlab);
    } else if (*preset == "groove") {
      spec = desk_scene(ScenePreset::kGroove);
    } else {
      throw Error(ErrorKind::kConfig, "unknown preset: " + *preset);
    }
  }
  static const std::vector<std::string> known = {
      "preset", "width", "height", "f", "u0", "v0", "baseline", "pitch",
      "pitch_deg", "roll", "roll_deg", "camera_height", "seed",
      "texture_scale", "texture_octaves", "texture_contrast", "model"};
  for (const auto& [k, v] : kv.entries()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw Error(ErrorKind::kConfig, "unknown scene key: " + k);
    }
  }
  spec.width = kv.get_int("width", spec.width);
  spec.height = kv.get_int("height", spec.height);
  spec.rig.f = kv.get_double("f", spec.rig.f);
  spec.rig.u0 = kv.get_double("u0", spec.width / 2.0);
  spec.rig.v0 = kv.get_double("v0", spec.height / 2.0);
  spec.rig.baseline = kv.get_double("baseline", spec.rig.baseline);
  spec.pitch = kv.get_double("pitch", spec.pitch);
  if (kv.get("pitch_deg")) {
    spec.pitch = kv.get_double("pitch_deg", 0.0) * std::numbers::pi / 180.0;
  }
  spec.roll = kv.get_double("roll", spec.roll);
  if (kv.get("roll_deg")) {
    spec.roll = kv.get_double("roll_deg", 0.0) * std::numbers::pi / 180.0;
  }
  spec.camera_height = kv.get_double("camera_height", spec.camera_height);
  spec.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<int>(spec.seed)));
  spec.texture_scale = kv.get_double("texture_scale", spec.texture_scale);
  spec.texture_octaves = kv.get_int("texture_octaves", spec.texture_octaves);
  spec.texture_contrast = kv.get_double("texture_contrast", spec.texture_contrast);

  const auto models = kv.get_all("model");
  if (!models.empty()) spec.models.clear();
  for (const auto& m : models) {
    const auto n = parse_numbers(m, "model");
    if (n.size() != 5 && n.size() != 10) {
      throw Error(ErrorKind::kConfig,
                  "model needs 5 values (x z size_x size_z height) or 10 "
                  "(plus groove offset_x offset_z size_x size_z depth)");
    }
    Slab s{n[0], n[1], n[2], n[3], n[4], std::nullopt};
    if (n.size() == 10) s.groove = Groove{n[5], n[6], n[7], n[8], n[9]};
    spec.models.push_back(s);
  }
  validate(spec);
  return spec;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  std::ostringstream text;
  const auto kv = KeyValueFile::read(path);
  for (const auto& [k, v] : kv.entries()) {
    text << k << " = " << v << "\n";
  }
  return parse_scene_spec(text.str());
}

RenderedPair render(const SceneSpec& spec) {
  validate(spec);
  const auto faces = build_faces(spec);
  const Eigen::Matrix3d r = rotation_matrix({spec.pitch, spec.roll, 0.0});
  const Eigen::Vector3d left_center = Eigen::Vector3d::Zero();
  const Eigen::Vector3d right_center =
      r * Eigen::Vector3d(spec.rig.baseline, 0.0, 0.0);
  const int w = spec.width, h = spec.height;
  const CameraRig& rig = spec.rig;

  RenderedPair out{GrayImage(w, h), GrayImage(w, h), GroundTruth{}};
  GroundTruth& truth = out.truth;
  truth.width = w;
  truth.height = h;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  truth.disparity.assign(n, 0.0);
  truth.occluded.assign(n, 0);
  truth.region.assign(n, Region::kNone);

  auto ray = [&](int u, int v) {
    return Eigen::Vector3d(r * Eigen::Vector3d((u - rig.u0) / rig.f,
                                               (v - rig.v0) / rig.f, 1.0));
  };

  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const Hit hit = cast(faces, left_center, ray(u, v));
      if (hit.label == Region::kNone) {
        throw Error(ErrorKind::kDegenerateScene,
                    "degenerate spec: road plane not visible at left pixel (" +
                        std::to_string(u) + ", " + std::to_string(v) + ")");
      }
      const std::size_t i = truth.index(u, v);
      out.left(u, v) = texture(spec, hit.p);
      const Eigen::Vector3d cam = r.transpose() * hit.p;
      truth.disparity[i] = rig.f * rig.baseline / cam.z();
      truth.region[i] = hit.label;

      const Eigen::Vector3d to_point = hit.p - right_center;
      const Eigen::Vector3d in_right = r.transpose() * to_point;
      const double ur = rig.u0 + rig.f * in_right.x() / in_right.z();
      bool hidden = in_right.z() <= 0.0 || ur < 0.0 || ur > w - 1;
      if (!hidden) {
        const Hit blocker = cast(faces, right_center, to_point);
        hidden = blocker.t < 1.0 - 1e-7;
      }
      truth.occluded[i] = hidden ? 1 : 0;
    }
  }

  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const Hit hit = cast(faces, right_center, ray(u, v));
      if (hit.label == Region::kNone) {
        throw Error(ErrorKind::kDegenerateScene,
                    "degenerate spec: road plane not visible at right pixel (" +
                        std::to_string(u) + ", " + std::to_string(v) + ")");
      }
      out.right(u, v) = texture(spec, hit.p);
    }
  }
  return out;
}

PlanePrior analytic_road_line(const SceneSpec& spec) {
  const double k = spec.rig.baseline / spec.camera_height;
  PlanePrior prior;
  prior.alpha0 = k * (spec.rig.f * std::sin(spec.pitch) -
                      spec.rig.v0 * std::cos(spec.pitch));
  prior.alpha1 = k * std::cos(spec.pitch);
  return prior;
}

TruthMetrics truth_compare(const DisparityField& est, const GroundTruth& truth,
                           double threshold) {
  if (est.width != truth.width || est.height != truth.height) {
    throw Error(ErrorKind::kInvalidArgument,
                "estimate and ground truth differ in size");
  }
  TruthMetrics m;
  std::size_t bad = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < est.valid.size(); ++i) {
    if (!est.valid[i] || truth.occluded[i]) continue;
    const double err = std::abs(est.d[i] - truth.disparity[i]);
    if (err > threshold) ++bad;
    sum += err;
    ++m.count;
  }
  if (m.count == 0) {
    throw Error(ErrorKind::kEmptyEvaluation, "empty evaluation domain");
  }
  m.bad_percent = 100.0 * static_cast<double>(bad) / m.count;
  m.mean_abs_error = sum / m.count;
  return m;
}

void save_truth(const std::filesystem::path& dir, const RenderedPair& pair) {
  const GroundTruth& t = pair.truth;
  std::vector<float> values(t.disparity.begin(), t.disparity.end());
  save_dsp1(dir / "truth.dsp", t.width, t.height, values);
  GrayImage occ(t.width, t.height), region(t.width, t.height);
  for (std::size_t i = 0; i < values.size(); ++i) {
    occ.data()[i] = t.occluded[i] ? 255.0 : 0.0;
    region.data()[i] = 60.0 * static_cast<double>(t.region[i]);
  }
  save_pgm(dir / "occlusion.pgm", occ);
  save_pgm(dir / "regions.pgm", region);
}

GroundTruth load_truth(const std::filesystem::path& disparity_path,
                       const std::filesystem::path& occlusion_path) {
  const DisparityField field = load_disparity(disparity_path);
  GroundTruth t;
  t.width = field.width;
  t.height = field.height;
  t.disparity = field.d;
  t.region.assign(field.d.size(), Region::kNone);
  t.occluded.assign(field.d.size(), 0);
  for (std::size_t i = 0; i < field.d.size(); ++i) {
    if (!field.valid[i]) t.occluded[i] = 1;
  }
  if (!occlusion_path.empty()) {
    const GrayImage occ = load_image(occlusion_path);
    if (occ.width() != t.width || occ.height() != t.height) {
      throw Error(ErrorKind::kInvalidArgument,
                  "occlusion mask and truth differ in size");
    }
    for (std::size_t i = 0; i < t.occluded.size(); ++i) {
      if (occ.data()[i] > 127.0) t.occluded[i] = 1;
    }
  }
  return t;
}

}  // namespace roadstereo
