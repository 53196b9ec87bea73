#include "roadstereo/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>

#include "roadstereo/error.hpp"
#include "roadstereo/keyvalue.hpp"

namespace roadstereo {

void validate(const CameraRig& rig) {
  if (!(rig.f > 0.0) || !(rig.baseline > 0.0)) {
    throw Error(ErrorKind::kConfig,
                "camera rig needs f > 0 and baseline > 0");
  }
}

void save_rig(const std::filesystem::path& path, const CameraRig& rig) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << std::setprecision(17) << "f = " << rig.f << "\nu0 = " << rig.u0
      << "\nv0 = " << rig.v0 << "\nbaseline = " << rig.baseline << "\n";
}

CameraRig load_rig(const std::filesystem::path& path) {
  const auto kv = KeyValueFile::read(path);
  CameraRig rig;
  rig.f = kv.require_double("f");
  rig.u0 = kv.require_double("u0");
  rig.v0 = kv.require_double("v0");
  rig.baseline = kv.require_double("baseline");
  validate(rig);
  return rig;
}

PixelRect default_roll_patch(int width, int height) {
  return {width / 4, height - height / 5, width - width / 4, height};
}

double estimate_roll(const DisparityField& field, const PixelRect& patch) {
  // Normal equations of d = g0 + g1 u + g2 v, centered for conditioning.
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d atb = Eigen::Vector3d::Zero();
  const double cu = 0.5 * (patch.u_begin + patch.u_end);
  const double cv = 0.5 * (patch.v_begin + patch.v_end);
  std::size_t n = 0;
  for (int v = std::max(0, patch.v_begin); v < std::min(field.height, patch.v_end);
       ++v) {
    for (int u = std::max(0, patch.u_begin);
         u < std::min(field.width, patch.u_end); ++u) {
      const std::size_t i = field.index(u, v);
      if (!field.valid[i]) continue;
      const Eigen::Vector3d row(1.0, u - cu, v - cv);
      ata += row * row.transpose();
      atb += row * field.d[i];
      ++n;
    }
  }
  if (n < 3) {
    throw Error(ErrorKind::kInsufficientRollEvidence,
                "insufficient roll evidence: " + std::to_string(n) +
                    " valid pixels in patch");
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(ata);
  lu.setThreshold(1e-12);
  if (lu.rank() < 3) {
    throw Error(ErrorKind::kInsufficientRollEvidence,
                "insufficient roll evidence: collinear patch");
  }
  const Eigen::Vector3d g = lu.solve(atb);
  const double scale = std::abs(g[1]) + std::abs(g[2]);
  if (std::abs(g[2]) <= 1e-12 * std::max(1.0, scale)) {
    throw Error(ErrorKind::kInsufficientRollEvidence,
                "insufficient roll evidence: disparity does not vary with v");
  }
  return std::atan(-g[1] / g[2]);
}

double estimate_pitch(const PlanePrior& prior, const CameraRig& rig) {
  if (prior.alpha1 == 0.0) return std::numbers::pi / 2.0;
  return std::atan((prior.alpha0 / prior.alpha1 + rig.v0) / rig.f);
}

Eigen::Matrix3d rotation_matrix(const Pose& pose) {
  const double cp = std::cos(pose.yaw), sp = std::sin(pose.yaw);
  const double ct = std::cos(pose.pitch), st = std::sin(pose.pitch);
  const double cg = std::cos(pose.roll), sg = std::sin(pose.roll);
  Eigen::Matrix3d yaw;
  yaw << cp, 0, sp,
         0, 1, 0,
         -sp, 0, cp;
  Eigen::Matrix3d pitch;
  pitch << 1, 0, 0,
           0, ct, st,
           0, -st, ct;
  Eigen::Matrix3d roll;
  roll << cg, sg, 0,
          -sg, cg, 0,
          0, 0, 1;
  return yaw * pitch * roll;
}

PointCloud reproject(const DisparityField& field, const CameraRig& rig,
                     const Pose& pose) {
  validate(rig);
  const Eigen::Matrix3d r = rotation_matrix(pose);
  PointCloud cloud;
  cloud.points.reserve(field.count_valid());
  for (int v = 0; v < field.height; ++v) {
    for (int u = 0; u < field.width; ++u) {
      const std::size_t i = field.index(u, v);
      if (!field.valid[i]) continue;
      const double d = field.d[i];
      if (!(d > 0.0)) {
        ++cloud.skipped;
        continue;
      }
      const double z = rig.f * rig.baseline / d;
      const Eigen::Vector3d p(z * (u - rig.u0) / rig.f,
                              z * (v - rig.v0) / rig.f, z);
      cloud.points.push_back({r * p, u, v});
    }
  }
  return cloud;
}

Projection project(const Eigen::Vector3d& point, const CameraRig& rig,
                   const Pose& pose) {
  const Eigen::Vector3d p = rotation_matrix(pose).transpose() * point;
  return {rig.u0 + rig.f * p.x() / p.z(), rig.v0 + rig.f * p.y() / p.z(),
          rig.f * rig.baseline / p.z()};
}

Plane3 fit_plane(std::span<const Eigen::Vector3d> points) {
  if (points.size() < 3) {
    throw Error(ErrorKind::kDegeneratePlane,
                "degenerate reference plane: fewer than 3 points");
  }
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d q = p - centroid;
    cov += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Eigen::Vector3d ev = solver.eigenvalues();  // ascending
  if (ev[1] <= 1e-12 * std::max(ev[2], 1e-300)) {
    throw Error(ErrorKind::kDegeneratePlane,
                "degenerate reference plane: points are collinear");
  }
  Plane3 plane;
  plane.normal = solver.eigenvectors().col(0).normalized();
  plane.offset = -plane.normal.dot(centroid);
  // Camera (origin) on the positive side.
  if (plane.offset < 0.0) {
    plane.normal = -plane.normal;
    plane.offset = -plane.offset;
  }
  return plane;
}

std::vector<double> measure_offsets(std::span<const Eigen::Vector3d> corners,
                                    std::span<const Eigen::Vector3d> probes) {
  if (corners.size() != 4) {
    throw Error(ErrorKind::kDegeneratePlane,
                "degenerate reference plane: expected 4 corners, got " +
                    std::to_string(corners.size()));
  }
  const Plane3 plane = fit_plane(corners);
  std::vector<double> out;
  out.reserve(probes.size());
  for (const auto& p : probes) out.push_back(plane.signed_distance(p));
  return out;
}

void save_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property int u\nproperty int v\nend_header\n";
  out << std::setprecision(9);
  for (const auto& pt : cloud.points) {
    out << pt.p.x() << " " << pt.p.y() << " " << pt.p.z() << " " << pt.u
        << " " << pt.v << "\n";
  }
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

PointCloud load_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "unreadable file: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
    throw Error(ErrorKind::kIo, "unsupported format: not a PLY file");
  }
  std::size_t count = 0;
  bool in_vertex = false;
  std::vector<std::string> props;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") {
        throw Error(ErrorKind::kIo, "unsupported format: binary PLY");
      }
    } else if (word == "element") {
      std::string name;
      ls >> name >> count;
      in_vertex = name == "vertex";
      if (!in_vertex) {
        throw Error(ErrorKind::kIo,
                    "unsupported format: PLY element " + name);
      }
    } else if (word == "property" && in_vertex) {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  auto find = [&](const std::string& name) {
    for (std::size_t k = 0; k < props.size(); ++k) {
      if (props[k] == name) return static_cast<int>(k);
    }
    return -1;
  };
  const int ix = find("x"), iy = find("y"), iz = find("z");
  const int iu = find("u"), iv = find("v");
  if (ix < 0 || iy < 0 || iz < 0) {
    throw Error(ErrorKind::kIo, "unsupported format: PLY without x, y, z");
  }
  PointCloud cloud;
  cloud.points.reserve(count);
  std::vector<double> values(props.size());
  for (std::size_t k = 0; k < count; ++k) {
    for (auto& x : values) {
      if (!(in >> x)) {
        throw Error(ErrorKind::kIo, "unreadable file: truncated PLY");
      }
    }
    CloudPoint pt;
    pt.p = {values[ix], values[iy], values[iz]};
    if (iu >= 0 && iv >= 0) {
      pt.u = static_cast<int>(values[iu]);
      pt.v = static_cast<int>(values[iv]);
    }
    cloud.points.push_back(pt);
  }
  return cloud;
}

}  // namespace roadstereo
