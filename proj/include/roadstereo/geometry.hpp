#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <span>
#include <vector>

#include "roadstereo/disparity.hpp"
#include "roadstereo/plane_prior.hpp"

namespace roadstereo {

struct CameraRig {
  double f = 1400.0;       // px
  double u0 = 620.0;       // px
  double v0 = 310.0;       // px
  double baseline = 120.0; // mm
};

void validate(const CameraRig& rig);
void save_rig(const std::filesystem::path& path, const CameraRig& rig);
CameraRig load_rig(const std::filesystem::path& path);

// Rig orientation relative to the road, radians.
struct Pose {
  double pitch = 0.0;
  double roll = 0.0;
  double yaw = 0.0;
};

struct CloudPoint {
  Eigen::Vector3d p;  // mm
  int u = -1;
  int v = -1;
};

struct PointCloud {
  std::vector<CloudPoint> points;
  std::size_t skipped = 0;  // valid pixels with d <= 0
};

// Image rectangle [u_begin, u_end) x [v_begin, v_end).
struct PixelRect {
  int u_begin = 0;
  int v_begin = 0;
  int u_end = 0;
  int v_end = 0;
};

// Bottom 20% of rows, central 50% of columns.
PixelRect default_roll_patch(int width, int height);

// Least-squares plane d = g0 + g1 u + g2 v over the valid pixels of patch;
// returns atan(-g1 / g2).
double estimate_roll(const DisparityField& field, const PixelRect& patch);

// atan((alpha0 / alpha1 + v0) / f); pi/2 when alpha1 == 0.
double estimate_pitch(const PlanePrior& prior, const CameraRig& rig);

// R = R_yaw * R_pitch * R_roll.
Eigen::Matrix3d rotation_matrix(const Pose& pose);

// Z = f Tc / d, X = Z (u - u0) / f, Y = Z (v - v0) / f, then P' = R P.
PointCloud reproject(const DisparityField& field, const CameraRig& rig,
                     const Pose& pose);

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double d = 0.0;
};
// Inverse of reproject for a single point.
Projection project(const Eigen::Vector3d& point, const CameraRig& rig,
                   const Pose& pose);

// Plane n.x + k = 0 with unit normal oriented toward the origin (camera).
struct Plane3 {
  Eigen::Vector3d normal;
  double offset = 0.0;
  double signed_distance(const Eigen::Vector3d& p) const {
    return normal.dot(p) + offset;
  }
};

// Total least squares plane; throws kDegeneratePlane for collinear input.
Plane3 fit_plane(std::span<const Eigen::Vector3d> points);

// Signed distances of probes to the plane fitted through the four corners.
// Positive values lie on the camera side of the plane.
std::vector<double> measure_offsets(std::span<const Eigen::Vector3d> corners,
                                    std::span<const Eigen::Vector3d> probes);

// ASCII PLY with float x, y, z and int u, v per vertex.
void save_ply(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud load_ply(const std::filesystem::path& path);

}  // namespace roadstereo
