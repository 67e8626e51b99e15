#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <vector>

#include "oogplan/error.hpp"

namespace oogplan::geom {

using Vec3 = Eigen::Vector3d;
using Rotation = Eigen::Quaterniond;

// Directions shorter than this are treated as degenerate.
inline constexpr double kDirectionEps = 1e-8;

/// Unit quaternion with w >= 0 (fixes the double cover for serialization
/// and comparisons).
Rotation canonicalized(const Rotation& q);

/// Geodesic angle between two rotations in [0, pi]. Accurate near zero.
double geodesic_angle(const Rotation& a, const Rotation& b);

/// Rigid transform: p -> rotation * p + translation.
struct Pose {
    Rotation rotation{1.0, 0.0, 0.0, 0.0};
    Vec3 translation{0.0, 0.0, 0.0};

    static Pose identity() { return Pose{}; }

    Pose inverse() const {
        const Rotation rinv = rotation.conjugate();
        return Pose{rinv, rinv * (-translation)};
    }

    Pose operator*(const Pose& rhs) const {
        Pose out;
        out.rotation = (rotation * rhs.rotation).normalized();
        out.translation = rotation * rhs.translation + translation;
        return out;
    }

    Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }

    Eigen::Matrix4d matrix() const {
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        m.topLeftCorner<3, 3>() = rotation.toRotationMatrix();
        m.topRightCorner<3, 1>() = translation;
        return m;
    }
};

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> colors; // empty, or one RGB in [0,1] per point

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

PointCloud transformed(const PointCloud& cloud, const Pose& pose);
Vec3 centroid(const PointCloud& cloud);

/// Plane a*x + b*y + c*z = d with unit normal (a, b, c).
struct Plane {
    Vec3 normal{0.0, 0.0, 1.0};
    double d = 0.0;

    double signed_distance(const Vec3& p) const { return normal.dot(p) - d; }
};

struct CameraIntrinsics {
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;
};

/// Rotation mapping direction v1 onto direction v2 (inputs need not be
/// normalized). Antiparallel inputs flip 180 degrees about the coordinate
/// axis most orthogonal to v1 (ties toward z), projected into v1's
/// orthogonal plane so the mapping stays exact.
Rotation rodrigues_align(const Vec3& v1, const Vec3& v2);

/// Geodesic interpolation along the shortest arc, u in [0, 1].
Rotation slerp(const Rotation& r0, const Rotation& r1, double u);

/// Seeded RANSAC plane fit: best 3-point hypothesis by inlier count,
/// refined by least squares over its inliers.
Plane fit_plane_ransac(const PointCloud& cloud, int iterations, double inlier_threshold,
                       std::uint64_t seed);

/// Rigid transform sending the plane to z = 0 with +z normal, oriented so
/// the frame origin (the camera) lands at positive z.
Pose plane_alignment_transform(const Plane& plane);

/// Least-squares rigid alignment of paired points (dst_i ~ T * src_i).
/// If degenerate is given, it is set when src is collinear and the rotation
/// about that line is unconstrained.
Pose kabsch_align(const PointCloud& src, const PointCloud& dst, bool* degenerate = nullptr);

/// Pinhole back-projection of masked, valid depth pixels. depth and mask
/// are row-major width*height buffers.
PointCloud backproject(const std::vector<double>& depth, const CameraIntrinsics& intrinsics,
                       const std::vector<std::uint8_t>& mask);

double bbox_diagonal(const PointCloud& cloud);

/// Uniform scale s so arbitrary_scale_vertices * s matches the reference
/// cloud's bounding-box diagonal.
double scale_factor(const PointCloud& reference_cloud, const PointCloud& arbitrary_scale_vertices);

/// Keeps points whose mean distance to the k nearest neighbors is within
/// mean + std_ratio * stddev of the population statistic.
PointCloud remove_statistical_outliers(const PointCloud& cloud, int k_neighbors, double std_ratio);
PointCloud remove_statistical_outliers_serial(const PointCloud& cloud, int k_neighbors,
                                              double std_ratio);

/// Minimum pairwise distance between two clouds (exact). The production
/// kernel queries a k-d tree in parallel; the serial variant is the brute
/// force reference.
double min_cloud_distance(const PointCloud& a, const PointCloud& b);
double min_cloud_distance_serial(const PointCloud& a, const PointCloud& b);

} // namespace oogplan::geom
