#include "oogplan/geom.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "oogplan/kdtree.hpp"
#include "oogplan/rng.hpp"

namespace oogplan::geom {

Rotation canonicalized(const Rotation& q) {
    Rotation out = q.normalized();
    if (out.w() < 0.0) out.coeffs() = -out.coeffs();
    return out;
}

double geodesic_angle(const Rotation& a, const Rotation& b) {
    const Rotation q = a.conjugate() * b;
    return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

PointCloud transformed(const PointCloud& cloud, const Pose& pose) {
    PointCloud out;
    out.points.reserve(cloud.points.size());
    for (const Vec3& p : cloud.points) out.points.push_back(pose * p);
    out.colors = cloud.colors;
    return out;
}

Vec3 centroid(const PointCloud& cloud) {
    if (cloud.empty()) fail(Errc::empty_input, "centroid of empty cloud");
    Vec3 c = Vec3::Zero();
    for (const Vec3& p : cloud.points) c += p;
    return c / static_cast<double>(cloud.size());
}

Rotation rodrigues_align(const Vec3& v1, const Vec3& v2) {
    const double n1 = v1.norm(), n2 = v2.norm();
    if (n1 <= kDirectionEps || n2 <= kDirectionEps)
        fail(Errc::degenerate_geometry, "rodrigues_align: zero-length direction");
    const Vec3 a = v1 / n1;
    const Vec3 b = v2 / n2;
    const Vec3 cross = a.cross(b);
    const double sin_angle = cross.norm();
    const double cos_angle = a.dot(b);
    if (sin_angle > 1e-12) {
        const double angle = std::atan2(sin_angle, cos_angle);
        return Rotation(Eigen::AngleAxisd(angle, cross / sin_angle));
    }
    if (cos_angle >= 0.0) return Rotation::Identity();
    // Antiparallel: pick the coordinate axis most orthogonal to v1 (ties
    // resolve toward z), then orthogonalize against v1 so the half-turn
    // maps v1 exactly onto -v1.
    int best_axis = 0;
    double best_dot = std::abs(a.x());
    for (int k = 1; k < 3; ++k) {
        const double dk = std::abs(a[k]);
        if (dk <= best_dot) {
            best_dot = dk;
            best_axis = k;
        }
    }
    Vec3 axis = Vec3::Unit(best_axis);
    axis -= axis.dot(a) * a;
    axis.normalize();
    return Rotation(Eigen::AngleAxisd(M_PI, axis));
}

Rotation slerp(const Rotation& r0, const Rotation& r1, double u) {
    Rotation q0 = r0.normalized();
    Rotation q1 = r1.normalized();
    double dot = q0.dot(q1);
    if (dot < 0.0) {
        q1.coeffs() = -q1.coeffs();
        dot = -dot;
    }
    Rotation out;
    if (dot > 1.0 - 1e-12) {
        out.coeffs() = (1.0 - u) * q0.coeffs() + u * q1.coeffs();
    } else {
        const double theta = std::acos(std::min(dot, 1.0));
        const double s = std::sin(theta);
        out.coeffs() =
            (std::sin((1.0 - u) * theta) / s) * q0.coeffs() + (std::sin(u * theta) / s) * q1.coeffs();
    }
    out.normalize();
    return out;
}

namespace {

struct PlaneHypothesis {
    Vec3 normal;
    double d = 0.0;
    bool valid = false;
};

Plane refine_plane(const PointCloud& cloud, const std::vector<int>& inliers, const Vec3& orient) {
    Vec3 c = Vec3::Zero();
    for (int i : inliers) c += cloud.points[i];
    c /= static_cast<double>(inliers.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int i : inliers) {
        const Vec3 q = cloud.points[i] - c;
        cov += q * q.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    Vec3 n = eig.eigenvectors().col(0);
    if (n.dot(orient) < 0.0) n = -n;
    n.normalize();
    return Plane{n, n.dot(c)};
}

} // namespace

Plane fit_plane_ransac(const PointCloud& cloud, int iterations, double inlier_threshold,
                       std::uint64_t seed) {
    const int n = static_cast<int>(cloud.size());
    if (n < 3) fail(Errc::insufficient_points, "plane fit needs >= 3 points");
    if (iterations < 1 || inlier_threshold <= 0.0)
        fail(Errc::invalid_argument, "plane fit: bad iterations/threshold");

    // Hypotheses are drawn serially from the seeded stream; scoring is
    // embarrassingly parallel and exact, so the selected hypothesis does
    // not depend on thread count.
    std::vector<PlaneHypothesis> hyp(static_cast<std::size_t>(iterations));
    Rng rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (auto& h : hyp) {
        const int i0 = pick(rng);
        int i1 = pick(rng);
        while (i1 == i0) i1 = pick(rng);
        int i2 = pick(rng);
        while (i2 == i0 || i2 == i1) i2 = pick(rng);
        const Vec3& p0 = cloud.points[i0];
        Vec3 nrm = (cloud.points[i1] - p0).cross(cloud.points[i2] - p0);
        const double len = nrm.norm();
        if (len < 1e-12) continue;
        nrm /= len;
        h.normal = nrm;
        h.d = nrm.dot(p0);
        h.valid = true;
    }

    std::vector<int> scores(hyp.size(), -1);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t h = 0; h < static_cast<std::ptrdiff_t>(hyp.size()); ++h) {
        if (!hyp[h].valid) continue;
        int count = 0;
        for (const Vec3& p : cloud.points)
            if (std::abs(hyp[h].normal.dot(p) - hyp[h].d) < inlier_threshold) ++count;
        scores[h] = count;
    }

    int best = -1, best_score = -1;
    for (std::size_t h = 0; h < hyp.size(); ++h) {
        if (scores[h] > best_score) {
            best_score = static_cast<int>(scores[h]);
            best = static_cast<int>(h);
        }
    }
    if (best < 0) fail(Errc::degenerate_geometry, "plane fit: all hypotheses collinear");

    std::vector<int> inliers;
    for (int i = 0; i < n; ++i)
        if (std::abs(hyp[best].normal.dot(cloud.points[i]) - hyp[best].d) < inlier_threshold)
            inliers.push_back(i);
    return refine_plane(cloud, inliers, hyp[best].normal);
}

Pose plane_alignment_transform(const Plane& plane) {
    Plane p = plane;
    // Orient the normal so the camera origin sits on the positive side;
    // after alignment the camera ends up above the table.
    if (p.signed_distance(Vec3::Zero()) < 0.0) {
        p.normal = -p.normal;
        p.d = -p.d;
    }
    Rotation r;
    if ((p.normal - Vec3::UnitZ()).norm() < 1e-15)
        r = Rotation::Identity();
    else
        r = rodrigues_align(p.normal, Vec3::UnitZ());
    return Pose{r, Vec3(0.0, 0.0, -p.d)};
}

Pose kabsch_align(const PointCloud& src, const PointCloud& dst, bool* degenerate) {
    if (src.size() != dst.size()) fail(Errc::invalid_argument, "kabsch: size mismatch");
    if (src.size() < 3) fail(Errc::insufficient_points, "kabsch needs >= 3 correspondences");
    const double inv_n = 1.0 / static_cast<double>(src.size());
    Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        cs += src.points[i];
        cd += dst.points[i];
    }
    cs *= inv_n;
    cd *= inv_n;

    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d src_cov = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Vec3 a = src.points[i] - cs;
        h += a * (dst.points[i] - cd).transpose();
        src_cov += a * a.transpose();
    }

    if (degenerate) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(src_cov);
        const double lmax = eig.eigenvalues()(2);
        *degenerate = lmax <= 0.0 || eig.eigenvalues()(1) < 1e-12 * lmax;
    }

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Matrix3d u = svd.matrixU();
    const Eigen::Matrix3d v = svd.matrixV();
    Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
    if ((v * u.transpose()).determinant() < 0.0) s(2, 2) = -1.0;
    const Eigen::Matrix3d r = v * s * u.transpose();

    Pose out;
    out.rotation = Rotation(r).normalized();
    out.translation = cd - out.rotation * cs;
    return out;
}

PointCloud backproject(const std::vector<double>& depth, const CameraIntrinsics& intr,
                       const std::vector<std::uint8_t>& mask) {
    const std::size_t expected =
        static_cast<std::size_t>(intr.width) * static_cast<std::size_t>(intr.height);
    if (intr.width <= 0 || intr.height <= 0 || intr.fx <= 0.0 || intr.fy <= 0.0)
        fail(Errc::invalid_argument, "backproject: bad intrinsics");
    if (depth.size() != expected || mask.size() != expected)
        fail(Errc::invalid_argument, "backproject: buffer size mismatch");

    PointCloud out;
    for (int v = 0; v < intr.height; ++v) {
        for (int u = 0; u < intr.width; ++u) {
            const std::size_t i =
                static_cast<std::size_t>(v) * static_cast<std::size_t>(intr.width) + u;
            if (!mask[i]) continue;
            const double z = depth[i];
            if (!std::isfinite(z) || z <= 0.0) continue;
            out.points.emplace_back((u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z);
        }
    }
    if (out.empty()) fail(Errc::empty_input, "backproject: no masked pixel has valid depth");
    return out;
}

double bbox_diagonal(const PointCloud& cloud) {
    if (cloud.empty()) fail(Errc::empty_input, "bbox_diagonal of empty cloud");
    Vec3 mn = cloud.points.front(), mx = mn;
    for (const Vec3& p : cloud.points) {
        mn = mn.cwiseMin(p);
        mx = mx.cwiseMax(p);
    }
    return (mx - mn).norm();
}

double scale_factor(const PointCloud& reference_cloud, const PointCloud& arbitrary_scale_vertices) {
    const double p = bbox_diagonal(reference_cloud);
    const double m = bbox_diagonal(arbitrary_scale_vertices);
    if (p <= 0.0 || m <= 0.0) fail(Errc::degenerate_geometry, "scale_factor: zero diagonal");
    return p / m;
}

namespace {

PointCloud filter_outliers(const PointCloud& cloud, int k, double std_ratio, bool parallel) {
    const int n = static_cast<int>(cloud.size());
    if (k < 1) fail(Errc::invalid_argument, "outlier removal: k must be positive");
    if (n <= k) fail(Errc::too_few_points, "outlier removal needs more points than neighbors");

    KdTree3 tree(cloud.points);
    std::vector<double> mean_dist(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) if (parallel)
    for (int i = 0; i < n; ++i) {
        const auto nn = tree.knn(cloud.points[i], k + 1); // includes self at distance 0
        double sum = 0.0;
        int used = 0;
        for (int j : nn) {
            if (j == i) continue;
            sum += (cloud.points[j] - cloud.points[i]).norm();
            if (++used == k) break;
        }
        mean_dist[i] = sum / static_cast<double>(used);
    }

    const double mean =
        std::accumulate(mean_dist.begin(), mean_dist.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double d : mean_dist) var += (d - mean) * (d - mean);
    var /= static_cast<double>(n);
    const double cutoff = mean + std_ratio * std::sqrt(var);

    PointCloud out;
    const bool has_colors = cloud.colors.size() == cloud.points.size();
    for (int i = 0; i < n; ++i) {
        if (mean_dist[i] <= cutoff) {
            out.points.push_back(cloud.points[i]);
            if (has_colors) out.colors.push_back(cloud.colors[i]);
        }
    }
    return out;
}

} // namespace

PointCloud remove_statistical_outliers(const PointCloud& cloud, int k_neighbors, double std_ratio) {
    return filter_outliers(cloud, k_neighbors, std_ratio, true);
}

PointCloud remove_statistical_outliers_serial(const PointCloud& cloud, int k_neighbors,
                                              double std_ratio) {
    return filter_outliers(cloud, k_neighbors, std_ratio, false);
}

double min_cloud_distance(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty()) fail(Errc::empty_input, "min_cloud_distance on empty cloud");
    const PointCloud& small = a.size() <= b.size() ? a : b;
    const PointCloud& large = a.size() <= b.size() ? b : a;
    KdTree3 tree(large.points);
    double best = std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(static) reduction(min : best)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(small.size()); ++i) {
        double d2 = 0.0;
        tree.nearest(small.points[i], &d2);
        best = std::min(best, d2);
    }
    return std::sqrt(best);
}

double min_cloud_distance_serial(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty()) fail(Errc::empty_input, "min_cloud_distance on empty cloud");
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& p : a.points)
        for (const Vec3& q : b.points) best = std::min(best, (p - q).squaredNorm());
    return std::sqrt(best);
}

} // namespace oogplan::geom
