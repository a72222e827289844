#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "facecast/common.hpp"
#include "facecast/geometry.hpp"

namespace facecast {

/// Proper rigid transform x -> R x + t. R orthonormal with det +1.
struct RigidTransform {
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Eigen::Vector3d t = Eigen::Vector3d::Zero();

    static RigidTransform identity() { return {}; }

    Point3 apply(const Point3& p) const {
        Eigen::Vector3d v = R * Eigen::Vector3d(p.x, p.y, p.z) + t;
        return {v.x(), v.y(), v.z()};
    }

    PointCloud apply(const PointCloud& cloud) const {
        PointCloud out;
        out.points.reserve(cloud.size());
        for (const auto& p : cloud.points) out.points.push_back(apply(p));
        return out;
    }

    /// this ∘ other: applies `other` first.
    RigidTransform compose(const RigidTransform& other) const {
        RigidTransform out;
        out.R = R * other.R;
        out.t = R * other.t + t;
        return out;
    }

    RigidTransform inverse() const {
        RigidTransform out;
        out.R = R.transpose();
        out.t = -(R.transpose() * t);
        return out;
    }

    bool is_rigid(double tol = 1e-9) const {
        return (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
               std::abs(R.determinant() - 1.0) <= tol;
    }
};

namespace detail {

/// Least-squares rigid fit for paired points (Kabsch). Reflection corrected by
/// flipping the smallest singular direction.
inline RigidTransform fit_rigid_pairs(const PointCloud& source, const PointCloud& target,
                                      bool check_degenerate) {
    const std::size_t n = source.size();
    Eigen::Vector3d cs = Eigen::Vector3d::Zero(), ct = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        cs += Eigen::Vector3d(source[i].x, source[i].y, source[i].z);
        ct += Eigen::Vector3d(target[i].x, target[i].y, target[i].z);
    }
    cs /= static_cast<double>(n);
    ct /= static_cast<double>(n);

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d scatter_s = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::Vector3d s = Eigen::Vector3d(source[i].x, source[i].y, source[i].z) - cs;
        Eigen::Vector3d d = Eigen::Vector3d(target[i].x, target[i].y, target[i].z) - ct;
        cov += s * d.transpose();
        scatter_s += s * s.transpose();
    }
    if (check_degenerate) {
        // collinear sources leave a free rotation about the line
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter_s);
        double lmax = es.eigenvalues()(2);
        if (lmax <= 0.0 || es.eigenvalues()(1) <= 1e-12 * lmax)
            throw DegenerateConfiguration("landmark_rigid_init: landmarks are collinear");
    }

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d U = svd.matrixU(), V = svd.matrixV();
    Eigen::Matrix3d S = Eigen::Matrix3d::Identity();
    if ((V * U.transpose()).determinant() < 0.0) S(2, 2) = -1.0;
    RigidTransform out;
    out.R = V * S * U.transpose();
    out.t = ct - out.R * cs;
    return out;
}

}  // namespace detail

/// Closed-form rigid fit on corresponding landmark pairs (cross-covariance
/// SVD). Requires >= 3 non-collinear pairs.
inline RigidTransform landmark_rigid_init(const PointCloud& source_pts,
                                          const PointCloud& target_pts) {
    if (source_pts.size() != target_pts.size())
        throw InvalidParameter("landmark_rigid_init: point counts differ");
    if (source_pts.size() < 3)
        throw DegenerateConfiguration("landmark_rigid_init: need at least 3 landmark pairs");
    return detail::fit_rigid_pairs(source_pts, target_pts, /*check_degenerate=*/true);
}

struct IcpResult {
    RigidTransform transform;
    int iterations = 0;
    double rms = 0.0;
};

/// Point-to-point ICP. Alternates nearest-neighbor correspondence with the
/// closed-form rigid fit; the RMS correspondence error never increases.
inline IcpResult icp_refine(const PointCloud& source, const PointCloud& target,
                            const RigidTransform& init, int max_iters = 50, double tol = 1e-6) {
    if (source.empty() || target.empty()) throw InvalidParameter("icp_refine: empty cloud");
    if (max_iters < 0) throw InvalidParameter("icp_refine: max_iters must be >= 0");

    IcpResult result;
    result.transform = init;
    if (max_iters == 0) return result;

    KdTree tree(target);
    const std::size_t n = source.size();
    PointCloud moved(std::vector<Point3>(n));
    PointCloud corr(std::vector<Point3>(n));

    double prev_rms = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iters; ++iter) {
        for (std::size_t i = 0; i < n; ++i) moved.points[i] = result.transform.apply(source[i]);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int j = tree.nearest(moved[i]);
            corr.points[i] = target[j];
            sum += squared_distance(moved[i], target[j]);
        }
        double rms = std::sqrt(sum / static_cast<double>(n));
        if (rms > prev_rms + 1e-12)
            throw InternalError("icp_refine: RMS increased across an iteration");
        result.iterations = iter + 1;
        result.rms = rms;
        if (prev_rms - rms < tol && iter > 0) break;
        prev_rms = rms;
        if (rms == 0.0) break;
        // refit on the fixed correspondences; composition with the previous
        // estimate is absorbed by fitting from the original source
        result.transform = detail::fit_rigid_pairs(source, corr, /*check_degenerate=*/false);
    }
    return result;
}

}  // namespace facecast
