#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

#include "c2calib/errors.hpp"

namespace c2calib {

using Point2 = Eigen::Vector2d;
using Point3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

/// Natural camera: square pixels, explicit skew (0 unless inspecting a
/// decomposition result).
struct Intrinsics {
    double f = 1.0;
    Point2 pp = Point2::Zero();
    double skew = 0.0;

    Mat3 matrix() const {
        Mat3 K;
        K << f, skew, pp.x(), 0.0, f, pp.y(), 0.0, 0.0, 1.0;
        return K;
    }
    Mat3 inverse_matrix() const;
};

/// Unconstrained intrinsics as they come out of a matrix decomposition.
struct GeneralIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double skew = 0.0;
    Point2 pp = Point2::Zero();

    Mat3 matrix() const {
        Mat3 K;
        K << fx, skew, pp.x(), 0.0, fy, pp.y(), 0.0, 0.0, 1.0;
        return K;
    }
    /// Collapse to a natural camera: f = (fx+fy)/2, skew dropped.
    Intrinsics naturalized() const { return Intrinsics{0.5 * (fx + fy), pp, 0.0}; }
};

struct Pose {
    Mat3 R = Mat3::Identity();
    Point3 t = Point3::Zero();

    Point3 apply(const Point3& X) const { return R * X + t; }
    Pose inverse() const { return Pose{R.transpose(), -(R.transpose() * t)}; }
};

/// Finite projective camera, 3x4 up to scale.
struct ProjectiveCamera {
    Mat34 M = (Mat34() << Mat3::Identity(), Point3::Zero()).finished();

    static ProjectiveCamera compose(const Intrinsics& K, const Pose& pose);
    static ProjectiveCamera compose(const GeneralIntrinsics& K, const Pose& pose);

    /// Camera center (null space of M, dehomogenized).
    Point3 center() const;

    /// Signed depth of X in front of the camera, invariant to the scale and
    /// sign of M (H&Z eq. 6.15).
    double depth(const Point3& X) const;
};

struct DecomposedCamera {
    GeneralIntrinsics intrinsics;
    Pose pose;
};

struct ResectionResult {
    ProjectiveCamera camera;
    double mean_reprojection = 0.0;  // pixels, over the input correspondences
};

// Scale conventions for up-to-scale matrices (deterministic comparisons).
Mat3 normalize_homography_scale(Mat3 H);    // ||H||_F = 1, last nonzero entry > 0
Mat34 normalize_camera_scale(Mat34 M);      // ||M||_F = 1, largest-|.| entry > 0

Point2 project(const ProjectiveCamera& camera, const Point3& X);

/// Image of the absolute conic, w = K^-T K^-1.
Mat3 iac(const Intrinsics& K);

/// Normalized DLT (Hartley normalization on both sides), >= 4 pairs.
Mat3 estimate_homography(std::span<const std::pair<Point2, Point2>> pairs);

/// Normalized DLT camera resection, >= 6 non-coplanar correspondences.
ResectionResult resect_dlt(std::span<const std::pair<Point3, Point2>> points);

/// RQ decomposition with positive-diagonal K, K(2,2) = 1, det(R) = +1.
DecomposedCamera decompose(const ProjectiveCamera& camera);

/// Homogeneous DLT triangulation with cheirality check in both views.
Point3 triangulate(const ProjectiveCamera& cam_a, const ProjectiveCamera& cam_b,
                   const Point2& x_a, const Point2& x_b);

}  // namespace c2calib
