#include "c2calib/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

namespace c2calib {

namespace {

Eigen::Vector3d homog(const Point2& p) { return {p.x(), p.y(), 1.0}; }
Eigen::Vector4d homog(const Point3& p) { return {p.x(), p.y(), p.z(), 1.0}; }

// Hartley normalization: centroid to the origin, RMS distance sqrt(dim).
struct Normalization2 {
    Mat3 T = Mat3::Identity();
    std::vector<Point2> points;
};

Normalization2 normalize_points(std::span<const Point2> pts) {
    Point2 centroid = Point2::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= static_cast<double>(pts.size());

    double sq = 0.0;
    for (const auto& p : pts) sq += (p - centroid).squaredNorm();
    double rms = std::sqrt(sq / static_cast<double>(pts.size()));
    if (rms <= 0.0)
        throw_error(ErrorCode::DegenerateConfiguration, "all points coincide");
    double s = std::sqrt(2.0) / rms;

    Normalization2 out;
    out.T << s, 0.0, -s * centroid.x(), 0.0, s, -s * centroid.y(), 0.0, 0.0, 1.0;
    out.points.reserve(pts.size());
    for (const auto& p : pts) out.points.push_back(s * (p - centroid));
    return out;
}

struct Normalization3 {
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    std::vector<Point3> points;
};

Normalization3 normalize_points(std::span<const Point3> pts) {
    Point3 centroid = Point3::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= static_cast<double>(pts.size());

    double sq = 0.0;
    for (const auto& p : pts) sq += (p - centroid).squaredNorm();
    double rms = std::sqrt(sq / static_cast<double>(pts.size()));
    if (rms <= 0.0)
        throw_error(ErrorCode::DegenerateConfiguration, "all points coincide");
    double s = std::sqrt(3.0) / rms;

    Normalization3 out;
    out.T.topLeftCorner<3, 3>() = s * Mat3::Identity();
    out.T.topRightCorner<3, 1>() = -s * centroid;
    out.points.reserve(pts.size());
    for (const auto& p : pts) out.points.push_back(s * (p - centroid));
    return out;
}

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

// Camera center via cofactor expansion; fourth homogeneous component is
// -det(A), nonzero for a finite camera.
Eigen::Vector4d center_homogeneous(const Mat34& M) {
    Eigen::Vector4d c;
    Mat3 B;
    B << M.col(1), M.col(2), M.col(3);
    c(0) = B.determinant();
    B << M.col(0), M.col(2), M.col(3);
    c(1) = -B.determinant();
    B << M.col(0), M.col(1), M.col(3);
    c(2) = B.determinant();
    B << M.col(0), M.col(1), M.col(2);
    c(3) = -B.determinant();
    return c;
}

}  // namespace

Mat3 Intrinsics::inverse_matrix() const {
    if (!(f > 0.0)) throw_error(ErrorCode::InvalidInput, "focal length must be positive");
    return matrix().inverse();
}

ProjectiveCamera ProjectiveCamera::compose(const Intrinsics& K, const Pose& pose) {
    Mat34 Rt;
    Rt << pose.R, pose.t;
    return ProjectiveCamera{K.matrix() * Rt};
}

ProjectiveCamera ProjectiveCamera::compose(const GeneralIntrinsics& K, const Pose& pose) {
    Mat34 Rt;
    Rt << pose.R, pose.t;
    return ProjectiveCamera{K.matrix() * Rt};
}

Point3 ProjectiveCamera::center() const {
    Eigen::Vector4d c = center_homogeneous(M);
    if (std::abs(c(3)) <= 1e-15 * c.head<3>().norm())
        throw_error(ErrorCode::SingularCamera, "camera center at infinity");
    return c.head<3>() / c(3);
}

double ProjectiveCamera::depth(const Point3& X) const {
    const Mat3 A = M.leftCols<3>();
    const double w = M.row(2).dot(homog(X));
    const double a3 = A.row(2).norm();
    if (a3 <= 0.0) throw_error(ErrorCode::SingularCamera, "zero third row");
    return sign_of(A.determinant()) * w / a3;
}

Mat3 normalize_homography_scale(Mat3 H) {
    const double n = H.norm();
    if (n <= 0.0) throw_error(ErrorCode::DegenerateConfiguration, "zero homography");
    H /= n;
    // Sign: last nonzero entry (row-major scan) positive.
    for (int i = 8; i >= 0; --i) {
        const double v = H(i / 3, i % 3);
        if (std::abs(v) > 1e-12) {
            if (v < 0.0) H = -H;
            break;
        }
    }
    return H;
}

Mat34 normalize_camera_scale(Mat34 M) {
    const double n = M.norm();
    if (n <= 0.0) throw_error(ErrorCode::SingularCamera, "zero camera matrix");
    M /= n;
    int r = 0, c = 0;
    M.cwiseAbs().maxCoeff(&r, &c);
    if (M(r, c) < 0.0) M = -M;
    return M;
}

Point2 project(const ProjectiveCamera& camera, const Point3& X) {
    const double d = camera.depth(X);
    // Depth gate relative to the camera-to-origin distance (||t|| = ||C||).
    Eigen::Vector4d ch = center_homogeneous(camera.M);
    double tnorm = 0.0;
    if (std::abs(ch(3)) > 0.0) tnorm = (ch.head<3>() / ch(3)).norm();
    const double eps_depth = tnorm > 0.0 ? 1e-12 * tnorm : 1e-12;
    if (d <= eps_depth)
        throw_error(ErrorCode::DegenerateProjection, "point at or behind the camera plane");
    const Eigen::Vector3d x = camera.M * homog(X);
    return {x.x() / x.z(), x.y() / x.z()};
}

Mat3 iac(const Intrinsics& K) {
    const Mat3 Kinv = K.inverse_matrix();
    Mat3 w = Kinv.transpose() * Kinv;
    return 0.5 * (w + w.transpose());  // exact symmetry
}

Mat3 estimate_homography(std::span<const std::pair<Point2, Point2>> pairs) {
    const auto n = pairs.size();
    if (n < 4) throw_error(ErrorCode::InvalidInput, "homography needs >= 4 pairs");

    std::vector<Point2> src, dst;
    src.reserve(n);
    dst.reserve(n);
    for (const auto& [a, b] : pairs) {
        src.push_back(a);
        dst.push_back(b);
    }
    const auto ns = normalize_points(std::span<const Point2>(src));
    const auto nd = normalize_points(std::span<const Point2>(dst));

    Eigen::MatrixXd A(2 * n, 9);
    for (size_t i = 0; i < n; ++i) {
        const double X = ns.points[i].x(), Y = ns.points[i].y();
        const double u = nd.points[i].x(), v = nd.points[i].y();
        A.row(2 * i) << -X, -Y, -1, 0, 0, 0, u * X, u * Y, u;
        A.row(2 * i + 1) << 0, 0, 0, -X, -Y, -1, v * X, v * Y, v;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(7) <= 1e-9 * sv(0))
        throw_error(ErrorCode::DegenerateConfiguration, "homography design matrix rank < 8");

    Eigen::VectorXd h = svd.matrixV().col(8);
    Mat3 Hn;
    Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
    return normalize_homography_scale(nd.T.inverse() * Hn * ns.T);
}

ResectionResult resect_dlt(std::span<const std::pair<Point3, Point2>> points) {
    const auto n = points.size();
    if (n < 6) throw_error(ErrorCode::InvalidInput, "resection needs >= 6 correspondences");

    std::vector<Point3> world;
    std::vector<Point2> image;
    world.reserve(n);
    image.reserve(n);
    for (const auto& [X, x] : points) {
        world.push_back(X);
        image.push_back(x);
    }
    const auto nw = normalize_points(std::span<const Point3>(world));
    const auto ni = normalize_points(std::span<const Point2>(image));

    Eigen::MatrixXd A(2 * n, 12);
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Vector4d X = homog(nw.points[i]);
        const double u = ni.points[i].x(), v = ni.points[i].y();
        A.row(2 * i) << X.transpose(), Eigen::RowVector4d::Zero(), -u * X.transpose();
        A.row(2 * i + 1) << Eigen::RowVector4d::Zero(), X.transpose(), -v * X.transpose();
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(10) <= 1e-9 * sv(0))
        throw_error(ErrorCode::DegenerateConfiguration,
                    "resection design matrix rank < 11 (coplanar or degenerate points)");

    Eigen::VectorXd m = svd.matrixV().col(11);
    Mat34 Mn;
    Mn << m(0), m(1), m(2), m(3), m(4), m(5), m(6), m(7), m(8), m(9), m(10), m(11);

    Mat34 M = ni.T.inverse() * (Mn * nw.T);
    M = normalize_camera_scale(M);

    double err = 0.0;
    for (const auto& [X, x] : points) {
        const Eigen::Vector3d p = M * homog(X);
        if (std::abs(p.z()) <= 0.0)
            throw_error(ErrorCode::DegenerateConfiguration, "resected camera projects to infinity");
        err += (Point2(p.x() / p.z(), p.y() / p.z()) - x).norm();
    }
    return ResectionResult{ProjectiveCamera{M}, err / static_cast<double>(n)};
}

DecomposedCamera decompose(const ProjectiveCamera& camera) {
    const Mat3 A = camera.M.leftCols<3>();
    const double scale = A.norm() / std::sqrt(3.0);
    if (std::abs(A.determinant()) <= 1e-12 * scale * scale * scale)
        throw_error(ErrorCode::SingularCamera, "left 3x3 block is singular");

    // RQ via QR of the row-reversed transpose.
    Mat3 P;
    P << 0, 0, 1, 0, 1, 0, 1, 0, 0;
    const Mat3 At = (P * A).transpose();
    Eigen::HouseholderQR<Mat3> qr(At);
    const Mat3 Q = qr.householderQ();
    const Mat3 Rtri = qr.matrixQR().triangularView<Eigen::Upper>();
    Mat3 K = P * Rtri.transpose() * P;
    Mat3 R = P * Q.transpose();

    // Force positive diagonal of K.
    Eigen::Vector3d s(sign_of(K(0, 0)), sign_of(K(1, 1)), sign_of(K(2, 2)));
    K = K * s.asDiagonal();
    R = s.asDiagonal() * R;

    double sigma = 1.0;
    if (R.determinant() < 0.0) {
        R = -R;
        sigma = -1.0;
    }

    Point3 t = sigma * K.inverse() * camera.M.col(3);
    K /= K(2, 2);

    GeneralIntrinsics intr;
    intr.fx = K(0, 0);
    intr.fy = K(1, 1);
    intr.skew = K(0, 1);
    intr.pp = Point2(K(0, 2), K(1, 2));
    return DecomposedCamera{intr, Pose{R, t}};
}

Point3 triangulate(const ProjectiveCamera& cam_a, const ProjectiveCamera& cam_b,
                   const Point2& x_a, const Point2& x_b) {
    const Point3 ca = cam_a.center();
    const Point3 cb = cam_b.center();
    const double span = std::max({1.0, ca.norm(), cb.norm()});
    if ((ca - cb).norm() <= 1e-12 * span)
        throw_error(ErrorCode::DegenerateConfiguration, "zero baseline between views");

    Eigen::Matrix4d A;
    A.row(0) = x_a.x() * cam_a.M.row(2) - cam_a.M.row(0);
    A.row(1) = x_a.y() * cam_a.M.row(2) - cam_a.M.row(1);
    A.row(2) = x_b.x() * cam_b.M.row(2) - cam_b.M.row(0);
    A.row(3) = x_b.y() * cam_b.M.row(2) - cam_b.M.row(1);

    Eigen::JacobiSVD<Eigen::Matrix4d> svd(A, Eigen::ComputeFullV);
    Eigen::Vector4d X = svd.matrixV().col(3);
    if (std::abs(X(3)) <= 1e-14 * X.head<3>().norm())
        throw_error(ErrorCode::BehindCamera, "triangulated point at infinity");
    const Point3 p = X.head<3>() / X(3);

    if (cam_a.depth(p) <= 0.0 || cam_b.depth(p) <= 0.0)
        throw_error(ErrorCode::BehindCamera, "cheirality violated in at least one view");
    return p;
}

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::DegenerateProjection: return "DegenerateProjection";
        case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
        case ErrorCode::SingularCamera: return "SingularCamera";
        case ErrorCode::BehindCamera: return "BehindCamera";
        case ErrorCode::NoRealSolution: return "NoRealSolution";
        case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
        case ErrorCode::DegenerateImages: return "DegenerateImages";
        case ErrorCode::NearDegenerate: return "NearDegenerate";
        case ErrorCode::RayParallelToPlane: return "RayParallelToPlane";
        case ErrorCode::NotAHomology: return "NotAHomology";
        case ErrorCode::ComplexEigenspace: return "ComplexEigenspace";
        case ErrorCode::InconsistentLegs: return "InconsistentLegs";
        case ErrorCode::AllEvaluationsFailed: return "AllEvaluationsFailed";
        case ErrorCode::VisibilityFailure: return "VisibilityFailure";
        case ErrorCode::FitDegenerate: return "FitDegenerate";
        case ErrorCode::InsufficientPoints: return "InsufficientPoints";
        case ErrorCode::EmptyOutput: return "EmptyOutput";
    }
    return "UnknownError";
}

}  // namespace c2calib
