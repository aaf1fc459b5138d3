#include "c2calib/face_inference.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>

namespace c2calib {

namespace {

Eigen::Vector3d homog(const Point2& p) { return {p.x(), p.y(), 1.0}; }

Point2 dehomog(const Eigen::Vector3d& x, const char* what) {
    if (std::abs(x.z()) <= 1e-14 * x.head<2>().norm())
        throw_error(ErrorCode::DegenerateConfiguration, std::string("point at infinity: ") + what);
    return {x.x() / x.z(), x.y() / x.z()};
}

Point2 apply_h(const Mat3& H, const Point2& p) { return dehomog(H * homog(p), "mapped vertex"); }

void check_nonsingular(const Mat3& H, const char* name) {
    const double scale = H.norm() / std::sqrt(3.0);
    if (std::abs(H.determinant()) <= 1e-12 * scale * scale * scale)
        throw_error(ErrorCode::DegenerateConfiguration, std::string(name) + " is singular");
}

// ||(l0, l1)|| = 1 so that l . (x, y, 1) is a signed pixel distance; sign
// fixed deterministically.
Eigen::Vector3d normalize_line(Eigen::Vector3d l) {
    const double n = l.head<2>().norm();
    if (n <= 1e-15 * std::abs(l.z()))
        throw_error(ErrorCode::DegenerateConfiguration, "line at infinity");
    l /= n;
    if (l.z() < 0.0 || (l.z() == 0.0 && (l.x() < 0.0 || (l.x() == 0.0 && l.y() < 0.0)))) l = -l;
    return l;
}

// Take the real direction of an eigenvector known to be real up to a complex
// phase.
Eigen::Vector3d real_direction(const Eigen::Vector3cd& v) {
    int k = 0;
    v.cwiseAbs().maxCoeff(&k);
    const std::complex<double> phase = std::conj(v(k)) / std::abs(v(k));
    return (v * phase).real();
}

double sym_transfer_error(const Mat3& H, std::span<const PixelPair> pairs) {
    const Mat3 Hinv = H.inverse();
    double err = 0.0;
    for (const auto& [a, b] : pairs) {
        err += 0.5 * ((apply_h(H, a) - b).norm() + (apply_h(Hinv, b) - a).norm());
    }
    return err / static_cast<double>(pairs.size());
}

// The two faces adjacent to each leg (the leg is their intersection).
constexpr std::array<std::pair<Face, Face>, 3> kAdjacentFaces{
    std::pair<Face, Face>{Face::B, Face::C},  // leg A
    std::pair<Face, Face>{Face::C, Face::A},  // leg B
    std::pair<Face, Face>{Face::A, Face::B},  // leg C
};

}  // namespace

double ProjectedVertices::max_spread() const {
    return std::max({ra_spread_px, vertex_spread_px[0], vertex_spread_px[1], vertex_spread_px[2]});
}

Eigen::Vector3d infer_leg_line(const Mat3& H_B, const Mat3& H_C, const InferenceConfig& cfg) {
    check_nonsingular(H_B, "H_B");
    check_nonsingular(H_C, "H_C");

    Mat3 G = H_B * H_C.inverse();
    const double det = G.determinant();
    if (std::abs(det) <= 0.0)
        throw_error(ErrorCode::DegenerateConfiguration, "homology composition is singular");
    G /= std::cbrt(det);

    // Scaled identity: both faces induce the same homography.
    const double trace_third = G.trace() / 3.0;
    if ((G - trace_third * Mat3::Identity()).norm() <= 1e-9 * G.norm())
        throw_error(ErrorCode::NotAHomology, "faces induce identical homographies");

    Eigen::EigenSolver<Mat3> es(G);
    if (es.info() != Eigen::Success)
        throw_error(ErrorCode::NotAHomology, "eigen decomposition failed");
    const Eigen::Vector3cd ev = es.eigenvalues();

    // Repeated eigenvalue = closest pair after det-normalization.
    int pi = 0, pj = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            const double d = std::abs(ev(i) - ev(j));
            if (d < best) {
                best = d;
                pi = i;
                pj = j;
            }
        }
    }
    const double mag = std::max(std::abs(ev(pi)), std::abs(ev(pj)));
    const bool conjugate_pair =
        std::abs(ev(pi).imag()) > 1e-12 * mag && std::abs(ev(pj).imag()) > 1e-12 * mag;
    if (best > cfg.eigen_cluster_tol * mag) {
        if (conjugate_pair)
            throw_error(ErrorCode::ComplexEigenspace, "clustered eigenvalue pair is complex");
        throw_error(ErrorCode::NotAHomology, "no repeated eigenvalue within tolerance");
    }
    const int pk = 3 - pi - pj;
    if (std::abs(ev(pk) - ev(pi)) <= cfg.eigen_cluster_tol * std::abs(ev(pk)))
        throw_error(ErrorCode::NotAHomology, "all eigenvalues coincide (near identity)");

    // Two real generators of the fixed 2D subspace: the two eigenvectors for
    // a real pair, Re/Im of one eigenvector for a conjugate pair.
    Eigen::Vector3d g1, g2;
    if (conjugate_pair) {
        const Eigen::Vector3cd v = es.eigenvectors().col(pi);
        g1 = v.real();
        g2 = v.imag();
    } else {
        g1 = real_direction(es.eigenvectors().col(pi));
        g2 = real_direction(es.eigenvectors().col(pj));
    }

    const Eigen::Vector3d axis = g1.cross(g2);
    if (axis.norm() <= 1e-12 * g1.norm() * g2.norm())
        throw_error(ErrorCode::NotAHomology, "defective eigenspace (elation-like composition)");
    return normalize_line(axis);
}

Eigen::Vector3d leg_line_to_camera(const Eigen::Vector3d& line_proj, const Mat3& H_1,
                                   const Mat3& H_2) {
    Eigen::Vector3d l1 = normalize_line(H_1.transpose() * line_proj);
    Eigen::Vector3d l2 = normalize_line(H_2.transpose() * line_proj);
    if (l1.dot(l2) < 0.0) l2 = -l2;
    return normalize_line(0.5 * (l1 + l2));
}

FaceHomographies estimate_face_homographies(const FaceMatches& matches) {
    FaceHomographies out;
    for (Face f : kFaces) {
        const auto& pairs = matches.face(f);
        if (pairs.size() < 4)
            throw_error(ErrorCode::InvalidInput,
                        std::string("face ") + face_name(f) + " has fewer than 4 matches");
        out.H[static_cast<size_t>(f)] = estimate_homography(pairs);
        out.transfer_error[static_cast<size_t>(f)] =
            sym_transfer_error(out.H[static_cast<size_t>(f)], pairs);
    }
    return out;
}

LegLines infer_leg_lines(const FaceHomographies& H, const InferenceConfig& cfg) {
    LegLines legs;
    for (Face f : kFaces) {
        const auto [f1, f2] = kAdjacentFaces[static_cast<size_t>(f)];
        const Eigen::Vector3d lp = infer_leg_line(H.face(f1), H.face(f2), cfg);
        legs.line[static_cast<size_t>(f)] = leg_line_to_camera(lp, H.face(f1), H.face(f2));
    }

    // Pairwise intersections must agree before the least-squares RA makes
    // sense.
    std::array<Point2, 3> cross_pts;
    for (int i = 0; i < 3; ++i) {
        const Eigen::Vector3d p = legs.line[i].cross(legs.line[(i + 1) % 3]);
        if (std::abs(p.z()) <= 1e-12 * p.head<2>().norm())
            throw_error(ErrorCode::InconsistentLegs, "two leg lines are parallel");
        cross_pts[i] = {p.x() / p.z(), p.y() / p.z()};
    }
    double gap = 0.0;
    for (int i = 0; i < 3; ++i)
        gap = std::max(gap, (cross_pts[i] - cross_pts[(i + 1) % 3]).norm());
    if (gap > cfg.ra_gate_px)
        throw_error(ErrorCode::InconsistentLegs,
                    "leg-line intersections disagree by " + std::to_string(gap) + " px");
    legs.max_pairwise_gap_px = gap;

    Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    for (const auto& l : legs.line) {
        const Eigen::Vector2d ab = l.head<2>();
        M += ab * ab.transpose();
        rhs -= l.z() * ab;
    }
    legs.ra = M.ldlt().solve(rhs);
    return legs;
}

VertexImages infer_vertices(const LegLines& legs, const VertexHints& hints,
                            const InferenceConfig& cfg) {
    VertexImages v;
    v.x_O = legs.ra;
    for (Face f : kFaces) {
        const auto& hint = hints.leg(f);
        if (!hint)
            throw_error(ErrorCode::InvalidInput,
                        std::string("missing far-vertex hint for leg ") + face_name(f));
        const Eigen::Vector3d& l = legs.leg(f);
        const Eigen::Vector2d ab = l.head<2>();
        Point2 p;
        if (std::holds_alternative<Point2>(*hint)) {
            const Point2& h = std::get<Point2>(*hint);
            p = h - (l.dot(homog(h))) * ab;  // orthogonal snap onto the line
        } else {
            const Point2 foot = legs.ra - (l.dot(homog(legs.ra))) * ab;
            const Eigen::Vector2d dir(l.y(), -l.x());
            p = foot + std::get<double>(*hint) * dir;
        }
        if ((p - legs.ra).norm() < cfg.min_vertex_separation_px)
            throw_error(ErrorCode::DegenerateImages,
                        std::string("far vertex ") + face_name(f) + " too close to the RA");
        v.vertex(f) = p;
    }
    return v;
}

ProjectedVertices map_vertices_to_projector(const VertexImages& v, const FaceHomographies& H) {
    ProjectedVertices out;

    std::array<Point2, 3> ra_candidates;
    for (Face f : kFaces) ra_candidates[static_cast<size_t>(f)] = apply_h(H.face(f), v.x_O);
    out.vertices.x_O = (ra_candidates[0] + ra_candidates[1] + ra_candidates[2]) / 3.0;
    for (int i = 0; i < 3; ++i)
        out.ra_spread_px = std::max(
            out.ra_spread_px, (ra_candidates[i] - ra_candidates[(i + 1) % 3]).norm());

    for (Face f : kFaces) {
        const auto [f1, f2] = kAdjacentFaces[static_cast<size_t>(f)];
        const Point2 a = apply_h(H.face(f1), v.vertex(f));
        const Point2 b = apply_h(H.face(f2), v.vertex(f));
        out.vertices.vertex(f) = 0.5 * (a + b);
        out.vertex_spread_px[static_cast<size_t>(f)] = (a - b).norm();
    }
    return out;
}

PreparedMatches prepare_face_matches(const std::array<std::vector<PixelPair>, 3>& faces,
                                     Convexity convexity,
                                     const std::variant<VertexImages, VertexHints>& vertices,
                                     const InferenceConfig& cfg) {
    PreparedMatches out;
    out.matches.faces = faces;
    out.matches.convexity = convexity;
    out.homographies = estimate_face_homographies(out.matches);

    if (std::holds_alternative<VertexImages>(vertices)) {
        out.matches.vertices_cam = std::get<VertexImages>(vertices);
    } else {
        out.legs = infer_leg_lines(out.homographies, cfg);
        out.matches.vertices_cam = infer_vertices(*out.legs, std::get<VertexHints>(vertices), cfg);
    }

    const ProjectedVertices proj = map_vertices_to_projector(out.matches.vertices_cam,
                                                             out.homographies);
    out.matches.vertices_proj = proj.vertices;
    out.projector_vertex_spread_px = proj.max_spread();
    return out;
}

}  // namespace c2calib
