#pragma once

#include <optional>
#include <variant>

#include "c2calib/transfer.hpp"

namespace c2calib {

/// Inter-view homographies induced by the three faces (camera -> projector).
struct FaceHomographies {
    std::array<Mat3, 3> H;                    // indexed by Face
    std::array<double, 3> transfer_error{};   // symmetric transfer error, pixels

    const Mat3& face(Face f) const { return H[static_cast<size_t>(f)]; }
};

/// Leg image-lines in the camera view, normalized so ||(l0, l1)|| = 1.
struct LegLines {
    std::array<Eigen::Vector3d, 3> line;  // indexed by the leg's Face
    Point2 ra = Point2::Zero();           // least-squares intersection
    double max_pairwise_gap_px = 0.0;     // spread of the three pairwise intersections

    const Eigen::Vector3d& leg(Face f) const { return line[static_cast<size_t>(f)]; }
};

/// Far-vertex hint: an image point (snapped onto the leg line) or a signed
/// arc-length position along the line measured from the RA foot point.
using VertexHint = std::variant<Point2, double>;

struct VertexHints {
    std::array<std::optional<VertexHint>, 3> hint;  // indexed by the leg's Face

    std::optional<VertexHint>& leg(Face f) { return hint[static_cast<size_t>(f)]; }
    const std::optional<VertexHint>& leg(Face f) const { return hint[static_cast<size_t>(f)]; }
};

struct InferenceConfig {
    // Relative gate for the repeated-eigenvalue pair. The distinct eigenvalue
    // of a genuine two-face homology sits O(0.1..1) away, so 1e-2 still
    // separates homologies from arbitrary compositions while tolerating the
    // split that pixel noise induces at small match counts.
    double eigen_cluster_tol = 1e-2;
    double ra_gate_px = 3.0;                // pairwise leg-intersection agreement
    double min_vertex_separation_px = 20.0; // RA to far vertex, conditioning gate
};

struct ProjectedVertices {
    VertexImages vertices;
    double ra_spread_px = 0.0;
    std::array<double, 3> vertex_spread_px{};  // per far vertex

    double max_spread() const;
};

/// Input-preparation diagnostics kept alongside the assembled FaceMatches.
struct PreparedMatches {
    FaceMatches matches;
    FaceHomographies homographies;
    std::optional<LegLines> legs;  // absent when explicit vertices were supplied
    double projector_vertex_spread_px = 0.0;
};

/// Image of the Pi_B/Pi_C intersection line (leg A) in the projector view,
/// from the eigen-structure of the planar homology H_B * H_C^-1.
Eigen::Vector3d infer_leg_line(const Mat3& H_B, const Mat3& H_C,
                               const InferenceConfig& cfg = {});

/// Pull a projector-view line back to the camera view through the two face
/// homographies adjacent to the leg (sign-aligned average of H^T l).
Eigen::Vector3d leg_line_to_camera(const Eigen::Vector3d& line_proj, const Mat3& H_1,
                                   const Mat3& H_2);

/// Estimate all three per-face homographies from the match lists.
FaceHomographies estimate_face_homographies(const FaceMatches& matches);

/// All three camera-view leg lines plus the least-squares RA.
LegLines infer_leg_lines(const FaceHomographies& H, const InferenceConfig& cfg = {});

/// RA from the leg lines; far vertices from the hints, snapped onto the lines.
VertexImages infer_vertices(const LegLines& legs, const VertexHints& hints,
                            const InferenceConfig& cfg = {});

/// Map camera-view vertices to the projector view through the face
/// homographies (RA by all three, each far vertex by its two adjacent faces).
ProjectedVertices map_vertices_to_projector(const VertexImages& v, const FaceHomographies& H);

/// Full input preparation: homographies, vertex inference (unless explicit
/// vertices are given), projector-side vertices.
PreparedMatches prepare_face_matches(const std::array<std::vector<PixelPair>, 3>& faces,
                                     Convexity convexity,
                                     const std::variant<VertexImages, VertexHints>& vertices,
                                     const InferenceConfig& cfg = {});

}  // namespace c2calib
