#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "c2calib/c2.hpp"

namespace c2calib {

using PixelPair = std::pair<Point2, Point2>;  // (camera px, projector px)

/// Segmented camera<->projector correspondences for the three faces, plus the
/// vertex images in both views and the convexity prior.
struct FaceMatches {
    std::array<std::vector<PixelPair>, 3> faces;  // indexed by Face
    VertexImages vertices_cam;
    VertexImages vertices_proj;
    Convexity convexity = Convexity::Concave;

    std::vector<PixelPair>& face(Face f) { return faces[static_cast<size_t>(f)]; }
    const std::vector<PixelPair>& face(Face f) const { return faces[static_cast<size_t>(f)]; }
    size_t total_matches() const;
};

enum class TransferDirection { CamToProj, ProjToCam };

struct TransferResult {
    GeneralIntrinsics K_target;  // decomposed, un-constrained
    Pose pose;                   // source frame -> target frame
    C2Model c2;                  // in the source-view frame, lambda_O = 1
    double mean_reprojection = 0.0;
};

/// Intersect back-projection rays with the plane of face S (through X_O,
/// normal = leg S). Eq. 10.
std::vector<Point3> intersect_face_points(const C2Model& c2, const Intrinsics& K, Face face,
                                          std::span<const Point2> images);

/// One leg of the transfer chain: source intrinsics -> C2 -> face points ->
/// DLT resection of the target device -> decomposed target intrinsics.
TransferResult transfer(const Intrinsics& K_source, const FaceMatches& matches,
                        TransferDirection direction);

struct CycleResult {
    TransferResult forward;       // camera -> projector
    TransferResult backward;      // projector -> camera
    GeneralIntrinsics K_p_full;   // = forward.K_target
    Intrinsics K_p_natural;       // naturalized input to the backward pass
    GeneralIntrinsics K_c_back;   // = backward.K_target
};

/// Forward then backward transfer with a natural camera guess (f_c, pp_c).
CycleResult cycle(double f_c, const Point2& pp_c, const FaceMatches& matches);

/// Same, for an arbitrary natural source camera (used by the SfM extension).
CycleResult cycle_full(const Intrinsics& K_c, const FaceMatches& matches);

}  // namespace c2calib
