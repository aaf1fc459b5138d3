#include "c2calib/transfer.hpp"

#include <cmath>

namespace c2calib {

namespace {

Eigen::Vector3d homog(const Point2& p) { return {p.x(), p.y(), 1.0}; }

void check_face_counts(const FaceMatches& m) {
    for (Face f : kFaces)
        if (m.face(f).size() < 4)
            throw_error(ErrorCode::InvalidInput,
                        std::string("face ") + face_name(f) + " has fewer than 4 matches");
}

}  // namespace

size_t FaceMatches::total_matches() const {
    return faces[0].size() + faces[1].size() + faces[2].size();
}

std::vector<Point3> intersect_face_points(const C2Model& c2, const Intrinsics& K, Face face,
                                          std::span<const Point2> images) {
    const Point3 n = c2.leg(face);  // face normal direction
    const double n_norm = n.norm();
    const double plane_offset = n.dot(c2.X_O);
    const Mat3 Kinv = K.inverse_matrix();

    std::vector<Point3> out;
    out.reserve(images.size());
    for (const auto& x : images) {
        const Point3 d = Kinv * homog(x);
        const double denom = n.dot(d);
        if (std::abs(denom) < 1e-12 * n_norm * d.norm())
            throw_error(ErrorCode::RayParallelToPlane,
                        std::string("viewing ray parallel to face ") + face_name(face) +
                            " (face passes through the camera center)");
        const double lambda = plane_offset / denom;
        if (lambda <= 0.0)
            throw_error(ErrorCode::NonPositiveDepth,
                        std::string("face ") + face_name(face) + " intersection behind the camera");
        out.push_back(lambda * d);
    }
    return out;
}

TransferResult transfer(const Intrinsics& K_source, const FaceMatches& matches,
                        TransferDirection direction) {
    if (!(K_source.f > 0.0)) throw_error(ErrorCode::InvalidInput, "source focal must be positive");
    check_face_counts(matches);

    const bool forward = direction == TransferDirection::CamToProj;
    const VertexImages& v_src = forward ? matches.vertices_cam : matches.vertices_proj;

    TransferResult result;
    result.c2 = solve_c2(K_source, v_src, matches.convexity);

    std::vector<std::pair<Point3, Point2>> correspondences;
    correspondences.reserve(matches.total_matches());
    for (Face f : kFaces) {
        std::vector<Point2> src_px, dst_px;
        src_px.reserve(matches.face(f).size());
        dst_px.reserve(matches.face(f).size());
        for (const auto& [cam_px, proj_px] : matches.face(f)) {
            src_px.push_back(forward ? cam_px : proj_px);
            dst_px.push_back(forward ? proj_px : cam_px);
        }
        const auto points = intersect_face_points(result.c2, K_source, f, src_px);
        for (size_t i = 0; i < points.size(); ++i)
            correspondences.emplace_back(points[i], dst_px[i]);
    }

    const ResectionResult resection = resect_dlt(correspondences);
    result.mean_reprojection = resection.mean_reprojection;

    const DecomposedCamera dec = decompose(resection.camera);
    result.K_target = dec.intrinsics;
    result.pose = dec.pose;
    return result;
}

CycleResult cycle_full(const Intrinsics& K_c, const FaceMatches& matches) {
    CycleResult cr;
    cr.forward = transfer(K_c, matches, TransferDirection::CamToProj);
    cr.K_p_full = cr.forward.K_target;
    cr.K_p_natural = cr.K_p_full.naturalized();
    cr.backward = transfer(cr.K_p_natural, matches, TransferDirection::ProjToCam);
    cr.K_c_back = cr.backward.K_target;
    return cr;
}

CycleResult cycle(double f_c, const Point2& pp_c, const FaceMatches& matches) {
    return cycle_full(Intrinsics{f_c, pp_c, 0.0}, matches);
}

}  // namespace c2calib
