#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "c2calib/synthetic.hpp"
#include "support.hpp"

using namespace c2calib;
using namespace c2calib::test;

namespace {

C2Model axis_corner() {
    C2Model c2;
    c2.X_O = Point3(0.0, 0.0, 5.0);
    c2.X_A = c2.X_O + Point3(1.0, 0.0, 0.0);
    c2.X_B = c2.X_O + Point3(0.0, 1.0, 0.0);
    c2.X_C = c2.X_O + Point3(0.0, 0.0, 1.0);
    c2.convexity = classify_convexity(c2);
    return c2;
}

// Scene whose face C contains the camera center (the paper's degenerate
// configuration). Built by hand; the scene generator refuses to emit it.
FaceMatches face_through_center_matches() {
    const Intrinsics Kc{1500.0, {600.0, 500.0}, 0.0};
    const Intrinsics Kp{1100.0, {400.0, 240.0}, 0.0};
    C2Model c2;
    c2.X_O = Point3(0.0, 0.0, 4.0);
    c2.X_A = c2.X_O + Point3(0.0, 0.8, 0.0);
    c2.X_B = c2.X_O + Point3(0.0, 0.0, 0.7);
    c2.X_C = c2.X_O + Point3(0.9, 0.0, 0.0);
    c2.convexity = classify_convexity(c2);

    const Point3 eye(0.9, 0.1, 0.0);
    const Point3 z = (c2.X_O - eye).normalized();
    const Point3 x = Point3(0.0, 1.0, 0.0).cross(z).normalized();
    Mat3 R;
    R.row(0) = x.transpose();
    R.row(1) = z.cross(x).transpose();
    R.row(2) = z.transpose();
    const Pose pose{R, -(R * eye)};

    const ProjectiveCamera cam = ProjectiveCamera::compose(Kc, Pose{});
    const ProjectiveCamera proj = ProjectiveCamera::compose(Kp, pose);

    FaceMatches m;
    m.convexity = c2.convexity;
    m.vertices_cam = VertexImages{project(cam, c2.X_O), project(cam, c2.X_A),
                                  project(cam, c2.X_B), project(cam, c2.X_C)};
    m.vertices_proj = VertexImages{project(proj, c2.X_O), project(proj, c2.X_A),
                                   project(proj, c2.X_B), project(proj, c2.X_C)};
    Rng rng(5);
    for (Face f : kFaces) {
        const auto [u, v] = [&]() -> std::pair<Face, Face> {
            switch (f) {
                case Face::A: return {Face::B, Face::C};
                case Face::B: return {Face::C, Face::A};
                default: return {Face::A, Face::B};
            }
        }();
        for (int i = 0; i < 40; ++i) {
            double a = rng.uniform(), b = rng.uniform();
            if (a + b > 1.0) {
                a = 1.0 - a;
                b = 1.0 - b;
            }
            const Point3 X = c2.X_O + a * c2.leg(u) + b * c2.leg(v);
            m.face(f).emplace_back(project(cam, X), project(proj, X));
        }
    }
    return m;
}

}  // namespace

TEST_CASE("intersect_face_points: canonical plane") {
    const C2Model c2 = axis_corner();
    const Intrinsics K{1.0, {0.0, 0.0}, 0.0};
    // face C passes through X_O with normal along z: the plane z = 5
    const auto pts = intersect_face_points(c2, K, Face::C, std::vector<Point2>{{0.0, 0.0}});
    REQUIRE(pts.size() == 1);
    CHECK((pts[0] - Point3(0.0, 0.0, 5.0)).norm() < 1e-12);
}

TEST_CASE("intersect_face_points: re-projection round trip") {
    Rng rng(7);
    const Intrinsics K{1700.0, {1200.0, 1000.0}, 0.0};
    const ProjectiveCamera cam = ProjectiveCamera::compose(K, Pose{});
    const C2Model c2 = axis_corner();
    for (Face f : kFaces) {
        const auto [u, v] = [&]() -> std::pair<Face, Face> {
            switch (f) {
                case Face::A: return {Face::B, Face::C};
                case Face::B: return {Face::C, Face::A};
                default: return {Face::A, Face::B};
            }
        }();
        std::vector<Point3> truth;
        std::vector<Point2> images;
        for (int i = 0; i < 50; ++i) {
            double a = rng.uniform(), b = rng.uniform();
            if (a + b > 1.0) {
                a = 1.0 - a;
                b = 1.0 - b;
            }
            truth.push_back(c2.X_O + a * c2.leg(u) + b * c2.leg(v));
            images.push_back(project(cam, truth.back()));
        }
        const auto rebuilt = intersect_face_points(c2, K, f, images);
        for (size_t i = 0; i < truth.size(); ++i)
            CHECK((rebuilt[i] - truth[i]).norm() < 1e-9 * truth[i].norm());
    }
}

TEST_CASE("intersect_face_points: ray in the face plane is degenerate") {
    C2Model c2;
    c2.X_O = Point3(0.0, 0.0, 5.0);
    c2.X_A = c2.X_O + Point3(0.0, 1.0, 0.0);
    c2.X_B = c2.X_O + Point3(0.0, 0.0, 1.0);
    c2.X_C = c2.X_O + Point3(1.0, 0.0, 0.0);
    // face C is the plane x = 0, which contains the camera center
    const Intrinsics K{1.0, {0.0, 0.0}, 0.0};
    CHECK(thrown_code([&] {
              intersect_face_points(c2, K, Face::C, std::vector<Point2>{{0.0, 0.3}});
          }) == ErrorCode::RayParallelToPlane);
}

TEST_CASE("transfer: noiseless scene recovers the projector intrinsics") {
    SceneSpec spec = SceneSpec::paper_default();
    spec.seed = 9;
    const SyntheticScene scene = generate_scene(spec);
    const TransferResult fwd = transfer(scene.gt.camera, scene.matches,
                                        TransferDirection::CamToProj);

    CHECK(std::abs(fwd.K_target.fx - scene.gt.projector.f) < 1e-6 * scene.gt.projector.f);
    CHECK(std::abs(fwd.K_target.fy - scene.gt.projector.f) < 1e-6 * scene.gt.projector.f);
    CHECK(std::abs(fwd.K_target.skew) < 1e-6);
    CHECK((fwd.K_target.pp - scene.gt.projector.pp).norm() < 1e-5);
    CHECK(fwd.mean_reprojection < 1e-6);

    // pose matches ground truth up to the lambda_O = 1 scene gauge
    const Mat3 dR = fwd.pose.R.transpose() * scene.gt.pose.R;
    const double geodesic = std::acos(std::clamp(0.5 * (dR.trace() - 1.0), -1.0, 1.0));
    CHECK(geodesic < 1e-5);
    const double t_angle = std::acos(std::clamp(
        fwd.pose.t.normalized().dot(scene.gt.pose.t.normalized()), -1.0, 1.0));
    CHECK(t_angle < 1e-5);
}

TEST_CASE("transfer: backward direction recovers the camera") {
    SceneSpec spec = SceneSpec::paper_default();
    spec.seed = 10;
    const SyntheticScene scene = generate_scene(spec);
    const TransferResult bwd = transfer(scene.gt.projector, scene.matches,
                                        TransferDirection::ProjToCam);
    CHECK(std::abs(bwd.K_target.fx - scene.gt.camera.f) < 1e-6 * scene.gt.camera.f);
    CHECK(std::abs(bwd.K_target.fy - scene.gt.camera.f) < 1e-6 * scene.gt.camera.f);
    CHECK((bwd.K_target.pp - scene.gt.camera.pp).norm() < 1e-5);
}

TEST_CASE("transfer: wrong source intrinsics break the cycle") {
    SceneSpec spec = SceneSpec::paper_default();
    spec.seed = 11;
    const SyntheticScene scene = generate_scene(spec);

    Intrinsics wrong = scene.gt.camera;
    wrong.f *= 1.2;
    const TransferResult fwd = transfer(wrong, scene.matches, TransferDirection::CamToProj);
    CHECK(std::abs(fwd.K_target.fx - scene.gt.projector.f) > 1e-2 * scene.gt.projector.f);

    const CycleResult cr = cycle_full(wrong, scene.matches);
    const double cycle_gap = std::abs(cr.K_c_back.fx - wrong.f) +
                             std::abs(cr.K_c_back.fy - wrong.f) +
                             (cr.K_c_back.pp - wrong.pp).norm();
    CHECK(cycle_gap > 1.0);
}

TEST_CASE("cycle: all seven residual terms vanish at the true focal") {
    SceneSpec spec = SceneSpec::paper_default();
    spec.seed = 12;
    const SyntheticScene scene = generate_scene(spec);
    const CycleResult cr = cycle(scene.gt.camera.f, scene.gt.camera.pp, scene.matches);

    CHECK(std::abs(cr.K_p_full.skew) < 1e-5);
    CHECK(std::abs(cr.K_p_full.fx - cr.K_p_full.fy) < 1e-5);
    CHECK(std::abs(cr.K_c_back.fx - cr.K_c_back.fy) < 1e-5);
    CHECK(std::abs(cr.K_c_back.skew) < 1e-5);
    CHECK(std::abs(cr.K_c_back.fx - scene.gt.camera.f) < 1e-5);
    CHECK(std::abs(cr.K_c_back.fy - scene.gt.camera.f) < 1e-5);
    CHECK((cr.K_c_back.pp - scene.gt.camera.pp).norm() < 1e-5);
}

TEST_CASE("transfer: missing face is rejected up front") {
    SceneSpec spec = SceneSpec::paper_default();
    spec.seed = 13;
    SyntheticScene scene = generate_scene(spec);
    scene.matches.face(Face::B).clear();
    CHECK(thrown_code([&] {
              transfer(scene.gt.camera, scene.matches, TransferDirection::CamToProj);
          }) == ErrorCode::InvalidInput);
}

TEST_CASE("transfer: face through the camera center fails loudly") {
    const FaceMatches m = face_through_center_matches();
    const Intrinsics Kc{1500.0, {600.0, 500.0}, 0.0};
    const auto code = thrown_code([&] { transfer(Kc, m, TransferDirection::CamToProj); });
    REQUIRE(code.has_value());
    CHECK((*code == ErrorCode::RayParallelToPlane || *code == ErrorCode::DegenerateConfiguration));
}

TEST_CASE("transfer: deterministic outputs") {
    SceneSpec spec = SceneSpec::paper_default();
    spec.seed = 14;
    spec.sigma_px = 0.5;
    const SyntheticScene scene = generate_scene(spec);
    const TransferResult a = transfer(scene.gt.camera, scene.matches,
                                      TransferDirection::CamToProj);
    const TransferResult b = transfer(scene.gt.camera, scene.matches,
                                      TransferDirection::CamToProj);
    CHECK(a.K_target.fx == b.K_target.fx);
    CHECK(a.K_target.fy == b.K_target.fy);
    CHECK(a.K_target.skew == b.K_target.skew);
    CHECK(a.K_target.pp == b.K_target.pp);
    CHECK(a.pose.t == b.pose.t);
    CHECK(a.mean_reprojection == b.mean_reprojection);
}
