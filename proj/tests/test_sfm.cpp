#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "c2calib/sfm.hpp"
#include "c2calib/synthetic.hpp"
#include "support.hpp"

using namespace c2calib;
using namespace c2calib::test;

namespace {

// Two-view rig with one constant camera: the "projector" slot holds the
// second view of the same device.
SceneSpec constant_camera_spec(uint64_t seed, int n = 500) {
    SceneSpec spec = SceneSpec::paper_default();
    spec.projector = spec.camera;
    spec.seed = seed;
    spec.samples_per_face = Eigen::Vector3i(n, n, n);

    const Point3 eye(0.9, 0.15, 0.03);
    const Point3 z = (spec.c2_position - eye).normalized();
    Point3 x = Point3(0.0, 1.0, 0.0).cross(z).normalized();
    Mat3 R;
    R.row(0) = x.transpose();
    R.row(1) = z.cross(x).transpose();
    R.row(2) = z.transpose();
    spec.pose = Pose{R, -(R * eye)};
    return spec;
}

FaceMatches swap_views(const FaceMatches& m) {
    FaceMatches out;
    out.convexity = m.convexity;
    out.vertices_cam = m.vertices_proj;
    out.vertices_proj = m.vertices_cam;
    for (size_t f = 0; f < 3; ++f)
        for (const auto& [a, b] : m.faces[f]) out.faces[f].emplace_back(b, a);
    return out;
}

SfmConfig test_config() {
    SfmConfig cfg;
    cfg.pp_hi = Point2(2448.0, 2048.0);
    cfg.jobs = 4;
    return cfg;
}

}  // namespace

TEST_CASE("sfm objective vanishes at the true camera and grows off it") {
    const SceneSpec spec = constant_camera_spec(71);
    const SyntheticScene scene = generate_scene(spec);
    const double at_gt = evaluate_sfm_objective(scene.gt.camera, scene.matches);
    CHECK(at_gt < 1e-4);

    Intrinsics wrong = scene.gt.camera;
    wrong.f *= 1.3;
    CHECK(evaluate_sfm_objective(wrong, scene.matches) > at_gt + 1.0);
}

TEST_CASE("sfm objective returns +inf on chain failure") {
    const SceneSpec spec = constant_camera_spec(72);
    SyntheticScene scene = generate_scene(spec);
    scene.matches.vertices_cam.x_A = scene.matches.vertices_cam.x_O;
    CHECK(std::isinf(evaluate_sfm_objective(scene.gt.camera, scene.matches)));
}

TEST_CASE("calibrate_sfm recovers focal and principal point without a prior") {
    const SceneSpec spec = constant_camera_spec(73);
    const SyntheticScene scene = generate_scene(spec);
    const SfmResult result = calibrate_sfm(scene.matches, test_config());

    CHECK(std::abs(result.camera.f - scene.gt.camera.f) < 0.01 * scene.gt.camera.f);
    CHECK((result.camera.pp - scene.gt.camera.pp).norm() < 5.0);
    CHECK(result.report.mode == "sfm");
}

TEST_CASE("crop equivariance: the PP estimate follows the crop offset") {
    const SceneSpec spec = constant_camera_spec(74);
    const SyntheticScene scene = generate_scene(spec);

    const SfmResult base = calibrate_sfm(scene.matches, test_config());

    const Point2 d(-200.0, -150.0);
    const FaceMatches cropped = crop_matches(scene.matches, d, d);
    SfmConfig cfg = test_config();
    cfg.pp_lo = Point2(-250.0, -200.0);  // keep the shifted PP inside the search box
    cfg.pp_hi = Point2(2448.0, 2048.0) - d;
    const SfmResult shifted = calibrate_sfm(cropped, cfg);

    CHECK((shifted.camera.pp - (base.camera.pp - d)).norm() < 5.0);
    CHECK(std::abs(shifted.camera.f - base.camera.f) < 0.01 * base.camera.f);
}

TEST_CASE("fixed-center mode trades accuracy for a smaller search") {
    SceneSpec spec = constant_camera_spec(75);
    spec.camera.intrinsics.pp = Point2(1100.0, 900.0);  // off-center true PP
    spec.projector.intrinsics.pp = spec.camera.intrinsics.pp;
    const SyntheticScene scene = generate_scene(spec);

    SfmConfig cfg = test_config();
    cfg.pp_mode = SfmConfig::PpMode::Fixed;
    cfg.pp_fixed = Point2(1224.0, 1024.0);  // image center, wrong by ~175 px
    const SfmResult fixed = calibrate_sfm(scene.matches, cfg);
    const SfmResult searched = calibrate_sfm(scene.matches, test_config());

    const double err_fixed = std::abs(fixed.camera.f - scene.gt.camera.f);
    const double err_searched = std::abs(searched.camera.f - scene.gt.camera.f);
    CHECK(err_searched < err_fixed);
}

TEST_CASE("view swap leaves the intrinsics and inverts the pose") {
    const SceneSpec spec = constant_camera_spec(76);
    const SyntheticScene scene = generate_scene(spec);
    const SfmResult fwd = calibrate_sfm(scene.matches, test_config());
    const SfmResult rev = calibrate_sfm(swap_views(scene.matches), test_config());

    CHECK(std::abs(fwd.camera.f - rev.camera.f) < 0.01 * fwd.camera.f);
    CHECK((fwd.camera.pp - rev.camera.pp).norm() < 5.0);

    // relative rotation inverts (translation scale lives in each view's gauge)
    const Mat3 should_be_identity = fwd.report.pose.R * rev.report.pose.R;
    const double geodesic = std::acos(
        std::clamp(0.5 * (should_be_identity.trace() - 1.0), -1.0, 1.0));
    CHECK(geodesic < 1e-3);
}

TEST_CASE("sfm config validation") {
    SfmConfig cfg = test_config();
    cfg.f_min = 0.0;
    CHECK(thrown_code([&] { cfg.validate(); }) == ErrorCode::InvalidInput);
    cfg = test_config();
    cfg.pp_lo = cfg.pp_hi;
    CHECK(thrown_code([&] { cfg.validate(); }) == ErrorCode::InvalidInput);
    cfg = test_config();
    cfg.f_coarse_steps = 1;
    CHECK(thrown_code([&] { cfg.validate(); }) == ErrorCode::InvalidInput);
}
