#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "c2calib/synthetic.hpp"
#include "support.hpp"

using namespace c2calib;
using namespace c2calib::test;

namespace {

double line_point_distance(const Eigen::Vector3d& line, const Point2& p) {
    return std::abs(line.dot(Eigen::Vector3d(p.x(), p.y(), 1.0)));
}

std::pair<Face, Face> adjacent(Face f) {
    switch (f) {
        case Face::A: return {Face::B, Face::C};
        case Face::B: return {Face::C, Face::A};
        default: return {Face::A, Face::B};
    }
}

}  // namespace

TEST_CASE("homology eigen-structure on noiseless homographies") {
    SceneSpec spec = SceneSpec::paper_default();
    spec.seed = 21;
    const SyntheticScene scene = generate_scene(spec);
    const FaceHomographies H = estimate_face_homographies(scene.matches);

    for (Face f : kFaces) {
        const auto [f1, f2] = adjacent(f);
        Mat3 G = H.face(f1) * H.face(f2).inverse();
        G /= std::cbrt(G.determinant());
        const Eigen::Vector3cd ev = Eigen::EigenSolver<Mat3>(G).eigenvalues();
        // two eigenvalues coincide to high accuracy, the third is distinct
        std::array<double, 3> gaps{std::abs(ev(0) - ev(1)), std::abs(ev(0) - ev(2)),
                                   std::abs(ev(1) - ev(2))};
        std::sort(gaps.begin(), gaps.end());
        CHECK(gaps[0] < 1e-8);
        CHECK(gaps[1] > 1e-3);
    }
}

TEST_CASE("leg lines pass through the true leg images (noiseless)") {
    SceneSpec spec = SceneSpec::paper_default();
    spec.seed = 22;
    const SyntheticScene scene = generate_scene(spec);
    const FaceHomographies H = estimate_face_homographies(scene.matches);

    for (Face f : kFaces) {
        const auto [f1, f2] = adjacent(f);
        const Eigen::Vector3d lp = infer_leg_line(H.face(f1), H.face(f2));
        CHECK(line_point_distance(lp, scene.gt.vertices_proj.x_O) < 0.01);
        CHECK(line_point_distance(lp, scene.gt.vertices_proj.vertex(f)) < 0.01);

        const Eigen::Vector3d lc = leg_line_to_camera(lp, H.face(f1), H.face(f2));
        CHECK(line_point_distance(lc, scene.gt.vertices_cam.x_O) < 0.01);
        CHECK(line_point_distance(lc, scene.gt.vertices_cam.vertex(f)) < 0.01);
    }
}

TEST_CASE("identical homographies are not a homology") {
    Mat3 H;
    H << 1.1, 0.02, 5.0, -0.01, 0.95, 3.0, 1e-5, 2e-5, 1.0;
    CHECK(thrown_code([&] { infer_leg_line(H, H); }) == ErrorCode::NotAHomology);
}

TEST_CASE("leg line is invariant to homography scaling") {
    SceneSpec spec = SceneSpec::paper_default();
    spec.seed = 23;
    const SyntheticScene scene = generate_scene(spec);
    const FaceHomographies H = estimate_face_homographies(scene.matches);
    const Eigen::Vector3d base = infer_leg_line(H.face(Face::B), H.face(Face::C));
    const Eigen::Vector3d scaled =
        infer_leg_line(Mat3(-3.7 * H.face(Face::B)), Mat3(0.21 * H.face(Face::C)));
    CHECK((base - scaled).norm() < 1e-9);
}

TEST_CASE("noisy Monte-Carlo: inferred lines stay close to the true legs") {
    std::vector<double> distances;
    int failures = 0;
    for (uint64_t seed = 1; seed <= 100; ++seed) {
        SceneSpec spec;
        try {
            spec = random_scene_spec(seed, 0.5, Eigen::Vector3i(5000, 5000, 5000));
        } catch (const Error&) {
            ++failures;
            continue;
        }
        const SyntheticScene scene = generate_scene(spec);
        try {
            const FaceHomographies H = estimate_face_homographies(scene.matches);
            for (Face f : kFaces) {
                const auto [f1, f2] = adjacent(f);
                const Eigen::Vector3d lp = infer_leg_line(H.face(f1), H.face(f2));
                const Eigen::Vector3d lc = leg_line_to_camera(lp, H.face(f1), H.face(f2));
                distances.push_back(line_point_distance(lc, scene.gt.vertices_cam.x_O));
                distances.push_back(
                    line_point_distance(lc, scene.gt.vertices_cam.vertex(f)));
            }
        } catch (const Error&) {
            ++failures;
        }
    }
    REQUIRE(!distances.empty());
    std::sort(distances.begin(), distances.end());
    CHECK(distances[distances.size() / 2] < 2.0);  // median within 2 px
    CHECK(failures < 10);
}

TEST_CASE("RA from leg lines matches the true corner image (noiseless)") {
    SceneSpec spec = SceneSpec::paper_default();
    spec.seed = 24;
    const SyntheticScene scene = generate_scene(spec);
    const FaceHomographies H = estimate_face_homographies(scene.matches);
    const LegLines legs = infer_leg_lines(H);
    CHECK((legs.ra - scene.gt.vertices_cam.x_O).norm() < 0.05);
    CHECK(legs.max_pairwise_gap_px < 0.05);
}

TEST_CASE("parallel-plane inputs produce parallel legs and are rejected") {
    // three parallel scene planes induce homographies whose homology axes are
    // all the same line at infinity image: pairwise intersections blow up
    const Intrinsics Kc{1500.0, {600.0, 500.0}, 0.0};
    const Intrinsics Kp{1100.0, {400.0, 240.0}, 0.0};
    const Pose pose{Eigen::AngleAxisd(0.07, Eigen::Vector3d(0, 1, 0)).toRotationMatrix(),
                    Point3(-0.6, 0.05, 0.0)};
    const ProjectiveCamera cam = ProjectiveCamera::compose(Kc, Pose{});
    const ProjectiveCamera proj = ProjectiveCamera::compose(Kp, pose);

    Rng rng(31);
    FaceMatches m;
    m.convexity = Convexity::Concave;
    const double depths[3] = {4.0, 5.0, 6.0};
    for (int f = 0; f < 3; ++f) {
        for (int i = 0; i < 30; ++i) {
            const Point3 X(rng.uniform(-0.8, 0.8), rng.uniform(-0.6, 0.6), depths[f]);
            m.faces[f].emplace_back(project(cam, X), project(proj, X));
        }
    }
    const FaceHomographies H = estimate_face_homographies(m);
    CHECK(thrown_code([&] { infer_leg_lines(H); }).has_value());
}

TEST_CASE("infer_vertices: snapping and gates") {
    SceneSpec spec = SceneSpec::paper_default();
    spec.seed = 25;
    const SyntheticScene scene = generate_scene(spec);
    const FaceHomographies H = estimate_face_homographies(scene.matches);
    const LegLines legs = infer_leg_lines(H);

    VertexHints hints;
    for (Face f : kFaces) hints.leg(f) = scene.gt.vertices_cam.vertex(f);
    const VertexImages v = infer_vertices(legs, hints);
    for (Face f : kFaces) {
        // all vertices end up exactly on their lines
        CHECK(line_point_distance(legs.leg(f), v.vertex(f)) < 1e-12);
        CHECK((v.vertex(f) - scene.gt.vertices_cam.vertex(f)).norm() < 0.05);
    }

    // a hint already on the line is returned unchanged
    const Point2 on_line = v.x_A;
    VertexHints hints2 = hints;
    hints2.leg(Face::A) = on_line;
    CHECK((infer_vertices(legs, hints2).x_A - on_line).norm() < 1e-9);

    // arc-length hints live on the line too
    VertexHints hints3 = hints;
    hints3.leg(Face::A) = 400.0;
    const VertexImages v3 = infer_vertices(legs, hints3);
    CHECK(line_point_distance(legs.leg(Face::A), v3.x_A) < 1e-12);
    CHECK((v3.x_A - legs.ra).norm() == doctest::Approx(400.0).epsilon(1e-6));

    // hints too close to the RA violate the conditioning gate
    VertexHints tight = hints;
    tight.leg(Face::B) = Point2(legs.ra + Point2(3.0, 3.0));
    CHECK(thrown_code([&] { infer_vertices(legs, tight); }) == ErrorCode::DegenerateImages);

    // missing hint
    VertexHints missing = hints;
    missing.leg(Face::C).reset();
    CHECK(thrown_code([&] { infer_vertices(legs, missing); }) == ErrorCode::InvalidInput);
}

TEST_CASE("map_vertices_to_projector: identity and ground truth") {
    FaceHomographies ident;
    ident.H = {Mat3::Identity(), Mat3::Identity(), Mat3::Identity()};
    VertexImages v{{100.0, 120.0}, {400.0, 130.0}, {90.0, 380.0}, {260.0, 300.0}};
    const ProjectedVertices same = map_vertices_to_projector(v, ident);
    CHECK((same.vertices.x_O - v.x_O).norm() < 1e-12);
    CHECK(same.max_spread() < 1e-12);

    SceneSpec spec = SceneSpec::paper_default();
    spec.seed = 26;
    const SyntheticScene scene = generate_scene(spec);
    const FaceHomographies H = estimate_face_homographies(scene.matches);
    const ProjectedVertices mapped = map_vertices_to_projector(scene.gt.vertices_cam, H);
    CHECK((mapped.vertices.x_O - scene.gt.vertices_proj.x_O).norm() < 1e-6);
    for (Face f : kFaces)
        CHECK((mapped.vertices.vertex(f) - scene.gt.vertices_proj.vertex(f)).norm() < 1e-6);
    CHECK(mapped.max_spread() < 1e-6);
}

TEST_CASE("noisy vertex mapping spread stays small") {
    std::vector<double> spreads;
    for (uint64_t seed = 40; seed < 70; ++seed) {
        SceneSpec spec;
        try {
            spec = random_scene_spec(seed, 0.5, Eigen::Vector3i(2000, 2000, 2000));
        } catch (const Error&) {
            continue;
        }
        const SyntheticScene scene = generate_scene(spec);
        try {
            const FaceHomographies H = estimate_face_homographies(scene.matches);
            spreads.push_back(map_vertices_to_projector(scene.gt.vertices_cam, H).max_spread());
        } catch (const Error&) {
        }
    }
    REQUIRE(spreads.size() > 20);
    std::sort(spreads.begin(), spreads.end());
    CHECK(spreads[spreads.size() / 2] < 3.0);
}

TEST_CASE("prepare_face_matches: explicit vertices bypass leg inference") {
    SceneSpec spec = SceneSpec::paper_default();
    spec.seed = 27;
    const SyntheticScene scene = generate_scene(spec);
    const PreparedMatches prep = prepare_face_matches(
        scene.matches.faces, spec.convexity, scene.matches.vertices_cam, {});
    CHECK(!prep.legs.has_value());
    CHECK((prep.matches.vertices_cam.x_O - scene.gt.vertices_cam.x_O).norm() < 1e-12);
    CHECK((prep.matches.vertices_proj.x_O - scene.gt.vertices_proj.x_O).norm() < 1e-6);
}
