#include "c2calib/synthetic.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "c2calib/rng.hpp"

namespace c2calib {

namespace {

bool in_image(const Point2& px, const Eigen::Vector2i& res, double margin = 0.0) {
    return px.x() >= margin && px.x() <= res.x() - margin && px.y() >= margin &&
           px.y() <= res.y() - margin;
}

Point2 project_device(const Intrinsics& K, const Pose& pose, const Point3& X, double* depth) {
    const Point3 Xd = pose.apply(X);
    *depth = Xd.z();
    const Eigen::Vector3d x = K.matrix() * Xd;
    return {x.x() / x.z(), x.y() / x.z()};
}

bool inside_octant(const C2Model& c2, const Point3& V) {
    for (Face f : kFaces)
        if (c2.leg(f).dot(V - c2.X_O) <= 0.0) return false;
    return true;
}

// Store an explicit leg triad in the (rotvec, lengths, convexity) encoding.
void encode_legs(SceneSpec& spec, const Point3& nA, const Point3& nB, const Point3& nC) {
    spec.leg_lengths = Eigen::Vector3d(nA.norm(), nB.norm(), nC.norm());
    Mat3 U;
    U << nA.normalized(), nB.normalized(), nC.normalized();
    if (U.determinant() < 0.0) {
        spec.convexity = Convexity::Concave;
        U.col(2) = -U.col(2);
    } else {
        spec.convexity = Convexity::Convex;
    }
    const Eigen::AngleAxisd aa(U);
    spec.c2_rotvec = aa.angle() * aa.axis();
}

Pose look_at(const Point3& eye, const Point3& target) {
    const Point3 z = (target - eye).normalized();
    Point3 x = Point3(0.0, 1.0, 0.0).cross(z);
    if (x.norm() < 1e-6) x = Point3(1.0, 0.0, 0.0).cross(z);
    x.normalize();
    const Point3 y = z.cross(x);
    Mat3 R;
    R.row(0) = x.transpose();
    R.row(1) = y.transpose();
    R.row(2) = z.transpose();
    return Pose{R, -(R * eye)};
}

struct TrianglePatch {
    Point3 origin, u, v;  // sample = origin + a*u + b*v, a,b >= 0, a+b <= 1
};

// Visible part of a face after masking `occlusion` of its area: the triangle
// shrunk about its centroid.
TrianglePatch face_patch(const C2Model& c2, Face f, double occlusion) {
    const auto other = [](Face face) -> std::pair<Face, Face> {
        switch (face) {
            case Face::A: return {Face::B, Face::C};
            case Face::B: return {Face::C, Face::A};
            default: return {Face::A, Face::B};
        }
    }(f);
    const Point3 p0 = c2.X_O;
    const Point3 p1 = c2.vertex(other.first);
    const Point3 p2 = c2.vertex(other.second);
    const Point3 g = (p0 + p1 + p2) / 3.0;
    const double s = std::sqrt(std::max(0.0, 1.0 - occlusion));
    const Point3 q0 = g + s * (p0 - g);
    return TrianglePatch{q0, g + s * (p1 - g) - q0, g + s * (p2 - g) - q0};
}

}  // namespace

C2Model SceneSpec::c2_model() const {
    Mat3 R = Mat3::Identity();
    const double angle = c2_rotvec.norm();
    if (angle > 0.0) R = Eigen::AngleAxisd(angle, c2_rotvec / angle).toRotationMatrix();
    const double sign_c = convexity == Convexity::Concave ? -1.0 : 1.0;
    C2Model c2;
    c2.X_O = c2_position;
    c2.X_A = c2_position + leg_lengths.x() * R.col(0);
    c2.X_B = c2_position + leg_lengths.y() * R.col(1);
    c2.X_C = c2_position + sign_c * leg_lengths.z() * R.col(2);
    c2.convexity = convexity;
    return c2;
}

SceneSpec SceneSpec::paper_default() {
    SceneSpec spec;
    spec.camera.intrinsics = Intrinsics{1791.1, Point2(1256.3, 1054.3), 0.0};
    spec.camera.resolution = {2448, 2048};
    spec.projector.intrinsics = Intrinsics{1247.3, Point2(377.1, 234.0), 0.0};
    spec.projector.resolution = {854, 480};

    const Point3 x_o(0.3, -0.2, 3.6);
    spec.c2_position = x_o;
    spec.pose = look_at(Point3(0.85, 0.1, 0.02), x_o);

    // Room-scale concave corner opening toward the devices; the far vertices
    // fall well outside both images, as with a real wall/floor corner.
    const Point3 na = 2.8 * Point3(-0.6, -0.3, -0.74).normalized();
    Point3 nb = Point3(0.0, 1.0, 0.0).cross(na).normalized();
    if (nb.dot(x_o) > 0.0) nb = -nb;
    nb *= 2.5;
    Point3 nc = na.cross(nb).normalized();
    if (nc.dot(x_o) > 0.0) nc = -nc;
    nc *= 3.0;
    encode_legs(spec, na, nb, nc);
    return spec;
}

SyntheticScene generate_scene(const SceneSpec& spec) {
    if (spec.occlusion < 0.0 || spec.occlusion >= 1.0)
        throw_error(ErrorCode::InvalidInput, "occlusion must lie in [0, 1)");
    if (spec.sigma_px < 0.0) throw_error(ErrorCode::InvalidInput, "sigma must be non-negative");
    for (int i = 0; i < 3; ++i)
        if (spec.samples_per_face[i] < 4)
            throw_error(ErrorCode::InvalidInput, "need at least 4 samples per face");

    const C2Model c2 = spec.c2_model();
    const Point3 cam_center = Point3::Zero();
    const Point3 proj_center = -(spec.pose.R.transpose() * spec.pose.t);
    if (!inside_octant(c2, cam_center) || !inside_octant(c2, proj_center))
        throw_error(ErrorCode::VisibilityFailure,
                    "a device center lies outside the corner's visibility octant");

    const Pose cam_pose;  // world = camera frame
    SyntheticScene scene;
    scene.gt.camera = spec.camera.intrinsics;
    scene.gt.projector = spec.projector.intrinsics;
    scene.gt.pose = spec.pose;
    scene.gt.c2 = c2;
    scene.gt.sphere = spec.sphere;

    // Ground-truth vertex images; these double as the inference hints. Room
    // corners usually extend beyond both images, so the vertex images are
    // plain coordinates: only positive depth is required.
    const std::array<Point3, 4> verts{c2.X_O, c2.X_A, c2.X_B, c2.X_C};
    std::array<Point2, 4> cam_px, proj_px;
    for (size_t i = 0; i < verts.size(); ++i) {
        double dc = 0.0, dp = 0.0;
        cam_px[i] = project_device(spec.camera.intrinsics, cam_pose, verts[i], &dc);
        proj_px[i] = project_device(spec.projector.intrinsics, spec.pose, verts[i], &dp);
        if (dc <= 0.05 || dp <= 0.05)
            throw_error(ErrorCode::VisibilityFailure, "a C2 vertex lies behind a device");
    }
    scene.gt.vertices_cam = VertexImages{cam_px[0], cam_px[1], cam_px[2], cam_px[3]};
    scene.gt.vertices_proj = VertexImages{proj_px[0], proj_px[1], proj_px[2], proj_px[3]};

    Rng rng(spec.seed);
    scene.matches.convexity = spec.convexity;
    scene.matches.vertices_cam = scene.gt.vertices_cam;
    scene.matches.vertices_proj = scene.gt.vertices_proj;

    for (Face f : kFaces) {
        const TrianglePatch patch = face_patch(c2, f, spec.occlusion);
        auto& pairs = scene.matches.face(f);
        const int want = spec.samples_per_face[static_cast<int>(f)];
        pairs.reserve(want);
        long attempts = 0;
        // rejection over the common field of view; room-scale faces are
        // mostly outside it, so allow low acceptance rates
        const long max_attempts = 2000 + 600L * want;
        while (static_cast<int>(pairs.size()) < want) {
            if (++attempts > max_attempts)
                throw_error(ErrorCode::VisibilityFailure,
                            std::string("face ") + face_name(f) +
                                " is not sufficiently visible in both views");
            double a = rng.uniform(), b = rng.uniform();
            if (a + b > 1.0) {
                a = 1.0 - a;
                b = 1.0 - b;
            }
            const Point3 X = patch.origin + a * patch.u + b * patch.v;
            double dc = 0.0, dp = 0.0;
            Point2 xc = project_device(spec.camera.intrinsics, cam_pose, X, &dc);
            Point2 xp = project_device(spec.projector.intrinsics, spec.pose, X, &dp);
            if (dc <= 0.0 || dp <= 0.0 || !in_image(xc, spec.camera.resolution) ||
                !in_image(xp, spec.projector.resolution))
                continue;
            if (spec.sigma_px > 0.0) {
                xp += spec.sigma_px * Point2(rng.normal(), rng.normal());
                if (spec.noise_symmetric) xc += spec.sigma_px * Point2(rng.normal(), rng.normal());
                if (!in_image(xp, spec.projector.resolution) ||
                    !in_image(xc, spec.camera.resolution))
                    continue;
            }
            pairs.emplace_back(xc, xp);
        }
    }

    if (spec.sphere) {
        const SphereSpec& s = *spec.sphere;
        scene.sphere_matches.reserve(s.samples);
        long attempts = 0;
        const long max_attempts = 2000 + 400L * s.samples;
        while (static_cast<int>(scene.sphere_matches.size()) < s.samples) {
            if (++attempts > max_attempts)
                throw_error(ErrorCode::VisibilityFailure,
                            "sphere is not sufficiently visible in both views");
            const Point3 normal = rng.unit_vector();
            const Point3 X = s.center + s.radius * normal;
            if (normal.dot(cam_center - X) <= 0.0 || normal.dot(proj_center - X) <= 0.0)
                continue;  // self-occluded
            double dc = 0.0, dp = 0.0;
            Point2 xc = project_device(spec.camera.intrinsics, cam_pose, X, &dc);
            Point2 xp = project_device(spec.projector.intrinsics, spec.pose, X, &dp);
            if (dc <= 0.0 || dp <= 0.0 || !in_image(xc, spec.camera.resolution) ||
                !in_image(xp, spec.projector.resolution))
                continue;
            if (spec.sigma_px > 0.0) {
                xp += spec.sigma_px * Point2(rng.normal(), rng.normal());
                if (spec.noise_symmetric) xc += spec.sigma_px * Point2(rng.normal(), rng.normal());
                if (!in_image(xp, spec.projector.resolution) ||
                    !in_image(xc, spec.camera.resolution))
                    continue;
            }
            scene.sphere_matches.emplace_back(xc, xp);
        }
    }
    return scene;
}

SceneSpec random_scene_spec(uint64_t seed, double sigma_px,
                            const Eigen::Vector3i& samples_per_face) {
    Rng rng(seed * 0x9e3779b97f4a7c15ULL + 1ULL);
    SceneSpec base = SceneSpec::paper_default();
    base.seed = seed;
    base.sigma_px = sigma_px;
    base.samples_per_face = samples_per_face;

    for (int attempt = 0; attempt < 300; ++attempt) {
        SceneSpec spec = base;
        const Point3 x_o(rng.uniform(-0.5, 0.5), rng.uniform(-0.4, 0.4), rng.uniform(3.0, 4.6));
        spec.c2_position = x_o;

        const Point3 proj_center(rng.uniform(0.55, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0),
                                 rng.uniform(-0.25, 0.25), rng.uniform(-0.1, 0.15));
        spec.pose = look_at(proj_center, x_o);

        // Random room-scale triad, each leg flipped toward the devices.
        const Mat3 R = rng.rotation();
        const Point3 mid = 0.5 * proj_center;
        std::array<Point3, 3> legs;
        for (int i = 0; i < 3; ++i) {
            Point3 dir = R.col(i);
            if (dir.dot(mid - x_o) < 0.0) dir = -dir;
            legs[i] = rng.uniform(1.8, 3.2) * dir;
        }
        const bool want_concave = rng.uniform() < 0.5;
        Mat3 U;
        U << legs[0].normalized(), legs[1].normalized(), legs[2].normalized();
        if ((U.determinant() < 0.0) != want_concave) std::swap(legs[1], legs[2]);
        encode_legs(spec, legs[0], legs[1], legs[2]);

        const C2Model c2 = spec.c2_model();
        if (!inside_octant(c2, Point3::Zero()) || !inside_octant(c2, proj_center)) continue;

        // Vertices in front of both devices, well-separated vertex images,
        // and the RA inside both images (it is the structure being scanned).
        bool ok = true;
        std::array<Point2, 4> cam_px;
        const std::array<Point3, 4> verts{c2.X_O, c2.X_A, c2.X_B, c2.X_C};
        std::array<Point2, 4> proj_px;
        for (size_t i = 0; i < verts.size() && ok; ++i) {
            double dc = 0.0, dp = 0.0;
            cam_px[i] = project_device(spec.camera.intrinsics, Pose{}, verts[i], &dc);
            proj_px[i] = project_device(spec.projector.intrinsics, spec.pose, verts[i], &dp);
            ok = dc > 0.3 && dp > 0.3;
        }
        if (!ok) continue;
        ok = in_image(cam_px[0], spec.camera.resolution, 60.0) &&
             in_image(proj_px[0], spec.projector.resolution, 30.0);
        for (size_t i = 0; i < 4 && ok; ++i)
            for (size_t j = i + 1; j < 4 && ok; ++j)
                ok = (cam_px[i] - cam_px[j]).norm() >= 150.0;
        if (!ok) continue;

        // The inference chain needs genuinely distinct plane-induced
        // homographies: gate on the separation of the homology's distinct
        // eigenvalue, computed from the ground-truth homographies.
        const Mat3 Kc = spec.camera.intrinsics.matrix();
        const Mat3 Kp = spec.projector.intrinsics.matrix();
        std::array<Mat3, 3> H_gt;
        for (Face f : kFaces) {
            const Point3 n = c2.leg(f).normalized();
            const double d = n.dot(c2.X_O);
            H_gt[static_cast<size_t>(f)] =
                Kp * (spec.pose.R - spec.pose.t * n.transpose() / d) * Kc.inverse();
        }
        for (int leg = 0; leg < 3 && ok; ++leg) {
            Mat3 G = H_gt[(leg + 1) % 3] * H_gt[(leg + 2) % 3].inverse();
            G /= std::cbrt(G.determinant());
            const Eigen::Vector3cd ev = Eigen::EigenSolver<Mat3>(G).eigenvalues();
            double repeated = 0.0, gap = kInf;
            for (int i = 0; i < 3; ++i)
                for (int j = i + 1; j < 3; ++j)
                    if (std::abs(ev(i) - ev(j)) < gap) {
                        gap = std::abs(ev(i) - ev(j));
                        repeated = std::abs(ev(3 - i - j) - ev(i));
                    }
            ok = repeated > 0.08 * std::abs(ev(0) + ev(1) + ev(2)) / 3.0;
        }
        if (!ok) continue;

        // Probe each face's visible fraction of the common field of view so
        // generate_scene's rejection sampler is guaranteed to finish, and
        // require 2D spread (slivers make useless homographies).
        Rng probe(seed ^ 0xc2c2c2c2c2c2c2ULL);
        for (Face f : kFaces) {
            const TrianglePatch patch = face_patch(c2, f, spec.occlusion);
            int hits = 0;
            Eigen::Matrix2d scatter_c = Eigen::Matrix2d::Zero();
            Point2 mean_c = Point2::Zero();
            std::vector<Point2> accepted_c;
            for (int k = 0; k < 400; ++k) {
                double a = probe.uniform(), b = probe.uniform();
                if (a + b > 1.0) {
                    a = 1.0 - a;
                    b = 1.0 - b;
                }
                const Point3 X = patch.origin + a * patch.u + b * patch.v;
                double dc = 0.0, dp = 0.0;
                const Point2 pc = project_device(spec.camera.intrinsics, Pose{}, X, &dc);
                const Point2 pp = project_device(spec.projector.intrinsics, spec.pose, X, &dp);
                if (dc > 0.0 && dp > 0.0 && in_image(pc, spec.camera.resolution) &&
                    in_image(pp, spec.projector.resolution)) {
                    ++hits;
                    accepted_c.push_back(pc);
                    mean_c += pc;
                }
            }
            if (hits < 16) {  // < 4% of the face visible
                ok = false;
                break;
            }
            mean_c /= static_cast<double>(hits);
            for (const auto& p : accepted_c) {
                const Eigen::Vector2d d = p - mean_c;
                scatter_c += d * d.transpose();
            }
            scatter_c /= static_cast<double>(hits);
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> se(scatter_c);
            if (std::sqrt(std::max(0.0, se.eigenvalues()(0))) < 40.0) {  // minor-axis std, px
                ok = false;
                break;
            }
        }
        if (ok) return spec;
    }
    throw_error(ErrorCode::VisibilityFailure, "could not draw a visible scene for this seed");
}

double CalibrationErrors::mae() const {
    return 0.25 *
           (std::abs(f_c_pct) + std::abs(f_p_pct) + std::abs(x_p0_pct) + std::abs(y_p0_pct));
}

CalibrationErrors compare_to_gt(const CalibrationReport& report, const GroundTruth& gt) {
    CalibrationErrors e;
    e.f_c_pct = 100.0 * (report.camera.f - gt.camera.f) / gt.camera.f;
    e.f_p_pct = 100.0 * (report.projector.f - gt.projector.f) / gt.projector.f;
    e.x_p0_pct = 100.0 * (report.projector.pp.x() - gt.projector.pp.x()) / gt.projector.pp.x();
    e.y_p0_pct = 100.0 * (report.projector.pp.y() - gt.projector.pp.y()) / gt.projector.pp.y();
    return e;
}

SphereEvaluation evaluate_sphere(const CalibrationReport& report,
                                 std::span<const PixelPair> sphere_matches, double gt_radius) {
    if (sphere_matches.size() < 4)
        throw_error(ErrorCode::FitDegenerate, "sphere fit needs at least 4 correspondences");
    if (!(gt_radius > 0.0)) throw_error(ErrorCode::InvalidInput, "GT radius must be positive");

    const ProjectiveCamera cam = ProjectiveCamera::compose(report.camera, Pose{});
    const ProjectiveCamera proj = ProjectiveCamera::compose(report.projector_full, report.pose);

    std::vector<Point3> pts;
    pts.reserve(sphere_matches.size());
    for (const auto& [xc, xp] : sphere_matches) {
        try {
            pts.push_back(triangulate(cam, proj, xc, xp));
        } catch (const Error&) {
            // dropped; counted through the size check below
        }
    }
    if (pts.size() < 4)
        throw_error(ErrorCode::FitDegenerate, "fewer than 4 sphere points triangulated");

    // Algebraic fit: 2 p.c + (r^2 - |c|^2) = |p|^2.
    Eigen::MatrixXd A(pts.size(), 4);
    Eigen::VectorXd b(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        A.row(i) << 2.0 * pts[i].transpose(), 1.0;
        b(i) = pts[i].squaredNorm();
    }
    const Eigen::Vector4d sol = A.colPivHouseholderQr().solve(b);
    const Point3 center = sol.head<3>();
    const double r2 = sol(3) + center.squaredNorm();
    if (!(r2 > 0.0)) throw_error(ErrorCode::FitDegenerate, "sphere fit collapsed");
    const double radius = std::sqrt(r2);

    // Coverage gate: directions concentrated on a small cap make the fit
    // meaningless.
    Mat3 dir_moment = Mat3::Zero();
    for (const auto& p : pts) {
        const Point3 u = (p - center).normalized();
        dir_moment += u * u.transpose();
    }
    dir_moment /= static_cast<double>(pts.size());
    Eigen::SelfAdjointEigenSolver<Mat3> es(dir_moment);
    if (es.eigenvalues()(0) < 0.01)
        throw_error(ErrorCode::FitDegenerate, "sphere points span too small a cap");

    SphereEvaluation ev;
    ev.center = center;
    ev.radius = radius;
    ev.scale_to_gt = gt_radius / radius;
    ev.heat.reserve(pts.size());
    double mae = 0.0;
    for (const auto& p : pts) {
        const double e = std::abs((p - center).norm() - radius);
        mae += e;
        ev.heat.push_back(e * ev.scale_to_gt);
    }
    mae /= static_cast<double>(pts.size());
    ev.radial_mae_rel = mae / radius;
    ev.radial_mae_units = mae * ev.scale_to_gt;
    return ev;
}

}  // namespace c2calib
