#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "c2calib/io.hpp"
#include "c2calib/reconstruction.hpp"
#include "c2calib/sfm.hpp"

namespace py = pybind11;
using namespace c2calib;

namespace {

py::dict intrinsics_dict(const Intrinsics& k) {
    py::dict d;
    d["f"] = k.f;
    d["pp"] = k.pp;
    d["skew"] = k.skew;
    return d;
}

py::dict general_intrinsics_dict(const GeneralIntrinsics& k) {
    py::dict d;
    d["fx"] = k.fx;
    d["fy"] = k.fy;
    d["skew"] = k.skew;
    d["pp"] = k.pp;
    return d;
}

VertexImages vertices_from_array(const Eigen::Matrix<double, 4, 2>& v) {
    return VertexImages{v.row(0), v.row(1), v.row(2), v.row(3)};
}

std::array<bool, kNumTerms> mask_from_terms(const std::vector<int>& terms) {
    std::array<bool, kNumTerms> mask{};
    for (int t : terms) {
        if (t < 1 || t > kNumTerms)
            throw_error(ErrorCode::InvalidInput, "terms entries must be in 1..7");
        mask[t - 1] = true;
    }
    return mask;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Camera-projector self-calibration from an unknown cuboid corner";
#ifdef C2CALIB_VERSION
    m.attr("__version__") = C2CALIB_VERSION;
#else
    m.attr("__version__") = "dev";
#endif

    static py::exception<Error> exc(m, "GeometryError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            exc(e.what());
        }
    });

    // --- core geometry -----------------------------------------------------
    m.def(
        "project",
        [](const Mat34& M, const Point3& X) { return project(ProjectiveCamera{M}, X); },
        py::arg("M"), py::arg("X"));

    m.def(
        "iac", [](double f, const Point2& pp) { return iac(Intrinsics{f, pp, 0.0}); },
        py::arg("f"), py::arg("pp"));

    m.def(
        "estimate_homography",
        [](const Eigen::MatrixX2d& src, const Eigen::MatrixX2d& dst) {
            if (src.rows() != dst.rows())
                throw_error(ErrorCode::InvalidInput, "src and dst must have equal rows");
            std::vector<std::pair<Point2, Point2>> pairs;
            pairs.reserve(src.rows());
            for (Eigen::Index i = 0; i < src.rows(); ++i)
                pairs.emplace_back(src.row(i), dst.row(i));
            return estimate_homography(pairs);
        },
        py::arg("src"), py::arg("dst"));

    m.def(
        "resect_dlt",
        [](const Eigen::MatrixX3d& world, const Eigen::MatrixX2d& image) {
            if (world.rows() != image.rows())
                throw_error(ErrorCode::InvalidInput, "world and image must have equal rows");
            std::vector<std::pair<Point3, Point2>> pts;
            pts.reserve(world.rows());
            for (Eigen::Index i = 0; i < world.rows(); ++i)
                pts.emplace_back(world.row(i), image.row(i));
            const ResectionResult r = resect_dlt(pts);
            return py::make_tuple(r.camera.M, r.mean_reprojection);
        },
        py::arg("world"), py::arg("image"));

    m.def(
        "decompose",
        [](const Mat34& M) {
            const DecomposedCamera d = decompose(ProjectiveCamera{M});
            py::dict out;
            out["intrinsics"] = general_intrinsics_dict(d.intrinsics);
            out["R"] = d.pose.R;
            out["t"] = d.pose.t;
            return out;
        },
        py::arg("M"));

    m.def(
        "triangulate",
        [](const Mat34& Ma, const Mat34& Mb, const Point2& xa, const Point2& xb) {
            return triangulate(ProjectiveCamera{Ma}, ProjectiveCamera{Mb}, xa, xb);
        },
        py::arg("M_a"), py::arg("M_b"), py::arg("x_a"), py::arg("x_b"));

    // --- C2 solver ----------------------------------------------------------
    m.def(
        "solve_c2",
        [](double f, const Point2& pp, const Eigen::Matrix<double, 4, 2>& vertex_images) {
            const C2Solutions sols =
                solve_c2_all(Intrinsics{f, pp, 0.0}, vertices_from_array(vertex_images));
            py::list out;
            for (const auto& s : sols.roots) {
                py::dict d;
                d["lambda"] = py::make_tuple(s.lambda_a, s.lambda_b, s.lambda_c);
                Eigen::Matrix<double, 4, 3> verts;
                verts << s.model.X_O.transpose(), s.model.X_A.transpose(),
                    s.model.X_B.transpose(), s.model.X_C.transpose();
                d["vertices"] = verts;
                d["convexity"] = convexity_name(s.model.convexity);
                d["k_b"] = s.model.ratio_b();
                d["k_c"] = s.model.ratio_c();
                out.append(d);
            }
            return out;
        },
        py::arg("f"), py::arg("pp"), py::arg("vertex_images"),
        "All real positive-depth cuboid-corner interpretations of four vertex images.");

    // --- pipeline (JSON-string interfaces) ----------------------------------
    m.def(
        "simulate",
        [](const std::string& spec_json) {
            const SceneSpec spec = scene_spec_from_json(json::parse(spec_json));
            const SyntheticScene scene = generate_scene(spec);

            MatchFileData data;
            data.faces = scene.matches.faces;
            data.convexity = spec.convexity;
            data.pp_c = spec.camera.intrinsics.pp;
            data.camera_size = spec.camera.resolution;
            data.projector_size = spec.projector.resolution;
            VertexHints hints;
            for (Face f : kFaces) hints.leg(f) = scene.matches.vertices_cam.vertex(f);
            data.vertices = hints;

            py::dict out;
            out["matches"] = match_file_to_json(data).dump(2);
            out["gt"] = ground_truth_to_json(scene.gt).dump(2);
            if (spec.sphere)
                out["sphere"] =
                    sphere_matches_to_json(scene.sphere_matches, spec.sphere->radius).dump(2);
            return out;
        },
        py::arg("spec_json"));

    m.def("default_scene_spec",
          []() { return scene_spec_to_json(SceneSpec::paper_default()).dump(2); });

    m.def(
        "random_scene_spec",
        [](uint64_t seed, double sigma_px, int samples_per_face) {
            return scene_spec_to_json(random_scene_spec(
                       seed, sigma_px,
                       Eigen::Vector3i::Constant(samples_per_face)))
                .dump(2);
        },
        py::arg("seed"), py::arg("sigma_px") = 0.0, py::arg("samples_per_face") = 200);

    m.def(
        "calibrate",
        [](const std::string& matches_json, std::pair<double, double> f_range, double grid_step,
           const std::string& optimizer, const std::vector<int>& terms, bool constant_camera,
           const std::string& gt_json, int jobs) {
            const MatchFileData data = match_file_from_json(json::parse(matches_json));
            const PreparedMatches prepared = prepare_from_match_file(data);

            ReportFileData out;
            if (constant_camera) {
                SfmConfig cfg;
                cfg.f_min = f_range.first;
                cfg.f_max = f_range.second;
                cfg.pp_hi = data.camera_size.cast<double>();
                cfg.jobs = jobs;
                out.report = calibrate_sfm(prepared.matches, cfg).report;
                out.optimizer = "sfm-coordinate-descent";
            } else {
                ObjectiveConfig cfg;
                cfg.f_min = f_range.first;
                cfg.f_max = f_range.second;
                cfg.grid_step = grid_step;
                cfg.jobs = jobs;
                if (optimizer == "grid")
                    cfg.optimizer = OptimizerKind::Grid;
                else if (optimizer == "bounded")
                    cfg.optimizer = OptimizerKind::Bounded1d;
                else if (optimizer == "grid-then-refine")
                    cfg.optimizer = OptimizerKind::GridThenRefine;
                else
                    throw_error(ErrorCode::InvalidInput, "unknown optimizer");
                if (!terms.empty()) cfg.term_mask = mask_from_terms(terms);

                const double f_star = solve_focal(prepared.matches, data.pp_c, cfg);
                out.report = finalize_calibration(f_star, prepared.matches, data.pp_c);
                out.optimizer = optimizer;
                out.term_mask = cfg.term_mask;
                out.f_min = cfg.f_min;
                out.f_max = cfg.f_max;
                out.grid_step = cfg.grid_step;
            }
            if (!gt_json.empty())
                out.errors_vs_gt =
                    compare_to_gt(out.report, ground_truth_from_json(json::parse(gt_json)));
            return report_file_to_json(out).dump(2);
        },
        py::arg("matches_json"), py::arg("f_range") = std::make_pair(100.0, 10000.0),
        py::arg("grid_step") = 1.0, py::arg("optimizer") = "bounded",
        py::arg("terms") = std::vector<int>{}, py::arg("constant_camera") = false,
        py::arg("gt_json") = std::string(), py::arg("jobs") = 1);

    m.def(
        "sweep",
        [](const std::string& matches_json, std::pair<double, double> f_range, double grid_step,
           int jobs) {
            const MatchFileData data = match_file_from_json(json::parse(matches_json));
            const PreparedMatches prepared = prepare_from_match_file(data);
            ObjectiveConfig cfg;
            cfg.f_min = f_range.first;
            cfg.f_max = f_range.second;
            cfg.grid_step = grid_step;
            cfg.jobs = jobs;
            const GridResult res = grid_search(prepared.matches, data.pp_c, cfg);

            Eigen::MatrixXd curve(res.curve.samples.size(), 2 + kNumTerms);
            for (size_t i = 0; i < res.curve.samples.size(); ++i) {
                const auto& s = res.curve.samples[i];
                curve(i, 0) = s.f_c;
                curve(i, 1) = s.breakdown.value;
                for (int t = 0; t < kNumTerms; ++t) curve(i, 2 + t) = s.breakdown.terms[t];
            }
            return py::make_tuple(res.f_star, curve);
        },
        py::arg("matches_json"), py::arg("f_range") = std::make_pair(100.0, 10000.0),
        py::arg("grid_step") = 1.0, py::arg("jobs") = 1);

    m.def(
        "reconstruct",
        [](const std::string& report_json, const std::string& matches_json) {
            const ReportFileData report = report_file_from_json(json::parse(report_json));
            const MatchFileData data = match_file_from_json(json::parse(matches_json));
            FaceMatches matches;
            matches.faces = data.faces;
            matches.convexity = data.convexity;
            const PointCloud cloud = reconstruct(report.report, matches);
            Eigen::MatrixX4d out(cloud.points.size(), 4);
            for (size_t i = 0; i < cloud.points.size(); ++i)
                out.row(i) << cloud.points[i].xyz.transpose(),
                    static_cast<double>(cloud.points[i].label);
            return out;
        },
        py::arg("report_json"), py::arg("matches_json"));

    m.def(
        "evaluate_sphere",
        [](const std::string& report_json, const std::string& sphere_json) {
            const ReportFileData report = report_file_from_json(json::parse(report_json));
            const auto [matches, radius] = sphere_matches_from_json(json::parse(sphere_json));
            const SphereEvaluation ev = evaluate_sphere(report.report, matches, radius);
            py::dict out;
            out["fitted_radius"] = ev.radius;
            out["fitted_center"] = ev.center;
            out["scale_to_gt"] = ev.scale_to_gt;
            out["radial_mae_rel"] = ev.radial_mae_rel;
            out["radial_mae_units"] = ev.radial_mae_units;
            return out;
        },
        py::arg("report_json"), py::arg("sphere_json"));
}
