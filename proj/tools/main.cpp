#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>

#include "c2calib/io.hpp"
#include "c2calib/reconstruction.hpp"
#include "c2calib/sfm.hpp"

namespace {

using namespace c2calib;
namespace fs = std::filesystem;

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("C2CALIB_LOG");
        return env ? std::atoi(env) : 0;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[c2calib] " << msg << "\n";
}

std::array<bool, kNumTerms> parse_terms(const std::string& spec) {
    std::array<bool, kNumTerms> mask{};
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        const int t = std::stoi(tok);
        if (t < 1 || t > kNumTerms)
            throw_error(ErrorCode::InvalidInput, "--terms entries must be in 1..7");
        mask[t - 1] = true;
    }
    if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; }))
        throw_error(ErrorCode::InvalidInput, "--terms selects no objective term");
    return mask;
}

struct CalibrateFlags {
    std::string matches_path;
    std::string out_path = "report.json";
    std::string curve_out;
    std::string gt_path;
    std::vector<double> f_range{100.0, 10000.0};
    double grid_step = 1.0;
    std::string optimizer = "bounded";
    std::string terms;
    int jobs = 1;
    bool constant_camera = false;
    std::string pp_mode = "search";
    int sweeps = 3;
};

OptimizerKind optimizer_from_name(const std::string& name) {
    if (name == "grid") return OptimizerKind::Grid;
    if (name == "bounded") return OptimizerKind::Bounded1d;
    if (name == "grid-then-refine") return OptimizerKind::GridThenRefine;
    throw_error(ErrorCode::InvalidInput, "unknown optimizer \"" + name + "\"");
}

int cmd_simulate(const std::string& spec_path, const std::string& out_dir, bool emit_vertices) {
    const SceneSpec spec = scene_spec_from_json(load_json_file(spec_path));
    const SyntheticScene scene = generate_scene(spec);

    MatchFileData data;
    data.faces = scene.matches.faces;
    data.convexity = spec.convexity;
    data.pp_c = spec.camera.intrinsics.pp;
    data.camera_size = spec.camera.resolution;
    data.projector_size = spec.projector.resolution;
    if (emit_vertices) {
        data.vertices = scene.matches.vertices_cam;
    } else {
        VertexHints hints;
        for (Face f : kFaces) hints.leg(f) = scene.matches.vertices_cam.vertex(f);
        data.vertices = hints;
    }

    const fs::path dir(out_dir);
    save_json_file(dir / "matches.json", match_file_to_json(data));
    save_json_file(dir / "gt.json", ground_truth_to_json(scene.gt));
    std::cout << (dir / "matches.json").string() << "\n" << (dir / "gt.json").string() << "\n";
    if (spec.sphere) {
        save_json_file(dir / "sphere.json",
                       sphere_matches_to_json(scene.sphere_matches, spec.sphere->radius));
        std::cout << (dir / "sphere.json").string() << "\n";
    }
    return 0;
}

int cmd_calibrate(const CalibrateFlags& flags) {
    const MatchFileData data = match_file_from_json(load_json_file(flags.matches_path));
    const PreparedMatches prepared = prepare_from_match_file(data);
    log_info("prepared matches: " + std::to_string(prepared.matches.total_matches()) +
             " pairs, projector vertex spread " +
             std::to_string(prepared.projector_vertex_spread_px) + " px");

    if (flags.f_range.size() != 2)
        throw_error(ErrorCode::InvalidInput, "--f-range needs two values");

    ReportFileData out;
    if (flags.constant_camera) {
        SfmConfig cfg;
        cfg.f_min = flags.f_range[0];
        cfg.f_max = flags.f_range[1];
        cfg.sweeps = flags.sweeps;
        cfg.jobs = flags.jobs;
        if (flags.pp_mode == "center") {
            cfg.pp_mode = SfmConfig::PpMode::Fixed;
            cfg.pp_fixed = 0.5 * data.camera_size.cast<double>();
        } else if (flags.pp_mode == "search") {
            cfg.pp_lo = Point2::Zero();
            cfg.pp_hi = data.camera_size.cast<double>();
        } else {
            throw_error(ErrorCode::InvalidInput, "--pp-mode must be search or center");
        }
        const SfmResult result = calibrate_sfm(prepared.matches, cfg);
        out.report = result.report;
        out.optimizer = "sfm-coordinate-descent";
        out.f_min = cfg.f_min;
        out.f_max = cfg.f_max;
        out.grid_step = 0.0;
    } else {
        ObjectiveConfig cfg;
        cfg.f_min = flags.f_range[0];
        cfg.f_max = flags.f_range[1];
        cfg.grid_step = flags.grid_step;
        cfg.optimizer = optimizer_from_name(flags.optimizer);
        cfg.jobs = flags.jobs;
        if (!flags.terms.empty()) cfg.term_mask = parse_terms(flags.terms);

        const double f_star = solve_focal(prepared.matches, data.pp_c, cfg);
        out.report = finalize_calibration(f_star, prepared.matches, data.pp_c);
        out.optimizer = flags.optimizer;
        out.term_mask = cfg.term_mask;
        out.f_min = cfg.f_min;
        out.f_max = cfg.f_max;
        out.grid_step = cfg.grid_step;

        if (!flags.curve_out.empty()) {
            const GridResult grid = grid_search(prepared.matches, data.pp_c, cfg);
            write_file_atomic(flags.curve_out, curve_to_csv(grid.curve));
            out.curve_path = flags.curve_out;
        }
    }

    if (!flags.gt_path.empty()) {
        const GroundTruth gt = ground_truth_from_json(load_json_file(flags.gt_path));
        out.errors_vs_gt = compare_to_gt(out.report, gt);
    }
    save_json_file(flags.out_path, report_file_to_json(out));
    std::cout << flags.out_path << "\n";
    return 0;
}

int cmd_sweep(const std::string& matches_path, const std::string& curve_out,
              const std::vector<double>& f_range, double grid_step, const std::string& terms,
              int jobs) {
    const MatchFileData data = match_file_from_json(load_json_file(matches_path));
    const PreparedMatches prepared = prepare_from_match_file(data);

    ObjectiveConfig cfg;
    cfg.f_min = f_range.at(0);
    cfg.f_max = f_range.at(1);
    cfg.grid_step = grid_step;
    cfg.jobs = jobs;
    if (!terms.empty()) cfg.term_mask = parse_terms(terms);

    const GridResult grid = grid_search(prepared.matches, data.pp_c, cfg);
    write_file_atomic(curve_out, curve_to_csv(grid.curve));
    std::cout << curve_out << "\n";
    log_info("argmin f_c = " + std::to_string(grid.f_star) +
             (grid.curve.argmin_on_boundary ? " (on range boundary)" : ""));
    return 0;
}

int cmd_reconstruct(const std::string& report_path, const std::string& matches_path,
                    const std::string& out_path, bool binary, const std::string& sphere_path,
                    const std::string& metrics_path) {
    const ReportFileData report = report_file_from_json(load_json_file(report_path));
    const MatchFileData data = match_file_from_json(load_json_file(matches_path));

    FaceMatches matches;
    matches.faces = data.faces;
    matches.convexity = data.convexity;

    std::vector<PixelPair> extra;
    if (!sphere_path.empty())
        extra = sphere_matches_from_json(load_json_file(sphere_path)).first;

    const PointCloud cloud = reconstruct(report.report, matches, extra);
    write_ply(fs::path(out_path), cloud, binary);
    std::cout << out_path << "\n";
    log_info(std::to_string(cloud.points.size()) + " points, " + std::to_string(cloud.dropped) +
             " dropped");

    if (!metrics_path.empty()) {
        const OrthogonalityMetric metric = orthogonality_metric(cloud);
        json m{{"points", cloud.points.size()}, {"dropped", cloud.dropped}};
        const std::array<const char*, 3> keys{"AB", "BC", "CA"};
        for (int i = 0; i < 3; ++i)
            m["face_angle_deviation_deg"][keys[i]] =
                metric.pair_deviation_deg[i] ? json(*metric.pair_deviation_deg[i]) : json();
        save_json_file(metrics_path, m);
    }
    return 0;
}

int cmd_evaluate(const std::string& report_path, const std::string& sphere_path,
                 const std::string& out_path) {
    const ReportFileData report = report_file_from_json(load_json_file(report_path));
    const auto [matches, radius] = sphere_matches_from_json(load_json_file(sphere_path));
    const SphereEvaluation ev = evaluate_sphere(report.report, matches, radius);

    json j{{"fitted_radius", ev.radius},
           {"fitted_center", json::array({ev.center.x(), ev.center.y(), ev.center.z()})},
           {"scale_to_gt", ev.scale_to_gt},
           {"radial_mae_rel", ev.radial_mae_rel},
           {"radial_mae_units", ev.radial_mae_units},
           {"heat", ev.heat}};
    if (out_path.empty())
        std::cout << j.dump(2) << "\n";
    else {
        save_json_file(out_path, j);
        std::cout << out_path << "\n";
    }
    return 0;
}

int cmd_bench(int table, int scenes, double sigma, uint64_t seed0, int samples, int jobs,
              const std::string& out_dir, bool with_sphere, bool timing,
              const std::string& optimizer) {
    PipelineOptions opts;
    opts.objective.optimizer = optimizer_from_name(optimizer);

    if (samples <= 0) samples = table == 3 ? 30000 : 200;
    std::vector<SceneSpec> specs;
    specs.reserve(scenes);
    for (int i = 0; i < scenes; ++i) {
        SceneSpec spec = random_scene_spec(seed0 + static_cast<uint64_t>(i), sigma,
                                           Eigen::Vector3i(samples, samples, samples));
        if (with_sphere) {
            SphereSpec sphere;
            sphere.center = spec.c2_position + Point3(0.0, 0.0, -0.8);
            sphere.radius = 0.3;
            sphere.samples = 500;
            spec.sphere = sphere;
        }
        specs.push_back(spec);
    }

    const fs::path dir(out_dir);
    json summary{{"table", table}, {"sigma_px", sigma}, {"scenes", scenes}, {"seed", seed0}};

    if (table == 1) {
        const BenchReport report = run_bench(specs, opts, jobs, timing);
        write_file_atomic(dir / "table1.csv", bench_table1_csv(report));
        summary["mae_pct"] = report.mae_pct;
        summary["failed_scenes"] = report.failed_scenes;
        if (report.sphere_radial_mae_rel)
            summary["sphere_radial_mae_rel"] = *report.sphere_radial_mae_rel;
        if (timing) summary["runtime_s"] = report.runtime_s;
        std::cout << (dir / "table1.csv").string() << "\n";
    } else if (table == 2) {
        const auto rows = run_ablation_table2(specs, opts, jobs);
        write_file_atomic(dir / "table2.csv", ablation_table2_csv(rows));
        for (const auto& r : rows) summary["mae_pct"][r.name] = r.mae_pct;
        std::cout << (dir / "table2.csv").string() << "\n";
    } else if (table == 3) {
        const std::vector<int> rates{1, 10, 20, 100, 200, 300, 500};
        const auto rows = run_downsampling_table3(specs, rates, opts, jobs);
        write_file_atomic(dir / "table3.csv", downsampling_table3_csv(rows));
        double lo = kInf, hi = -kInf;
        for (const auto& r : rows) {
            summary["mae_pct"][std::to_string(r.rate)] = r.mae_pct;
            lo = std::min(lo, r.mae_pct);
            hi = std::max(hi, r.mae_pct);
        }
        summary["mae_spread_pct"] = hi - lo;
        summary["spread_exceeds_1pt"] = (hi - lo) >= 1.0;
        std::cout << (dir / "table3.csv").string() << "\n";
    } else {
        throw_error(ErrorCode::InvalidInput, "--table must be 1, 2 or 3");
    }
    save_json_file(dir / "bench.json", summary);
    std::cout << (dir / "bench.json").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Camera-projector self-calibration from an unknown cuboid corner"};
    app.require_subcommand(1);

    // simulate
    std::string spec_path, out_dir = ".";
    bool emit_vertices = false;
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic scene from a spec");
    sim->add_option("spec", spec_path, "Scene spec JSON")->required();
    sim->add_option("--out-dir", out_dir, "Output directory");
    sim->add_flag("--emit-vertices", emit_vertices,
                  "Write explicit vertex images instead of inference hints");

    // calibrate
    CalibrateFlags cal;
    auto* calib = app.add_subcommand("calibrate", "Estimate CPP intrinsics from a match file");
    calib->add_option("matches", cal.matches_path, "Match file JSON")->required();
    calib->add_option("--out", cal.out_path, "Report output path");
    calib->add_option("--f-range", cal.f_range, "Focal search range (two values)")->expected(2);
    calib->add_option("--grid-step", cal.grid_step, "Grid step in pixels");
    calib->add_option("--optimizer", cal.optimizer, "grid | bounded | grid-then-refine");
    calib->add_option("--terms", cal.terms, "Objective terms, e.g. 1,2,7 (default: all)");
    calib->add_option("--curve-out", cal.curve_out, "Also write the objective curve CSV");
    calib->add_option("--gt", cal.gt_path, "Ground-truth JSON for error reporting");
    calib->add_option("--jobs", cal.jobs, "Parallel objective evaluations");
    calib->add_flag("--constant-camera", cal.constant_camera,
                    "Two-view SfM mode: both views share one unknown camera");
    calib->add_option("--pp-mode", cal.pp_mode, "SfM principal point: search | center");
    calib->add_option("--sweeps", cal.sweeps, "SfM coordinate-descent sweeps");

    // sweep
    std::string sweep_matches, sweep_curve = "curve.csv", sweep_terms;
    std::vector<double> sweep_range{100.0, 10000.0};
    double sweep_step = 1.0;
    int sweep_jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "Export the objective curve over a focal grid");
    sweep->add_option("matches", sweep_matches, "Match file JSON")->required();
    sweep->add_option("--curve-out", sweep_curve, "Curve CSV output path");
    sweep->add_option("--f-range", sweep_range, "Focal range (two values)")->expected(2);
    sweep->add_option("--grid-step", sweep_step, "Grid step in pixels");
    sweep->add_option("--terms", sweep_terms, "Objective terms (default: all)");
    sweep->add_option("--jobs", sweep_jobs, "Parallel objective evaluations");

    // reconstruct
    std::string rec_report, rec_matches, rec_out = "cloud.ply", rec_sphere, rec_metrics;
    bool rec_binary = false;
    auto* rec = app.add_subcommand("reconstruct", "Triangulate matches into a PLY point cloud");
    rec->add_option("report", rec_report, "Calibration report JSON")->required();
    rec->add_option("matches", rec_matches, "Match file JSON")->required();
    rec->add_option("--out", rec_out, "PLY output path");
    rec->add_flag("--binary", rec_binary, "Binary little-endian PLY");
    rec->add_option("--sphere", rec_sphere, "Also triangulate sphere correspondences");
    rec->add_option("--metrics", rec_metrics, "Write orthogonality metrics JSON");

    // evaluate
    std::string eval_report, eval_sphere, eval_out;
    auto* eval = app.add_subcommand("evaluate", "Sphere-fit evaluation of a calibration");
    eval->add_option("report", eval_report, "Calibration report JSON")->required();
    eval->add_option("sphere", eval_sphere, "Sphere correspondences JSON")->required();
    eval->add_option("--out", eval_out, "Write evaluation JSON (default: stdout)");

    // bench
    int bench_table = 1, bench_scenes = 0, bench_samples = 0, bench_jobs = 1;
    double bench_sigma = 0.5;
    uint64_t bench_seed = 1;
    std::string bench_dir = ".", bench_opt = "bounded";
    bool bench_sphere = false, bench_timing = false;
    auto* bench = app.add_subcommand("bench", "Synthetic benchmark tables");
    bench->add_option("--table", bench_table, "1 (errors), 2 (ablation), 3 (downsampling)");
    bench->add_option("--scenes", bench_scenes, "Scene count (default 50 / 4 / 4 per table)");
    bench->add_option("--sigma", bench_sigma, "Projector pixel noise");
    bench->add_option("--seed", bench_seed, "First scene seed");
    bench->add_option("--samples", bench_samples, "Matches per face (0 = table default)");
    bench->add_option("--jobs", bench_jobs, "Parallel scenes");
    bench->add_option("--out-dir", bench_dir, "Output directory");
    bench->add_option("--optimizer", bench_opt, "grid | bounded | grid-then-refine");
    bench->add_flag("--sphere", bench_sphere, "Include a sphere object for evaluation");
    bench->add_flag("--timing", bench_timing, "Record wall time (breaks byte determinism)");

    try {
        app.parse(argc, argv);
        if (*sim) return cmd_simulate(spec_path, out_dir, emit_vertices);
        if (*calib) return cmd_calibrate(cal);
        if (*sweep)
            return cmd_sweep(sweep_matches, sweep_curve, sweep_range, sweep_step, sweep_terms,
                             sweep_jobs);
        if (*rec)
            return cmd_reconstruct(rec_report, rec_matches, rec_out, rec_binary, rec_sphere,
                                   rec_metrics);
        if (*eval) return cmd_evaluate(eval_report, eval_sphere, eval_out);
        if (*bench) {
            if (bench_scenes <= 0) bench_scenes = bench_table == 1 ? 50 : 4;
            return cmd_bench(bench_table, bench_scenes, bench_sigma, bench_seed, bench_samples,
                             bench_jobs, bench_dir, bench_sphere, bench_timing, bench_opt);
        }
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (e.code() == ErrorCode::InvalidInput) return 1;
        if (e.code() == ErrorCode::AllEvaluationsFailed) return 3;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
