#include <chrono>
#include <thread>

#include "c2calib/synthetic.hpp"

namespace c2calib {

namespace {

double mean_mae(std::span<const BenchScene> scenes, size_t* failed) {
    double sum = 0.0;
    size_t ok = 0;
    *failed = 0;
    for (const auto& s : scenes) {
        if (s.outcome.ok) {
            sum += s.outcome.errors.mae();
            ++ok;
        } else {
            ++*failed;
        }
    }
    return ok > 0 ? sum / static_cast<double>(ok) : kInf;
}

}  // namespace

std::array<std::vector<PixelPair>, 3> downsample_faces(
    const std::array<std::vector<PixelPair>, 3>& faces, int rate) {
    if (rate < 1) throw_error(ErrorCode::InvalidInput, "downsampling rate must be >= 1");
    if (rate == 1) return faces;
    std::array<std::vector<PixelPair>, 3> out;
    for (size_t f = 0; f < 3; ++f) {
        for (size_t i = 0; i < faces[f].size(); i += static_cast<size_t>(rate))
            out[f].push_back(faces[f][i]);
        if (out[f].size() < 4)
            throw_error(ErrorCode::InvalidInput,
                        "downsampling rate leaves a face with fewer than 4 matches");
    }
    return out;
}

PipelineOutcome run_pipeline_on_scene(const SceneSpec& spec, const PipelineOptions& opts) {
    PipelineOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const SyntheticScene scene = generate_scene(spec);

        std::variant<VertexImages, VertexHints> vertices;
        if (opts.use_explicit_vertices) {
            vertices = scene.matches.vertices_cam;
        } else {
            VertexHints hints;
            for (Face f : kFaces) hints.leg(f) = scene.matches.vertices_cam.vertex(f);
            vertices = hints;
        }
        // Input preparation sees the full match set; downsampling applies to
        // the matches feeding the focal search, as in the rate ablation.
        PreparedMatches prepared =
            prepare_face_matches(scene.matches.faces, spec.convexity, vertices, opts.inference);
        prepared.matches.faces = downsample_faces(prepared.matches.faces, opts.downsample_rate);

        const Point2 pp_c = spec.camera.intrinsics.pp;
        const double f_star = solve_focal(prepared.matches, pp_c, opts.objective);
        out.report = finalize_calibration(f_star, prepared.matches, pp_c);
        out.errors = compare_to_gt(out.report, scene.gt);
        out.ok = true;
    } catch (const Error& e) {
        out.ok = false;
        out.failure = error_code_name(e.code());
    }
    out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

BenchReport run_bench(std::span<const SceneSpec> specs, const PipelineOptions& opts, int jobs,
                      bool timing) {
    const auto t0 = std::chrono::steady_clock::now();
    BenchReport report;
    report.scenes.resize(specs.size());

    auto worker = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            report.scenes[i].seed = specs[i].seed;
            report.scenes[i].outcome = run_pipeline_on_scene(specs[i], opts);
        }
    };
    jobs = std::max(1, jobs);
    if (jobs == 1 || specs.size() < 2) {
        worker(0, specs.size());
    } else {
        std::vector<std::thread> threads;
        const size_t chunk = (specs.size() + jobs - 1) / jobs;
        for (size_t b = 0; b < specs.size(); b += chunk)
            threads.emplace_back(worker, b, std::min(b + chunk, specs.size()));
        for (auto& t : threads) t.join();
    }

    report.mae_pct = mean_mae(report.scenes, &report.failed_scenes);

    // Sphere metric when scenes carry a sphere.
    double sphere_sum = 0.0;
    size_t sphere_n = 0;
    for (size_t i = 0; i < specs.size(); ++i) {
        if (!specs[i].sphere || !report.scenes[i].outcome.ok) continue;
        try {
            const SyntheticScene scene = generate_scene(specs[i]);
            const SphereEvaluation ev = evaluate_sphere(
                report.scenes[i].outcome.report, scene.sphere_matches, specs[i].sphere->radius);
            sphere_sum += ev.radial_mae_rel;
            ++sphere_n;
        } catch (const Error&) {
        }
    }
    if (sphere_n > 0) report.sphere_radial_mae_rel = sphere_sum / static_cast<double>(sphere_n);

    if (timing)
        report.runtime_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

std::array<std::array<bool, kNumTerms>, 10> ablation_masks() {
    std::array<std::array<bool, kNumTerms>, 10> masks{};
    for (int i = 0; i < 7; ++i) masks[i][i] = true;                    // E_1..E_7
    masks[7] = {true, true, false, false, false, false, false};       // E_pro
    masks[8] = {false, false, true, true, true, true, true};          // E_cycle
    masks[9] = {true, true, true, true, true, true, true};            // E
    return masks;
}

std::vector<AblationRow> run_ablation_table2(std::span<const SceneSpec> specs,
                                             const PipelineOptions& opts, int jobs) {
    if (specs.size() < 4)
        throw_error(ErrorCode::InvalidInput, "ablation needs at least 4 scenes");
    static const std::array<std::string, 10> names{"E1", "E2", "E3",    "E4",      "E5",
                                                   "E6", "E7", "E_pro", "E_cycle", "E"};
    const auto masks = ablation_masks();
    std::vector<AblationRow> rows;
    rows.reserve(masks.size());
    for (size_t m = 0; m < masks.size(); ++m) {
        PipelineOptions local = opts;
        local.objective.term_mask = masks[m];
        const BenchReport r = run_bench(specs, local, jobs);
        rows.push_back(AblationRow{names[m], masks[m], r.mae_pct, r.failed_scenes});
    }
    return rows;
}

std::vector<DownsamplingRow> run_downsampling_table3(std::span<const SceneSpec> specs,
                                                     std::span<const int> rates,
                                                     const PipelineOptions& opts, int jobs) {
    std::vector<DownsamplingRow> rows;
    rows.reserve(rates.size());
    for (int rate : rates) {
        PipelineOptions local = opts;
        local.downsample_rate = rate;
        const BenchReport r = run_bench(specs, local, jobs);
        rows.push_back(DownsamplingRow{rate, r.mae_pct, r.failed_scenes});
    }
    return rows;
}

}  // namespace c2calib
