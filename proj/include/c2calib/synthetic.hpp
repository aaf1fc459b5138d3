#pragma once

#include <optional>

#include "c2calib/face_inference.hpp"
#include "c2calib/objective.hpp"

namespace c2calib {

struct DeviceSpec {
    Intrinsics intrinsics;
    Eigen::Vector2i resolution{2448, 2048};  // (width, height)
};

struct SphereSpec {
    Point3 center = Point3(0.0, 0.0, 5.0);
    double radius = 0.5;
    int samples = 500;
};

/// Ground-truth scene recipe. Leg directions are the columns of the rotation,
/// with the third negated for a concave corner.
struct SceneSpec {
    DeviceSpec camera;
    DeviceSpec projector;
    Pose pose;  // camera frame -> projector frame
    Point3 c2_position = Point3(0.0, 0.0, 5.0);
    Eigen::Vector3d c2_rotvec = Eigen::Vector3d::Zero();
    Eigen::Vector3d leg_lengths = Eigen::Vector3d(1.0, 1.0, 1.0);
    Convexity convexity = Convexity::Concave;
    Eigen::Vector3i samples_per_face{200, 200, 200};
    double occlusion = 0.0;       // fraction of each face area masked out
    double sigma_px = 0.0;        // Gaussian noise on projector pixels
    bool noise_symmetric = false; // also perturb camera pixels
    uint64_t seed = 1;
    std::optional<SphereSpec> sphere;

    C2Model c2_model() const;

    /// Paper-scale CPP (2448x2048 camera, 854x480 projector) with a visible
    /// default corner.
    static SceneSpec paper_default();
};

struct GroundTruth {
    Intrinsics camera;
    Intrinsics projector;
    Pose pose;
    C2Model c2;
    VertexImages vertices_cam;
    VertexImages vertices_proj;
    std::optional<SphereSpec> sphere;
};

struct SyntheticScene {
    FaceMatches matches;  // vertex fields filled with ground-truth projections
    GroundTruth gt;
    std::vector<PixelPair> sphere_matches;
};

/// Forward-simulation oracle: uniform samples on the visible part of each
/// face, projected into both views, projector pixels perturbed by sigma.
SyntheticScene generate_scene(const SceneSpec& spec);

/// Randomized paper-scale scene around the default geometry; deterministic
/// per seed. Draws are re-tried until the corner is visible in both views.
SceneSpec random_scene_spec(uint64_t seed, double sigma_px = 0.0,
                            const Eigen::Vector3i& samples_per_face = {200, 200, 200});

/// Signed percent errors, Table-1 convention: 100 * (est - gt) / gt.
struct CalibrationErrors {
    double f_c_pct = 0.0;
    double f_p_pct = 0.0;
    double x_p0_pct = 0.0;
    double y_p0_pct = 0.0;

    double mae() const;
};

CalibrationErrors compare_to_gt(const CalibrationReport& report, const GroundTruth& gt);

struct PipelineOptions {
    ObjectiveConfig objective;
    InferenceConfig inference;
    bool use_explicit_vertices = false;  // bypass leg inference with GT vertices
    int downsample_rate = 1;             // keep every r-th match per face
};

struct PipelineOutcome {
    bool ok = false;
    std::string failure;     // error name when !ok
    CalibrationReport report;
    CalibrationErrors errors;
    double runtime_s = 0.0;
};

/// The full calibration path on one synthetic scene: inference (hints from
/// ground-truth vertex images), focal search, finalize, score against GT.
PipelineOutcome run_pipeline_on_scene(const SceneSpec& spec, const PipelineOptions& opts = {});

/// Downsample helper shared with the CLI: keep indices 0, r, 2r, ... of each
/// face list.
std::array<std::vector<PixelPair>, 3> downsample_faces(
    const std::array<std::vector<PixelPair>, 3>& faces, int rate);

struct BenchScene {
    uint64_t seed = 0;
    PipelineOutcome outcome;
};

/// Table-1 style run: one pipeline per seed, MAE aggregated over scenes.
struct BenchReport {
    std::vector<BenchScene> scenes;
    double mae_pct = 0.0;        // mean over succeeded scenes
    size_t failed_scenes = 0;
    std::optional<double> sphere_radial_mae_rel;
    double runtime_s = 0.0;      // filled only when timing is requested
};

BenchReport run_bench(std::span<const SceneSpec> specs, const PipelineOptions& opts, int jobs = 1,
                      bool timing = false);

/// Table-2 ablation: the ten masks of the paper (E_1..E_7 singletons, E_pro,
/// E_cycle, E).
struct AblationRow {
    std::string name;
    std::array<bool, kNumTerms> mask;
    double mae_pct = 0.0;
    size_t failed_scenes = 0;
};

std::array<std::array<bool, kNumTerms>, 10> ablation_masks();
std::vector<AblationRow> run_ablation_table2(std::span<const SceneSpec> specs,
                                             const PipelineOptions& opts, int jobs = 1);

/// Table-3 downsampling sweep.
struct DownsamplingRow {
    int rate = 1;
    double mae_pct = 0.0;
    size_t failed_scenes = 0;
};

std::vector<DownsamplingRow> run_downsampling_table3(std::span<const SceneSpec> specs,
                                                     std::span<const int> rates,
                                                     const PipelineOptions& opts, int jobs = 1);

/// Least-squares sphere fit of the triangulated sphere correspondences.
struct SphereEvaluation {
    Point3 center = Point3::Zero();
    double radius = 0.0;
    double scale_to_gt = 1.0;          // gt_radius / fitted radius
    double radial_mae_rel = 0.0;       // mean |residual| / fitted radius
    double radial_mae_units = 0.0;     // in GT units after scale alignment
    std::vector<double> heat;          // per-point |residual|, GT units
};

SphereEvaluation evaluate_sphere(const CalibrationReport& report,
                                 std::span<const PixelPair> sphere_matches, double gt_radius);

}  // namespace c2calib
