#pragma once

#include <limits>
#include <string>

#include "c2calib/transfer.hpp"

namespace c2calib {

constexpr int kNumTerms = 7;
constexpr double kInf = std::numeric_limits<double>::infinity();

enum class OptimizerKind { Grid, Bounded1d, GridThenRefine };

struct ObjectiveConfig {
    std::array<bool, kNumTerms> term_mask{true, true, true, true, true, true, true};
    double f_min = 100.0;
    double f_max = 10000.0;
    double grid_step = 1.0;
    OptimizerKind optimizer = OptimizerKind::Bounded1d;
    double coarse_step = 50.0;   // basin bracketing for the bounded optimizer
    double bracket_tol = 0.01;   // px, golden-section stop
    int jobs = 1;                // parallel grid evaluation

    void validate() const;
    bool any_term_enabled() const;
};

struct TermBreakdown {
    std::array<double, kNumTerms> terms{};  // E_1..E_7, unmasked
    double value = kInf;                    // masked sum
    bool ok = false;
    std::string failure;  // error name when !ok
};

struct ObjectiveSample {
    double f_c = 0.0;
    TermBreakdown breakdown;
};

struct ObjectiveCurve {
    std::vector<ObjectiveSample> samples;  // in grid order
    size_t argmin_index = 0;
    bool argmin_on_boundary = false;
    size_t failed_evaluations = 0;

    const ObjectiveSample& best() const { return samples[argmin_index]; }
};

struct GridResult {
    double f_star = 0.0;
    ObjectiveCurve curve;
};

/// Calibration output of one full run. Serialization lives in io.
struct CalibrationReport {
    std::string mode = "cpp";     // "cpp" or "sfm"
    Intrinsics camera;            // natural camera at the estimated focal
    GeneralIntrinsics projector_full;
    Intrinsics projector;         // naturalized
    GeneralIntrinsics camera_back;
    Pose pose;                    // camera frame -> projector frame
    C2Model c2;
    std::array<double, kNumTerms> residual_terms{};
    double objective = 0.0;
    double forward_reprojection_px = 0.0;
    double backward_reprojection_px = 0.0;
};

/// Seven-term cycle objective at one focal guess. Transfer-chain failures are
/// folded into a +inf sample so grids stay total.
TermBreakdown evaluate_objective(double f_c, const FaceMatches& matches, const Point2& pp_c,
                                 const ObjectiveConfig& cfg);

/// Exact search over {f_min, f_min + step, ..., f_max}; ties break toward the
/// smallest focal.
GridResult grid_search(const FaceMatches& matches, const Point2& pp_c, const ObjectiveConfig& cfg);

/// Coarse bracketing followed by golden-section refinement of the best basin.
double bounded_minimize(const FaceMatches& matches, const Point2& pp_c,
                        const ObjectiveConfig& cfg);

/// Run the selected optimizer.
double solve_focal(const FaceMatches& matches, const Point2& pp_c, const ObjectiveConfig& cfg);

/// One forward/backward pass at the chosen focal, assembled into a report.
CalibrationReport finalize_calibration(double f_star, const FaceMatches& matches,
                                       const Point2& pp_c);

}  // namespace c2calib
