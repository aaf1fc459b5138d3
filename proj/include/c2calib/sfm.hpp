#pragma once

#include "c2calib/objective.hpp"

namespace c2calib {

/// Constant-camera two-view search space. Both views share one unknown
/// natural camera; no principal-point prior.
struct SfmConfig {
    double f_min = 100.0;
    double f_max = 10000.0;
    enum class PpMode { Search, Fixed } pp_mode = PpMode::Search;
    Point2 pp_fixed = Point2::Zero();   // used when pp_mode == Fixed
    Point2 pp_lo = Point2::Zero();      // search rectangle
    Point2 pp_hi = Point2(2448.0, 2048.0);
    int f_coarse_steps = 20;
    int pp_coarse_steps = 9;            // per axis
    int sweeps = 3;                     // coordinate-descent passes
    double bracket_tol = 0.01;
    int jobs = 1;

    void validate() const;
};

/// Constant-camera consistency objective: projector-naturalness terms plus an
/// L1 penalty between the transferred-to camera and the guess, plus the
/// cycle terms. +inf on chain failure.
double evaluate_sfm_objective(const Intrinsics& K_guess, const FaceMatches& matches);

struct SfmResult {
    Intrinsics camera;          // shared natural camera estimate
    double objective = kInf;
    CalibrationReport report;   // report.mode == "sfm"
};

/// Coarse (f, pp) grid followed by cyclic coordinate descent.
SfmResult calibrate_sfm(const FaceMatches& matches, const SfmConfig& cfg);

/// Shift all pixel coordinates of one view: crop offsets d1 (first view) and
/// d2 (second view) move the image origins, new = old - d.
FaceMatches crop_matches(const FaceMatches& matches, const Point2& d1, const Point2& d2);

}  // namespace c2calib
