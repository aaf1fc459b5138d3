#include "c2calib/objective.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace c2calib {

namespace {

std::array<double, kNumTerms> cycle_terms(const CycleResult& cr, double f_c, const Point2& pp_c) {
    const GeneralIntrinsics& kp = cr.K_p_full;
    const GeneralIntrinsics& kb = cr.K_c_back;
    return {
        std::abs(kp.skew),            // E_1
        std::abs(kp.fx - kp.fy),      // E_2
        std::abs(kb.fx - kb.fy),      // E_3
        std::abs(kb.skew),            // E_4
        std::abs(kb.fx - f_c),        // E_5
        std::abs(kb.fy - f_c),        // E_6
        (kb.pp - pp_c).norm(),        // E_7
    };
}

double masked_sum(const std::array<double, kNumTerms>& terms,
                  const std::array<bool, kNumTerms>& mask) {
    double s = 0.0;
    for (int i = 0; i < kNumTerms; ++i)
        if (mask[i]) s += terms[i];
    return s;
}

// Deterministic curve assembly regardless of thread completion order.
void evaluate_range(const FaceMatches& matches, const Point2& pp_c, const ObjectiveConfig& cfg,
                    const std::vector<double>& focals, std::vector<ObjectiveSample>& out) {
    out.resize(focals.size());
    const int jobs = std::max(1, cfg.jobs);
    auto worker = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            out[i].f_c = focals[i];
            out[i].breakdown = evaluate_objective(focals[i], matches, pp_c, cfg);
        }
    };
    if (jobs == 1 || focals.size() < 2) {
        worker(0, focals.size());
        return;
    }
    std::vector<std::thread> threads;
    const size_t chunk = (focals.size() + jobs - 1) / jobs;
    for (size_t b = 0; b < focals.size(); b += chunk)
        threads.emplace_back(worker, b, std::min(b + chunk, focals.size()));
    for (auto& t : threads) t.join();
}

ObjectiveCurve make_curve(std::vector<ObjectiveSample> samples) {
    ObjectiveCurve curve;
    curve.samples = std::move(samples);
    double best = kInf;
    bool found = false;
    for (size_t i = 0; i < curve.samples.size(); ++i) {
        const auto& s = curve.samples[i];
        if (!s.breakdown.ok) {
            ++curve.failed_evaluations;
            continue;
        }
        if (!found || s.breakdown.value < best) {
            best = s.breakdown.value;
            curve.argmin_index = i;
            found = true;
        }
    }
    if (!found)
        throw_error(ErrorCode::AllEvaluationsFailed, "objective failed on the entire grid");
    curve.argmin_on_boundary =
        curve.argmin_index == 0 || curve.argmin_index + 1 == curve.samples.size();
    return curve;
}

std::vector<double> make_grid(double lo, double hi, double step) {
    std::vector<double> g;
    const auto n = static_cast<size_t>(std::floor((hi - lo) / step + 1e-9));
    g.reserve(n + 2);
    for (size_t k = 0; k <= n; ++k) g.push_back(lo + static_cast<double>(k) * step);
    if (g.back() < hi - 1e-9 * std::max(1.0, hi)) g.push_back(hi);
    return g;
}

double golden_section(const FaceMatches& matches, const Point2& pp_c, const ObjectiveConfig& cfg,
                      double lo, double hi) {
    constexpr double invphi = 0.6180339887498949;
    auto eval = [&](double f) { return evaluate_objective(f, matches, pp_c, cfg).value; };

    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = eval(x1);
    double f2 = eval(x2);
    while (hi - lo > cfg.bracket_tol) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = eval(x2);
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

void ObjectiveConfig::validate() const {
    if (!(0.0 < f_min && f_min < f_max))
        throw_error(ErrorCode::InvalidInput, "focal range must satisfy 0 < f_min < f_max");
    if (!(grid_step > 0.0)) throw_error(ErrorCode::InvalidInput, "grid step must be positive");
    if (!any_term_enabled())
        throw_error(ErrorCode::InvalidInput, "at least one objective term must be enabled");
}

bool ObjectiveConfig::any_term_enabled() const {
    return std::any_of(term_mask.begin(), term_mask.end(), [](bool b) { return b; });
}

TermBreakdown evaluate_objective(double f_c, const FaceMatches& matches, const Point2& pp_c,
                                 const ObjectiveConfig& cfg) {
    cfg.validate();
    if (!(f_c >= cfg.f_min && f_c <= cfg.f_max))
        throw_error(ErrorCode::InvalidInput, "focal guess outside the configured range");

    TermBreakdown out;
    try {
        const CycleResult cr = cycle(f_c, pp_c, matches);
        out.terms = cycle_terms(cr, f_c, pp_c);
        out.value = masked_sum(out.terms, cfg.term_mask);
        out.ok = true;
    } catch (const Error& e) {
        out.ok = false;
        out.value = kInf;
        out.failure = error_code_name(e.code());
    }
    return out;
}

GridResult grid_search(const FaceMatches& matches, const Point2& pp_c,
                       const ObjectiveConfig& cfg) {
    cfg.validate();
    const std::vector<double> focals = make_grid(cfg.f_min, cfg.f_max, cfg.grid_step);
    std::vector<ObjectiveSample> samples;
    evaluate_range(matches, pp_c, cfg, focals, samples);
    GridResult res;
    res.curve = make_curve(std::move(samples));
    res.f_star = res.curve.best().f_c;
    return res;
}

double bounded_minimize(const FaceMatches& matches, const Point2& pp_c,
                        const ObjectiveConfig& cfg) {
    cfg.validate();
    if (cfg.f_max - cfg.f_min < cfg.bracket_tol) return 0.5 * (cfg.f_min + cfg.f_max);

    const std::vector<double> coarse = make_grid(cfg.f_min, cfg.f_max, cfg.coarse_step);
    std::vector<ObjectiveSample> samples;
    evaluate_range(matches, pp_c, cfg, coarse, samples);
    const ObjectiveCurve curve = make_curve(std::move(samples));

    const size_t i = curve.argmin_index;
    const double lo = i == 0 ? coarse.front() : coarse[i - 1];
    const double hi = i + 1 == coarse.size() ? coarse.back() : coarse[i + 1];
    if (hi - lo < cfg.bracket_tol) return 0.5 * (lo + hi);
    return golden_section(matches, pp_c, cfg, lo, hi);
}

double solve_focal(const FaceMatches& matches, const Point2& pp_c, const ObjectiveConfig& cfg) {
    switch (cfg.optimizer) {
        case OptimizerKind::Grid:
            return grid_search(matches, pp_c, cfg).f_star;
        case OptimizerKind::Bounded1d:
            return bounded_minimize(matches, pp_c, cfg);
        case OptimizerKind::GridThenRefine: {
            const GridResult g = grid_search(matches, pp_c, cfg);
            ObjectiveConfig local = cfg;
            local.f_min = std::max(cfg.f_min, g.f_star - cfg.grid_step);
            local.f_max = std::min(cfg.f_max, g.f_star + cfg.grid_step);
            if (local.f_max - local.f_min < cfg.bracket_tol)
                return 0.5 * (local.f_min + local.f_max);
            return golden_section(matches, pp_c, cfg, local.f_min, local.f_max);
        }
    }
    throw_error(ErrorCode::InvalidInput, "unknown optimizer");
}

CalibrationReport finalize_calibration(double f_star, const FaceMatches& matches,
                                       const Point2& pp_c) {
    if (!std::isfinite(f_star) || f_star <= 0.0)
        throw_error(ErrorCode::InvalidInput, "estimated focal must be finite and positive");

    const CycleResult cr = cycle(f_star, pp_c, matches);
    CalibrationReport report;
    report.camera = Intrinsics{f_star, pp_c, 0.0};
    report.projector_full = cr.K_p_full;
    report.projector = cr.K_p_natural;
    report.camera_back = cr.K_c_back;
    report.pose = cr.forward.pose;
    report.c2 = cr.forward.c2;
    report.residual_terms = cycle_terms(cr, f_star, pp_c);
    double total = 0.0;
    for (double t : report.residual_terms) total += t;
    report.objective = total;
    report.forward_reprojection_px = cr.forward.mean_reprojection;
    report.backward_reprojection_px = cr.backward.mean_reprojection;
    return report;
}

}  // namespace c2calib
