#include "c2calib/sfm.hpp"

#include <cmath>
#include <functional>
#include <thread>

namespace c2calib {

namespace {

constexpr double kGolden = 0.6180339887498949;

double golden_1d(double lo, double hi, double tol, const std::function<double(double)>& f) {
    double x1 = hi - kGolden * (hi - lo);
    double x2 = lo + kGolden * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kGolden * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kGolden * (hi - lo);
            f2 = f(x2);
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v;
    v.reserve(n);
    if (n == 1) {
        v.push_back(0.5 * (lo + hi));
        return v;
    }
    for (int i = 0; i < n; ++i)
        v.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    return v;
}

}  // namespace

void SfmConfig::validate() const {
    if (!(0.0 < f_min && f_min < f_max))
        throw_error(ErrorCode::InvalidInput, "focal range must satisfy 0 < f_min < f_max");
    if (pp_mode == PpMode::Search && !(pp_lo.x() < pp_hi.x() && pp_lo.y() < pp_hi.y()))
        throw_error(ErrorCode::InvalidInput, "principal-point search rectangle is empty");
    if (f_coarse_steps < 2 || pp_coarse_steps < 1)
        throw_error(ErrorCode::InvalidInput, "coarse grid needs at least 2 focal steps");
}

double evaluate_sfm_objective(const Intrinsics& K_guess, const FaceMatches& matches) {
    try {
        const CycleResult cr = cycle_full(K_guess, matches);
        const GeneralIntrinsics& kt = cr.K_p_full;
        const Intrinsics kt_nat = kt.naturalized();
        const GeneralIntrinsics& kb = cr.K_c_back;

        double e = std::abs(kt.skew) + std::abs(kt.fx - kt.fy);
        e += std::abs(kt_nat.f - K_guess.f) + std::abs(kt_nat.pp.x() - K_guess.pp.x()) +
             std::abs(kt_nat.pp.y() - K_guess.pp.y());
        e += std::abs(kb.fx - kb.fy) + std::abs(kb.skew);
        e += std::abs(kb.fx - K_guess.f) + std::abs(kb.fy - K_guess.f);
        e += (kb.pp - K_guess.pp).norm();
        return e;
    } catch (const Error&) {
        return kInf;
    }
}

SfmResult calibrate_sfm(const FaceMatches& matches, const SfmConfig& cfg) {
    cfg.validate();

    const std::vector<double> fs = linspace(cfg.f_min, cfg.f_max, cfg.f_coarse_steps);
    std::vector<double> xs, ys;
    if (cfg.pp_mode == SfmConfig::PpMode::Fixed) {
        xs = {cfg.pp_fixed.x()};
        ys = {cfg.pp_fixed.y()};
    } else {
        xs = linspace(cfg.pp_lo.x(), cfg.pp_hi.x(), cfg.pp_coarse_steps);
        ys = linspace(cfg.pp_lo.y(), cfg.pp_hi.y(), cfg.pp_coarse_steps);
    }

    struct Cell {
        double f, x, y;
        double value = kInf;
    };
    std::vector<Cell> cells;
    cells.reserve(fs.size() * xs.size() * ys.size());
    for (double f : fs)
        for (double x : xs)
            for (double y : ys) cells.push_back(Cell{f, x, y});

    const int jobs = std::max(1, cfg.jobs);
    auto worker = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i)
            cells[i].value =
                evaluate_sfm_objective(Intrinsics{cells[i].f, {cells[i].x, cells[i].y}, 0.0},
                                       matches);
    };
    if (jobs == 1) {
        worker(0, cells.size());
    } else {
        std::vector<std::thread> threads;
        const size_t chunk = (cells.size() + jobs - 1) / jobs;
        for (size_t b = 0; b < cells.size(); b += chunk)
            threads.emplace_back(worker, b, std::min(b + chunk, cells.size()));
        for (auto& t : threads) t.join();
    }

    size_t best = cells.size();
    for (size_t i = 0; i < cells.size(); ++i)
        if (std::isfinite(cells[i].value) && (best == cells.size() || cells[i].value < cells[best].value))
            best = i;
    if (best == cells.size())
        throw_error(ErrorCode::AllEvaluationsFailed, "SfM objective failed on the entire grid");

    double f = cells[best].f;
    Point2 pp(cells[best].x, cells[best].y);
    const double f_cell = fs.size() > 1 ? fs[1] - fs[0] : cfg.f_max - cfg.f_min;
    const double x_cell = xs.size() > 1 ? xs[1] - xs[0] : 0.0;
    const double y_cell = ys.size() > 1 ? ys[1] - ys[0] : 0.0;

    for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
        f = golden_1d(std::max(cfg.f_min, f - f_cell), std::min(cfg.f_max, f + f_cell),
                      cfg.bracket_tol, [&](double v) {
                          return evaluate_sfm_objective(Intrinsics{v, pp, 0.0}, matches);
                      });
        if (cfg.pp_mode == SfmConfig::PpMode::Search) {
            pp.x() = golden_1d(std::max(cfg.pp_lo.x(), pp.x() - x_cell),
                               std::min(cfg.pp_hi.x(), pp.x() + x_cell), cfg.bracket_tol,
                               [&](double v) {
                                   return evaluate_sfm_objective(
                                       Intrinsics{f, {v, pp.y()}, 0.0}, matches);
                               });
            pp.y() = golden_1d(std::max(cfg.pp_lo.y(), pp.y() - y_cell),
                               std::min(cfg.pp_hi.y(), pp.y() + y_cell), cfg.bracket_tol,
                               [&](double v) {
                                   return evaluate_sfm_objective(
                                       Intrinsics{f, {pp.x(), v}, 0.0}, matches);
                               });
        }
    }

    SfmResult result;
    result.camera = Intrinsics{f, pp, 0.0};
    result.objective = evaluate_sfm_objective(result.camera, matches);
    if (!std::isfinite(result.objective))
        throw_error(ErrorCode::AllEvaluationsFailed, "refined SfM estimate is not evaluable");
    result.report = finalize_calibration(f, matches, pp);
    result.report.mode = "sfm";
    return result;
}

FaceMatches crop_matches(const FaceMatches& matches, const Point2& d1, const Point2& d2) {
    FaceMatches out = matches;
    for (auto& face : out.faces)
        for (auto& [a, b] : face) {
            a -= d1;
            b -= d2;
        }
    for (Face f : kFaces) {
        out.vertices_cam.vertex(f) -= d1;
        out.vertices_proj.vertex(f) -= d2;
    }
    out.vertices_cam.x_O -= d1;
    out.vertices_proj.x_O -= d2;
    return out;
}

}  // namespace c2calib
