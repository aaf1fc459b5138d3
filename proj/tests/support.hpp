#pragma once

#include <optional>

#include "c2calib/geometry.hpp"
#include "c2calib/rng.hpp"

namespace c2calib::test {

template <typename F>
std::optional<ErrorCode> thrown_code(F&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

// Distance between up-to-scale matrices after unit-norm, sign-fixed
// normalization.
template <typename DerivedA, typename DerivedB>
double scale_invariant_distance(const Eigen::MatrixBase<DerivedA>& a,
                                const Eigen::MatrixBase<DerivedB>& b) {
    auto canon = [](Eigen::MatrixXd m) {
        m /= m.norm();
        int r = 0, c = 0;
        m.cwiseAbs().maxCoeff(&r, &c);
        if (m(r, c) < 0.0) m = -m;
        return m;
    };
    return (canon(a.eval()) - canon(b.eval())).norm();
}

inline Intrinsics random_intrinsics(Rng& rng) {
    return Intrinsics{rng.uniform(400.0, 3000.0),
                      Point2(rng.uniform(200.0, 1600.0), rng.uniform(150.0, 1200.0)), 0.0};
}

inline GeneralIntrinsics random_general_intrinsics(Rng& rng) {
    GeneralIntrinsics k;
    k.fx = rng.uniform(400.0, 3000.0);
    k.fy = rng.uniform(400.0, 3000.0);
    k.skew = rng.uniform(-5.0, 5.0);
    k.pp = Point2(rng.uniform(200.0, 1600.0), rng.uniform(150.0, 1200.0));
    return k;
}

inline Pose random_pose(Rng& rng, double t_scale = 2.0) {
    return Pose{rng.rotation(),
                Point3(rng.uniform(-t_scale, t_scale), rng.uniform(-t_scale, t_scale),
                       rng.uniform(-t_scale, t_scale))};
}

}  // namespace c2calib::test
