#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>

namespace c2calib {

/// Seeded generator with hand-rolled transforms. The mt19937_64 engine is
/// fully specified by the standard; std distributions are not, so bit
/// reproducibility requires doing the mapping ourselves.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Box-Muller without caching: two draws per sample keeps the stream
    /// layout independent of call history.
    double normal() {
        const double u1 = std::max(uniform(), 0x1.0p-60);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Eigen::Vector3d unit_vector() {
        while (true) {
            Eigen::Vector3d v(uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0));
            const double n = v.norm();
            if (n > 1e-3 && n <= 1.0) return v / n;
        }
    }

    Eigen::Matrix3d rotation() {
        const Eigen::Vector3d axis = unit_vector();
        const double angle = uniform(0.0, 2.0 * M_PI);
        return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace c2calib
