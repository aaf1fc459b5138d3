#include "c2calib/c2.hpp"

#include <algorithm>
#include <cmath>

namespace c2calib {

namespace {

Eigen::Vector3d homog(const Point2& p) { return {p.x(), p.y(), 1.0}; }

constexpr double kLambdaPositivity = 1e-6;  // relative to lambda_O = 1

struct RootStatus {
    bool positive_failed = false;
    bool denominator_failed = false;
};

}  // namespace

const char* face_name(Face f) {
    switch (f) {
        case Face::A: return "A";
        case Face::B: return "B";
        case Face::C: return "C";
    }
    return "?";
}

const char* convexity_name(Convexity c) {
    return c == Convexity::Concave ? "concave" : "convex";
}

Convexity convexity_from_name(const std::string& name) {
    if (name == "concave") return Convexity::Concave;
    if (name == "convex") return Convexity::Convex;
    throw_error(ErrorCode::InvalidInput, "convexity must be \"concave\" or \"convex\", got \"" + name + "\"");
}

Point3 C2Model::leg(Face f) const { return vertex(f) - X_O; }

Point3 C2Model::vertex(Face f) const {
    switch (f) {
        case Face::A: return X_A;
        case Face::B: return X_B;
        case Face::C: return X_C;
    }
    return X_A;
}

Mat3 C2Model::leg_rotation() const {
    Mat3 R;
    R.col(0) = leg(Face::A).normalized();
    R.col(1) = leg(Face::B).normalized();
    R.col(2) = leg(Face::C).normalized();
    return R;
}

double C2Model::orthogonality_residual() const {
    const Point3 na = leg(Face::A), nb = leg(Face::B), nc = leg(Face::C);
    const double rab = std::abs(na.dot(nb)) / (na.norm() * nb.norm());
    const double rbc = std::abs(nb.dot(nc)) / (nb.norm() * nc.norm());
    const double rca = std::abs(nc.dot(na)) / (nc.norm() * na.norm());
    return std::max({rab, rbc, rca});
}

C2Model C2Model::scaled(double s) const {
    return C2Model{s * X_O, s * X_A, s * X_B, s * X_C, convexity};
}

Point2 VertexImages::vertex(Face f) const {
    switch (f) {
        case Face::A: return x_A;
        case Face::B: return x_B;
        case Face::C: return x_C;
    }
    return x_A;
}

Point2& VertexImages::vertex(Face f) {
    switch (f) {
        case Face::A: return x_A;
        case Face::B: return x_B;
        case Face::C: return x_C;
    }
    return x_A;
}

Point3 back_project(const Intrinsics& K, const Point2& x, double lambda) {
    if (!(lambda > 0.0)) throw_error(ErrorCode::InvalidInput, "back-projection depth must be positive");
    return lambda * (K.inverse_matrix() * homog(x));
}

Convexity classify_convexity(const C2Model& c2) {
    const Point3 na = c2.leg(Face::A), nb = c2.leg(Face::B), nc = c2.leg(Face::C);
    Mat3 L;
    L << na, nb, nc;
    const double det = L.determinant();
    if (std::abs(det) < 1e-10 * na.norm() * nb.norm() * nc.norm())
        throw_error(ErrorCode::NearDegenerate, "legs are nearly coplanar");
    return det < 0.0 ? Convexity::Concave : Convexity::Convex;
}

C2Solutions solve_c2_all(const Intrinsics& K, const VertexImages& v) {
    // Distinct-image gate: coincident vertex images collapse the system.
    const std::array<Point2, 4> imgs{v.x_O, v.x_A, v.x_B, v.x_C};
    double img_scale = 1.0;
    for (const auto& p : imgs) img_scale = std::max(img_scale, p.cwiseAbs().maxCoeff());
    for (size_t i = 0; i < imgs.size(); ++i)
        for (size_t j = i + 1; j < imgs.size(); ++j)
            if ((imgs[i] - imgs[j]).norm() <= 1e-9 * img_scale)
                throw_error(ErrorCode::DegenerateImages, "coincident vertex images");

    const Mat3 w = iac(K);
    const Eigen::Vector3d xo = homog(v.x_O), xa = homog(v.x_A), xb = homog(v.x_B),
                          xc = homog(v.x_C);
    const double q_oo = xo.dot(w * xo);
    const double q_ao = xa.dot(w * xo);
    const double q_bo = xb.dot(w * xo);
    const double q_co = xc.dot(w * xo);
    const double q_ab = xa.dot(w * xb);
    const double q_bc = xb.dot(w * xc);
    const double q_ca = xc.dot(w * xa);

    // Eliminating lambda_B and lambda_C through the two bilinear equations
    // leaves a quadratic in lambda_A:
    //   lambda_B = N / D_B,  lambda_C = N / D_C,
    //   N = q_AO l - q_OO,  D_B = q_AB l - q_BO,  D_C = q_CA l - q_CO,
    //   N^2 q_BC - N D_C q_BO - N D_B q_CO + q_OO D_B D_C = 0.
    const double a = q_bc * q_ao * q_ao - q_ao * (q_bo * q_ca + q_co * q_ab) + q_oo * q_ab * q_ca;
    const double b = 2.0 * q_ao * (q_bo * q_co - q_bc * q_oo);
    const double c = q_oo * (q_bc * q_oo - q_bo * q_co);

    const double qscale =
        std::max({std::abs(q_oo), std::abs(q_ao), std::abs(q_bo), std::abs(q_co), std::abs(q_ab),
                  std::abs(q_bc), std::abs(q_ca)});
    const double coeff_eps = 1e-14 * qscale * qscale;

    std::vector<double> candidates;
    C2Solutions out;
    if (std::abs(a) <= coeff_eps) {
        if (std::abs(b) <= coeff_eps)
            throw_error(ErrorCode::DegenerateImages, "orthogonality system degenerates");
        candidates.push_back(-c / b);
        out.discriminant = b * b;  // linear case: single root
    } else {
        const double disc = b * b - 4.0 * a * c;
        out.discriminant = disc;
        if (disc < 0.0)
            throw_error(ErrorCode::NoRealSolution,
                        "negative discriminant: no real cuboid corner for these images");
        const double sq = std::sqrt(disc);
        // Citardauq pairing avoids cancellation when |b| >> |ac|.
        const double qq = -0.5 * (b + (b < 0.0 ? -sq : sq));
        if (std::abs(qq) > 0.0) {
            candidates.push_back(qq / a);
            candidates.push_back(c / qq);
        } else {
            candidates.push_back(sq / (2.0 * a));
            candidates.push_back(-sq / (2.0 * a));
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    RootStatus status;
    const Mat3 Kinv = K.inverse_matrix();
    for (double la : candidates) {
        const double nume = q_ao * la - q_oo;
        const double den_b = q_ab * la - q_bo;
        const double den_c = q_ca * la - q_co;
        const double den_eps = 1e-12 * qscale * std::max(1.0, std::abs(la));
        if (std::abs(den_b) <= den_eps || std::abs(den_c) <= den_eps) {
            status.denominator_failed = true;
            continue;
        }
        const double lb = nume / den_b;
        const double lc = nume / den_c;
        if (la <= kLambdaPositivity || lb <= kLambdaPositivity || lc <= kLambdaPositivity) {
            status.positive_failed = true;
            continue;
        }

        C2Solution sol;
        sol.lambda_a = la;
        sol.lambda_b = lb;
        sol.lambda_c = lc;
        sol.model.X_O = Kinv * xo;
        sol.model.X_A = la * (Kinv * xa);
        sol.model.X_B = lb * (Kinv * xb);
        sol.model.X_C = lc * (Kinv * xc);
        sol.model.convexity = classify_convexity(sol.model);
        out.roots.push_back(sol);
    }

    if (out.roots.empty()) {
        if (status.positive_failed)
            throw_error(ErrorCode::NonPositiveDepth, "every root places a vertex behind the camera");
        if (status.denominator_failed)
            throw_error(ErrorCode::DegenerateImages, "root denominator vanishes");
        throw_error(ErrorCode::NoRealSolution, "no admissible root");
    }
    return out;
}

C2Model solve_c2(const Intrinsics& K, const VertexImages& v, Convexity convexity) {
    const C2Solutions sols = solve_c2_all(K, v);
    for (const auto& s : sols.roots)
        if (s.model.convexity == convexity) return s.model;
    throw_error(ErrorCode::NonPositiveDepth,
                std::string("no admissible root with ") + convexity_name(convexity) + " convexity");
}

}  // namespace c2calib
