#pragma once

#include <array>
#include <vector>

#include "c2calib/geometry.hpp"

namespace c2calib {

enum class Face { A, B, C };
enum class Convexity { Concave, Convex };

constexpr std::array<Face, 3> kFaces{Face::A, Face::B, Face::C};

const char* face_name(Face f);
const char* convexity_name(Convexity c);
Convexity convexity_from_name(const std::string& name);

/// Cuboid corner in the viewing-camera frame, lambda_O = 1 gauge.
struct C2Model {
    Point3 X_O, X_A, X_B, X_C;
    Convexity convexity = Convexity::Convex;

    Point3 leg(Face f) const;      // n_S = X_S - X_O
    Point3 vertex(Face f) const;   // far vertex of leg S
    Mat3 leg_rotation() const;     // columns = normalized legs (orthogonal, det = +-1)
    double ratio_b() const { return leg(Face::B).norm() / leg(Face::A).norm(); }
    double ratio_c() const { return leg(Face::C).norm() / leg(Face::A).norm(); }

    /// Unit normal of face S (the face opposite leg S, spanned by the other
    /// two legs, passing through X_O).
    Point3 face_normal(Face f) const { return leg(f).normalized(); }

    /// Max |n_S . n_T| / (|n_S||n_T|) over the three leg pairs.
    double orthogonality_residual() const;

    C2Model scaled(double s) const;
};

/// The four vertex images in one view.
struct VertexImages {
    Point2 x_O, x_A, x_B, x_C;

    Point2 vertex(Face f) const;
    Point2& vertex(Face f);
};

struct C2Solution {
    double lambda_a = 0.0, lambda_b = 0.0, lambda_c = 0.0;  // lambda_O = 1
    C2Model model;
};

/// Up to two real solutions (Fig. 2(b) regime), one per convexity.
struct C2Solutions {
    std::vector<C2Solution> roots;
    double discriminant = 0.0;
};

Point3 back_project(const Intrinsics& K, const Point2& x, double lambda);

/// All real positive-depth solutions of the orthogonality system.
C2Solutions solve_c2_all(const Intrinsics& K, const VertexImages& v);

/// The solution matching the requested convexity prior.
C2Model solve_c2(const Intrinsics& K, const VertexImages& v, Convexity convexity);

/// Concave iff det[n_A n_B n_C] < 0 under the solver's vertex labeling.
Convexity classify_convexity(const C2Model& c2);

}  // namespace c2calib
