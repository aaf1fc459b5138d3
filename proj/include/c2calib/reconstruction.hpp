#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "c2calib/objective.hpp"

namespace c2calib {

/// Triangulated scene points; label 0/1/2 = faces A/B/C, 3 = other sources.
struct PointCloud {
    struct Vertex {
        Point3 xyz;
        int label = 3;
    };
    std::vector<Vertex> points;
    size_t dropped = 0;  // correspondences that failed cheirality/triangulation

    PointCloud scaled(double s) const;
};

constexpr int kLabelOther = 3;

/// Triangulate every correspondence with the calibrated pair. Per-point
/// failures are dropped and counted.
PointCloud reconstruct(const CalibrationReport& report, const FaceMatches& matches,
                       std::span<const PixelPair> extra = {});

/// Deviation from 90 degrees of each pair of fitted face planes (AB, BC, CA).
/// Faces with fewer than 3 points leave their pairs absent.
struct OrthogonalityMetric {
    std::array<std::optional<double>, 3> pair_deviation_deg;  // AB, BC, CA

    double max_deviation() const;
};

OrthogonalityMetric orthogonality_metric(const PointCloud& cloud);

/// PLY export; the header records the lambda_O = 1 scale gauge.
void write_ply(std::ostream& os, const PointCloud& cloud, bool binary = false);
void write_ply(const std::filesystem::path& path, const PointCloud& cloud, bool binary = false);

/// Reads clouds written by write_ply (both formats).
PointCloud read_ply(std::istream& is);
PointCloud read_ply(const std::filesystem::path& path);

}  // namespace c2calib
