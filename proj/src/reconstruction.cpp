#include "c2calib/reconstruction.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace c2calib {

namespace {

constexpr char kGaugeComment[] = "comment scale gauge: lambda_O = 1 (camera-frame units)";

std::optional<Eigen::Vector3d> fit_plane_normal(std::span<const PointCloud::Vertex> points,
                                                int label) {
    Point3 centroid = Point3::Zero();
    size_t n = 0;
    for (const auto& v : points)
        if (v.label == label) {
            centroid += v.xyz;
            ++n;
        }
    if (n < 3) return std::nullopt;
    centroid /= static_cast<double>(n);

    Mat3 scatter = Mat3::Zero();
    for (const auto& v : points)
        if (v.label == label) {
            const Point3 d = v.xyz - centroid;
            scatter += d * d.transpose();
        }
    Eigen::SelfAdjointEigenSolver<Mat3> es(scatter);
    return es.eigenvectors().col(0);
}

void format_double(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

PointCloud PointCloud::scaled(double s) const {
    PointCloud out;
    out.dropped = dropped;
    out.points.reserve(points.size());
    for (const auto& v : points) out.points.push_back(Vertex{s * v.xyz, v.label});
    return out;
}

PointCloud reconstruct(const CalibrationReport& report, const FaceMatches& matches,
                       std::span<const PixelPair> extra) {
    const ProjectiveCamera cam = ProjectiveCamera::compose(report.camera, Pose{});
    const ProjectiveCamera proj = ProjectiveCamera::compose(report.projector_full, report.pose);
    // Surfaces triangulate only with a real baseline; fail fast otherwise.
    if ((cam.center() - proj.center()).norm() <=
        1e-12 * std::max(1.0, proj.center().norm()))
        throw_error(ErrorCode::EmptyOutput, "zero baseline: nothing can be triangulated");

    PointCloud cloud;
    cloud.points.reserve(matches.total_matches() + extra.size());
    auto add = [&](const PixelPair& pair, int label) {
        try {
            cloud.points.push_back(PointCloud::Vertex{triangulate(cam, proj, pair.first,
                                                                  pair.second),
                                                      label});
        } catch (const Error&) {
            ++cloud.dropped;
        }
    };
    for (Face f : kFaces)
        for (const auto& pair : matches.face(f)) add(pair, static_cast<int>(f));
    for (const auto& pair : extra) add(pair, kLabelOther);

    if (cloud.points.empty())
        throw_error(ErrorCode::EmptyOutput, "every correspondence failed to triangulate");
    return cloud;
}

double OrthogonalityMetric::max_deviation() const {
    double m = 0.0;
    for (const auto& d : pair_deviation_deg)
        if (d) m = std::max(m, *d);
    return m;
}

OrthogonalityMetric orthogonality_metric(const PointCloud& cloud) {
    std::array<std::optional<Eigen::Vector3d>, 3> normals;
    for (int f = 0; f < 3; ++f) normals[f] = fit_plane_normal(cloud.points, f);

    OrthogonalityMetric metric;
    bool any = false;
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3;
        if (!normals[i] || !normals[j]) continue;
        const double c = std::clamp(std::abs(normals[i]->dot(*normals[j])), 0.0, 1.0);
        const double angle_deg = std::acos(c) * 180.0 / M_PI;
        metric.pair_deviation_deg[i] = 90.0 - angle_deg;
        any = true;
    }
    if (!any)
        throw_error(ErrorCode::InsufficientPoints,
                    "fewer than two faces have 3+ labeled points");
    return metric;
}

void write_ply(std::ostream& os, const PointCloud& cloud, bool binary) {
    os << "ply\n"
       << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n")
       << kGaugeComment << "\n"
       << "element vertex " << cloud.points.size() << "\n"
       << "property double x\nproperty double y\nproperty double z\n"
       << "property int face\n"
       << "end_header\n";
    if (binary) {
        for (const auto& v : cloud.points) {
            const double xyz[3] = {v.xyz.x(), v.xyz.y(), v.xyz.z()};
            const int32_t label = v.label;
            os.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
            os.write(reinterpret_cast<const char*>(&label), sizeof(label));
        }
    } else {
        std::string line;
        for (const auto& v : cloud.points) {
            line.clear();
            format_double(line, v.xyz.x());
            line += ' ';
            format_double(line, v.xyz.y());
            line += ' ';
            format_double(line, v.xyz.z());
            line += ' ';
            line += std::to_string(v.label);
            line += '\n';
            os << line;
        }
    }
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud, bool binary) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw_error(ErrorCode::InvalidInput, "cannot open " + path.string());
    write_ply(os, cloud, binary);
}

PointCloud read_ply(std::istream& is) {
    std::string line;
    bool binary = false;
    size_t count = 0;
    bool header_done = false;
    while (std::getline(is, line)) {
        if (line == "end_header") {
            header_done = true;
            break;
        }
        if (line.rfind("format binary_little_endian", 0) == 0) binary = true;
        if (line.rfind("element vertex ", 0) == 0) count = std::stoul(line.substr(15));
    }
    if (!header_done) throw_error(ErrorCode::InvalidInput, "malformed PLY header");

    PointCloud cloud;
    cloud.points.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        PointCloud::Vertex v;
        if (binary) {
            double xyz[3];
            int32_t label = 0;
            is.read(reinterpret_cast<char*>(xyz), sizeof(xyz));
            is.read(reinterpret_cast<char*>(&label), sizeof(label));
            if (!is) throw_error(ErrorCode::InvalidInput, "truncated PLY payload");
            v.xyz = Point3(xyz[0], xyz[1], xyz[2]);
            v.label = label;
        } else {
            if (!std::getline(is, line))
                throw_error(ErrorCode::InvalidInput, "truncated PLY payload");
            std::istringstream ss(line);
            ss >> v.xyz.x() >> v.xyz.y() >> v.xyz.z() >> v.label;
            if (!ss) throw_error(ErrorCode::InvalidInput, "malformed PLY vertex line");
        }
        cloud.points.push_back(v);
    }
    return cloud;
}

PointCloud read_ply(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw_error(ErrorCode::InvalidInput, "cannot open " + path.string());
    return read_ply(is);
}

}  // namespace c2calib
