#pragma once

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

#include "c2calib/face_inference.hpp"
#include "c2calib/synthetic.hpp"

namespace c2calib {

using json = nlohmann::json;

/// On-disk match document. `vertices` is decoded from the optional
/// vertex_hints block: hints with an "O" entry are explicit vertex images,
/// hints without one feed leg-line inference.
struct MatchFileData {
    int version = 1;
    std::array<std::vector<PixelPair>, 3> faces;
    std::optional<std::variant<VertexImages, VertexHints>> vertices;
    Convexity convexity = Convexity::Concave;
    Point2 pp_c = Point2::Zero();
    Eigen::Vector2i camera_size{0, 0};
    Eigen::Vector2i projector_size{0, 0};
};

json match_file_to_json(const MatchFileData& data);
MatchFileData match_file_from_json(const json& j);

/// Calibration report document (re-loadable, versioned).
struct ReportFileData {
    int version = 1;
    CalibrationReport report;
    std::string optimizer = "bounded";
    std::array<bool, kNumTerms> term_mask{true, true, true, true, true, true, true};
    double f_min = 100.0;
    double f_max = 10000.0;
    double grid_step = 1.0;
    std::optional<std::string> curve_path;
    std::optional<CalibrationErrors> errors_vs_gt;
};

json report_file_to_json(const ReportFileData& data);
ReportFileData report_file_from_json(const json& j);

json scene_spec_to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(const json& j);

json ground_truth_to_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const json& j);

json sphere_matches_to_json(std::span<const PixelPair> matches, double gt_radius);
std::pair<std::vector<PixelPair>, double> sphere_matches_from_json(const json& j);

/// Columns: f_c,E,E_1..E_7,status.
std::string curve_to_csv(const ObjectiveCurve& curve);

std::string bench_table1_csv(const BenchReport& report);
std::string ablation_table2_csv(std::span<const AblationRow> rows);
std::string downsampling_table3_csv(std::span<const DownsamplingRow> rows);

/// Build a FaceMatches from a loaded match file (runs input preparation; the
/// vertex_hints block is required).
PreparedMatches prepare_from_match_file(const MatchFileData& data,
                                        const InferenceConfig& cfg = {});

/// Temp-file-then-rename write; the target never holds partial content.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

json load_json_file(const std::filesystem::path& path);
void save_json_file(const std::filesystem::path& path, const json& j);

}  // namespace c2calib
