#include "c2calib/io.hpp"

#include <cstdio>
#include <fstream>

namespace c2calib {

namespace {

[[noreturn]] void schema_error(const std::string& what) {
    throw_error(ErrorCode::InvalidInput, "schema: " + what);
}

const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) schema_error(std::string("missing key \"") + key + '"');
    return j.at(key);
}

double require_number(const json& j, const char* key) {
    const json& v = require(j, key);
    if (!v.is_number()) schema_error(std::string("\"") + key + "\" must be a number");
    return v.get<double>();
}

json point2_to_json(const Point2& p) { return json::array({p.x(), p.y()}); }

Point2 point2_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        schema_error(std::string(what) + " must be [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json point3_to_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

Point3 point3_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) schema_error(std::string(what) + " must be [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Eigen::Vector2i size_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        schema_error(std::string(what) + " must be [width, height]");
    const Eigen::Vector2i s(j[0].get<int>(), j[1].get<int>());
    if (s.x() <= 0 || s.y() <= 0) schema_error(std::string(what) + " must be positive");
    return s;
}

json intrinsics_to_json(const Intrinsics& k) {
    return json{{"f", k.f}, {"pp", point2_to_json(k.pp)}, {"skew", k.skew}};
}

Intrinsics intrinsics_from_json(const json& j, const char* what) {
    Intrinsics k;
    k.f = require_number(j, "f");
    k.pp = point2_from_json(require(j, "pp"), what);
    k.skew = j.value("skew", 0.0);
    if (!(k.f > 0.0)) schema_error(std::string(what) + ": focal must be positive");
    return k;
}

json general_intrinsics_to_json(const GeneralIntrinsics& k) {
    return json{{"fx", k.fx}, {"fy", k.fy}, {"skew", k.skew}, {"pp", point2_to_json(k.pp)}};
}

GeneralIntrinsics general_intrinsics_from_json(const json& j, const char* what) {
    GeneralIntrinsics k;
    k.fx = require_number(j, "fx");
    k.fy = require_number(j, "fy");
    k.skew = require_number(j, "skew");
    k.pp = point2_from_json(require(j, "pp"), what);
    return k;
}

json pose_to_json(const Pose& pose) {
    Eigen::Quaterniond q(pose.R);
    q.normalize();
    if (q.w() < 0.0 || (q.w() == 0.0 && (q.x() < 0.0 || (q.x() == 0.0 && q.y() < 0.0))))
        q.coeffs() = -q.coeffs();
    return json{{"q", json::array({q.w(), q.x(), q.y(), q.z()})},
                {"t", point3_to_json(pose.t)}};
}

Pose pose_from_json(const json& j) {
    const json& qj = require(j, "q");
    if (!qj.is_array() || qj.size() != 4) schema_error("pose \"q\" must be [w, x, y, z]");
    Eigen::Quaterniond q(qj[0].get<double>(), qj[1].get<double>(), qj[2].get<double>(),
                         qj[3].get<double>());
    q.normalize();
    return Pose{q.toRotationMatrix(), point3_from_json(require(j, "t"), "pose t")};
}

json vertex_images_to_json(const VertexImages& v) {
    return json{{"O", point2_to_json(v.x_O)},
                {"A", point2_to_json(v.x_A)},
                {"B", point2_to_json(v.x_B)},
                {"C", point2_to_json(v.x_C)}};
}

VertexImages vertex_images_from_json(const json& j) {
    return VertexImages{point2_from_json(require(j, "O"), "vertex O"),
                        point2_from_json(require(j, "A"), "vertex A"),
                        point2_from_json(require(j, "B"), "vertex B"),
                        point2_from_json(require(j, "C"), "vertex C")};
}

json c2_to_json(const C2Model& c2) {
    const Mat3 R = c2.leg_rotation();
    json rot = json::array();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rot.push_back(R(r, c));
    return json{{"vertices",
                 json{{"O", point3_to_json(c2.X_O)},
                      {"A", point3_to_json(c2.X_A)},
                      {"B", point3_to_json(c2.X_B)},
                      {"C", point3_to_json(c2.X_C)}}},
                {"rotation", rot},
                {"t", point3_to_json(c2.X_O)},
                {"k_b", c2.ratio_b()},
                {"k_c", c2.ratio_c()},
                {"convexity", convexity_name(c2.convexity)}};
}

C2Model c2_from_json(const json& j) {
    const json& v = require(j, "vertices");
    C2Model c2;
    c2.X_O = point3_from_json(require(v, "O"), "C2 vertex O");
    c2.X_A = point3_from_json(require(v, "A"), "C2 vertex A");
    c2.X_B = point3_from_json(require(v, "B"), "C2 vertex B");
    c2.X_C = point3_from_json(require(v, "C"), "C2 vertex C");
    c2.convexity = convexity_from_name(require(j, "convexity").get<std::string>());
    return c2;
}

void append_csv_double(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

constexpr std::array<const char*, 3> kFaceKeys{"A", "B", "C"};

}  // namespace

json match_file_to_json(const MatchFileData& data) {
    json faces = json::object();
    for (size_t f = 0; f < 3; ++f) {
        json list = json::array();
        for (const auto& [c, p] : data.faces[f])
            list.push_back(json::array({c.x(), c.y(), p.x(), p.y()}));
        faces[kFaceKeys[f]] = std::move(list);
    }
    json j{{"version", data.version},
           {"faces", std::move(faces)},
           {"convexity", convexity_name(data.convexity)},
           {"pp_c", point2_to_json(data.pp_c)},
           {"image_sizes",
            json{{"camera", json::array({data.camera_size.x(), data.camera_size.y()})},
                 {"projector", json::array({data.projector_size.x(), data.projector_size.y()})}}}};

    if (data.vertices) {
        json hints = json::object();
        if (std::holds_alternative<VertexImages>(*data.vertices)) {
            const auto& v = std::get<VertexImages>(*data.vertices);
            hints["O"] = point2_to_json(v.x_O);
            for (Face f : kFaces)
                hints[face_name(f)] = point2_to_json(v.vertex(f));
        } else {
            const auto& h = std::get<VertexHints>(*data.vertices);
            for (Face f : kFaces) {
                if (!h.leg(f)) continue;
                if (std::holds_alternative<Point2>(*h.leg(f)))
                    hints[face_name(f)] = point2_to_json(std::get<Point2>(*h.leg(f)));
                else
                    hints[face_name(f)] = std::get<double>(*h.leg(f));
            }
        }
        j["vertex_hints"] = std::move(hints);
    }
    return j;
}

MatchFileData match_file_from_json(const json& j) {
    MatchFileData data;
    data.version = require(j, "version").get<int>();
    if (data.version != 1) schema_error("unsupported match file version");
    data.convexity = convexity_from_name(require(j, "convexity").get<std::string>());

    const json& sizes = require(j, "image_sizes");
    data.camera_size = size_from_json(require(sizes, "camera"), "image_sizes.camera");
    data.projector_size = size_from_json(require(sizes, "projector"), "image_sizes.projector");
    data.pp_c = point2_from_json(require(j, "pp_c"), "pp_c");
    if (data.pp_c.x() < 0.0 || data.pp_c.x() > data.camera_size.x() || data.pp_c.y() < 0.0 ||
        data.pp_c.y() > data.camera_size.y())
        schema_error("pp_c lies outside the camera image");

    const json& faces = require(j, "faces");
    for (size_t f = 0; f < 3; ++f) {
        if (!faces.contains(kFaceKeys[f]))
            schema_error(std::string("faces must contain key \"") + kFaceKeys[f] + '"');
        const json& list = faces.at(kFaceKeys[f]);
        if (!list.is_array()) schema_error("face match list must be an array");
        for (size_t i = 0; i < list.size(); ++i) {
            const json& row = list[i];
            if (!row.is_array() || row.size() != 4)
                schema_error("face match rows must be [xc, yc, xp, yp]");
            const Point2 c(row[0].get<double>(), row[1].get<double>());
            const Point2 p(row[2].get<double>(), row[3].get<double>());
            if (c.x() < 0.0 || c.x() > data.camera_size.x() || c.y() < 0.0 ||
                c.y() > data.camera_size.y())
                schema_error("camera coordinate outside the declared image size (face " +
                             std::string(kFaceKeys[f]) + ", row " + std::to_string(i) + ")");
            if (p.x() < 0.0 || p.x() > data.projector_size.x() || p.y() < 0.0 ||
                p.y() > data.projector_size.y())
                schema_error("projector coordinate outside the declared image size (face " +
                             std::string(kFaceKeys[f]) + ", row " + std::to_string(i) + ")");
            data.faces[f].emplace_back(c, p);
        }
    }

    if (j.contains("vertex_hints")) {
        const json& hints = j.at("vertex_hints");
        if (!hints.is_object()) schema_error("vertex_hints must be an object");
        if (hints.contains("O")) {
            VertexImages v;
            v.x_O = point2_from_json(hints.at("O"), "vertex_hints.O");
            for (Face f : kFaces) {
                if (!hints.contains(face_name(f)))
                    schema_error("explicit vertex_hints (with O) must list A, B and C");
                v.vertex(f) = point2_from_json(hints.at(face_name(f)), "vertex_hints");
            }
            data.vertices = v;
        } else {
            VertexHints h;
            for (Face f : kFaces) {
                if (!hints.contains(face_name(f))) continue;
                const json& hv = hints.at(face_name(f));
                if (hv.is_number())
                    h.leg(f) = hv.get<double>();
                else
                    h.leg(f) = point2_from_json(hv, "vertex_hints");
            }
            data.vertices = h;
        }
    }
    return data;
}

json report_file_to_json(const ReportFileData& data) {
    const CalibrationReport& r = data.report;
    json j{{"version", data.version},
           {"mode", r.mode},
           {"camera", intrinsics_to_json(r.camera)},
           {"projector_full", general_intrinsics_to_json(r.projector_full)},
           {"projector", intrinsics_to_json(r.projector)},
           {"camera_back", general_intrinsics_to_json(r.camera_back)},
           {"pose", pose_to_json(r.pose)},
           {"c2", c2_to_json(r.c2)},
           {"objective",
            json{{"value", r.objective},
                 {"terms", r.residual_terms},
                 {"term_mask", data.term_mask},
                 {"optimizer", data.optimizer},
                 {"f_range", json::array({data.f_min, data.f_max})},
                 {"grid_step", data.grid_step}}},
           {"reprojection",
            json{{"forward_px", r.forward_reprojection_px},
                 {"backward_px", r.backward_reprojection_px}}}};
    if (data.curve_path) j["curve_path"] = *data.curve_path;
    if (data.errors_vs_gt) {
        const auto& e = *data.errors_vs_gt;
        j["errors_vs_gt"] = json{{"f_c_pct", e.f_c_pct},
                                 {"f_p_pct", e.f_p_pct},
                                 {"x_p0_pct", e.x_p0_pct},
                                 {"y_p0_pct", e.y_p0_pct},
                                 {"mae_pct", e.mae()}};
    }
    return j;
}

ReportFileData report_file_from_json(const json& j) {
    ReportFileData data;
    data.version = require(j, "version").get<int>();
    if (data.version != 1) schema_error("unsupported report file version");
    CalibrationReport& r = data.report;
    r.mode = require(j, "mode").get<std::string>();
    r.camera = intrinsics_from_json(require(j, "camera"), "camera");
    r.projector_full = general_intrinsics_from_json(require(j, "projector_full"), "projector_full");
    r.projector = intrinsics_from_json(require(j, "projector"), "projector");
    r.camera_back = general_intrinsics_from_json(require(j, "camera_back"), "camera_back");
    r.pose = pose_from_json(require(j, "pose"));
    r.c2 = c2_from_json(require(j, "c2"));

    const json& obj = require(j, "objective");
    r.objective = require_number(obj, "value");
    const json& terms = require(obj, "terms");
    if (!terms.is_array() || terms.size() != kNumTerms) schema_error("objective.terms must have 7 entries");
    for (int i = 0; i < kNumTerms; ++i) r.residual_terms[i] = terms[i].get<double>();
    const json& mask = require(obj, "term_mask");
    if (!mask.is_array() || mask.size() != kNumTerms) schema_error("term_mask must have 7 entries");
    for (int i = 0; i < kNumTerms; ++i) data.term_mask[i] = mask[i].get<bool>();
    data.optimizer = require(obj, "optimizer").get<std::string>();
    const json& range = require(obj, "f_range");
    data.f_min = range[0].get<double>();
    data.f_max = range[1].get<double>();
    data.grid_step = require_number(obj, "grid_step");

    const json& rep = require(j, "reprojection");
    r.forward_reprojection_px = require_number(rep, "forward_px");
    r.backward_reprojection_px = require_number(rep, "backward_px");

    if (j.contains("curve_path")) data.curve_path = j.at("curve_path").get<std::string>();
    if (j.contains("errors_vs_gt")) {
        const json& e = j.at("errors_vs_gt");
        CalibrationErrors err;
        err.f_c_pct = require_number(e, "f_c_pct");
        err.f_p_pct = require_number(e, "f_p_pct");
        err.x_p0_pct = require_number(e, "x_p0_pct");
        err.y_p0_pct = require_number(e, "y_p0_pct");
        data.errors_vs_gt = err;
    }
    return data;
}

json scene_spec_to_json(const SceneSpec& spec) {
    json j{{"version", 1},
           {"seed", spec.seed},
           {"camera",
            json{{"f", spec.camera.intrinsics.f},
                 {"pp", point2_to_json(spec.camera.intrinsics.pp)},
                 {"size", json::array({spec.camera.resolution.x(), spec.camera.resolution.y()})}}},
           {"projector",
            json{{"f", spec.projector.intrinsics.f},
                 {"pp", point2_to_json(spec.projector.intrinsics.pp)},
                 {"size",
                  json::array({spec.projector.resolution.x(), spec.projector.resolution.y()})}}},
           {"pose", pose_to_json(spec.pose)},
           {"c2",
            json{{"position", point3_to_json(spec.c2_position)},
                 {"rotvec", point3_to_json(spec.c2_rotvec)},
                 {"leg_lengths", point3_to_json(spec.leg_lengths)},
                 {"convexity", convexity_name(spec.convexity)}}},
           {"samples_per_face",
            json::array({spec.samples_per_face.x(), spec.samples_per_face.y(),
                         spec.samples_per_face.z()})},
           {"occlusion", spec.occlusion},
           {"sigma_px", spec.sigma_px},
           {"noise_symmetric", spec.noise_symmetric}};
    if (spec.sphere)
        j["sphere"] = json{{"center", point3_to_json(spec.sphere->center)},
                           {"radius", spec.sphere->radius},
                           {"samples", spec.sphere->samples}};
    return j;
}

SceneSpec scene_spec_from_json(const json& j) {
    SceneSpec spec;
    if (require(j, "version").get<int>() != 1) schema_error("unsupported scene spec version");
    spec.seed = require(j, "seed").get<uint64_t>();

    const json& cam = require(j, "camera");
    spec.camera.intrinsics =
        Intrinsics{require_number(cam, "f"), point2_from_json(require(cam, "pp"), "camera.pp"), 0.0};
    spec.camera.resolution = size_from_json(require(cam, "size"), "camera.size");
    const json& proj = require(j, "projector");
    spec.projector.intrinsics = Intrinsics{require_number(proj, "f"),
                                           point2_from_json(require(proj, "pp"), "projector.pp"),
                                           0.0};
    spec.projector.resolution = size_from_json(require(proj, "size"), "projector.size");

    spec.pose = pose_from_json(require(j, "pose"));
    const json& c2 = require(j, "c2");
    spec.c2_position = point3_from_json(require(c2, "position"), "c2.position");
    spec.c2_rotvec = point3_from_json(require(c2, "rotvec"), "c2.rotvec");
    spec.leg_lengths = point3_from_json(require(c2, "leg_lengths"), "c2.leg_lengths");
    for (int i = 0; i < 3; ++i)
        if (!(spec.leg_lengths[i] > 0.0)) schema_error("leg lengths must be positive");
    spec.convexity = convexity_from_name(require(c2, "convexity").get<std::string>());

    const json& spf = require(j, "samples_per_face");
    if (!spf.is_array() || spf.size() != 3) schema_error("samples_per_face must have 3 entries");
    for (int i = 0; i < 3; ++i) spec.samples_per_face[i] = spf[i].get<int>();
    spec.occlusion = j.value("occlusion", 0.0);
    spec.sigma_px = j.value("sigma_px", 0.0);
    spec.noise_symmetric = j.value("noise_symmetric", false);

    if (j.contains("sphere")) {
        const json& s = j.at("sphere");
        SphereSpec sphere;
        sphere.center = point3_from_json(require(s, "center"), "sphere.center");
        sphere.radius = require_number(s, "radius");
        sphere.samples = require(s, "samples").get<int>();
        if (!(sphere.radius > 0.0) || sphere.samples < 4)
            schema_error("sphere needs positive radius and >= 4 samples");
        spec.sphere = sphere;
    }
    return spec;
}

json ground_truth_to_json(const GroundTruth& gt) {
    json j{{"version", 1},
           {"camera", intrinsics_to_json(gt.camera)},
           {"projector", intrinsics_to_json(gt.projector)},
           {"pose", pose_to_json(gt.pose)},
           {"c2", c2_to_json(gt.c2)},
           {"vertex_images",
            json{{"camera", vertex_images_to_json(gt.vertices_cam)},
                 {"projector", vertex_images_to_json(gt.vertices_proj)}}}};
    if (gt.sphere)
        j["sphere"] = json{{"center", point3_to_json(gt.sphere->center)},
                           {"radius", gt.sphere->radius},
                           {"samples", gt.sphere->samples}};
    return j;
}

GroundTruth ground_truth_from_json(const json& j) {
    GroundTruth gt;
    if (require(j, "version").get<int>() != 1) schema_error("unsupported ground-truth version");
    gt.camera = intrinsics_from_json(require(j, "camera"), "camera");
    gt.projector = intrinsics_from_json(require(j, "projector"), "projector");
    gt.pose = pose_from_json(require(j, "pose"));
    gt.c2 = c2_from_json(require(j, "c2"));
    const json& vi = require(j, "vertex_images");
    gt.vertices_cam = vertex_images_from_json(require(vi, "camera"));
    gt.vertices_proj = vertex_images_from_json(require(vi, "projector"));
    if (j.contains("sphere")) {
        const json& s = j.at("sphere");
        SphereSpec sphere;
        sphere.center = point3_from_json(require(s, "center"), "sphere.center");
        sphere.radius = require_number(s, "radius");
        sphere.samples = require(s, "samples").get<int>();
        gt.sphere = sphere;
    }
    return gt;
}

json sphere_matches_to_json(std::span<const PixelPair> matches, double gt_radius) {
    json list = json::array();
    for (const auto& [c, p] : matches) list.push_back(json::array({c.x(), c.y(), p.x(), p.y()}));
    return json{{"version", 1}, {"radius_gt", gt_radius}, {"points", std::move(list)}};
}

std::pair<std::vector<PixelPair>, double> sphere_matches_from_json(const json& j) {
    if (require(j, "version").get<int>() != 1) schema_error("unsupported sphere file version");
    const double radius = require_number(j, "radius_gt");
    const json& list = require(j, "points");
    if (!list.is_array()) schema_error("sphere points must be an array");
    std::vector<PixelPair> out;
    out.reserve(list.size());
    for (const auto& row : list) {
        if (!row.is_array() || row.size() != 4) schema_error("sphere rows must be [xc, yc, xp, yp]");
        out.emplace_back(Point2(row[0].get<double>(), row[1].get<double>()),
                         Point2(row[2].get<double>(), row[3].get<double>()));
    }
    return {std::move(out), radius};
}

std::string curve_to_csv(const ObjectiveCurve& curve) {
    std::string out = "f_c,E,E_1,E_2,E_3,E_4,E_5,E_6,E_7,status\n";
    for (const auto& s : curve.samples) {
        append_csv_double(out, s.f_c);
        out += ',';
        if (s.breakdown.ok)
            append_csv_double(out, s.breakdown.value);
        else
            out += "inf";
        for (int i = 0; i < kNumTerms; ++i) {
            out += ',';
            append_csv_double(out, s.breakdown.ok ? s.breakdown.terms[i] : 0.0);
        }
        out += ',';
        out += s.breakdown.ok ? "ok" : s.breakdown.failure;
        out += '\n';
    }
    return out;
}

std::string bench_table1_csv(const BenchReport& report) {
    std::string out = "seed,f_c_pct,f_p_pct,x_p0_pct,y_p0_pct,mae_pct,status\n";
    for (const auto& s : report.scenes) {
        out += std::to_string(s.seed);
        out += ',';
        if (s.outcome.ok) {
            append_csv_double(out, s.outcome.errors.f_c_pct);
            out += ',';
            append_csv_double(out, s.outcome.errors.f_p_pct);
            out += ',';
            append_csv_double(out, s.outcome.errors.x_p0_pct);
            out += ',';
            append_csv_double(out, s.outcome.errors.y_p0_pct);
            out += ',';
            append_csv_double(out, s.outcome.errors.mae());
            out += ",ok\n";
        } else {
            out += ",,,,," + s.outcome.failure + "\n";
        }
    }
    out += "MAE,,,,,";
    append_csv_double(out, report.mae_pct);
    out += ",aggregate\n";
    return out;
}

std::string ablation_table2_csv(std::span<const AblationRow> rows) {
    std::string out = "config,mask,mae_pct,failed_scenes\n";
    for (const auto& r : rows) {
        out += r.name;
        out += ',';
        for (int i = 0; i < kNumTerms; ++i) out += r.mask[i] ? '1' : '0';
        out += ',';
        append_csv_double(out, r.mae_pct);
        out += ',';
        out += std::to_string(r.failed_scenes);
        out += '\n';
    }
    return out;
}

std::string downsampling_table3_csv(std::span<const DownsamplingRow> rows) {
    std::string out = "rate,mae_pct,failed_scenes\n";
    for (const auto& r : rows) {
        out += std::to_string(r.rate);
        out += ',';
        append_csv_double(out, r.mae_pct);
        out += ',';
        out += std::to_string(r.failed_scenes);
        out += '\n';
    }
    return out;
}

PreparedMatches prepare_from_match_file(const MatchFileData& data, const InferenceConfig& cfg) {
    if (!data.vertices)
        throw_error(ErrorCode::InvalidInput,
                    "match file carries no vertex_hints; vertices cannot be located");
    return prepare_face_matches(data.faces, data.convexity, *data.vertices, cfg);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path dir = path.parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw_error(ErrorCode::InvalidInput, "cannot write " + tmp.string());
        os << content;
    }
    std::filesystem::rename(tmp, path);
}

json load_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw_error(ErrorCode::InvalidInput, "cannot open " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw_error(ErrorCode::InvalidInput, "JSON parse error in " + path.string() + ": " + e.what());
    }
    return j;
}

void save_json_file(const std::filesystem::path& path, const json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace c2calib
