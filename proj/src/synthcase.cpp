#include "sfo/synthcase.hpp"

#include <algorithm>
#include <cmath>

#include "sfo/landmarks.hpp"

namespace sfo {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Landmarks whose surface normal points up to ~99 degrees away from the
// camera still count as visible: profile landmarks sit exactly on the
// silhouette where the normal grazes the view direction.
constexpr double kGrazingDot = -0.15;

struct TemplateEntry {
    const char* name;   // base name; bilateral entries get _l/_r appended
    Vec3 dir;           // unit direction for the left member (x >= 0)
    bool bilateral;
};

// Anatomical direction template in the head frame: +x subject's left,
// +y anterior, +z superior. Directions are normalized on use.
const TemplateEntry kTemplate[] = {
    {"glabella", {0.0, 0.92, 0.36}, false},
    {"metopion", {0.0, 0.78, 0.62}, false},
    {"bregma", {0.0, 0.08, 1.00}, false},
    {"nasion", {0.0, 0.96, 0.26}, false},
    {"subspinale", {0.0, 0.98, -0.18}, false},
    {"prosthion", {0.0, 0.97, -0.27}, false},
    {"pogonion", {0.0, 0.92, -0.42}, false},
    {"gnathion", {0.0, 0.84, -0.56}, false},
    {"ectoconchion", {0.52, 0.76, 0.32}, true},
    {"dacryon", {0.18, 0.92, 0.32}, true},
    {"alare", {0.22, 0.95, -0.12}, true},
    {"zygion", {0.88, 0.42, 0.12}, true},
    {"frontotemporale", {0.56, 0.66, 0.50}, true},
    {"gonion", {0.78, 0.30, -0.48}, true},
};

// Cut references: skull-side infradentale and mental foramina, face-side
// stomion and cheilia.
const TemplateEntry kSkullExtras[] = {
    {"infradentale", {0.0, 0.96, -0.32}, false},
    {"mental_foramen", {0.34, 0.86, -0.40}, true},
};
const TemplateEntry kFaceExtras[] = {
    {"stomion", {0.0, 0.97, -0.30}, false},
    {"cheilion", {0.30, 0.90, -0.31}, true},
};

Vec3 mirror_x(const Vec3& v) { return {-v.x(), v.y(), v.z()}; }

// Per-subject radial shape: ellipsoid radius modulated by low-order even
// (symmetric) and odd (asymmetric) direction polynomials plus a jaw bulge.
struct RadialShape {
    Vec3 semi_axes;
    double sym[6];
    double asym[3];
    double asym_weight;
    double jaw;

    double radius(const Vec3& d) const {
        double r_ell = 1.0 / std::sqrt(d.x() * d.x() / (semi_axes.x() * semi_axes.x()) +
                                       d.y() * d.y() / (semi_axes.y() * semi_axes.y()) +
                                       d.z() * d.z() / (semi_axes.z() * semi_axes.z()));
        double x = d.x(), y = d.y(), z = d.z();
        double s = sym[0] * y * z + sym[1] * (z * z - 1.0 / 3.0) + sym[2] * (y * y - 1.0 / 3.0) +
                   sym[3] * (x * x - 1.0 / 3.0) + sym[4] * x * x * z + sym[5] * y * z * z;
        double a = asym[0] * x + asym[1] * x * y + asym[2] * x * z;
        double m = std::max(0.0, -z) * std::max(0.0, y);
        return r_ell * (1.0 + s + asym_weight * a + jaw * m * m);
    }
};

// Inverse-distance interpolation of per-landmark soft-tissue depth over
// direction space; exact at the landmark directions.
struct ThicknessField {
    std::vector<Vec3> dirs;
    std::vector<double> depths;

    double at(const Vec3& d) const {
        double wsum = 0.0, vsum = 0.0;
        for (std::size_t i = 0; i < dirs.size(); ++i) {
            double angle = std::acos(std::clamp(d.dot(dirs[i]), -1.0, 1.0));
            if (angle < 1e-9) return depths[i];
            double w = 1.0 / (angle * angle);
            wsum += w;
            vsum += w * depths[i];
        }
        return vsum / wsum;
    }
};

TriMesh radial_mesh(const RadialShape& shape, const ThicknessField* thickness, int rings,
                    int segments) {
    std::vector<Vec3> verts;
    std::vector<std::array<int, 3>> faces;
    auto surface = [&](const Vec3& d) {
        double r = shape.radius(d);
        if (thickness) r += thickness->at(d);
        return Vec3(d * r);
    };
    verts.push_back(surface(Vec3(0, 0, 1)));
    for (int i = 1; i < rings; ++i) {
        double theta = kPi * i / rings;
        for (int j = 0; j < segments; ++j) {
            double phi = 2.0 * kPi * j / segments;
            Vec3 d(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                   std::cos(theta));
            verts.push_back(surface(d));
        }
    }
    verts.push_back(surface(Vec3(0, 0, -1)));
    const int bottom = static_cast<int>(verts.size()) - 1;
    auto ring_vert = [&](int ring, int j) { return 1 + (ring - 1) * segments + (j % segments); };
    for (int j = 0; j < segments; ++j) faces.push_back({0, ring_vert(1, j), ring_vert(1, j + 1)});
    for (int i = 1; i + 1 < rings; ++i)
        for (int j = 0; j < segments; ++j) {
            int a = ring_vert(i, j), b = ring_vert(i, j + 1);
            int c = ring_vert(i + 1, j), d = ring_vert(i + 1, j + 1);
            faces.push_back({a, c, b});
            faces.push_back({b, c, d});
        }
    for (int j = 0; j < segments; ++j)
        faces.push_back({bottom, ring_vert(rings - 1, j + 1), ring_vert(rings - 1, j)});
    return TriMesh::create(std::move(verts), std::move(faces));
}

// Small tangential jitter; midline directions stay on the midline, pairs
// stay mirror-exact for zero extra.
Vec3 jitter_midline(const Vec3& base, Rng& rng, double amount) {
    Vec3 d = base;
    d.y() += rng.uniform(-amount, amount);
    d.z() += rng.uniform(-amount, amount);
    return d.normalized();
}

// Moller-Trumbore; true when the segment origin->target hits the mesh
// strictly before the target.
bool segment_blocked(const TriMesh& mesh, const Vec3& origin, const Vec3& target) {
    Vec3 dir = target - origin;
    const double t_cut = 1.0 - 1e-4;
    for (const auto& f : mesh.faces) {
        const Vec3& v0 = mesh.vertices[f[0]];
        Vec3 e1 = mesh.vertices[f[1]] - v0;
        Vec3 e2 = mesh.vertices[f[2]] - v0;
        Vec3 p = dir.cross(e2);
        double det = e1.dot(p);
        if (std::abs(det) < 1e-12) continue;
        double inv = 1.0 / det;
        Vec3 s = origin - v0;
        double u = s.dot(p) * inv;
        if (u < 0.0 || u > 1.0) continue;
        Vec3 q = s.cross(e1);
        double v = dir.dot(q) * inv;
        if (v < 0.0 || u + v > 1.0) continue;
        double t = e2.dot(q) * inv;
        if (t > 1e-6 && t < t_cut) return true;
    }
    return false;
}

std::string pose_tag(PoseKind pose) {
    switch (pose) {
        case PoseKind::Frontal: return "frontal";
        case PoseKind::LateralLeft: return "lateral_left";
        default: return "lateral_right";
    }
}

}  // namespace

Vec3 SyntheticSubject::gt_facial_landmark(const std::string& cranial) const {
    auto c = cranial_landmarks.find(cranial);
    auto st = soft_tissue_vectors.find(cranial);
    if (c == cranial_landmarks.end() || st == soft_tissue_vectors.end())
        throw MissingLandmark("no ground-truth landmark: " + cranial);
    return c->second + st->second;
}

SkullInput SyntheticSubject::skull_input() const {
    SkullInput s;
    s.subject_id = subject_id;
    s.mesh = skull_mesh;
    s.cranial_landmarks = cranial_landmarks;
    s.cone_specs = cone_specs;
    s.frankfurt_normal = frankfurt_normal;
    s.landmark_order = canonical_landmark_order();
    return s;
}

SyntheticSubject generate_subject(uint64_t seed, const MorphologyParams& params,
                                  const std::string& subject_id) {
    if (params.global_scale <= 0.0 || params.mesh_rings < 8 || params.mesh_segments < 8)
        throw InvalidMorphology("non-positive scale or too coarse mesh");
    for (const auto& name : canonical_landmark_order()) {
        auto it = params.depth_table.find(name);
        if (it == params.depth_table.end())
            throw InvalidMorphology("depth table missing landmark: " + name);
        if (it->second.min_mm <= 0.0 || it->second.max_mm < it->second.min_mm)
            throw InvalidMorphology("bad depth interval for " + name);
    }

    Rng rng(mix_seed(seed, 1));

    SyntheticSubject subject;
    subject.subject_id = subject_id.empty() ? "subj_" + std::to_string(seed) : subject_id;
    subject.frankfurt_normal = Vec3::UnitZ();

    RadialShape shape;
    double scale = params.global_scale * (1.0 + rng.uniform(-0.05, 0.05));
    shape.semi_axes = Vec3(72.0 * scale * (1.0 + rng.uniform(-0.04, 0.04)),
                           92.0 * scale * (1.0 + rng.uniform(-0.04, 0.04)),
                           95.0 * scale * (1.0 + rng.uniform(-0.04, 0.04)));
    for (double& c : shape.sym) c = rng.uniform(-0.03, 0.03) * params.shape_variation;
    for (double& c : shape.asym) c = rng.uniform(-0.03, 0.03);
    shape.asym_weight = params.asymmetry;
    shape.jaw = rng.uniform(0.10, 0.22);

    const double dir_jitter = 0.02 * params.shape_variation;
    auto place = [&](const TemplateEntry& entry, std::map<std::string, Vec3>& dirs_out) {
        Vec3 base = entry.dir.normalized();
        if (!entry.bilateral) {
            dirs_out[entry.name] = jitter_midline(base, rng, dir_jitter);
            return;
        }
        Vec3 d(rng.uniform(-dir_jitter, dir_jitter), rng.uniform(-dir_jitter, dir_jitter),
               rng.uniform(-dir_jitter, dir_jitter));
        Vec3 al(rng.uniform(-dir_jitter, dir_jitter), rng.uniform(-dir_jitter, dir_jitter),
                rng.uniform(-dir_jitter, dir_jitter));
        Vec3 ar(rng.uniform(-dir_jitter, dir_jitter), rng.uniform(-dir_jitter, dir_jitter),
                rng.uniform(-dir_jitter, dir_jitter));
        dirs_out[std::string(entry.name) + "_l"] =
            (base + d + params.asymmetry * al).normalized();
        dirs_out[std::string(entry.name) + "_r"] =
            (mirror_x(base) + mirror_x(d) + params.asymmetry * ar).normalized();
    };

    std::map<std::string, Vec3> landmark_dirs;
    for (const auto& e : kTemplate) place(e, landmark_dirs);
    std::map<std::string, Vec3> skull_extra_dirs, face_extra_dirs;
    for (const auto& e : kSkullExtras) place(e, skull_extra_dirs);
    for (const auto& e : kFaceExtras) place(e, face_extra_dirs);

    // Soft-tissue depths: uniform in the central 70% of the population
    // interval, right members coupled to left at 0.9.
    std::map<std::string, double> depth_unit;
    std::map<std::string, const std::string*> right_of;
    for (const auto& pr : bilateral_pairs()) right_of[pr.second] = &pr.first;
    for (const auto& name : canonical_landmark_order()) {
        if (right_of.count(name)) continue;
        depth_unit[name] = rng.uniform(0.15, 0.85);
    }
    for (const auto& name : canonical_landmark_order()) {
        auto it = right_of.find(name);
        if (it == right_of.end()) continue;
        depth_unit[name] = 0.9 * depth_unit[*it->second] + 0.1 * rng.uniform(0.15, 0.85);
    }

    ThicknessField thickness;
    for (const auto& name : canonical_landmark_order()) {
        const Vec3& d = landmark_dirs.at(name);
        const DepthRange& range = params.depth_table.at(name);
        double t = range.min_mm + depth_unit.at(name) * (range.max_mm - range.min_mm);
        Vec3 c = d * shape.radius(d);
        subject.cranial_landmarks[name] = c;
        subject.soft_tissue_vectors[name] = t * d;
        ConeSpec cone;
        cone.landmark_name = name;
        cone.apex = c;
        cone.axis = d;
        cone.depth_min = range.min_mm;
        cone.depth_max = range.max_mm;
        cone.aperture_max_deg = params.aperture_max_deg;
        cone.validate();
        subject.cone_specs[name] = cone;
        thickness.dirs.push_back(d);
        thickness.depths.push_back(t);
    }
    for (const auto& [name, d] : skull_extra_dirs)
        subject.cranial_landmarks[name] = d * shape.radius(d);
    for (const auto& [name, d] : face_extra_dirs)
        subject.face_points[name] = d * (shape.radius(d) + thickness.at(d));

    subject.skull_mesh = radial_mesh(shape, nullptr, params.mesh_rings, params.mesh_segments);
    subject.face_mesh = radial_mesh(shape, &thickness, params.mesh_rings, params.mesh_segments);
    return subject;
}

CaseBundle render_case(const SyntheticSubject& subject, PoseKind pose, const CameraParams& params,
                       uint64_t seed, const std::string& case_id) {
    Rng rng(mix_seed(seed, 2));

    double head_radius = 0.0;
    for (const auto& v : subject.face_mesh.vertices)
        head_radius = std::max(head_radius, v.norm());
    const double head_diam = 2.0 * head_radius;
    const double short_side = std::min(params.width, params.height);

    double scd = rng.uniform(params.scd_min, params.scd_max);
    // The shortest distance at which the minimum focal still fits the head.
    double scd_floor = params.focal_min * head_diam / (params.fit_fraction * short_side);
    scd = std::max(scd, scd_floor * 1.02);
    double f_hi = std::min(params.focal_max, params.fit_fraction * short_side * scd / head_diam);
    double focal = rng.uniform(params.focal_min, std::max(params.focal_min, f_hi));

    Vec3 base_dir;
    switch (pose) {
        case PoseKind::Frontal: base_dir = Vec3::UnitY(); break;
        case PoseKind::LateralLeft: base_dir = Vec3::UnitX(); break;
        default: base_dir = -Vec3::UnitX(); break;
    }
    double az = rng.uniform(-params.pose_jitter_deg, params.pose_jitter_deg);
    double el = rng.uniform(-params.pose_jitter_deg, params.pose_jitter_deg);
    Vec3 dir = rotation_about_axis(Vec3::UnitZ(), az) * base_dir;
    Vec3 horiz = Vec3::UnitZ().cross(dir).normalized();
    dir = rotation_about_axis(horiz, el) * dir;

    CaseBundle bundle;
    bundle.subject_id = subject.subject_id;
    bundle.pose = pose;
    bundle.case_id = case_id.empty()
                         ? subject.subject_id + "_" + pose_tag(pose) + "_" + std::to_string(seed)
                         : case_id;

    Vec3 eye = scd * dir;
    bundle.camera_gt.rotation = look_at_rotation(eye, Vec3::Zero(), Vec3::UnitZ());
    bundle.camera_gt.translation = -(bundle.camera_gt.rotation * eye);
    bundle.camera_gt.focal = focal;
    bundle.camera_gt.principal_point = Vec2(params.width * 0.5, params.height * 0.5);
    bundle.camera_gt.width = params.width;
    bundle.camera_gt.height = params.height;

    if (pose == PoseKind::Frontal)
        bundle.looking = Looking::Frontal;
    else
        bundle.looking =
            (bundle.camera_gt.rotation * Vec3::UnitY()).x() > 0.0 ? Looking::Right : Looking::Left;

    // Exact projections and visibility for the correspondence set.
    int visible_count = 0;
    Vec3 visible_centroid = Vec3::Zero();
    for (const auto& name : canonical_landmark_order()) {
        Vec3 f3 = subject.gt_facial_landmark(name);
        bundle.gt_facial_landmarks_3d[name] = f3;
        bundle.facial_landmarks_2d[facial_name_for(name)] = project(bundle.camera_gt, f3);
        const Vec3& normal = subject.cone_specs.at(name).axis;
        Vec3 toward_eye = (eye - f3).normalized();
        bool visible = normal.dot(toward_eye) > kGrazingDot &&
                       !segment_blocked(subject.face_mesh, eye, f3);
        bundle.visibility[name] = visible;
        if (visible) {
            ++visible_count;
            visible_centroid += f3;
        }
    }
    if (visible_count < 6) throw TooFewVisible("fewer than 6 visible landmarks");
    visible_centroid /= static_cast<double>(visible_count);
    bundle.scd_gt_mm = (eye - visible_centroid).norm();

    bundle.intervals.fx_min = focal * (1.0 - params.fx_band);
    bundle.intervals.fx_max = focal * (1.0 + params.fx_band);
    bundle.intervals.scd_min = bundle.scd_gt_mm * (1.0 - params.scd_band);
    bundle.intervals.scd_max = bundle.scd_gt_mm * (1.0 + params.scd_band);
    bundle.intervals.beta_tol_deg = params.beta_tol_deg;
    bundle.intervals.reference_pose = bundle.camera_gt.rotation;
    bundle.intervals.fx_hard_limit = params.fx_hard_limit;
    bundle.intervals.c_infinity = params.c_infinity;

    bundle.face_mask = rasterize_silhouette(subject.face_mesh, bundle.camera_gt);

    // Facial contour: chin-jaw line for frontal, forehead profile for
    // lateral, cut on the face mesh with face-side references.
    if (pose == PoseKind::Frontal) {
        TriMesh region = segment_region(subject.face_mesh, RegionKind::ChinJaw,
                                        subject.face_points, subject.frankfurt_normal);
        bundle.facial_curve =
            refine_curve(detect_curve(region, bundle.camera_gt, RegionKind::ChinJaw));
    } else {
        std::map<std::string, Vec3> refs{
            {"glabella", subject.gt_facial_landmark("glabella")},
            {"metopion", subject.gt_facial_landmark("metopion")}};
        TriMesh region = segment_region(subject.face_mesh, RegionKind::Forehead, refs,
                                        subject.frankfurt_normal);
        auto span = std::make_pair(project(bundle.camera_gt, refs.at("glabella")).y(),
                                   project(bundle.camera_gt, refs.at("metopion")).y());
        bundle.facial_curve = refine_curve(
            detect_curve(region, bundle.camera_gt, RegionKind::Forehead, bundle.looking, span));
    }

    bundle.gt_genotype.landmark_order = canonical_landmark_order();
    for (const auto& name : canonical_landmark_order()) {
        auto p = encode_cone(subject.cone_specs.at(name), subject.soft_tissue_vectors.at(name));
        bundle.gt_genotype.values.insert(bundle.gt_genotype.values.end(), p.begin(), p.end());
    }

    bundle.noise.direction_max_deg = subject.direction_noise_deg;
    bundle.noise.direction_angles_deg = subject.direction_angles_deg;
    bundle.noise.truth_inside_cone = subject.truth_inside_cone;

    bundle.skull = subject.skull_input();
    return bundle;
}

CaseBundle perturb_landmarks(const CaseBundle& bundle, double magnitude_px, uint64_t seed) {
    CaseBundle out = bundle;
    Rng rng(mix_seed(seed, 3));
    out.noise.landmark_magnitude_px = magnitude_px;
    for (const auto& name : canonical_landmark_order()) {
        auto vis = out.visibility.find(name);
        if (vis == out.visibility.end() || !vis->second) continue;
        Vec2 offset(rng.uniform(-magnitude_px, magnitude_px),
                    rng.uniform(-magnitude_px, magnitude_px));
        out.facial_landmarks_2d.at(facial_name_for(name)) += offset;
        out.noise.landmark_offsets[name] = offset;
    }
    return out;
}

SyntheticSubject perturb_st_directions(const SyntheticSubject& subject, double max_angle_deg,
                                       uint64_t seed) {
    SyntheticSubject out = subject;
    Rng rng(mix_seed(seed, 4));
    out.direction_noise_deg = max_angle_deg;
    for (const auto& name : canonical_landmark_order()) {
        ConeSpec& cone = out.cone_specs.at(name);
        double angle = rng.uniform(0.0, max_angle_deg);
        double phi = rng.uniform(0.0, 2.0 * kPi);
        Vec3 u = azimuth_reference(cone.axis);
        Vec3 v = cone.axis.cross(u);
        Vec3 perp = std::cos(phi) * u + std::sin(phi) * v;
        cone.axis = (rotation_about_axis(perp, angle) * cone.axis).normalized();
        out.direction_angles_deg[name] = angle;

        const Vec3& st = out.soft_tissue_vectors.at(name);
        double depth = st.norm();
        double off_axis = rad2deg(std::acos(std::clamp(st.dot(cone.axis) / depth, -1.0, 1.0)));
        out.truth_inside_cone[name] = off_axis <= cone.aperture_max_deg &&
                                      depth >= cone.depth_min && depth <= cone.depth_max;
    }
    return out;
}

}  // namespace sfo
