#include "sfo/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sfo/landmarks.hpp"

namespace sfo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json vec2_to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec2 vec2_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ManifestError("expected a 2-vector");
    return {j[0].get<double>(), j[1].get<double>()};
}

Vec3 vec3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ManifestError("expected a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json mat3_to_json(const Mat3& m) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
    return rows;
}

Mat3 mat3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ManifestError("expected a 3x3 matrix");
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        if (!j[r].is_array() || j[r].size() != 3) throw ManifestError("expected a 3x3 matrix");
        for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

json camera_to_json(const Pinhole& cam) {
    return {{"rotation", mat3_to_json(cam.rotation)},
            {"translation", vec3_to_json(cam.translation)},
            {"focal", cam.focal},
            {"principal_point", vec2_to_json(cam.principal_point)},
            {"width", cam.width},
            {"height", cam.height}};
}

Pinhole camera_from_json(const json& j) {
    Pinhole cam;
    cam.rotation = mat3_from_json(j.at("rotation"));
    cam.translation = vec3_from_json(j.at("translation"));
    cam.focal = j.at("focal").get<double>();
    cam.principal_point = vec2_from_json(j.at("principal_point"));
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    return cam;
}

json cone_to_json(const ConeSpec& c) {
    return {{"apex", vec3_to_json(c.apex)},     {"axis", vec3_to_json(c.axis)},
            {"depth_min", c.depth_min},         {"depth_max", c.depth_max},
            {"aperture_max_deg", c.aperture_max_deg}};
}

ConeSpec cone_from_json(const std::string& name, const json& j) {
    ConeSpec c;
    c.landmark_name = name;
    c.apex = vec3_from_json(j.at("apex"));
    c.axis = vec3_from_json(j.at("axis"));
    c.depth_min = j.at("depth_min").get<double>();
    c.depth_max = j.at("depth_max").get<double>();
    c.aperture_max_deg = j.at("aperture_max_deg").get<double>();
    return c;
}

json genotype_to_json(const Genotype& g) {
    return {{"values", g.values}, {"landmark_order", g.landmark_order}};
}

Genotype genotype_from_json(const json& j) {
    Genotype g;
    g.values = j.at("values").get<std::vector<double>>();
    g.landmark_order = j.at("landmark_order").get<std::vector<std::string>>();
    return g;
}

json skull_to_json(const SkullInput& skull, const std::string& mesh_file,
                   const std::string& mesh_checksum) {
    json cones = json::object();
    for (const auto& [name, cone] : skull.cone_specs) cones[name] = cone_to_json(cone);
    json landmarks = json::object();
    for (const auto& [name, p] : skull.cranial_landmarks) landmarks[name] = vec3_to_json(p);
    return {{"format_version", kFormatVersion},
            {"subject_id", skull.subject_id},
            {"mesh", mesh_file},
            {"mesh_checksum", mesh_checksum},
            {"cranial_landmarks", landmarks},
            {"cone_specs", cones},
            {"frankfurt_normal", vec3_to_json(skull.frankfurt_normal)},
            {"landmark_order", skull.landmark_order}};
}

SkullInput skull_from_json(const json& j, const std::string& dir) {
    if (j.at("format_version").get<int>() != kFormatVersion)
        throw ManifestError("unsupported skull format version");
    SkullInput skull;
    skull.subject_id = j.at("subject_id").get<std::string>();
    std::string mesh_file = j.at("mesh").get<std::string>();
    std::string obj = read_text_file((fs::path(dir) / mesh_file).string());
    if (fnv1a_hex(obj) != j.at("mesh_checksum").get<std::string>())
        throw ManifestError("checksum mismatch for " + mesh_file);
    skull.mesh = mesh_from_obj(obj);
    for (const auto& [name, p] : j.at("cranial_landmarks").items())
        skull.cranial_landmarks[name] = vec3_from_json(p);
    for (const auto& [name, cone] : j.at("cone_specs").items())
        skull.cone_specs[name] = cone_from_json(name, cone);
    skull.frankfurt_normal = vec3_from_json(j.at("frankfurt_normal"));
    skull.landmark_order = j.at("landmark_order").get<std::vector<std::string>>();
    return skull;
}

json parse_json(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ManifestError("malformed JSON in " + what);
    return j;
}

void put_pixel(std::vector<std::array<unsigned char, 3>>& img, int w, int h, int x, int y,
               unsigned char r, unsigned char g, unsigned char b) {
    if (x < 0 || x >= w || y < 0 || y >= h) return;
    img[static_cast<std::size_t>(y) * w + x] = {r, g, b};
}

}  // namespace

// ---- low-level file helpers -------------------------------------------------

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    if (in.bad()) throw IoError("read failure: " + path);
    return out.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
    fs::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path(), ec);
        if (ec) throw IoError("cannot create directory: " + target.parent_path().string());
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failure: " + tmp.string());
    }
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path);
}

std::string fnv1a_hex(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---- text formats -----------------------------------------------------------

std::string mesh_to_obj(const TriMesh& mesh) {
    std::ostringstream out;
    for (const auto& v : mesh.vertices)
        out << "v " << fmt_double(v.x()) << ' ' << fmt_double(v.y()) << ' ' << fmt_double(v.z())
            << '\n';
    for (const auto& f : mesh.faces)
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    return out.str();
}

TriMesh mesh_from_obj(const std::string& text) {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::istringstream in(text);
    std::string line;
    auto face_index = [](const std::string& token) {
        // accept "i", "i/j", "i/j/k"
        std::size_t slash = token.find('/');
        std::string head = slash == std::string::npos ? token : token.substr(0, slash);
        try {
            return std::stoi(head);
        } catch (const std::exception&) {
            throw ManifestError("malformed face index: " + token);
        }
    };
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) throw ManifestError("malformed vertex line: " + line);
            vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::string a, b, c;
            if (!(ls >> a >> b >> c)) throw ManifestError("malformed face line: " + line);
            faces.push_back({face_index(a) - 1, face_index(b) - 1, face_index(c) - 1});
        }
    }
    return TriMesh::create(std::move(vertices), std::move(faces));
}

std::string mask_to_pgm(const BinaryMask& mask) {
    std::ostringstream out;
    out << "P2\n" << mask.width << ' ' << mask.height << "\n1\n";
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (x) out << ' ';
            out << (mask.at(x, y) ? 1 : 0);
        }
        out << '\n';
    }
    return out.str();
}

BinaryMask mask_from_pgm(const std::string& text) {
    std::istringstream in(text);
    auto next_token = [&]() {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw ManifestError("truncated PGM data");
    };
    if (next_token() != "P2") throw ManifestError("not a plain PGM (P2) file");
    int w, h, maxval;
    try {
        w = std::stoi(next_token());
        h = std::stoi(next_token());
        maxval = std::stoi(next_token());
    } catch (const std::exception&) {
        throw ManifestError("malformed PGM header");
    }
    if (w <= 0 || h <= 0 || maxval != 1) throw ManifestError("unsupported PGM geometry");
    BinaryMask mask(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int v;
            try {
                v = std::stoi(next_token());
            } catch (const std::exception&) {
                throw ManifestError("malformed PGM sample");
            }
            if (v) mask.set(x, y, true);
        }
    return mask;
}

std::string curve_to_text(const PixelCurve& curve) {
    std::ostringstream out;
    for (const auto& p : curve.points)
        out << fmt_double(p.x()) << ' ' << fmt_double(p.y()) << '\n';
    return out.str();
}

PixelCurve curve_from_text(const std::string& text) {
    PixelCurve curve;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        double u, v;
        if (!(ls >> u >> v)) throw ManifestError("malformed curve line: " + line);
        curve.points.emplace_back(u, v);
    }
    return curve;
}

// ---- case bundles -----------------------------------------------------------

std::string pose_to_string(PoseKind pose) {
    switch (pose) {
        case PoseKind::Frontal: return "frontal";
        case PoseKind::LateralLeft: return "lateral_left";
        default: return "lateral_right";
    }
}

PoseKind pose_from_string(const std::string& s) {
    if (s == "frontal") return PoseKind::Frontal;
    if (s == "lateral_left") return PoseKind::LateralLeft;
    if (s == "lateral_right") return PoseKind::LateralRight;
    throw ManifestError("unknown pose: " + s);
}

namespace {

std::string looking_to_string(Looking l) {
    switch (l) {
        case Looking::Frontal: return "frontal";
        case Looking::Left: return "left";
        default: return "right";
    }
}

Looking looking_from_string(const std::string& s) {
    if (s == "frontal") return Looking::Frontal;
    if (s == "left") return Looking::Left;
    if (s == "right") return Looking::Right;
    throw ManifestError("unknown looking direction: " + s);
}

}  // namespace

void save_bundle(const CaseBundle& bundle, const std::string& dir) {
    const std::string obj = mesh_to_obj(bundle.skull.mesh);
    const bool has_mask = bundle.face_mask.width > 0 && bundle.face_mask.height > 0;
    const bool has_curve = !bundle.facial_curve.empty();
    const std::string pgm = has_mask ? mask_to_pgm(bundle.face_mask) : std::string();
    const std::string curve = curve_to_text(bundle.facial_curve);
    const std::string skull =
        skull_to_json(bundle.skull, "skull.obj", fnv1a_hex(obj)).dump(2) + "\n";

    json manifest;
    manifest["format_version"] = kFormatVersion;
    manifest["case_id"] = bundle.case_id;
    manifest["subject_id"] = bundle.subject_id;
    manifest["pose"] = pose_to_string(bundle.pose);
    manifest["looking"] = looking_to_string(bundle.looking);
    manifest["camera_gt"] = camera_to_json(bundle.camera_gt);
    manifest["scd_gt_mm"] = bundle.scd_gt_mm;

    json lm2 = json::object();
    for (const auto& [name, p] : bundle.facial_landmarks_2d) lm2[name] = vec2_to_json(p);
    manifest["facial_landmarks_2d"] = lm2;
    json vis = json::object();
    for (const auto& [name, v] : bundle.visibility) vis[name] = v;
    manifest["visibility"] = vis;
    json gt3 = json::object();
    for (const auto& [name, p] : bundle.gt_facial_landmarks_3d) gt3[name] = vec3_to_json(p);
    manifest["gt_facial_landmarks_3d"] = gt3;

    manifest["gt_genotype"] = genotype_to_json(bundle.gt_genotype);
    manifest["intervals"] = {{"fx_min", bundle.intervals.fx_min},
                             {"fx_max", bundle.intervals.fx_max},
                             {"scd_min", bundle.intervals.scd_min},
                             {"scd_max", bundle.intervals.scd_max},
                             {"beta_tol_deg", bundle.intervals.beta_tol_deg},
                             {"reference_pose", mat3_to_json(bundle.intervals.reference_pose)},
                             {"fx_hard_limit", bundle.intervals.fx_hard_limit},
                             {"c_infinity", bundle.intervals.c_infinity}};

    json offsets = json::object();
    for (const auto& [name, off] : bundle.noise.landmark_offsets)
        offsets[name] = vec2_to_json(off);
    json angles = json::object();
    for (const auto& [name, a] : bundle.noise.direction_angles_deg) angles[name] = a;
    json inside = json::object();
    for (const auto& [name, b] : bundle.noise.truth_inside_cone) inside[name] = b;
    manifest["noise"] = {{"landmark_magnitude_px", bundle.noise.landmark_magnitude_px},
                         {"landmark_offsets", offsets},
                         {"direction_max_deg", bundle.noise.direction_max_deg},
                         {"direction_angles_deg", angles},
                         {"truth_inside_cone", inside}};

    json files = {{"skull_mesh", "skull.obj"}, {"skull_input", "skull.json"}};
    json checksums = {{"skull.obj", fnv1a_hex(obj)}, {"skull.json", fnv1a_hex(skull)}};
    if (has_mask) {
        files["face_mask"] = "face_mask.pgm";
        checksums["face_mask.pgm"] = fnv1a_hex(pgm);
    }
    if (has_curve) {
        files["facial_curve"] = "facial_curve.txt";
        checksums["facial_curve.txt"] = fnv1a_hex(curve);
    }
    manifest["files"] = files;
    manifest["checksums"] = checksums;

    fs::path base(dir);
    write_text_atomic((base / "skull.obj").string(), obj);
    write_text_atomic((base / "skull.json").string(), skull);
    if (has_mask) write_text_atomic((base / "face_mask.pgm").string(), pgm);
    if (has_curve) write_text_atomic((base / "facial_curve.txt").string(), curve);
    write_text_atomic((base / "manifest.json").string(), manifest.dump(2) + "\n");
}

CaseBundle load_bundle(const std::string& dir) {
    fs::path base(dir);
    json manifest = parse_json(read_text_file((base / "manifest.json").string()), "manifest");
    if (!manifest.contains("format_version") ||
        manifest["format_version"].get<int>() != kFormatVersion)
        throw ManifestError("unsupported bundle format version");

    std::map<std::string, std::string> contents;
    for (const auto& [file, checksum] : manifest.at("checksums").items()) {
        std::string data = read_text_file((base / file).string());
        if (fnv1a_hex(data) != checksum.get<std::string>())
            throw ManifestError("checksum mismatch for " + file);
        contents[file] = std::move(data);
    }

    CaseBundle bundle;
    bundle.case_id = manifest.at("case_id").get<std::string>();
    bundle.subject_id = manifest.at("subject_id").get<std::string>();
    bundle.pose = pose_from_string(manifest.at("pose").get<std::string>());
    bundle.looking = looking_from_string(manifest.at("looking").get<std::string>());
    bundle.camera_gt = camera_from_json(manifest.at("camera_gt"));
    bundle.scd_gt_mm = manifest.at("scd_gt_mm").get<double>();

    for (const auto& [name, p] : manifest.at("facial_landmarks_2d").items())
        bundle.facial_landmarks_2d[name] = vec2_from_json(p);
    for (const auto& [name, v] : manifest.at("visibility").items())
        bundle.visibility[name] = v.get<bool>();
    for (const auto& [name, p] : manifest.at("gt_facial_landmarks_3d").items())
        bundle.gt_facial_landmarks_3d[name] = vec3_from_json(p);

    bundle.gt_genotype = genotype_from_json(manifest.at("gt_genotype"));
    const json& ap = manifest.at("intervals");
    bundle.intervals.fx_min = ap.at("fx_min").get<double>();
    bundle.intervals.fx_max = ap.at("fx_max").get<double>();
    bundle.intervals.scd_min = ap.at("scd_min").get<double>();
    bundle.intervals.scd_max = ap.at("scd_max").get<double>();
    bundle.intervals.beta_tol_deg = ap.at("beta_tol_deg").get<double>();
    bundle.intervals.reference_pose = mat3_from_json(ap.at("reference_pose"));
    bundle.intervals.fx_hard_limit = ap.at("fx_hard_limit").get<double>();
    bundle.intervals.c_infinity = ap.at("c_infinity").get<double>();

    const json& noise = manifest.at("noise");
    bundle.noise.landmark_magnitude_px = noise.at("landmark_magnitude_px").get<double>();
    for (const auto& [name, off] : noise.at("landmark_offsets").items())
        bundle.noise.landmark_offsets[name] = vec2_from_json(off);
    bundle.noise.direction_max_deg = noise.at("direction_max_deg").get<double>();
    for (const auto& [name, a] : noise.at("direction_angles_deg").items())
        bundle.noise.direction_angles_deg[name] = a.get<double>();
    for (const auto& [name, b] : noise.at("truth_inside_cone").items())
        bundle.noise.truth_inside_cone[name] = b.get<bool>();

    // The mask and curve are optional on disk; scoring modes that need a
    // missing one report it at the call site.
    if (auto it = contents.find("face_mask.pgm"); it != contents.end())
        bundle.face_mask = mask_from_pgm(it->second);
    if (auto it = contents.find("facial_curve.txt"); it != contents.end())
        bundle.facial_curve = curve_from_text(it->second);
    bundle.skull = skull_from_json(parse_json(contents.at("skull.json"), "skull.json"), dir);
    return bundle;
}

void save_skull(const SkullInput& skull, const std::string& dir) {
    fs::path base(dir);
    const std::string obj = mesh_to_obj(skull.mesh);
    write_text_atomic((base / "skull.obj").string(), obj);
    write_text_atomic((base / "skull.json").string(),
                      skull_to_json(skull, "skull.obj", fnv1a_hex(obj)).dump(2) + "\n");
}

SkullInput load_skull(const std::string& dir) {
    fs::path base(dir);
    json j = parse_json(read_text_file((base / "skull.json").string()), "skull.json");
    return skull_from_json(j, dir);
}

// ---- configuration ----------------------------------------------------------

std::string method_config_to_json(const MethodConfig& method) {
    json j;
    j["format_version"] = kFormatVersion;
    j["name"] = method.name;
    j["mode"] = method.mode == MethodMode::Evolve ? "evolve" : "fixed_vectors";
    j["threads"] = method.threads;
    j["de"] = {{"population_size", method.de.population_size},
               {"differential_weight", method.de.differential_weight},
               {"crossover_rate", method.de.crossover_rate},
               {"max_generations", method.de.max_generations},
               {"max_seconds", method.de.max_seconds},
               {"seed", method.de.seed}};
    j["fitness"] = {{"use_skof", method.fitness.use_skof},
                    {"use_pll", method.fitness.use_pll},
                    {"raster_scale", method.fitness.raster_scale}};
    return j.dump(2) + "\n";
}

MethodConfig method_config_from_json(const std::string& text) {
    json j = parse_json(text, "method config");
    if (!j.contains("format_version") || j["format_version"].get<int>() != kFormatVersion)
        throw ManifestError("unsupported config format version");
    MethodConfig m;
    m.name = j.value("name", m.name);
    std::string mode = j.value("mode", std::string("evolve"));
    if (mode == "evolve")
        m.mode = MethodMode::Evolve;
    else if (mode == "fixed_vectors")
        m.mode = MethodMode::FixedVectors;
    else
        throw ManifestError("unknown method mode: " + mode);
    m.threads = j.value("threads", m.threads);
    if (j.contains("de")) {
        const json& de = j["de"];
        m.de.population_size = de.value("population_size", m.de.population_size);
        m.de.differential_weight = de.value("differential_weight", m.de.differential_weight);
        m.de.crossover_rate = de.value("crossover_rate", m.de.crossover_rate);
        m.de.max_generations = de.value("max_generations", m.de.max_generations);
        m.de.max_seconds = de.value("max_seconds", m.de.max_seconds);
        m.de.seed = de.value("seed", m.de.seed);
    }
    if (j.contains("fitness")) {
        const json& f = j["fitness"];
        m.fitness.use_skof = f.value("use_skof", m.fitness.use_skof);
        m.fitness.use_pll = f.value("use_pll", m.fitness.use_pll);
        m.fitness.raster_scale = f.value("raster_scale", m.fitness.raster_scale);
    }
    return m;
}

std::map<std::string, DepthRange> depth_table_from_json(const std::string& text) {
    json j = parse_json(text, "depth table");
    if (!j.contains("format_version") || j["format_version"].get<int>() != kFormatVersion)
        throw ManifestError("unsupported depth table format version");
    std::map<std::string, DepthRange> table;
    for (const auto& [name, range] : j.at("depths").items()) {
        if (!range.is_array() || range.size() != 2)
            throw ManifestError("depth entry must be [min_mm, max_mm]: " + name);
        table[name] = {range[0].get<double>(), range[1].get<double>()};
    }
    return table;
}

std::string depth_table_to_json(const std::map<std::string, DepthRange>& table) {
    json depths = json::object();
    for (const auto& [name, range] : table)
        depths[name] = json::array({range.min_mm, range.max_mm});
    json j = {{"format_version", kFormatVersion}, {"depths", depths}};
    return j.dump(2) + "\n";
}

std::string default_data_dir() {
    if (const char* env = std::getenv("SFO_DATA_DIR"); env && *env) return env;
#ifdef SFO_DEFAULT_DATA_DIR
    return SFO_DEFAULT_DATA_DIR;
#else
    return "data";
#endif
}

std::map<std::string, DepthRange> load_population_depths() {
    fs::path path = fs::path(default_data_dir()) / "population_depths.json";
    return depth_table_from_json(read_text_file(path.string()));
}

// ---- reports ----------------------------------------------------------------

std::string overlay_to_ppm(const BinaryMask& face, const TriMesh& skull_mesh,
                           const Pinhole& camera, const std::vector<Vec2>& observed,
                           const std::vector<Vec2>& projected) {
    const int w = face.width, h = face.height;
    std::vector<std::array<unsigned char, 3>> img(static_cast<std::size_t>(w) * h,
                                                  {16, 16, 16});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (face.at(x, y)) put_pixel(img, w, h, x, y, 120, 120, 120);

    BinaryMask skull = rasterize_silhouette(skull_mesh, camera);
    if (skull.width != w || skull.height != h)
        throw DimensionMismatch("overlay camera resolution differs from the face mask");
    auto boundary = [&](int x, int y) {
        if (!skull.at(x, y)) return false;
        if (x == 0 || y == 0 || x == w - 1 || y == h - 1) return true;
        return !skull.at(x - 1, y) || !skull.at(x + 1, y) || !skull.at(x, y - 1) ||
               !skull.at(x, y + 1);
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (boundary(x, y)) put_pixel(img, w, h, x, y, 255, 255, 255);

    for (const auto& p : observed) {
        int cx = static_cast<int>(std::lround(p.x())), cy = static_cast<int>(std::lround(p.y()));
        for (int dy = -4; dy <= 4; ++dy)
            for (int dx = -4; dx <= 4; ++dx) {
                double r = std::sqrt(double(dx * dx + dy * dy));
                if (std::abs(r - 3.0) <= 0.7)
                    put_pixel(img, w, h, cx + dx, cy + dy, 60, 90, 255);
            }
    }
    for (const auto& p : projected) {
        int cx = static_cast<int>(std::lround(p.x())), cy = static_cast<int>(std::lround(p.y()));
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
                put_pixel(img, w, h, cx + dx, cy + dy, 40, 220, 70);
    }

    std::ostringstream out;
    out << "P3\n" << w << ' ' << h << "\n255\n";
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto& px = img[static_cast<std::size_t>(y) * w + x];
            if (x) out << ' ';
            out << int(px[0]) << ' ' << int(px[1]) << ' ' << int(px[2]);
        }
        out << '\n';
    }
    return out.str();
}

namespace {

std::string fmt_metric(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string summary_to_table(const std::vector<SuiteSummaryRow>& rows) {
    std::ostringstream out;
    out << "method\tprofile\tmean_rank_frontal\tmean_rank_lateral\tmean_bpe_frontal_mm\t"
           "mean_bpe_lateral_mm\tmean_time_s\tworst_implausible_pct\n";
    for (const auto& r : rows)
        out << r.method << '\t' << r.profile << '\t' << fmt_metric(r.mean_rank_frontal) << '\t'
            << fmt_metric(r.mean_rank_lateral) << '\t' << fmt_metric(r.mean_bpe_frontal_mm)
            << '\t' << fmt_metric(r.mean_bpe_lateral_mm) << '\t' << fmt_metric(r.mean_time_s)
            << '\t' << fmt_metric(r.worst_implausible_pct) << '\n';
    return out.str();
}

std::string alignments_to_table(const std::vector<AlignmentRecord>& rows) {
    std::ostringstream out;
    out << "method\tcase_id\tsubject_id\tskull_id\tpose\tseed\tdirection_set\tscore\t"
           "elapsed_s\tfailed\n";
    for (const auto& r : rows)
        out << r.method << '\t' << r.case_id << '\t' << r.subject_id << '\t' << r.skull_id << '\t'
            << pose_to_string(r.pose) << '\t' << r.seed << '\t' << r.direction_set << '\t'
            << fmt_metric(r.score) << '\t' << fmt_metric(r.elapsed_s) << '\t' << (r.failed ? 1 : 0)
            << '\n';
    return out.str();
}

std::string cases_to_table(const std::vector<CaseRecord>& rows) {
    std::ostringstream out;
    out << "method\tcase_id\tsubject_id\tpose\tseed\tdirection_set\trank\tbpe_mm\ttime_s\t"
           "implausible_pct\timplausible\tfailed\n";
    for (const auto& r : rows)
        out << r.method << '\t' << r.case_id << '\t' << r.subject_id << '\t'
            << pose_to_string(r.pose) << '\t' << r.seed << '\t' << r.direction_set << '\t'
            << r.rank << '\t' << fmt_metric(r.bpe) << '\t' << fmt_metric(r.time_s) << '\t'
            << fmt_metric(r.implausible_pct) << '\t' << (r.implausible ? 1 : 0) << '\t'
            << (r.failed ? 1 : 0) << '\n';
    return out.str();
}

std::vector<CaseRecord> cases_from_table(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("method\tcase_id", 0) != 0)
        throw ManifestError("not a case-record table");
    std::vector<CaseRecord> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            std::size_t tab = line.find('\t', start);
            cols.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (cols.size() != 12) throw ManifestError("malformed case-record row: " + line);
        try {
            CaseRecord r;
            r.method = cols[0];
            r.case_id = cols[1];
            r.subject_id = cols[2];
            r.pose = pose_from_string(cols[3]);
            r.seed = std::stoull(cols[4]);
            r.direction_set = std::stoi(cols[5]);
            r.rank = std::stoi(cols[6]);
            r.bpe = std::stod(cols[7]);
            r.time_s = std::stod(cols[8]);
            r.implausible_pct = std::stod(cols[9]);
            r.implausible = cols[10] == "1";
            r.failed = cols[11] == "1";
            rows.push_back(std::move(r));
        } catch (const std::invalid_argument&) {
            throw ManifestError("malformed case-record row: " + line);
        } catch (const std::out_of_range&) {
            throw ManifestError("malformed case-record row: " + line);
        }
    }
    return rows;
}

}  // namespace sfo
