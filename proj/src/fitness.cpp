#include "sfo/fitness.hpp"

#include <algorithm>
#include <cmath>

#include "sfo/landmarks.hpp"

namespace sfo {

namespace {

double sq(double x) { return x * x; }

Pinhole scaled_camera(const Pinhole& cam, double s, int w, int h) {
    Pinhole out = cam;
    out.focal *= s;
    out.principal_point *= s;
    out.width = w;
    out.height = h;
    return out;
}

// Face mask at reduced resolution: a low-res pixel is set when any covered
// full-res pixel is set. Grows the face by at most one low-res pixel, so a
// skull inside the face never gains spurious outside pixels.
BinaryMask downscale_block_or(const BinaryMask& m, int w, int h) {
    BinaryMask out(w, h);
    for (int y = 0; y < m.height; ++y) {
        int ly = std::min(h - 1, y * h / m.height);
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            int lx = std::min(w - 1, x * w / m.width);
            out.set(lx, ly);
        }
    }
    return out;
}

// Contour term for one candidate camera. Any pipeline failure (projection
// behind the camera, sub-pixel region, missed trim) is scored as the
// maximal penalty rather than an error: such candidates are simply bad.
double contour_term(const ProjectionSolution& sol, const SkullInput& skull,
                    const CaseBundle& photo) {
    try {
        const RegionKind kind = photo.region_kind();
        const TriMesh* region = nullptr;
        TriMesh local;
        if (kind == RegionKind::ChinJaw) {
            if (skull.chin_region) region = &*skull.chin_region;
        } else {
            if (skull.forehead_region) region = &*skull.forehead_region;
        }
        if (!region) {
            local = segment_region(skull.mesh, kind, skull.cranial_landmarks,
                                   skull.frankfurt_normal);
            region = &local;
        }
        std::optional<std::pair<double, double>> v_span;
        if (kind == RegionKind::Forehead) {
            Vec2 g = project(sol.camera, skull.cranial_landmarks.at("glabella"));
            Vec2 m = project(sol.camera, skull.cranial_landmarks.at("metopion"));
            v_span = std::make_pair(g.y(), m.y());
        }
        PixelCurve raw = detect_curve(*region, sol.camera, kind, photo.looking, v_span);
        PixelCurve refined = refine_curve(raw);
        auto [skull_curve, face_curve] = trim_curves(refined, photo.facial_curve);
        CurvePairing pairing = match_curves(skull_curve, face_curve);
        return parallelism_penalty(pairing, kind, photo.looking).total;
    } catch (const Error&) {
        return photo.intervals.c_infinity;
    }
}

// Shared scoring body once correspondences are assembled. `face_at_scale`,
// when given, is the face mask already downscaled to the silhouette
// resolution; otherwise it is recomputed here.
FitnessBreakdown evaluate_core(const std::vector<Correspondence>& corr, const SkullInput& skull,
                               const CaseBundle& photo, const FitnessConfig& config,
                               const BinaryMask* face_at_scale) {
    FitnessBreakdown out;
    const double c_inf = photo.intervals.c_infinity;

    auto fail = [&] {
        out.mse_pix = 0.0;
        out.p_skof = 0.0;
        out.p_pll = 0.0;
        out.p_cam = c_inf;
        out.total = c_inf;
        out.solver_ok = false;
        return out;
    };

    if (corr.size() < 6) return fail();
    try {
        out.solution = solve_pnpf(corr, photo.camera_gt.width, photo.camera_gt.height);
    } catch (const Error&) {
        return fail();
    }
    if (!out.solution.converged) return fail();
    out.solver_ok = true;

    out.p_cam = camera_penalty(out.solution, photo.intervals);
    if (out.p_cam >= c_inf) {
        // Hard interval breach: candidate already carries the maximal
        // penalty, geometric terms are skipped as zero.
        out.mse_pix = 0.0;
        out.p_skof = 0.0;
        out.p_pll = 0.0;
        out.total = out.p_cam;
        return out;
    }

    try {
        std::vector<Vec2> projected(corr.size()), observed(corr.size());
        for (std::size_t i = 0; i < corr.size(); ++i) {
            projected[i] = project(out.solution.camera, corr[i].world);
            observed[i] = corr[i].image;
        }
        out.mse_pix = mse_pix(projected, observed);
    } catch (const Error&) {
        return fail();
    }

    if (config.use_skof) {
        int w = photo.face_mask.width;
        int h = photo.face_mask.height;
        if (config.raster_scale != 1.0) {
            w = std::max(1, static_cast<int>(std::lround(w * config.raster_scale)));
            h = std::max(1, static_cast<int>(std::lround(h * config.raster_scale)));
            double sx = static_cast<double>(w) / photo.face_mask.width;
            BinaryMask skull_mask =
                rasterize_silhouette(skull.mesh, scaled_camera(out.solution.camera, sx, w, h));
            if (face_at_scale)
                out.p_skof = skof_penalty(skull_mask, *face_at_scale);
            else
                out.p_skof = skof_penalty(skull_mask, downscale_block_or(photo.face_mask, w, h));
        } else {
            Pinhole cam = out.solution.camera;
            cam.width = w;
            cam.height = h;
            out.p_skof = skof_penalty(rasterize_silhouette(skull.mesh, cam), photo.face_mask);
        }
    }
    if (config.use_pll) out.p_pll = contour_term(out.solution, skull, photo);

    out.total = out.mse_pix + out.p_cam + out.p_skof + out.p_pll;
    return out;
}

}  // namespace

double mse_pix(const std::vector<Vec2>& projected, const std::vector<Vec2>& observed) {
    if (projected.size() != observed.size() || projected.empty())
        throw LengthMismatch("projected/observed point counts differ or are empty");
    double s = 0.0;
    for (std::size_t i = 0; i < projected.size(); ++i)
        s += (projected[i] - observed[i]).squaredNorm();
    return s / static_cast<double>(projected.size());
}

double camera_penalty(const ProjectionSolution& sol, const AprioriIntervals& ap) {
    const double fx = sol.camera.focal;
    if (!sol.converged || fx > ap.fx_hard_limit) return ap.c_infinity;
    double p = 0.0;
    if (fx <= 0.0) p += ap.c_infinity;
    p += sq(std::max(0.0, ap.fx_min - fx));
    p += sq(std::max(0.0, fx - ap.fx_max));
    p += sq(std::max(0.0, ap.scd_min - sol.scd_mm));
    p += sq(std::max(0.0, sol.scd_mm - ap.scd_max));
    double beta = rotation_angle_deg(sol.camera.rotation, ap.reference_pose);
    p += sq(std::max(0.0, beta - ap.beta_tol_deg));
    return p;
}

double skof_penalty(const BinaryMask& skull, const BinaryMask& face) {
    if (skull.width != face.width || skull.height != face.height)
        throw DimensionMismatch("mask dimensions differ");
    std::size_t outside = 0;
    for (std::size_t i = 0; i < skull.bits.size(); ++i)
        if (skull.bits[i] && !face.bits[i]) ++outside;
    return 100.0 * static_cast<double>(outside);
}

FitnessBreakdown evaluate_points(const std::map<std::string, Vec3>& facial_3d,
                                 const SkullInput& skull, const CaseBundle& photo,
                                 const FitnessConfig& config) {
    // Correspondences restricted to landmarks visible in the photograph.
    std::vector<Correspondence> corr;
    corr.reserve(facial_3d.size());
    for (const auto& [name, pos] : facial_3d) {
        auto vis = photo.visibility.find(name);
        if (vis == photo.visibility.end() || !vis->second) continue;
        auto obs = photo.facial_landmarks_2d.find(facial_name_for(name));
        if (obs == photo.facial_landmarks_2d.end()) continue;
        corr.push_back({name, pos, obs->second});
    }
    return evaluate_core(corr, skull, photo, config, nullptr);
}

EvalContext make_eval_context(const SkullInput& skull, const CaseBundle& photo,
                              const FitnessConfig& config) {
    EvalContext ctx;
    ctx.skull = &skull;
    ctx.photo = &photo;
    ctx.config = config;
    ctx.genotype_order = skull.landmark_order;

    std::map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < skull.landmark_order.size(); ++i) {
        const std::string& name = skull.landmark_order[i];
        if (!skull.cone_specs.count(name))
            throw MissingSpec("no cone spec for landmark: " + name);
        index_of[name] = i;
    }
    for (const auto& [name, idx] : index_of) {
        auto vis = photo.visibility.find(name);
        if (vis == photo.visibility.end() || !vis->second) continue;
        auto obs = photo.facial_landmarks_2d.find(facial_name_for(name));
        if (obs == photo.facial_landmarks_2d.end()) continue;
        ctx.slots.push_back({name, &skull.cone_specs.at(name), idx, obs->second});
    }

    if (config.use_skof && config.raster_scale != 1.0) {
        int w = std::max(
            1, static_cast<int>(std::lround(photo.face_mask.width * config.raster_scale)));
        int h = std::max(
            1, static_cast<int>(std::lround(photo.face_mask.height * config.raster_scale)));
        ctx.face_scaled = downscale_block_or(photo.face_mask, w, h);
    }
    return ctx;
}

FitnessBreakdown evaluate_with_context(const Genotype& g, const EvalContext& ctx) {
    if (g.landmark_order != ctx.genotype_order)
        throw LengthMismatch("genotype landmark order does not match evaluation context");
    std::vector<Correspondence> corr(ctx.slots.size());
    for (std::size_t i = 0; i < ctx.slots.size(); ++i) {
        const auto& s = ctx.slots[i];
        auto p = g.params(s.genotype_index);
        corr[i] = {s.cranial, s.spec->apex + decode_cone(*s.spec, p[0], p[1], p[2]), s.observed};
    }
    const BinaryMask* scaled = ctx.face_scaled.bits.empty() ? nullptr : &ctx.face_scaled;
    return evaluate_core(corr, *ctx.skull, *ctx.photo, ctx.config, scaled);
}

FitnessBreakdown evaluate_candidate(const Genotype& g, const SkullInput& skull,
                                    const CaseBundle& photo, const FitnessConfig& config) {
    auto decoded = genotype_to_facial_landmarks(g, skull.cone_specs);
    std::map<std::string, Vec3> facial_3d;
    for (auto& [name, pos] : decoded) facial_3d.emplace(name, pos);
    return evaluate_points(facial_3d, skull, photo, config);
}

FitnessBreakdown evaluate_candidate(const Genotype& g, const CaseBundle& photo,
                                    const FitnessConfig& config) {
    return evaluate_candidate(g, photo.skull, photo, config);
}

}  // namespace sfo
