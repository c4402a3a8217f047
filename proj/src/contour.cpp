#include "sfo/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sfo {

namespace {

const Vec3& need_landmark(const std::map<std::string, Vec3>& landmarks, const std::string& name) {
    auto it = landmarks.find(name);
    if (it == landmarks.end()) throw MissingLandmark("required landmark missing: " + name);
    return it->second;
}

// Finds the first present name from a list; used where skull and face meshes
// provide different anatomical references for the same cut.
const Vec3* find_any(const std::map<std::string, Vec3>& landmarks,
                     std::initializer_list<const char*> names, std::string& found) {
    for (const char* n : names) {
        auto it = landmarks.find(n);
        if (it != landmarks.end()) {
            found = n;
            return &it->second;
        }
    }
    return nullptr;
}

// Bresenham-style rasterized segment, endpoints excluded.
void bridge_gap(std::vector<Vec2>& out, const Vec2& a, const Vec2& b) {
    int x0 = static_cast<int>(std::lround(a.x()));
    int y0 = static_cast<int>(std::lround(a.y()));
    int x1 = static_cast<int>(std::lround(b.x()));
    int y1 = static_cast<int>(std::lround(b.y()));
    int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    int x = x0, y = y0;
    for (;;) {
        int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y += sy;
        }
        if (x == x1 && y == y1) break;
        out.emplace_back(x, y);
    }
}

double chebyshev(const Vec2& a, const Vec2& b) {
    return std::max(std::abs(a.x() - b.x()), std::abs(a.y() - b.y()));
}

// Averaged unit tangent over the terminal 20% of arc length at one end.
// `from_start` selects the end; the tangent points from the endpoint into
// the curve.
Vec2 terminal_tangent(const PixelCurve& c, bool from_start) {
    const auto& p = c.points;
    double total = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) total += (p[i] - p[i - 1]).norm();
    double budget = 0.2 * total;
    Vec2 sum = Vec2::Zero();
    double used = 0.0;
    if (from_start) {
        for (std::size_t i = 1; i < p.size(); ++i) {
            Vec2 d = p[i] - p[i - 1];
            sum += d;
            used += d.norm();
            if (used >= budget) break;
        }
    } else {
        for (std::size_t i = p.size(); i-- > 1;) {
            Vec2 d = p[i - 1] - p[i];
            sum += d;
            used += d.norm();
            if (used >= budget) break;
        }
    }
    double n = sum.norm();
    return n > 0.0 ? Vec2(sum / n) : Vec2(1.0, 0.0);
}

Vec2 curve_centroid(const PixelCurve& c) {
    Vec2 s = Vec2::Zero();
    for (const auto& p : c.points) s += p;
    return s / static_cast<double>(c.points.size());
}

// Nearest intersection of the ray origin + s*dir (s >= 0) with the polyline;
// returns the fractional segment position or nothing.
std::optional<double> ray_polyline_hit(const Vec2& origin, const Vec2& dir, const PixelCurve& c) {
    std::optional<double> best_pos;
    double best_s = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < c.points.size(); ++i) {
        Vec2 q0 = c.points[i];
        Vec2 e = c.points[i + 1] - q0;
        double det = dir.x() * (-e.y()) - dir.y() * (-e.x());
        if (std::abs(det) < 1e-12) continue;
        Vec2 rhs = q0 - origin;
        double s = (rhs.x() * (-e.y()) - rhs.y() * (-e.x())) / det;
        double tau = (dir.x() * rhs.y() - dir.y() * rhs.x()) / det;
        if (s >= 0.0 && tau >= 0.0 && tau <= 1.0 && s < best_s) {
            best_s = s;
            best_pos = static_cast<double>(i) + tau;
        }
    }
    return best_pos;
}

double min_distance_to_curve(const Vec2& p, const PixelCurve& c) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : c.points) best = std::min(best, (p - q).norm());
    return best;
}

PixelCurve slice(const PixelCurve& c, std::size_t lo, std::size_t hi) {
    PixelCurve out;
    out.points.assign(c.points.begin() + lo, c.points.begin() + hi + 1);
    return out;
}

}  // namespace

TriMesh segment_region(const TriMesh& mesh, RegionKind kind,
                       const std::map<std::string, Vec3>& landmarks,
                       const Vec3& frankfurt_normal) {
    Vec3 up = frankfurt_normal.normalized();
    if (kind == RegionKind::Forehead) {
        const Vec3& glabella = need_landmark(landmarks, "glabella");
        const Vec3& metopion = need_landmark(landmarks, "metopion");
        return cut_mesh_between_planes(mesh, Plane{glabella, up}, Plane{metopion, up});
    }

    std::string href, lref, rref;
    const Vec3* horizontal = find_any(landmarks, {"infradentale", "stomion"}, href);
    const Vec3* lateral_l = find_any(landmarks, {"mental_foramen_l", "cheilion_l"}, lref);
    const Vec3* lateral_r = find_any(landmarks, {"mental_foramen_r", "cheilion_r"}, rref);
    if (!horizontal) throw MissingLandmark("required landmark missing: infradentale or stomion");
    if (!lateral_l || !lateral_r)
        throw MissingLandmark("required landmark missing: mental foramina or cheilia");

    // Below the horizontal plane, between the two vertical planes. The
    // lateral axis is projected perpendicular to `up` so the side planes
    // stay vertical.
    Vec3 lat = *lateral_r - *lateral_l;
    lat -= lat.dot(up) * up;
    if (lat.norm() < 1e-9) throw EmptyResult("lateral reference landmarks coincide");
    lat.normalize();

    TriMesh below = clip_mesh_halfspace(mesh, Plane{*horizontal, -up});
    return cut_mesh_between_planes(below, Plane{*lateral_l, lat}, Plane{*lateral_r, -lat});
}

PixelCurve detect_curve(const TriMesh& region, const Pinhole& camera, RegionKind kind,
                        Looking looking, const std::optional<std::pair<double, double>>& v_span) {
    BinaryMask mask = rasterize_silhouette(region, camera);
    PixelCurve curve;
    if (kind == RegionKind::ChinJaw) {
        // Lowest set pixel per column, left to right.
        for (int x = 0; x < mask.width; ++x) {
            for (int y = mask.height - 1; y >= 0; --y) {
                if (mask.at(x, y)) {
                    curve.points.emplace_back(x, y);
                    break;
                }
            }
        }
    } else {
        // Extreme set pixel per row in the looking direction, top to bottom.
        const bool left = looking == Looking::Left;
        int lo = 0, hi = mask.height - 1;
        if (v_span) {
            double a = std::min(v_span->first, v_span->second);
            double b = std::max(v_span->first, v_span->second);
            lo = std::max(0, static_cast<int>(std::floor(a)));
            hi = std::min(mask.height - 1, static_cast<int>(std::ceil(b)));
        }
        for (int y = lo; y <= hi; ++y) {
            if (left) {
                for (int x = 0; x < mask.width; ++x)
                    if (mask.at(x, y)) {
                        curve.points.emplace_back(x, y);
                        break;
                    }
            } else {
                for (int x = mask.width - 1; x >= 0; --x)
                    if (mask.at(x, y)) {
                        curve.points.emplace_back(x, y);
                        break;
                    }
            }
        }
    }
    if (curve.size() < 2) throw TooSmallProjection("region projects to fewer than 2 boundary pixels");
    return curve;
}

PixelCurve refine_curve(const PixelCurve& raw) {
    // Drop pixels with no other curve pixel within Chebyshev distance 2.
    std::vector<Vec2> kept;
    for (std::size_t i = 0; i < raw.points.size(); ++i) {
        bool has_neighbor = false;
        for (std::size_t j = 0; j < raw.points.size() && !has_neighbor; ++j)
            if (j != i && chebyshev(raw.points[i], raw.points[j]) <= 2.0) has_neighbor = true;
        if (has_neighbor) kept.push_back(raw.points[i]);
    }
    if (kept.empty()) throw AllIsolated("no connected curve pixels remain");

    // Order along the dominant image axis, ties on the other coordinate.
    double du = 0.0, dv = 0.0;
    {
        double ulo = kept[0].x(), uhi = kept[0].x(), vlo = kept[0].y(), vhi = kept[0].y();
        for (const auto& p : kept) {
            ulo = std::min(ulo, p.x());
            uhi = std::max(uhi, p.x());
            vlo = std::min(vlo, p.y());
            vhi = std::max(vhi, p.y());
        }
        du = uhi - ulo;
        dv = vhi - vlo;
    }
    const bool by_u = du >= dv;
    std::sort(kept.begin(), kept.end(), [&](const Vec2& a, const Vec2& b) {
        double ka = by_u ? a.x() : a.y();
        double kb = by_u ? b.x() : b.y();
        if (ka != kb) return ka < kb;
        return (by_u ? a.y() : a.x()) < (by_u ? b.y() : b.x());
    });

    // Bridge gaps so consecutive output pixels are 8-connected.
    PixelCurve out;
    out.points.reserve(kept.size());
    for (const auto& p : kept) {
        if (!out.points.empty()) {
            const Vec2& prev = out.points.back();
            if (prev == p) continue;
            if (chebyshev(prev, p) > 1.0) bridge_gap(out.points, prev, p);
        }
        out.points.push_back(p);
    }
    return out;
}

std::pair<PixelCurve, PixelCurve> trim_curves(const PixelCurve& skull, const PixelCurve& face) {
    if (skull.size() < 2 || face.size() < 2)
        throw TooSmallProjection("trim needs at least 2 pixels per curve");

    struct Cut {
        std::vector<std::size_t> indices;
    };
    auto cast_from = [](const PixelCurve& src, const PixelCurve& dst, Cut& cut) {
        Vec2 toward = curve_centroid(dst);
        for (bool from_start : {true, false}) {
            Vec2 endpoint = from_start ? src.points.front() : src.points.back();
            Vec2 tangent = terminal_tangent(src, from_start);
            Vec2 normal(-tangent.y(), tangent.x());
            if (normal.dot(toward - endpoint) < 0.0) normal = -normal;
            auto hit = ray_polyline_hit(endpoint, normal, dst);
            if (hit) {
                double pos = *hit;
                std::size_t idx = pos - std::floor(pos) < 0.5
                                      ? static_cast<std::size_t>(std::floor(pos))
                                      : static_cast<std::size_t>(std::floor(pos)) + 1;
                cut.indices.push_back(std::min(idx, dst.size() - 1));
            }
        }
    };

    Cut cut_on_face, cut_on_skull;
    cast_from(skull, face, cut_on_face);
    cast_from(face, skull, cut_on_skull);
    if (cut_on_face.indices.empty() && cut_on_skull.indices.empty())
        throw NoIntersection("endpoint normals miss the counterpart curve");

    auto apply = [](const PixelCurve& c, const Cut& cut, const PixelCurve& other) {
        if (cut.indices.empty()) return c;
        if (cut.indices.size() >= 2) {
            auto [lo, hi] = std::minmax(cut.indices[0], cut.indices[1]);
            if (hi - lo < 1) throw NoIntersection("trim collapses curve to a point");
            return slice(c, lo, hi);
        }
        // Single hit: keep the side containing the point nearest the other
        // curve.
        std::size_t cut_at = cut.indices[0];
        std::size_t nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < c.size(); ++i) {
            double d = min_distance_to_curve(c.points[i], other);
            if (d < best) {
                best = d;
                nearest = i;
            }
        }
        if (nearest >= cut_at)
            return cut_at + 1 < c.size() ? slice(c, cut_at, c.size() - 1) : c;
        return cut_at >= 1 ? slice(c, 0, cut_at) : c;
    };

    PixelCurve skull_trimmed = apply(skull, cut_on_skull, face);
    PixelCurve face_trimmed = apply(face, cut_on_face, skull);
    return {skull_trimmed, face_trimmed};
}

CurvePairing match_curves(const PixelCurve& skull, const PixelCurve& face) {
    if (skull.empty() || face.empty()) throw TooSmallProjection("cannot match an empty curve");
    CurvePairing pairing;
    std::vector<bool> face_matched(face.size(), false);
    for (std::size_t i = 0; i < skull.size(); ++i) {
        std::size_t best_j = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < face.size(); ++j) {
            double d = (skull.points[i] - face.points[j]).norm();
            if (d < best) {  // strict: equal distance keeps the lower index
                best = d;
                best_j = j;
            }
        }
        face_matched[best_j] = true;
        pairing.matches.push_back({i, best_j, skull.points[i], face.points[best_j], best});
    }
    for (std::size_t j = 0; j < face.size(); ++j) {
        if (face_matched[j]) continue;
        std::size_t best_i = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < skull.size(); ++i) {
            double d = (face.points[j] - skull.points[i]).norm();
            if (d < best) {
                best = d;
                best_i = i;
            }
        }
        pairing.matches.push_back({best_i, j, skull.points[best_i], face.points[j], best});
    }
    std::sort(pairing.matches.begin(), pairing.matches.end(),
              [](const CurveMatch& a, const CurveMatch& b) {
                  if (a.skull_index != b.skull_index) return a.skull_index < b.skull_index;
                  return a.face_index < b.face_index;
              });
    return pairing;
}

ParallelismBreakdown parallelism_penalty(const CurvePairing& pairing, RegionKind kind,
                                         Looking looking) {
    if (pairing.matches.empty()) throw LengthMismatch("empty pairing");
    if ((kind == RegionKind::ChinJaw) != (looking == Looking::Frontal))
        throw Error("region kind and looking direction disagree");

    ParallelismBreakdown out;
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& m : pairing.matches) {
        dmin = std::min(dmin, m.distance);
        dmax = std::max(dmax, m.distance);
        sum += m.distance;
    }
    double dbar = sum / static_cast<double>(pairing.matches.size());
    out.delta_d = dmax - dmin;

    double d1 = std::abs(pairing.matches.front().distance - dbar);
    double dn = std::abs(pairing.matches.back().distance - dbar);
    double threshold = 0.25 * dbar;
    bool e1 = d1 > threshold;
    bool en = dn > threshold;
    if (e1 && en)
        out.p_conv = 2.0 * (d1 + dn);
    else if (e1)
        out.p_conv = 4.0 * d1;
    else if (en)
        out.p_conv = 4.0 * dn;

    int violations = 0;
    for (const auto& m : pairing.matches) {
        bool bad = false;
        if (kind == RegionKind::ChinJaw)
            bad = m.skull_point.y() >= m.face_point.y();
        else if (looking == Looking::Left)
            bad = m.skull_point.x() <= m.face_point.x();
        else
            bad = m.skull_point.x() >= m.face_point.x();
        if (bad) ++violations;
    }
    out.p_int = 1000.0 * violations;
    out.total = out.delta_d + out.p_conv + out.p_int;
    return out;
}

}  // namespace sfo
