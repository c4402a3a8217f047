#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sfo/geometry.hpp"

namespace sfo {

// Anatomical region whose silhouette boundary is compared between skull and
// face. The frontal pose uses the chin-jaw line, lateral poses the forehead
// profile; the choice comes from pose metadata, never from the image.
enum class RegionKind { ChinJaw, Forehead };

// Direction the subject faces in the image. Frontal pairs with ChinJaw,
// Left/Right with Forehead.
enum class Looking { Frontal, Left, Right };

// Ordered pixel curve; coordinates are integer-valued (u, v) stored as
// doubles, origin top-left, v growing downward.
struct PixelCurve {
    std::vector<Vec2> points;

    bool empty() const { return points.empty(); }
    std::size_t size() const { return points.size(); }
};

struct CurveMatch {
    std::size_t skull_index = 0;
    std::size_t face_index = 0;
    Vec2 skull_point = Vec2::Zero();
    Vec2 face_point = Vec2::Zero();
    double distance = 0.0;
};

struct CurvePairing {
    std::vector<CurveMatch> matches;  // ordered along the skull curve
};

struct ParallelismBreakdown {
    double delta_d = 0.0;  // max - min matched distance
    double p_conv = 0.0;   // endpoint convergence/divergence term
    double p_int = 0.0;    // anatomical side violations, 1000 each
    double total = 0.0;
};

// Cuts the region out of a mesh.
//  Forehead: slab between planes through glabella and metopion, both with
//  the Frankfurt-plane normal.
//  ChinJaw: below the horizontal plane through the infradentale (skull) or
//  stomion (face), between vertical planes through the mental foramina
//  (skull) or cheilia (face).
// Throws MissingLandmark naming the absent key, EmptyResult when the region
// is empty or the slab has zero thickness.
TriMesh segment_region(const TriMesh& mesh, RegionKind kind,
                       const std::map<std::string, Vec3>& landmarks,
                       const Vec3& frankfurt_normal);

// Rasterizes the region and extracts the boundary on the anatomically
// relevant side: lowest set pixel per column for ChinJaw, extreme pixel per
// row in the looking direction for Forehead. `v_span`, when given, discards
// Forehead rows outside the projected glabella/metopion vertical span.
// Throws TooSmallProjection when fewer than 2 boundary pixels remain.
PixelCurve detect_curve(const TriMesh& region, const Pinhole& camera, RegionKind kind,
                        Looking looking = Looking::Frontal,
                        const std::optional<std::pair<double, double>>& v_span = {});

// Removes isolated pixels (no other curve pixel within Chebyshev distance
// 2), orders the remainder along the dominant image axis and bridges gaps
// with rasterized straight segments. Output is 8-connected with no
// consecutive duplicates. Throws AllIsolated when nothing remains.
PixelCurve refine_curve(const PixelCurve& raw);

// Mutual trim: each curve is cut where the other curve's endpoint normals
// (averaged over the terminal 20% of arc length, oriented toward the
// counterpart) intersect it. Rays that miss leave the corresponding end
// untouched; when no ray hits either curve, NoIntersection is thrown.
std::pair<PixelCurve, PixelCurve> trim_curves(const PixelCurve& skull, const PixelCurve& face);

// Nearest-neighbour matching, skull to face, then unmatched face pixels back
// to skull. Distance ties resolve to the lower index; matches are ordered
// along the skull curve.
CurvePairing match_curves(const PixelCurve& skull, const PixelCurve& face);

// Parallelism penalty over a matched pairing:
//  delta_d spread term, endpoint convergence term (2*(d1+dN deviations) when
//  both endpoint deviations exceed a quarter of the mean distance, 4x the
//  single offender otherwise), and 1000 per anatomical side violation
//  (skull at or below the facial chin line for ChinJaw; skull at or beyond
//  the facial profile in the looking direction for Forehead).
ParallelismBreakdown parallelism_penalty(const CurvePairing& pairing, RegionKind kind,
                                         Looking looking);

}  // namespace sfo
