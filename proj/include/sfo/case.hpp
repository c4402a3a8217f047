#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sfo/cones.hpp"
#include "sfo/contour.hpp"
#include "sfo/geometry.hpp"

namespace sfo {

enum class PoseKind { Frontal, LateralLeft, LateralRight };

inline bool is_lateral(PoseKind p) { return p != PoseKind::Frontal; }

// Everything the scoring side needs from one skull: geometry, cranial
// landmarks (correspondence set plus segmentation references), and the
// admissible soft-tissue cone per landmark.
struct SkullInput {
    std::string subject_id;
    TriMesh mesh;
    std::map<std::string, Vec3> cranial_landmarks;
    std::map<std::string, ConeSpec> cone_specs;
    Vec3 frankfurt_normal = Vec3::UnitZ();
    std::vector<std::string> landmark_order;

    // Camera-independent region cuts, filled by ensure_regions. Optional
    // acceleration; scoring falls back to cutting on the fly.
    std::optional<TriMesh> chin_region;
    std::optional<TriMesh> forehead_region;
};

// Precomputes both anatomical regions once per skull so repeated candidate
// evaluations skip the mesh cut.
void ensure_regions(SkullInput& skull);

// Admissible camera parameter intervals for one case, derived from the
// photograph's metadata.
struct AprioriIntervals {
    double fx_min = 0.0;
    double fx_max = 0.0;
    double scd_min = 0.0;
    double scd_max = 0.0;
    double beta_tol_deg = 0.0;
    Mat3 reference_pose = Mat3::Identity();
    double fx_hard_limit = 10000.0;
    double c_infinity = 1e12;
};

// Perturbations applied on top of the exact render, kept for audit.
struct NoiseRecord {
    double landmark_magnitude_px = 0.0;
    std::map<std::string, Vec2> landmark_offsets;  // keyed by cranial name
    double direction_max_deg = 0.0;
    std::map<std::string, double> direction_angles_deg;       // keyed by cranial name
    std::map<std::string, bool> truth_inside_cone;            // after direction noise
};

// One identification case: the photograph side (2D landmarks, face mask,
// facial contour, camera ground truth) plus the skull it was rendered from.
struct CaseBundle {
    std::string case_id;
    std::string subject_id;
    PoseKind pose = PoseKind::Frontal;
    Looking looking = Looking::Frontal;

    Pinhole camera_gt;
    double scd_gt_mm = 0.0;

    std::map<std::string, Vec2> facial_landmarks_2d;     // keyed by facial name
    std::map<std::string, bool> visibility;              // keyed by cranial name
    std::map<std::string, Vec3> gt_facial_landmarks_3d;  // keyed by cranial name

    BinaryMask face_mask;
    PixelCurve facial_curve;
    Genotype gt_genotype;
    AprioriIntervals intervals;
    NoiseRecord noise;

    SkullInput skull;

    RegionKind region_kind() const {
        return pose == PoseKind::Frontal ? RegionKind::ChinJaw : RegionKind::Forehead;
    }

    // 2D observations re-keyed by cranial landmark name. Includes occluded
    // landmarks: they are excluded from the camera solve but retained for
    // back-projection evaluation.
    std::map<std::string, Vec2> observed_2d_by_cranial() const;
};

}  // namespace sfo
