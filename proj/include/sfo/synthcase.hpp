#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "sfo/case.hpp"

namespace sfo {

struct DepthRange {
    double min_mm = 0.0;
    double max_mm = 0.0;
};

// Knobs for the procedural head generator. The soft-tissue depth table is
// population data loaded from a config file; generation refuses to run
// without an entry for every canonical landmark.
struct MorphologyParams {
    double global_scale = 1.0;
    double asymmetry = 0.35;       // 0 gives exactly mirror-symmetric landmark pairs
    double shape_variation = 1.0;  // scales per-subject low-order shape noise
    int mesh_rings = 32;
    int mesh_segments = 44;
    std::map<std::string, DepthRange> depth_table;  // mm, keyed by canonical name
    double aperture_max_deg = 40.0;
};

struct CameraParams {
    double focal_min = 800.0;   // px
    double focal_max = 3000.0;  // px
    double scd_min = 600.0;     // mm
    double scd_max = 3000.0;    // mm
    double pose_jitter_deg = 10.0;
    int width = 640;
    int height = 480;
    // Projected head diameter is capped to this fraction of the short image
    // side when sampling the focal length.
    double fit_fraction = 0.85;
    // A-priori interval construction.
    double fx_band = 0.05;   // +-5% of the true focal
    double scd_band = 0.10;  // +-10% of the true distance
    double beta_tol_deg = 10.0;
    double fx_hard_limit = 10000.0;
    double c_infinity = 1e12;
};

// Procedural head: deformed-ellipsoid cranium with a parametric jaw bulge,
// face surface offset outward by interpolated soft-tissue depth. Cranial
// and facial landmarks are placed from a fixed anatomical direction
// template with per-subject jitter; each soft-tissue vector is strictly
// inside its cone and the unperturbed cone axis equals the true direction.
struct SyntheticSubject {
    std::string subject_id;
    TriMesh skull_mesh;
    TriMesh face_mesh;
    std::map<std::string, Vec3> cranial_landmarks;    // correspondence set + cut references
    std::map<std::string, Vec3> soft_tissue_vectors;  // correspondence set
    std::map<std::string, ConeSpec> cone_specs;       // correspondence set
    std::map<std::string, Vec3> face_points;          // cut references on the face surface
    Vec3 frankfurt_normal = Vec3::UnitZ();

    // Filled by perturb_st_directions.
    double direction_noise_deg = 0.0;
    std::map<std::string, double> direction_angles_deg;
    std::map<std::string, bool> truth_inside_cone;

    Vec3 gt_facial_landmark(const std::string& cranial) const;

    // Scoring-side view of this subject.
    SkullInput skull_input() const;
};

SyntheticSubject generate_subject(uint64_t seed, const MorphologyParams& params,
                                  const std::string& subject_id = "");

// Renders one photograph of the subject: exact 2D landmark projections,
// per-landmark visibility (back-facing or mesh-occluded landmarks are
// dropped), face mask, refined facial contour, ground-truth genotype and
// a-priori camera intervals. Throws TooFewVisible when fewer than 6
// correspondences remain; callers resample with another seed.
CaseBundle render_case(const SyntheticSubject& subject, PoseKind pose, const CameraParams& params,
                       uint64_t seed, const std::string& case_id = "");

// Landmark observation noise: displaces each visible 2D landmark uniformly
// per component within +-magnitude_px and records the offsets.
CaseBundle perturb_landmarks(const CaseBundle& bundle, double magnitude_px, uint64_t seed);

// Directional prior noise: rotates every cone axis by a uniform angle in
// [0, max_angle_deg] about a random perpendicular axis. Ground-truth
// vectors are unchanged; whether each still lies inside its cone is
// recorded on the subject.
SyntheticSubject perturb_st_directions(const SyntheticSubject& subject, double max_angle_deg,
                                       uint64_t seed);

}  // namespace sfo
