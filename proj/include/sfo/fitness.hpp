#pragma once

#include <map>
#include <string>
#include <vector>

#include "sfo/case.hpp"
#include "sfo/pnpf.hpp"

namespace sfo {

// Composite objective value for one candidate. total is always the exact
// sum of the four terms; disabled terms contribute zero.
struct FitnessBreakdown {
    double mse_pix = 0.0;
    double p_cam = 0.0;
    double p_skof = 0.0;
    double p_pll = 0.0;
    double total = 0.0;
    ProjectionSolution solution;
    bool solver_ok = false;
};

struct FitnessConfig {
    bool use_skof = true;
    bool use_pll = true;
    // Silhouette rasterization scale for the skull-outside-face term; 1 is
    // native case resolution, 0.5 quarters the pixel work. The face mask is
    // downscaled with a block-OR so containment is never falsely penalized.
    double raster_scale = 1.0;
};

// Mean squared pixel distance between projected and observed points.
// Throws LengthMismatch when the spans differ or are empty.
double mse_pix(const std::vector<Vec2>& projected, const std::vector<Vec2>& observed);

// Soft camera-interval penalty: squared excursions of focal and
// subject-camera distance outside their admissible intervals, squared excess
// of the pose deviation over its tolerance, plus c_infinity when the focal
// collapses to zero. The whole term becomes c_infinity when the solver did
// not converge or the focal exceeds the hard limit.
double camera_penalty(const ProjectionSolution& sol, const AprioriIntervals& ap);

// 100 per skull pixel outside the face mask. Throws DimensionMismatch on
// differing mask sizes.
double skof_penalty(const BinaryMask& skull, const BinaryMask& face);

// Scores a candidate's decoded facial landmark positions against a case:
// solve for the camera from the visible correspondences, then assemble
// mse + camera + silhouette + contour terms. Solver failure (exception,
// non-convergence, or a hard interval breach) yields p_cam = c_infinity with
// the geometric terms zeroed.
FitnessBreakdown evaluate_points(const std::map<std::string, Vec3>& facial_3d,
                                 const SkullInput& skull, const CaseBundle& photo,
                                 const FitnessConfig& config);

// Decodes the genotype against `skull`'s cones and scores it against the
// photo side of `photo`. The two-argument form scores the bundle's own
// skull (positive pair).
FitnessBreakdown evaluate_candidate(const Genotype& g, const SkullInput& skull,
                                    const CaseBundle& photo, const FitnessConfig& config);
FitnessBreakdown evaluate_candidate(const Genotype& g, const CaseBundle& photo,
                                    const FitnessConfig& config);

// Per-case evaluation state shared across the many candidate evaluations of
// one optimization run: correspondence slots resolved to cone specs and
// genotype indices up front, and the face mask pre-downscaled for the
// silhouette term. Holds pointers into `skull` and `photo`, which must
// outlive it. Read-only once built, so safe to share across threads.
struct EvalContext {
    struct Slot {
        std::string cranial;
        const ConeSpec* spec = nullptr;
        std::size_t genotype_index = 0;
        Vec2 observed = Vec2::Zero();
    };
    const SkullInput* skull = nullptr;
    const CaseBundle* photo = nullptr;
    FitnessConfig config;
    std::vector<std::string> genotype_order;
    std::vector<Slot> slots;  // visible landmarks, alphabetical by cranial name
    BinaryMask face_scaled;   // populated only for a reduced-scale silhouette term
};

// Throws MissingSpec when a landmark in the skull's order has no cone.
EvalContext make_eval_context(const SkullInput& skull, const CaseBundle& photo,
                              const FitnessConfig& config);

// Identical result to evaluate_candidate for genotypes ordered like the
// context's skull; throws LengthMismatch on an order mismatch.
FitnessBreakdown evaluate_with_context(const Genotype& g, const EvalContext& ctx);

}  // namespace sfo
