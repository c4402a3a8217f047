#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sfo/case.hpp"
#include "sfo/de.hpp"
#include "sfo/fitness.hpp"
#include "sfo/synthcase.hpp"

namespace sfo {

// Back-projection error: mean 3D point-to-line distance between each
// ground-truth facial landmark and the ray through its observed 2D location
// under the estimated camera. All landmarks in `gt_facial_3d` participate,
// occluded ones included. Throws NotConverged for unconverged solutions,
// EmptyResult for an empty landmark map, MissingLandmark when an observation
// is absent.
double bpe_mm(const ProjectionSolution& solution,
              const std::map<std::string, Vec3>& gt_facial_3d,
              const std::map<std::string, Vec2>& observed_2d_by_cranial);

struct PlausibilityReport {
    bool implausible = false;
    double outside_pct = 0.0;  // 100 * |skull \ face| / |skull|
    std::size_t skull_pixels = 0;
    std::size_t outside_pixels = 0;
    bool positive_pair = true;
};

// Rasterizes the skull under the estimated camera and compares against the
// facial mask: any skull pixel outside the face makes the overlay
// implausible. A skull projecting to zero pixels reports implausible with
// pct 100 rather than throwing.
PlausibilityReport plausibility_report(const ProjectionSolution& solution,
                                       const TriMesh& skull_mesh, const BinaryMask& face_mask,
                                       bool is_positive_pair);

// How a method produces its overlay: the full evolutionary search, or a
// single solve from fixed soft-tissue vectors (prior direction at the mean
// admissible depth) as the non-evolutionary reference.
enum class MethodMode { Evolve, FixedVectors };

struct MethodConfig {
    std::string name = "de_full";
    MethodMode mode = MethodMode::Evolve;
    FitnessConfig fitness;
    DEConfig de;
    int threads = 1;
};

struct AlignmentOutcome {
    Genotype genotype;
    FitnessBreakdown breakdown;
    double score = 0.0;  // ranking score, lower is better
    double elapsed_s = 0.0;
    long long evaluations = 0;
    bool failed = false;  // no converged solution was produced
};

// Aligns one photograph against one skull with the given method. Evolve
// scores by final composite fitness; FixedVectors scores by the mean squared
// reprojection error of its single solve. Failures yield score c_infinity.
AlignmentOutcome align_case(const CaseBundle& photo, const SkullInput& skull,
                            const MethodConfig& method, uint64_t seed);

struct RankEntry {
    std::string skull_id;
    double score = 0.0;
    double elapsed_s = 0.0;
    bool failed = false;
};

struct RankResult {
    std::vector<RankEntry> entries;  // ascending score, ties by skull_id
    int rank_of_true = 0;            // 1-based position of the photo's subject
    AlignmentOutcome true_outcome;
};

// Rank position of `true_id` after sorting by (score, skull_id). Throws
// EmptyResult when `true_id` is absent.
int rank_from_scores(std::vector<RankEntry> entries, const std::string& true_id);

// Aligns the photo with every skull in the database and ranks the true
// skull. Per-skull failures become c_infinity scores; the experiment never
// aborts. Throws EmptyResult when the database lacks the photo's subject.
RankResult rank_experiment(const CaseBundle& photo, const std::vector<SkullInput>& skull_db,
                           const MethodConfig& method, uint64_t seed);

// Observation-noise severity for generated experiments: A none, B uniform
// landmark displacement, C landmark displacement plus cone-direction
// perturbation resampled over several sets.
enum class NoiseProfile { A, B, C };

struct SuiteConfig {
    int subjects = 4;
    int frontal_views = 2;
    int lateral_views = 2;
    NoiseProfile profile = NoiseProfile::A;
    std::vector<MethodConfig> methods;
    std::vector<uint64_t> seeds = {1};
    int direction_sets = 1;             // only profile C uses more than one
    double landmark_noise_px = 5.0;     // profiles B, C
    double direction_noise_deg = 30.0;  // profile C
    MorphologyParams morphology;
    CameraParams camera;
    uint64_t master_seed = 1;
};

// One alignment run (photo x skull x seed x direction set).
struct AlignmentRecord {
    std::string method;
    std::string case_id;
    std::string subject_id;  // photo's true subject
    std::string skull_id;
    PoseKind pose = PoseKind::Frontal;
    uint64_t seed = 0;
    int direction_set = 0;
    double score = 0.0;
    double elapsed_s = 0.0;
    bool failed = false;
};

// Per-photo outcome (rank across the database plus true-pair quality).
struct CaseRecord {
    std::string method;
    std::string case_id;
    std::string subject_id;
    PoseKind pose = PoseKind::Frontal;
    uint64_t seed = 0;
    int direction_set = 0;
    int rank = 0;
    double bpe = 0.0;  // NaN when the true-pair solve failed
    double time_s = 0.0;
    double implausible_pct = 0.0;
    bool implausible = false;
    bool failed = false;
};

// One row per method: frontal/lateral aggregates side by side. Pose means
// with no contributing cases (or no converged true-pair solve, for BPE)
// are NaN.
struct SuiteSummaryRow {
    std::string method;
    std::string profile = "A";
    double mean_rank_frontal = 0.0;
    double mean_rank_lateral = 0.0;
    double mean_bpe_frontal_mm = 0.0;  // over converged true-pair solves
    double mean_bpe_lateral_mm = 0.0;
    double mean_time_s = 0.0;
    double worst_implausible_pct = 0.0;
};

struct SuiteResult {
    std::vector<AlignmentRecord> alignments;
    std::vector<CaseRecord> cases;
    std::vector<SuiteSummaryRow> summary;  // one row per method
};

// Synthetic data for one experiment: subjects, their photographs with the
// profile's landmark noise applied, and one skull gallery per direction set
// (profile C re-perturbs every subject's cone axes per set; other profiles
// have a single exact gallery).
struct GeneratedExperiment {
    std::vector<SyntheticSubject> subjects;
    std::vector<CaseBundle> cases;
    std::vector<std::vector<SkullInput>> galleries;
};

GeneratedExperiment generate_experiment(const SuiteConfig& config);

// Rank/score stage over pre-generated data: every method x seed x gallery x
// photo combination, with raw alignment records, per-case ranks, BPE and
// plausibility of the true pair.
SuiteResult run_rank_stage(const std::vector<CaseBundle>& cases,
                           const std::vector<std::vector<SkullInput>>& galleries,
                           const std::vector<MethodConfig>& methods,
                           const std::vector<uint64_t>& seeds, uint64_t master_seed);

// Frontal/lateral aggregation per method: mean rank, mean BPE over converged
// solves, mean time, worst implausibility percentage.
std::vector<SuiteSummaryRow> summarize_cases(const std::vector<CaseRecord>& cases,
                                             const std::vector<std::string>& method_order);

// generate_experiment + run_rank_stage + summarize_cases in one call.
SuiteResult experiment_suite(const SuiteConfig& config);

}  // namespace sfo
