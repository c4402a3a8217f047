#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sfo/case.hpp"
#include "sfo/fitness.hpp"

namespace sfo {

struct DEConfig {
    int population_size = 50;
    double differential_weight = 0.7;  // F
    double crossover_rate = 0.9;       // CR
    int max_generations = 750;
    double max_seconds = 500.0;  // <= 0 disables the wall-clock stop
    uint64_t seed = 0;
};

enum class StopReason { Generations, TimeBudget };

struct RunTrace {
    // Entry g is the population best after generation g; entry 0 is the
    // initial population. Monotone non-increasing under greedy selection.
    std::vector<double> best_fitness;
    std::vector<double> elapsed_s;  // wall seconds at each entry
    long long evaluations = 0;
    double elapsed_seconds = 0.0;
    StopReason stop = StopReason::Generations;
};

struct RunResult {
    Genotype best;
    FitnessBreakdown best_breakdown;
    RunTrace trace;
};

using FitnessFn = std::function<FitnessBreakdown(const Genotype&)>;

// Population of coupled random genotypes (see sample_with_bilateral_coupling).
std::vector<Genotype> initialize_population(const DEConfig& config, Rng& rng,
                                            const BilateralPairing& pairing,
                                            const std::vector<std::string>& landmark_order);

// rand/1 donor: x_r1 + F*(x_r2 - x_r3) with r1, r2, r3 distinct and distinct
// from the target, clamped to [0, 1] per component.
Genotype mutate_rand1(const std::vector<Genotype>& population, int target_index,
                      double differential_weight, Rng& rng);

// Exponential crossover: a random start component always comes from the
// donor, then consecutive components (wrapping) while uniform draws stay
// below CR. Run length is truncated-geometric(CR).
Genotype crossover_exp(const Genotype& target, const Genotype& donor, double crossover_rate,
                       Rng& rng);

// Full generational loop with greedy one-to-one selection (ties keep the
// parent) and once-per-generation wall-clock checking. Trial vectors are
// generated sequentially from the seeded stream, so results are identical
// for any thread count.
RunResult evolve(const FitnessFn& fn, const DEConfig& config, const BilateralPairing& pairing,
                 const std::vector<std::string>& landmark_order, int threads = 1);

// Optimizes a candidate overlay for `photo` scored against `skull`.
RunResult run_case(const CaseBundle& photo, const SkullInput& skull,
                   const FitnessConfig& fitness_config, const DEConfig& de_config,
                   int threads = 1);

}  // namespace sfo
