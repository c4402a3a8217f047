#include "sfo/de.hpp"

#include <algorithm>
#include <chrono>

#include "sfo/landmarks.hpp"
#include "sfo/parallel.hpp"

namespace sfo {

namespace {
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}
}  // namespace

std::vector<Genotype> initialize_population(const DEConfig& config, Rng& rng,
                                            const BilateralPairing& pairing,
                                            const std::vector<std::string>& landmark_order) {
    std::vector<Genotype> pop;
    pop.reserve(config.population_size);
    for (int i = 0; i < config.population_size; ++i)
        pop.push_back(sample_with_bilateral_coupling(rng, pairing, landmark_order));
    return pop;
}

Genotype mutate_rand1(const std::vector<Genotype>& population, int target_index,
                      double differential_weight, Rng& rng) {
    const int n = static_cast<int>(population.size());
    if (n < 4) throw Error("rand/1 mutation needs a population of at least 4");
    int r1, r2, r3;
    do r1 = rng.uniform_int(n); while (r1 == target_index);
    do r2 = rng.uniform_int(n); while (r2 == target_index || r2 == r1);
    do r3 = rng.uniform_int(n); while (r3 == target_index || r3 == r1 || r3 == r2);
    Genotype donor = population[r1];
    for (std::size_t k = 0; k < donor.values.size(); ++k) {
        double v = population[r1].values[k] +
                   differential_weight * (population[r2].values[k] - population[r3].values[k]);
        donor.values[k] = std::clamp(v, 0.0, 1.0);
    }
    return donor;
}

Genotype crossover_exp(const Genotype& target, const Genotype& donor, double crossover_rate,
                       Rng& rng) {
    if (target.values.size() != donor.values.size())
        throw LengthMismatch("crossover operands differ in length");
    const int d = static_cast<int>(target.values.size());
    Genotype trial = target;
    int n = rng.uniform_int(d);
    int copied = 1;
    trial.values[n] = donor.values[n];
    while (copied < d && rng.uniform01() < crossover_rate) {
        int idx = (n + copied) % d;
        trial.values[idx] = donor.values[idx];
        ++copied;
    }
    return trial;
}

RunResult evolve(const FitnessFn& fn, const DEConfig& config, const BilateralPairing& pairing,
                 const std::vector<std::string>& landmark_order, int threads) {
    const auto t0 = Clock::now();
    Rng rng(config.seed);

    std::vector<Genotype> pop = initialize_population(config, rng, pairing, landmark_order);
    const int np = config.population_size;
    std::vector<FitnessBreakdown> scores(np);
    parallel_for(np, threads, [&](std::size_t i) { scores[i] = fn(pop[i]); });

    RunResult result;
    RunTrace& trace = result.trace;
    trace.evaluations = np;

    int best = 0;
    for (int i = 1; i < np; ++i)
        if (scores[i].total < scores[best].total) best = i;
    trace.best_fitness.push_back(scores[best].total);
    trace.elapsed_s.push_back(seconds_since(t0));

    std::vector<Genotype> trials(np);
    std::vector<FitnessBreakdown> trial_scores(np);
    trace.stop = StopReason::Generations;
    for (int gen = 1; gen <= config.max_generations; ++gen) {
        // Wall-clock budget is checked once per generation boundary.
        if (config.max_seconds > 0.0 && seconds_since(t0) >= config.max_seconds) {
            trace.stop = StopReason::TimeBudget;
            break;
        }
        // Trial generation is sequential against the frozen parent
        // population; evaluation order cannot affect the stream.
        for (int i = 0; i < np; ++i) {
            Genotype donor = mutate_rand1(pop, i, config.differential_weight, rng);
            trials[i] = crossover_exp(pop[i], donor, config.crossover_rate, rng);
        }
        parallel_for(np, threads, [&](std::size_t i) { trial_scores[i] = fn(trials[i]); });
        trace.evaluations += np;
        for (int i = 0; i < np; ++i) {
            if (trial_scores[i].total < scores[i].total) {  // ties keep the parent
                pop[i] = trials[i];
                scores[i] = trial_scores[i];
            }
        }
        best = 0;
        for (int i = 1; i < np; ++i)
            if (scores[i].total < scores[best].total) best = i;
        trace.best_fitness.push_back(scores[best].total);
        trace.elapsed_s.push_back(seconds_since(t0));
    }

    trace.elapsed_seconds = seconds_since(t0);
    result.best = pop[best];
    result.best_breakdown = scores[best];
    return result;
}

RunResult run_case(const CaseBundle& photo, const SkullInput& skull,
                   const FitnessConfig& fitness_config, const DEConfig& de_config, int threads) {
    const SkullInput* sk = &skull;
    SkullInput local;
    if (!skull.chin_region || !skull.forehead_region) {
        local = skull;
        ensure_regions(local);
        sk = &local;
    }
    BilateralPairing pairing;
    pairing.pairs = bilateral_pairs_present(sk->landmark_order);
    EvalContext ctx = make_eval_context(*sk, photo, fitness_config);
    FitnessFn fn = [&](const Genotype& g) { return evaluate_with_context(g, ctx); };
    return evolve(fn, de_config, pairing, sk->landmark_order, threads);
}

}  // namespace sfo
