#include <doctest.h>

#include <cmath>

#include "sfo/de.hpp"
#include "sfo/io.hpp"
#include "sfo/landmarks.hpp"
#include "sfo/synthcase.hpp"

using namespace sfo;

namespace {

const std::vector<std::string> kOrder = {"alare_l", "alare_r", "gnathion", "nasion"};

BilateralPairing pairing_for(const std::vector<std::string>& order) {
    BilateralPairing p;
    p.pairs = bilateral_pairs_present(order);
    return p;
}

FitnessBreakdown wrap(double total) {
    FitnessBreakdown b;
    b.total = total;
    return b;
}

// Interior-optimum sphere function over the genotype components.
FitnessBreakdown sphere(const Genotype& g) {
    double s = 0.0;
    for (double v : g.values) s += (v - 0.5) * (v - 0.5);
    return wrap(s);
}

}  // namespace

TEST_CASE("seeded stream fundamentals") {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) {
        double u = a.uniform01();
        CHECK(u == b.uniform01());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(mix_seed(7, 1) != mix_seed(7, 2));
    CHECK(mix_seed(7, 1, 3) != mix_seed(7, 1, 4));
    Rng c(mix_seed(7, 1));
    Rng d(mix_seed(7, 2));
    CHECK(c.uniform01() != d.uniform01());
}

TEST_CASE("population initialization") {
    DEConfig cfg;
    cfg.population_size = 40;

    SUBCASE("fixed seed reproduces the population") {
        Rng r1(9), r2(9);
        auto p1 = initialize_population(cfg, r1, pairing_for(kOrder), kOrder);
        auto p2 = initialize_population(cfg, r2, pairing_for(kOrder), kOrder);
        REQUIRE(p1.size() == p2.size());
        for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i].values == p2[i].values);
    }
    SUBCASE("components live in the unit cube with uniform unpaired means") {
        cfg.population_size = 10000;
        Rng rng(5);
        auto pop = initialize_population(cfg, rng, pairing_for(kOrder), kOrder);
        // gnathion p1 is an unpaired dimension: index 2*3+0.
        double mean = 0.0;
        for (const Genotype& g : pop) {
            for (double v : g.values) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
            mean += g.values[6];
        }
        mean /= static_cast<double>(pop.size());
        CHECK(mean > 0.45);
        CHECK(mean < 0.55);
    }
}

TEST_CASE("rand/1 mutation") {
    Rng seed_rng(31);
    DEConfig cfg;
    cfg.population_size = 8;
    auto pop = initialize_population(cfg, seed_rng, pairing_for(kOrder), kOrder);

    SUBCASE("identical difference operands give the base vector") {
        auto clone = pop;
        clone[3] = clone[2];  // any r2 == r3 would do; force them all equal
        for (auto& g : clone) g = clone[2];
        Rng rng(77);
        Genotype donor = mutate_rand1(clone, 0, 0.7, rng);
        CHECK(donor.values == clone[2].values);
    }
    SUBCASE("zero weight gives the base vector") {
        Rng rng(78);
        Rng probe = rng;  // copy replays the index draws
        Genotype donor = mutate_rand1(pop, 2, 0.0, rng);
        int r1;
        do r1 = static_cast<int>(probe.uniform_int(8)); while (r1 == 2);
        CHECK(donor.values == pop[r1].values);
    }
    SUBCASE("matches the clamped formula oracle") {
        for (int trial = 0; trial < 500; ++trial) {
            Rng rng(1000 + trial);
            Rng probe = rng;
            Genotype donor = mutate_rand1(pop, trial % 8, 0.7, rng);
            int t = trial % 8, r1, r2, r3;
            do r1 = static_cast<int>(probe.uniform_int(8)); while (r1 == t);
            do r2 = static_cast<int>(probe.uniform_int(8)); while (r2 == t || r2 == r1);
            do r3 = static_cast<int>(probe.uniform_int(8));
            while (r3 == t || r3 == r1 || r3 == r2);
            for (std::size_t k = 0; k < donor.values.size(); ++k) {
                double v = pop[r1].values[k] + 0.7 * (pop[r2].values[k] - pop[r3].values[k]);
                CHECK(donor.values[k] == std::clamp(v, 0.0, 1.0));
            }
        }
    }
    SUBCASE("tiny populations are rejected") {
        std::vector<Genotype> three(pop.begin(), pop.begin() + 3);
        Rng rng(1);
        CHECK_THROWS_AS(mutate_rand1(three, 0, 0.7, rng), Error);
    }
}

TEST_CASE("exponential crossover") {
    Genotype target{std::vector<double>(12, 0.0), kOrder};
    Genotype donor{std::vector<double>(12, 1.0), kOrder};

    SUBCASE("rate one copies every component") {
        Rng rng(3);
        Genotype trial = crossover_exp(target, donor, 1.0, rng);
        for (double v : trial.values) CHECK(v == 1.0);
    }
    SUBCASE("rate zero copies exactly one component") {
        Rng rng(4);
        for (int i = 0; i < 100; ++i) {
            Genotype trial = crossover_exp(target, donor, 0.0, rng);
            int ones = 0;
            for (double v : trial.values) ones += v == 1.0;
            CHECK(ones == 1);
        }
    }
    SUBCASE("copied components form one wrapping run") {
        Rng rng(5);
        for (int i = 0; i < 200; ++i) {
            Genotype trial = crossover_exp(target, donor, 0.9, rng);
            // Count 1->0 falling edges around the cycle; a single run has one.
            int edges = 0;
            for (int k = 0; k < 12; ++k)
                if (trial.values[k] == 1.0 && trial.values[(k + 1) % 12] == 0.0) ++edges;
            int ones = 0;
            for (double v : trial.values) ones += v == 1.0;
            CHECK(ones >= 1);
            if (ones < 12) CHECK(edges == 1);
        }
    }
    SUBCASE("run lengths follow the truncated geometric law") {
        const double cr = 0.9;
        const int d = 12, n = 100000;
        std::vector<int> counts(d + 1, 0);
        Rng rng(271);
        for (int i = 0; i < n; ++i) {
            Genotype trial = crossover_exp(target, donor, cr, rng);
            int ones = 0;
            for (double v : trial.values) ones += v == 1.0;
            ++counts[ones];
        }
        double chi2 = 0.0;
        for (int k = 1; k <= d; ++k) {
            double p = (k < d) ? (1.0 - cr) * std::pow(cr, k - 1) : std::pow(cr, d - 1);
            double expect = n * p;
            chi2 += (counts[k] - expect) * (counts[k] - expect) / expect;
        }
        // chi-square 0.99 quantile, 11 degrees of freedom.
        CHECK(chi2 < 24.725);
    }
    SUBCASE("length mismatch is rejected") {
        Genotype short_donor{std::vector<double>(3, 1.0), {"nasion"}};
        Rng rng(6);
        CHECK_THROWS_AS(crossover_exp(target, short_donor, 0.9, rng), LengthMismatch);
    }
}

TEST_CASE("generational loop") {
    DEConfig cfg;
    cfg.population_size = 40;
    cfg.max_generations = 100;
    cfg.max_seconds = 0.0;
    cfg.seed = 99;

    SUBCASE("constant fitness keeps the first-evaluated best and a flat trace") {
        RunResult r = evolve([](const Genotype&) { return wrap(42.0); }, cfg,
                             pairing_for(kOrder), kOrder);
        for (double f : r.trace.best_fitness) CHECK(f == 42.0);
        Rng rng(cfg.seed);
        auto pop = initialize_population(cfg, rng, pairing_for(kOrder), kOrder);
        CHECK(r.best.values == pop[0].values);
    }
    SUBCASE("sphere collapses by three orders of magnitude") {
        // 6-dimensional stub: two unpaired landmarks.
        const std::vector<std::string> small = {"gnathion", "nasion"};
        RunResult r = evolve(sphere, cfg, pairing_for(small), small);
        REQUIRE(r.trace.best_fitness.size() == 101);
        CHECK(r.trace.best_fitness.back() < 1e-3 * r.trace.best_fitness.front());
        for (std::size_t i = 1; i < r.trace.best_fitness.size(); ++i)
            CHECK(r.trace.best_fitness[i] <= r.trace.best_fitness[i - 1]);
        CHECK(r.trace.evaluations == 40LL * 101LL);
        CHECK(r.trace.stop == StopReason::Generations);
    }
    SUBCASE("identical runs for any thread count") {
        RunResult a = evolve(sphere, cfg, pairing_for(kOrder), kOrder, 1);
        RunResult b = evolve(sphere, cfg, pairing_for(kOrder), kOrder, 4);
        CHECK(a.best.values == b.best.values);
        CHECK(a.trace.best_fitness == b.trace.best_fitness);
        CHECK(a.best_breakdown.total == b.best_breakdown.total);
    }
    SUBCASE("wall-clock budget stops the loop") {
        DEConfig slow = cfg;
        slow.max_generations = 1000000;
        slow.max_seconds = 0.05;
        RunResult r = evolve(
            [](const Genotype& g) {
                volatile double burn = 0;
                for (int i = 0; i < 20000; ++i) burn = burn + i * 1e-9;
                return sphere(g);
            },
            slow, pairing_for(kOrder), kOrder);
        CHECK(r.trace.stop == StopReason::TimeBudget);
        CHECK(r.trace.best_fitness.size() < 1000001);
        CHECK(r.trace.elapsed_seconds >= 0.05);
    }
}

TEST_CASE("full overlay optimization reaches the floor on clean cases") {
    MorphologyParams mp;
    mp.mesh_rings = 18;
    mp.mesh_segments = 24;
    mp.depth_table = load_population_depths();
    CameraParams cp;
    cp.width = 320;
    cp.height = 240;
    SyntheticSubject subj = generate_subject(404, mp, "d1");
    CaseBundle bundle = render_case(subj, PoseKind::Frontal, cp, 11, "d1_f");
    ensure_regions(bundle.skull);

    FitnessConfig fc;
    fc.raster_scale = 0.5;
    DEConfig dc;
    dc.population_size = 50;
    dc.max_generations = 200;
    dc.max_seconds = 0.0;

    int good = 0;
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        dc.seed = seed;
        RunResult r = run_case(bundle, bundle.skull, fc, dc);
        if (r.best_breakdown.mse_pix < 4.0 && r.best_breakdown.p_cam == 0.0 &&
            r.best_breakdown.p_skof == 0.0)
            ++good;
    }
    CHECK(good >= 4);
}
