#include <doctest.h>

#include <cmath>

#include "sfo/cones.hpp"
#include "sfo/landmarks.hpp"

using namespace sfo;

namespace {

ConeSpec make_spec(const Vec3& axis, double dmin = 4.0, double dmax = 12.0,
                   double aperture = 40.0) {
    ConeSpec s;
    s.landmark_name = "probe";
    s.apex = Vec3(1, 2, 3);
    s.axis = axis.normalized();
    s.depth_min = dmin;
    s.depth_max = dmax;
    s.aperture_max_deg = aperture;
    return s;
}

Vec3 random_axis(Rng& rng) {
    Vec3 a(rng.normal(), rng.normal(), rng.normal());
    while (a.norm() < 1e-6) a = Vec3(rng.normal(), rng.normal(), rng.normal());
    return a.normalized();
}

}  // namespace

TEST_CASE("canonical landmark catalogue") {
    auto order = canonical_landmark_order();
    // Frozen: genotype layout is positional in this exact sequence.
    const std::vector<std::string> expected = {
        "ectoconchion_l", "ectoconchion_r", "gonion_l", "gonion_r", "prosthion",
        "glabella", "bregma", "metopion", "dacryon_l", "dacryon_r",
        "zygion_l", "zygion_r", "alare_l", "alare_r", "frontotemporale_l",
        "frontotemporale_r", "nasion", "pogonion", "gnathion", "subspinale",
    };
    CHECK(order == expected);
    CHECK(bilateral_pairs().size() == 6);
    for (const auto& [l, r] : bilateral_pairs()) {
        CHECK(l.substr(l.size() - 2) == "_l");
        CHECK(r.substr(r.size() - 2) == "_r");
        CHECK(l.substr(0, l.size() - 2) == r.substr(0, r.size() - 2));
    }
    CHECK(facial_name_for("ectoconchion_l") == "exocanthion_l");
    CHECK(facial_name_for("dacryon_r") == "endocanthion_r");
    CHECK(facial_name_for("prosthion") == "labiale_superius");
    CHECK(facial_name_for("subspinale") == "subnasale");
    CHECK(facial_name_for("nasion") == "nasion");
    CHECK(facial_name_for("zygion_l") == "zygion_l");
}

TEST_CASE("cone decode hits the documented anchors") {
    Rng rng(2024);
    for (int i = 0; i < 200; ++i) {
        ConeSpec s = make_spec(random_axis(rng), rng.uniform(1.0, 5.0), rng.uniform(5.0, 20.0),
                               rng.uniform(5.0, 40.0));
        double p1 = rng.uniform01();
        double p3 = rng.uniform01();

        // Aperture fraction zero stays exactly on the axis at interpolated depth.
        Vec3 on_axis = decode_cone(s, p1, 0.0, p3);
        double depth = s.depth_min + p1 * (s.depth_max - s.depth_min);
        CHECK((on_axis - depth * s.axis).norm() < 1e-12 * std::max(1.0, depth));

        // Full aperture at minimal depth: norm depth_min, angle = aperture_max.
        Vec3 rim = decode_cone(s, 0.0, 1.0, p3);
        CHECK(rim.norm() == doctest::Approx(s.depth_min).epsilon(1e-12));
        double angle = rad2deg(std::acos(std::clamp(rim.normalized().dot(s.axis), -1.0, 1.0)));
        CHECK(angle == doctest::Approx(s.aperture_max_deg).epsilon(1e-9));

        // Opposite azimuths reflect across the axis: same norm and axis angle,
        // and their midpoint direction lies on the axis.
        double p2 = rng.uniform(0.1, 1.0);
        Vec3 a = decode_cone(s, p1, p2, 0.0);
        Vec3 b = decode_cone(s, p1, p2, 0.5);
        CHECK(a.norm() == doctest::Approx(b.norm()).epsilon(1e-12));
        CHECK(a.dot(s.axis) == doctest::Approx(b.dot(s.axis)).epsilon(1e-9));
        CHECK(((a + b).normalized() - s.axis).norm() < 1e-9);

        // Azimuth 1.0 wraps to azimuth 0.
        Vec3 wrap = decode_cone(s, p1, p2, 1.0);
        CHECK((wrap - a).norm() < 1e-9);
    }
}

TEST_CASE("cone encode inverts decode for interior vectors") {
    Rng rng(600613);
    for (int i = 0; i < 10000; ++i) {
        ConeSpec s = make_spec(random_axis(rng), rng.uniform(1.0, 6.0), rng.uniform(7.0, 20.0),
                               rng.uniform(10.0, 40.0));
        double p1 = rng.uniform(0.01, 0.99);
        double p2 = rng.uniform(0.01, 0.99);
        double p3 = rng.uniform(0.01, 0.99);
        Vec3 st = decode_cone(s, p1, p2, p3);
        auto q = encode_cone(s, st);
        CHECK(std::abs(q[0] - p1) < 1e-9);
        CHECK(std::abs(q[1] - p2) < 1e-9);
        CHECK(std::abs(q[2] - p3) < 1e-9);
    }

    ConeSpec s = make_spec(Vec3(0, 1, 0));
    auto on_axis = encode_cone(s, 8.0 * s.axis);
    CHECK(on_axis[1] == doctest::Approx(0.0));
    CHECK(on_axis[2] == doctest::Approx(0.0));  // on-axis azimuth pinned to 0
}

TEST_CASE("azimuth reference is a stable perpendicular") {
    Rng rng(13);
    for (int i = 0; i < 500; ++i) {
        Vec3 axis = random_axis(rng);
        Vec3 u = azimuth_reference(axis);
        CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(u.dot(axis)) < 1e-9);
    }
    // Parallel-to-z fallback still yields a unit perpendicular.
    Vec3 u = azimuth_reference(Vec3(0, 0, 1));
    CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(u.z()) < 1e-9);
}

TEST_CASE("genotype decode maps parameter extremes to cone extremes") {
    std::map<std::string, ConeSpec> specs;
    std::vector<std::string> order = {"gnathion", "nasion", "pogonion"};
    Rng rng(9);
    for (const auto& name : order) {
        ConeSpec s = make_spec(random_axis(rng), 3.0, 11.0, 30.0);
        s.landmark_name = name;
        s.apex = Vec3(rng.normal(), rng.normal(), rng.normal());
        specs[name] = s;
    }
    Genotype zeros{std::vector<double>(9, 0.0), order};
    for (const auto& [name, f] : genotype_to_facial_landmarks(zeros, specs)) {
        const ConeSpec& s = specs[name];
        CHECK((f - (s.apex + s.depth_min * s.axis)).norm() < 1e-12);
    }
    Genotype ones{std::vector<double>(9, 1.0), order};
    for (const auto& [name, f] : genotype_to_facial_landmarks(ones, specs)) {
        const ConeSpec& s = specs[name];
        Vec3 st = f - s.apex;
        CHECK(st.norm() == doctest::Approx(s.depth_max).epsilon(1e-12));
        double angle = rad2deg(std::acos(std::clamp(st.normalized().dot(s.axis), -1.0, 1.0)));
        CHECK(angle == doctest::Approx(s.aperture_max_deg).epsilon(1e-6));
    }
    Genotype missing{std::vector<double>(3, 0.5), {"bregma"}};
    CHECK_THROWS_AS(genotype_to_facial_landmarks(missing, specs), MissingSpec);
}

TEST_CASE("bilateral coupling controls pair correlation") {
    std::vector<std::string> order = {"alare_l", "alare_r", "nasion"};
    BilateralPairing pairing;
    pairing.pairs = {{"alare_l", "alare_r"}};

    SUBCASE("weight 1 copies the pair exactly") {
        pairing.coupling_weight = 1.0;
        Rng rng(4242);
        for (int i = 0; i < 100; ++i) {
            Genotype g = sample_with_bilateral_coupling(rng, pairing, order);
            for (int k = 0; k < 3; ++k) CHECK(g.values[k] == g.values[3 + k]);
        }
    }
    SUBCASE("weight 0 decouples the pair") {
        pairing.coupling_weight = 0.0;
        Rng rng(4243);
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            Genotype g = sample_with_bilateral_coupling(rng, pairing, order);
            double x = g.values[0], y = g.values[3];
            sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
        }
        double r = (n * sxy - sx * sy) /
                   std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
        CHECK(std::abs(r) < 0.05);
    }
    SUBCASE("default weight gives the blend correlation") {
        pairing.coupling_weight = 0.9;
        Rng rng(4244);
        // y = 0.9 x + 0.1 u with x, u iid uniform: corr = 0.9/sqrt(0.81+0.01).
        double expect = 0.9 / std::sqrt(0.81 + 0.01);
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            Genotype g = sample_with_bilateral_coupling(rng, pairing, order);
            double x = g.values[0], y = g.values[3];
            sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
        }
        double r = (n * sxy - sx * sy) /
                   std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
        CHECK(std::abs(r - expect) < 0.03);
    }
    SUBCASE("all components stay inside the unit cube") {
        Rng rng(4245);
        for (int i = 0; i < 1000; ++i) {
            Genotype g = sample_with_bilateral_coupling(rng, pairing, order);
            for (double v : g.values) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    }
}
