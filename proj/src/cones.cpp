#include "sfo/cones.hpp"

#include <cmath>

namespace sfo {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void ConeSpec::validate() const {
    if (std::abs(axis.norm() - 1.0) > 1e-6) throw DegenerateAxis("cone axis not unit length");
    if (depth_min <= 0.0) throw Error("depth_min must be positive");
    if (depth_max < depth_min) throw Error("depth_max below depth_min");
    if (aperture_max_deg < 0.0 || aperture_max_deg > 40.0)
        throw Error("aperture outside [0, 40] degrees");
}

void Genotype::validate() const {
    if (values.size() != 3 * landmark_order.size())
        throw LengthMismatch("genotype length is not 3x landmark count");
    for (double v : values)
        if (!(v >= 0.0 && v <= 1.0)) throw Error("genotype value outside [0, 1]");
}

Vec3 azimuth_reference(const Vec3& axis) {
    Vec3 ref = axis.cross(Vec3::UnitZ());
    if (ref.norm() < 1e-6) ref = axis.cross(Vec3::UnitX());
    return ref.normalized();
}

Vec3 decode_cone(const ConeSpec& spec, double p1, double p2, double p3) {
    if (std::abs(spec.axis.norm() - 1.0) > 1e-6)
        throw DegenerateAxis("cone axis not unit length: " + spec.landmark_name);
    double depth = spec.depth_min + p1 * (spec.depth_max - spec.depth_min);
    double theta = deg2rad(p2 * spec.aperture_max_deg);
    double phi = 2.0 * kPi * p3;
    Vec3 u = azimuth_reference(spec.axis);
    Vec3 v = spec.axis.cross(u);
    Vec3 dir = std::cos(theta) * spec.axis +
               std::sin(theta) * (std::cos(phi) * u + std::sin(phi) * v);
    return depth * dir;
}

std::array<double, 3> encode_cone(const ConeSpec& spec, const Vec3& st) {
    if (std::abs(spec.axis.norm() - 1.0) > 1e-6)
        throw DegenerateAxis("cone axis not unit length: " + spec.landmark_name);
    double depth = st.norm();
    if (depth <= 0.0) throw Error("zero-length soft-tissue vector");
    double range = spec.depth_max - spec.depth_min;
    double p1 = range > 0.0 ? (depth - spec.depth_min) / range : 0.0;
    Vec3 dir = st / depth;
    double theta = std::acos(std::clamp(dir.dot(spec.axis), -1.0, 1.0));
    double p2 = spec.aperture_max_deg > 0.0 ? rad2deg(theta) / spec.aperture_max_deg : 0.0;
    double p3 = 0.0;
    if (theta > 1e-12) {
        Vec3 u = azimuth_reference(spec.axis);
        Vec3 v = spec.axis.cross(u);
        double phi = std::atan2(dir.dot(v), dir.dot(u));
        if (phi < 0.0) phi += 2.0 * kPi;
        p3 = phi / (2.0 * kPi);
    }
    return {p1, p2, p3};
}

std::vector<std::pair<std::string, Vec3>> genotype_to_facial_landmarks(
    const Genotype& g, const std::map<std::string, ConeSpec>& specs) {
    std::vector<std::pair<std::string, Vec3>> out;
    out.reserve(g.landmark_count());
    for (std::size_t i = 0; i < g.landmark_count(); ++i) {
        const std::string& name = g.landmark_order[i];
        auto it = specs.find(name);
        if (it == specs.end()) throw MissingSpec("no cone spec for landmark: " + name);
        auto p = g.params(i);
        out.emplace_back(name, it->second.apex + decode_cone(it->second, p[0], p[1], p[2]));
    }
    return out;
}

Genotype sample_with_bilateral_coupling(Rng& rng, const BilateralPairing& pairing,
                                        const std::vector<std::string>& landmark_order) {
    const double w = pairing.coupling_weight;
    std::map<std::string, const std::string*> second_to_first;
    for (const auto& pr : pairing.pairs) second_to_first[pr.second] = &pr.first;

    Genotype g;
    g.landmark_order = landmark_order;
    g.values.assign(3 * landmark_order.size(), 0.0);
    std::map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < landmark_order.size(); ++i) slot[landmark_order[i]] = i;

    // First pass draws all independent triples in canonical order; second
    // pass fills coupled members so the blend sees the partner's values.
    for (std::size_t i = 0; i < landmark_order.size(); ++i) {
        if (second_to_first.count(landmark_order[i])) continue;
        for (int k = 0; k < 3; ++k) g.values[3 * i + k] = rng.uniform01();
    }
    for (std::size_t i = 0; i < landmark_order.size(); ++i) {
        auto it = second_to_first.find(landmark_order[i]);
        if (it == second_to_first.end()) continue;
        auto first_slot = slot.find(*it->second);
        if (first_slot == slot.end()) {
            // Partner absent from this genotype: fall back to independent draws.
            for (int k = 0; k < 3; ++k) g.values[3 * i + k] = rng.uniform01();
            continue;
        }
        for (int k = 0; k < 3; ++k) {
            double fresh = rng.uniform01();
            g.values[3 * i + k] = w * g.values[3 * first_slot->second + k] + (1.0 - w) * fresh;
        }
    }
    return g;
}

}  // namespace sfo
