#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sfo/geometry.hpp"
#include "sfo/rng.hpp"

namespace sfo {

// Admissible region for one landmark's soft-tissue vector: a cone with apex
// at the cranial landmark, opening around `axis` within `aperture_max_deg`,
// vector length restricted to [depth_min, depth_max] millimetres.
struct ConeSpec {
    std::string landmark_name;
    Vec3 apex = Vec3::Zero();
    Vec3 axis = Vec3::UnitZ();  // unit length
    double depth_min = 0.0;     // > 0
    double depth_max = 0.0;     // >= depth_min
    double aperture_max_deg = 40.0;  // in [0, 40]

    void validate() const;
};

// Candidate solution: three normalized parameters per landmark, landmark
// order fixed by `landmark_order`. Layout: values[3*i + k] holds parameter
// k of landmark_order[i].
struct Genotype {
    std::vector<double> values;
    std::vector<std::string> landmark_order;

    std::size_t landmark_count() const { return landmark_order.size(); }
    std::array<double, 3> params(std::size_t i) const {
        return {values[3 * i], values[3 * i + 1], values[3 * i + 2]};
    }
    void validate() const;
};

struct BilateralPairing {
    std::vector<std::pair<std::string, std::string>> pairs;
    double coupling_weight = 0.9;  // in [0, 1]
};

// Deterministic azimuth reference perpendicular to `axis`: axis x +Z,
// falling back to axis x +X when axis is parallel to +Z within 1e-6.
Vec3 azimuth_reference(const Vec3& axis);

// Maps normalized (p1, p2, p3) in [0,1]^3 to a soft-tissue vector:
// length depth_min + p1*(depth_max - depth_min), polar angle from the axis
// p2*aperture_max, azimuth p3*360 degrees about the axis measured from the
// azimuth reference. Throws DegenerateAxis when axis is not unit length.
Vec3 decode_cone(const ConeSpec& spec, double p1, double p2, double p3);

// Inverse of decode_cone for vectors inside the cone; exact round trip for
// strictly interior vectors. On-axis vectors get azimuth 0.
std::array<double, 3> encode_cone(const ConeSpec& spec, const Vec3& st);

// Facial landmark positions apex_i + decoded vector per genotype landmark.
// Throws MissingSpec when a landmark in the genotype has no cone.
std::vector<std::pair<std::string, Vec3>> genotype_to_facial_landmarks(
    const Genotype& g, const std::map<std::string, ConeSpec>& specs);

// Random genotype in [0,1]^3n. Unpaired landmarks draw three independent
// uniforms; for each bilateral pair the first member draws independently and
// the second blends coupling_weight of the first with fresh draws.
Genotype sample_with_bilateral_coupling(Rng& rng, const BilateralPairing& pairing,
                                        const std::vector<std::string>& landmark_order);

}  // namespace sfo
