#include "sfo/case.hpp"

#include "sfo/landmarks.hpp"

namespace sfo {

void ensure_regions(SkullInput& skull) {
    if (!skull.chin_region)
        skull.chin_region =
            segment_region(skull.mesh, RegionKind::ChinJaw, skull.cranial_landmarks,
                           skull.frankfurt_normal);
    if (!skull.forehead_region)
        skull.forehead_region =
            segment_region(skull.mesh, RegionKind::Forehead, skull.cranial_landmarks,
                           skull.frankfurt_normal);
}

std::map<std::string, Vec2> CaseBundle::observed_2d_by_cranial() const {
    std::map<std::string, Vec2> out;
    for (const auto& entry : visibility) {
        auto it = facial_landmarks_2d.find(facial_name_for(entry.first));
        if (it != facial_landmarks_2d.end()) out[entry.first] = it->second;
    }
    return out;
}

}  // namespace sfo
