#pragma once

#include <string>
#include <utility>
#include <vector>

namespace sfo {

// Canonical cranial landmark order used for genotype layout and all
// deterministic iteration. Index is stable across the whole pipeline.
const std::vector<std::string>& canonical_landmark_order();

// Left/right pairs among the canonical landmarks, (left, right).
const std::vector<std::pair<std::string, std::string>>& bilateral_pairs();

// Subset of bilateral_pairs() with both members present in `order`.
std::vector<std::pair<std::string, std::string>> bilateral_pairs_present(
    const std::vector<std::string>& order);

// Facial (skin) landmark name corresponding to a cranial landmark. Identity
// for names shared by both surfaces.
const std::string& facial_name_for(const std::string& cranial);

bool is_canonical_landmark(const std::string& name);

}  // namespace sfo
