#include "sfo/landmarks.hpp"

#include <algorithm>
#include <map>

#include "sfo/errors.hpp"

namespace sfo {

const std::vector<std::string>& canonical_landmark_order() {
    static const std::vector<std::string> order = {
        "ectoconchion_l", "ectoconchion_r",
        "gonion_l",       "gonion_r",
        "prosthion",      "glabella",
        "bregma",         "metopion",
        "dacryon_l",      "dacryon_r",
        "zygion_l",       "zygion_r",
        "alare_l",        "alare_r",
        "frontotemporale_l", "frontotemporale_r",
        "nasion",         "pogonion",
        "gnathion",       "subspinale",
    };
    return order;
}

const std::vector<std::pair<std::string, std::string>>& bilateral_pairs() {
    static const std::vector<std::pair<std::string, std::string>> pairs = {
        {"ectoconchion_l", "ectoconchion_r"},
        {"gonion_l", "gonion_r"},
        {"dacryon_l", "dacryon_r"},
        {"zygion_l", "zygion_r"},
        {"alare_l", "alare_r"},
        {"frontotemporale_l", "frontotemporale_r"},
    };
    return pairs;
}

std::vector<std::pair<std::string, std::string>> bilateral_pairs_present(
    const std::vector<std::string>& order) {
    std::vector<std::pair<std::string, std::string>> out;
    auto has = [&](const std::string& n) {
        return std::find(order.begin(), order.end(), n) != order.end();
    };
    for (const auto& pr : bilateral_pairs())
        if (has(pr.first) && has(pr.second)) out.push_back(pr);
    return out;
}

const std::string& facial_name_for(const std::string& cranial) {
    // Bony landmarks whose skin counterpart carries a different name.
    static const std::map<std::string, std::string> table = {
        {"ectoconchion_l", "exocanthion_l"},
        {"ectoconchion_r", "exocanthion_r"},
        {"dacryon_l", "endocanthion_l"},
        {"dacryon_r", "endocanthion_r"},
        {"prosthion", "labiale_superius"},
        {"subspinale", "subnasale"},
    };
    auto it = table.find(cranial);
    if (it != table.end()) return it->second;
    if (!is_canonical_landmark(cranial))
        throw MissingLandmark("unknown cranial landmark: " + cranial);
    return cranial;
}

bool is_canonical_landmark(const std::string& name) {
    const auto& order = canonical_landmark_order();
    return std::find(order.begin(), order.end(), name) != order.end();
}

}  // namespace sfo
