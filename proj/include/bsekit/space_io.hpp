#pragma once

#include "bsekit/filtered_space.hpp"

#include <json.hpp>

namespace bsekit {

/// `{"times": [...], "levels": [[[p, ...], ...], ...]}` where levels[k][i]
/// lists the child probabilities of node i at level k.
nlohmann::json space_to_json(const FiniteFilteredSpace& space);
FiniteFilteredSpace space_from_json(const nlohmann::json& doc);

}  // namespace bsekit
