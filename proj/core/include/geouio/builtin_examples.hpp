#pragma once

// The two worked examples shipped with the tool: a 3-state plant with one unknown
// input observed centrally, and a 6-state plant watched by four sensor nodes on a ring.

#include <optional>
#include <string>

#include "geouio/config.hpp"

namespace geouio {

ProjectConfig builtin_centralized();
ProjectConfig builtin_distributed();

/// "centralized" or "distributed"; nullopt for anything else.
std::optional<ProjectConfig> builtin_example(const std::string& which);

}  // namespace geouio
