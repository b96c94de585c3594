#pragma once

#include "hypmild/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hypmild {

struct Sample {
    std::string id;
    RadialField field;
};

/// Twelve test profiles: Gaussians, shifted bumps, compactly supported plateaus and
/// oscillatory bumps. A seed jitters every shape parameter by up to 10%.
std::vector<Sample> sample_library(const GridPtr& grid, std::optional<std::uint64_t> seed = std::nullopt);

/// C-infinity step: 0 for x <= 0, 1 for x >= 1.
double smooth_step(double x);

}  // namespace hypmild
