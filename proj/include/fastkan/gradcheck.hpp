#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fastkan/network.hpp"

namespace fastkan {

struct GradCheckCase {
    std::string name;
    double max_rel_err = 0.0;
    bool pass = false;
};

struct GradCheckSummary {
    double tolerance = 0.0;
    std::vector<GradCheckCase> cases;
    bool all_pass = false;

    const GradCheckCase* worst() const;
};

// Central finite-difference validation (eps = 1e-5) of every backward
// implementation: each layer kind in isolation plus whole toy networks for
// both basis families. Checks all parameters and the inputs. The numeric side
// uses forward passes only, so it is independent of the backward code it
// validates. `family` restricts the basis-specific cases.
GradCheckSummary run_gradcheck(double tolerance, std::optional<BasisKind> family,
                               std::uint64_t seed);

} // namespace fastkan
