#pragma once

#include <cstdint>
#include <vector>

#include "qoe/dataset/session.hpp"

namespace qoe::cli {

/// Synthetic session generator with two content clusters: low complexity
/// (TI and SI below 85) and high complexity (both above 85).
struct SynthParams {
    std::size_t n = 450;
    std::size_t g0_count = 353;  ///< sessions drawn from the low-complexity cluster
    std::size_t contents = 20;
    double noise_sd = 4.0;
    std::uint64_t seed = 0;
};

/// Noise-free MOS of a session before clamping to [0, 100]: a saturating
/// function of bitrate that needs more bitrate for complex content, minus
/// stall penalties.
double synthetic_mos_mean(const dataset::SessionRecord& session);

/// Throws ConfigError unless 0 < g0_count < n and contents ≥ 2.
std::vector<dataset::SessionRecord> synthesize(const SynthParams& params);

}  // namespace qoe::cli
