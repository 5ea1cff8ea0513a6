// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef RISBF_CHANNEL_HPP
#define RISBF_CHANNEL_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "risbf/types.hpp"

namespace risbf {

/// Large-scale fading description. The composite UT-RIS-BS path loss is
/// split equally between the two hops: each per-entry variance is
/// 10^(pathloss_db/20), so their product equals the composite
/// 10^(pathloss_db/10).
struct FadingSpec {
    double pathloss_db = -120.0;

    enum class SplitRule { kEqualSplit } split = SplitRule::kEqualSplit;

    /// Per-entry variance of each hop under the equal split.
    double hop_variance() const;

    void validate() const;
};

/// Draws i.i.d. Rayleigh-fading channels: every entry of G and of each H_k
/// is circularly symmetric complex Gaussian with the hop variance.
/// Deterministic given (cfg, fading, seed); the matrices G, H_1, ..., H_K
/// use independent substreams of the seed.
ChannelRealization generate_realization(const SystemConfig& cfg, const FadingSpec& fading,
                                        std::uint64_t seed);

/// Writes realizations as JSON Lines: one structured text record per
/// realization with row-major [re, im] pairs. Doubles are printed with
/// shortest round-trip precision, so load reproduces them exactly.
void save_realizations(std::ostream& out, const std::vector<ChannelRealization>& realizations);
void save_realizations(const std::string& path,
                       const std::vector<ChannelRealization>& realizations);

std::vector<ChannelRealization> load_realizations(std::istream& in);
std::vector<ChannelRealization> load_realizations(const std::string& path);

} // namespace risbf

#endif // RISBF_CHANNEL_HPP
