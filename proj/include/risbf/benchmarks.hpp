// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef RISBF_BENCHMARKS_HPP
#define RISBF_BENCHMARKS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "risbf/so.hpp"
#include "risbf/types.hpp"

namespace risbf {

struct AoOptions {
    int max_rounds = 30;
    double tol = 1e-6; // relative sum-rate change between rounds
    SoOptions so;

    void validate() const;
};

/// Baseline with a uniformly random antenna subset, uniformly random
/// quantized phases, and isotropic transmission: the precoders realize
/// Q_k = (p_k / N_k) I on the first L_k antennas.
DesignState random_design(const ChannelRealization& ch, const SystemConfig& cfg,
                          std::uint64_t seed);

/// Alternating benchmark built from the sequential-optimization stages:
/// warm-started phase ascent on the gain surrogate of the currently selected
/// antennas, greedy re-selection, and water-filled precoders, repeated until
/// the sum rate stalls. Returns the design and the per-round sum-rate trace.
std::pair<DesignState, std::vector<double>> ao_solve(const ChannelRealization& ch,
                                                     const SystemConfig& cfg,
                                                     const AoOptions& opts, std::uint64_t seed);

} // namespace risbf

#endif // RISBF_BENCHMARKS_HPP
