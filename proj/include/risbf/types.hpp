// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef RISBF_TYPES_HPP
#define RISBF_TYPES_HPP

#include <armadillo>
#include <complex>
#include <cstdint>
#include <vector>

namespace risbf {

/// Sentinel for continuously tunable reflector phases (no quantization).
constexpr int kContinuousPhases = -1;

/// Static system dimensions and budgets. Immutable for the lifetime of an
/// experiment; power quantities are linear milliwatts.
struct SystemConfig {
    int n_antennas = 16;     // receive antennas at the BS
    int n_rf_chains = 6;     // RF chains, strictly fewer than antennas
    int n_ris_elements = 32; // reflecting elements
    int q_bits = 4;          // phase quantization bits, or kContinuousPhases
    int n_users = 4;

    std::vector<int> user_antennas;      // per user
    std::vector<int> user_streams;       // per user, at most user_antennas[k]
    std::vector<double> power_budget_mw; // per user, > 0
    double noise_power_mw = 1e-12;       // -120 dBm

    /// Total number of data streams across users.
    int total_streams() const;

    /// Index of user k's first stream in the stacked stream ordering.
    int stream_offset(int k) const;

    bool continuous_phases() const { return q_bits == kContinuousPhases; }

    /// Throws std::invalid_argument when any dimension or budget is
    /// inconsistent.
    void validate() const;
};

/// One draw of the random channels: ris_to_bs is N x M, user_to_ris[k] is
/// M x N_k.
struct ChannelRealization {
    arma::cx_mat ris_to_bs;
    std::vector<arma::cx_mat> user_to_ris;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument when matrix shapes disagree with cfg or
    /// entries are not finite.
    void validate(const SystemConfig& cfg) const;
};

/// The decision variables of the design problem.
struct DesignState {
    arma::vec selection;                 // length N; binary once finalized
    arma::cx_vec phases;                 // length M, unit modulus
    std::vector<arma::cx_mat> precoders; // precoders[k] is N_k x L_k
};

/// Checks the feasibility contract of a finalized design: selection binary
/// with exactly T ones, unit-modulus (and quantized, when applicable)
/// phases, and per-user transmit power within budget. Throws
/// std::invalid_argument on the first violation.
void validate_design(const DesignState& state, const SystemConfig& cfg);

/// Auxiliary matrices of the weighted-MMSE reformulation. weight and mse are
/// L x L Hermitian, receiver is N x L.
struct WmmseState {
    arma::cx_mat weight;
    arma::cx_mat receiver;
    arma::cx_mat mse;
};

} // namespace risbf

#endif // RISBF_TYPES_HPP
