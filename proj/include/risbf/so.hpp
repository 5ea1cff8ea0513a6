// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef RISBF_SO_HPP
#define RISBF_SO_HPP

#include <cstdint>
#include <vector>

#include "risbf/model.hpp"
#include "risbf/types.hpp"

namespace risbf {

// Low-complexity sequential pipeline: element-wise coordinate ascent on the
// effective channel gain for the phases, greedy log-det maximization for the
// antenna subset, and cyclic per-user water-filling for the precoders.

struct SoOptions {
    int ewbcd_sweeps = 20;     // max full passes over the RIS elements
    double ewbcd_tol = 1e-6;   // relative gain-objective improvement
    int iwf_max_rounds = 100;
    double iwf_tol = 1e-8;     // relative sum-rate change per round
    double wf_tol = 1e-10;     // water-level bisection tolerance

    void validate() const;
};

/// Isotropic-input channel gram sum_k (p_k / N_k) H_k H_k^H, M x M.
arma::cx_mat weighted_user_gram(const std::vector<arma::cx_mat>& H, const std::vector<double>& p,
                                const std::vector<int>& user_antennas);

/// Phase-design surrogate (G^H G) o Htilde^T; Hermitian PSD by the Schur
/// product theorem.
arma::cx_mat gain_matrix(const arma::cx_mat& G, const std::vector<arma::cx_mat>& H,
                         const std::vector<double>& p, const std::vector<int>& user_antennas);

/// Element-wise coordinate ascent of phi^H H_hat phi over the quantized
/// phases. Each element moves to the set member aligned with its coupling
/// sum; a vanishing coupling leaves the element unchanged. The objective
/// never decreases across single-element updates. When objective_trace is
/// given it receives the objective after every full sweep.
arma::cx_vec ewbcd_phases(const arma::cx_mat& H_hat, int q_bits, const arma::cx_vec& phi_init,
                          const SoOptions& opts, std::vector<double>* objective_trace = nullptr);

/// Greedy antenna subset of size T maximizing
/// log2 det(I + sigma^-2 X restricted to the subset), grown one antenna per
/// round with rank-one Cholesky extensions. Ties resolve to the lowest
/// index. Returns the binary indicator vector.
arma::vec greedy_selection(const arma::cx_mat& X, double sigma2, int T);

/// Classic water-filling over nonnegative channel gains: at most max_modes
/// of the strongest eigenvalues receive power, active modes share a common
/// water level found by bisection, and the returned powers (aligned with
/// the input order) sum to the budget.
arma::vec waterfill(const arma::vec& eigenvalues, double budget, int max_modes, double tol);

/// Cyclic per-user water-filling for the multiple-access sum rate
/// log2 det(I + sum_k G_k Q_k G_k^H). G_eff[k] must already include the
/// selection, phases, and 1/sigma scaling. Returns N_k x L_k precoders;
/// rate_trace (when given) receives the sum rate after every user update.
std::vector<arma::cx_mat> iterative_waterfilling(const std::vector<arma::cx_mat>& G_eff,
                                                 const std::vector<double>& p,
                                                 const std::vector<int>& user_streams,
                                                 const SoOptions& opts,
                                                 std::vector<double>* rate_trace = nullptr);

/// Full pipeline: phases from a random quantized start, then selection, then
/// precoders. The returned design is always feasible.
DesignState so_solve(const ChannelRealization& ch, const SystemConfig& cfg, const SoOptions& opts,
                     std::uint64_t seed);

} // namespace risbf

#endif // RISBF_SO_HPP
