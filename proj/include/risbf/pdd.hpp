// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef RISBF_PDD_HPP
#define RISBF_PDD_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "risbf/model.hpp"
#include "risbf/types.hpp"

namespace risbf {

// Penalty dual decomposition solver for the joint selection / phase /
// precoder design. The mixed-integer structure is relaxed by auxiliary
// copies: sbar mirrors the selection vector (with s_n(1 - sbar_n) = 0
// enforcing binariness) and v mirrors the phase vector inside the quantized
// set. The inner loop runs exact block-coordinate minimization of the
// augmented Lagrangian; the outer loop switches between dual updates and
// penalty tightening based on the constraint violation.

/// Multiplier estimates for the four equality-constraint families.
struct DualVariables {
    double sum_to_budget = 0.0;  // 1^T s = T
    arma::vec aux_match;         // sbar_n = s_n
    arma::vec binary_product;    // s_n (1 - sbar_n) = 0
    arma::cx_vec phase_match;    // phi_m = v_m
};

/// Full solver state. selection and phases are unconstrained during the
/// iterations; phases_quant always holds exact members of the phase set.
struct PddState {
    WmmseState wmmse;
    arma::vec selection;
    arma::vec selection_aux;
    arma::cx_vec phases;
    arma::cx_vec phases_quant;
    std::vector<arma::cx_mat> precoders;
    DualVariables duals;
    double rho = 1.0;  // penalty parameter; smaller means a stronger penalty
    double eta = 1.0;  // current violation threshold
    double chi = 0.1;  // shrink factor for rho and eta
    int outer_iter = 0;
};

struct PddOptions {
    double inner_tol = 1e-6;   // relative decrease of the AL objective
    int inner_max_iter = 200;
    double outer_tol = 1e-4;   // terminal constraint violation
    int outer_max_iter = 100;
    double rho0 = 1.0;
    double eta0 = 1.0;
    double chi = 0.1;
    double bisect_tol = 1e-9;

    void validate() const;
};

/// Per-run convergence record. violation, rho, eta, rate_relaxed and
/// rate_rounded have one entry per outer iteration; inner_traces holds the
/// AL objective after every inner sweep of each outer iteration.
struct PddDiagnostics {
    bool converged = false;
    int outer_iterations = 0;
    std::vector<double> violation;
    std::vector<double> rho;
    std::vector<double> eta;
    std::vector<double> rate_relaxed;  // sum rate at the fractional selection
    std::vector<double> rate_rounded;  // sum rate after rounding to T antennas
    std::vector<std::vector<double>> inner_traces;
};

/// Quadratic penalty of all equality-constraint residuals with dual shifts,
/// scaled by 1/(2 rho).
double penalty_term(const PddState& state, int n_rf_chains);

/// Augmented Lagrangian objective: tr(W E) - ln det W + penalty, with the
/// MSE matrix recomputed from the current receiver / selection / channel.
double al_objective(const PddState& state, const ChannelRealization& ch, const SystemConfig& cfg);

/// W* = E^-1, symmetrized. Throws std::domain_error when E is numerically
/// singular (min eigenvalue below 1e-14 of the max).
arma::cx_mat update_weight(const arma::cx_mat& E);

/// MMSE receiver (sigma2 I + Delta Hbar Hbar^H Delta^H)^-1 Delta Hbar.
arma::cx_mat update_receiver(const arma::vec& s, const arma::cx_mat& Hbar, double sigma2);

/// Exact scalar minimizers of the penalty in the auxiliary selection:
/// sbar_n = (s_n + rho mu_n + s_n^2 + s_n rho lam_n) / (1 + s_n^2), where mu
/// and lam are the duals of the mirror and product constraints.
arma::vec update_aux_selection(const arma::vec& s, double rho, const arma::vec& mu,
                               const arma::vec& lam);

/// Minimizer of the AL in the relaxed selection vector: s* = Q^-1 g / 2.
/// Throws std::logic_error if the quadratic form is not positive definite
/// (impossible with rho > 0 unless an upstream update is broken).
arma::vec update_selection(const arma::cx_mat& U, const arma::cx_mat& W, const arma::cx_mat& Hbar,
                           const arma::vec& sbar, const DualVariables& duals, double rho,
                           int n_rf_chains);

/// Minimizer of the AL in the relaxed phase vector (unconstrained convex
/// quadratic; the modulus constraint lives in the quantized copy).
arma::cx_vec update_phases(const arma::cx_mat& U, const arma::cx_mat& W, const arma::cx_mat& G,
                           const arma::vec& s, const std::vector<arma::cx_mat>& H,
                           const std::vector<arma::cx_mat>& P, const arma::cx_vec& v,
                           const arma::cx_vec& tau, double rho);

/// Per-element projection of phi + rho tau onto the phase set (or the unit
/// circle for continuous phases).
arma::cx_vec update_quantized_phases(const arma::cx_vec& phi, const arma::cx_vec& tau, double rho,
                                     int q_bits);

/// Solution of min tr(P^H C P) - 2 Re tr(P^H D) subject to tr(P P^H) <= p.
struct PrecoderSolution {
    arma::cx_mat precoder;
    double multiplier = 0.0;  // power-constraint multiplier; 0 when inactive
};

/// Solves the per-user precoder subproblem through the eigendecomposition of
/// C: returns the pseudo-inverse solution when it is within budget, else
/// bisects the multiplier until |tr(P P^H) - p| < tol * p.
PrecoderSolution solve_power_constrained(const arma::cx_mat& C, const arma::cx_mat& D, double p,
                                         double tol);

/// Builds user k's quadratic data (C_k, D_k) from the current state and
/// solves the budgeted subproblem.
arma::cx_mat update_precoder(int k, const SystemConfig& cfg, const ChannelRealization& ch,
                             const arma::vec& s, const arma::cx_vec& phi, const arma::cx_mat& U,
                             const arma::cx_mat& W, double bisect_tol);

/// Max-norm violation over all equality constraints.
double constraint_violation(const PddState& state, int n_rf_chains);

/// One recursion of the multiplier estimates at the current residuals.
DualVariables dual_update(const PddState& state, int n_rf_chains);

/// Feasible-by-construction starting point: uniform fractional selection,
/// random quantized phases with phi = v, zero duals, power-saturating random
/// precoders, and the receiver/weight pair from their closed forms.
PddState init_pdd_state(const ChannelRealization& ch, const SystemConfig& cfg,
                        const PddOptions& opts, std::uint64_t seed);

/// Block-coordinate sweeps (W, U, sbar, s, phi, v, P) until the AL objective
/// stalls or inner_max_iter is reached. Returns the objective value after
/// each sweep; the sequence is non-increasing up to numerical slack.
std::vector<double> inner_bcd(PddState& state, const ChannelRealization& ch,
                              const SystemConfig& cfg, const PddOptions& opts);

/// Rounds the relaxed state to a feasible design: the T largest selection
/// entries become active (ties to the lowest index), phases take their
/// quantized copies, and the precoders are re-optimized once against the
/// rounded selection and phases.
DesignState finalize_design(const PddState& state, const ChannelRealization& ch,
                            const SystemConfig& cfg, const PddOptions& opts);

/// Full double-loop solve. The returned design is always feasible; when the
/// violation never reaches outer_tol the diagnostics carry converged=false.
std::pair<DesignState, PddDiagnostics> pdd_solve(const ChannelRealization& ch,
                                                 const SystemConfig& cfg, const PddOptions& opts,
                                                 std::uint64_t seed);

} // namespace risbf

#endif // RISBF_PDD_HPP
