// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef RISBF_MODEL_HPP
#define RISBF_MODEL_HPP

#include <complex>
#include <vector>

#include "risbf/types.hpp"

namespace risbf {

/// The 2^Q uniformly spaced unit-modulus phase values, first element 1.
/// q_bits must lie in [1, 16].
std::vector<std::complex<double>> phase_set(int q_bits);

/// Member of the quantized phase set maximizing Re{v * conj(z)}, i.e. the
/// set element closest in angle to z. Exact ties resolve to the lowest set
/// index. z == 0 is degenerate: the first set element is returned and
/// *degenerate (when given) is set.
std::complex<double> nearest_phase(std::complex<double> z, int q_bits,
                                   bool* degenerate = nullptr);

/// nearest_phase extended with the continuous sentinel, where it returns
/// z / |z|.
std::complex<double> project_phase(std::complex<double> z, int q_bits,
                                   bool* degenerate = nullptr);

/// diag{s}. Accepts fractional entries (relaxed selections).
arma::mat selection_delta(const arma::vec& s);

/// Stacked effective channel [G Phi H_1 P_1, ..., G Phi H_K P_K], N x L.
arma::cx_mat effective_channel(const arma::cx_mat& G, const arma::cx_vec& phi,
                               const std::vector<arma::cx_mat>& H,
                               const std::vector<arma::cx_mat>& P);

/// Uplink sum rate log2 det(I + sigma^-2 Delta Hbar Hbar^H Delta^H) in
/// bits/s/Hz, evaluated through the L x L Gram form (Sylvester identity),
/// which keeps the factorization on the smaller side.
double sum_rate(const arma::vec& s, const arma::cx_mat& Hbar, double sigma2);

/// Sum rate from the row-selection form with explicit transmit covariances:
/// log2 det(I_T + sigma^-2 sum_k S G Phi H_k Qcov_k H_k^H Phi^H G^H S^H).
/// Serves as an independent route for checking sum_rate.
double sum_rate_direct(const std::vector<arma::uword>& selected_rows,
                       const arma::cx_mat& G, const arma::cx_vec& phi,
                       const std::vector<arma::cx_mat>& H,
                       const std::vector<arma::cx_mat>& Qcov, double sigma2);

/// MSE matrix of the linear receiver U on the hypothetical stream channel:
/// (U^H Delta Hbar - I)(U^H Delta Hbar - I)^H + sigma2 U^H U, symmetrized
/// on return.
arma::cx_mat mse_matrix(const arma::cx_mat& U, const arma::vec& s,
                        const arma::cx_mat& Hbar, double sigma2);

/// tr(W E) - ln det(W). Natural log; W must be Hermitian positive definite.
double wmmse_objective(const arma::cx_mat& W, const arma::cx_mat& E);

namespace detail {

/// (M + M^H) / 2
arma::cx_mat symmetrize(const arma::cx_mat& M);

/// ln det of a Hermitian positive definite matrix via Cholesky.
double log_det_hermitian_pd(const arma::cx_mat& M);

} // namespace detail

} // namespace risbf

#endif // RISBF_MODEL_HPP
