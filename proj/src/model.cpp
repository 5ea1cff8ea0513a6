// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "risbf/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace risbf {

int SystemConfig::total_streams() const {
    return std::accumulate(user_streams.begin(), user_streams.end(), 0);
}

int SystemConfig::stream_offset(int k) const {
    return std::accumulate(user_streams.begin(), user_streams.begin() + k, 0);
}

void SystemConfig::validate() const {
    if (n_antennas < 1)
        throw std::invalid_argument("config: antenna count must be positive");
    if (n_rf_chains < 1 || n_rf_chains >= n_antennas)
        throw std::invalid_argument("config: RF chain count must satisfy 1 <= T < N");
    if (n_ris_elements < 1)
        throw std::invalid_argument("config: RIS element count must be positive");
    if (q_bits != kContinuousPhases && (q_bits < 1 || q_bits > 16))
        throw std::invalid_argument("config: q_bits must be in [1,16] or the continuous sentinel");
    if (n_users < 1)
        throw std::invalid_argument("config: user count must be positive");
    const auto K = static_cast<std::size_t>(n_users);
    if (user_antennas.size() != K || user_streams.size() != K || power_budget_mw.size() != K)
        throw std::invalid_argument("config: per-user lists must have length K");
    for (int k = 0; k < n_users; ++k) {
        if (user_antennas[k] < 1)
            throw std::invalid_argument("config: user antenna counts must be positive");
        if (user_streams[k] < 1 || user_streams[k] > user_antennas[k])
            throw std::invalid_argument("config: stream counts must satisfy 1 <= L_k <= N_k");
        if (!(power_budget_mw[k] > 0.0))
            throw std::invalid_argument("config: power budgets must be positive");
    }
    if (!(noise_power_mw > 0.0))
        throw std::invalid_argument("config: noise power must be positive");
}

void ChannelRealization::validate(const SystemConfig& cfg) const {
    const auto N = static_cast<arma::uword>(cfg.n_antennas);
    const auto M = static_cast<arma::uword>(cfg.n_ris_elements);
    if (ris_to_bs.n_rows != N || ris_to_bs.n_cols != M)
        throw std::invalid_argument("channel: RIS-to-BS matrix must be N x M");
    if (user_to_ris.size() != static_cast<std::size_t>(cfg.n_users))
        throw std::invalid_argument("channel: one user matrix per user expected");
    for (int k = 0; k < cfg.n_users; ++k) {
        const auto& Hk = user_to_ris[static_cast<std::size_t>(k)];
        if (Hk.n_rows != M || Hk.n_cols != static_cast<arma::uword>(cfg.user_antennas[k]))
            throw std::invalid_argument("channel: user matrix must be M x N_k");
        if (!Hk.is_finite())
            throw std::invalid_argument("channel: user matrix has non-finite entries");
    }
    if (!ris_to_bs.is_finite())
        throw std::invalid_argument("channel: RIS-to-BS matrix has non-finite entries");
}

void validate_design(const DesignState& state, const SystemConfig& cfg) {
    if (state.selection.n_elem != static_cast<arma::uword>(cfg.n_antennas))
        throw std::invalid_argument("design: selection vector must have length N");
    int active = 0;
    for (double v : state.selection) {
        if (v != 0.0 && v != 1.0)
            throw std::invalid_argument("design: selection entries must be binary");
        active += (v == 1.0);
    }
    if (active != cfg.n_rf_chains)
        throw std::invalid_argument("design: selection must activate exactly T antennas");

    if (state.phases.n_elem != static_cast<arma::uword>(cfg.n_ris_elements))
        throw std::invalid_argument("design: phase vector must have length M");
    const auto members =
        cfg.continuous_phases() ? std::vector<std::complex<double>>{} : phase_set(cfg.q_bits);
    for (const auto& p : state.phases) {
        if (std::abs(std::abs(p) - 1.0) > 1e-12)
            throw std::invalid_argument("design: phases must have unit modulus");
        if (!cfg.continuous_phases()) {
            bool found = false;
            for (const auto& m : members)
                if (m == p) {
                    found = true;
                    break;
                }
            if (!found)
                throw std::invalid_argument("design: phases must belong to the quantized set");
        }
    }

    if (state.precoders.size() != static_cast<std::size_t>(cfg.n_users))
        throw std::invalid_argument("design: one precoder per user expected");
    for (int k = 0; k < cfg.n_users; ++k) {
        const auto& Pk = state.precoders[static_cast<std::size_t>(k)];
        if (Pk.n_rows != static_cast<arma::uword>(cfg.user_antennas[k]) ||
            Pk.n_cols != static_cast<arma::uword>(cfg.user_streams[k]))
            throw std::invalid_argument("design: precoder must be N_k x L_k");
        const double power = std::real(arma::trace(Pk * Pk.t()));
        if (power > cfg.power_budget_mw[static_cast<std::size_t>(k)] * (1.0 + 1e-9))
            throw std::invalid_argument("design: precoder exceeds the power budget");
    }
}

std::vector<std::complex<double>> phase_set(int q_bits) {
    if (q_bits < 1 || q_bits > 16)
        throw std::invalid_argument("phase_set: q_bits must be in [1,16]");
    const int count = 1 << q_bits;
    std::vector<std::complex<double>> set(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t)
        set[static_cast<std::size_t>(t)] =
            std::polar(1.0, 2.0 * arma::datum::pi * double(t) / double(count));
    set[0] = {1.0, 0.0};
    return set;
}

std::complex<double> nearest_phase(std::complex<double> z, int q_bits, bool* degenerate) {
    const auto set = phase_set(q_bits);
    if (degenerate != nullptr)
        *degenerate = false;
    if (z == std::complex<double>(0.0, 0.0)) {
        if (degenerate != nullptr)
            *degenerate = true;
        return set[0];
    }
    std::size_t best = 0;
    double best_score = std::real(set[0] * std::conj(z));
    for (std::size_t t = 1; t < set.size(); ++t) {
        const double score = std::real(set[t] * std::conj(z));
        if (score > best_score) { // strict: ties keep the lower index
            best_score = score;
            best = t;
        }
    }
    return set[best];
}

std::complex<double> project_phase(std::complex<double> z, int q_bits, bool* degenerate) {
    if (q_bits != kContinuousPhases)
        return nearest_phase(z, q_bits, degenerate);
    if (degenerate != nullptr)
        *degenerate = false;
    const double mag = std::abs(z);
    if (mag == 0.0) {
        if (degenerate != nullptr)
            *degenerate = true;
        return {1.0, 0.0};
    }
    return z / mag;
}

arma::mat selection_delta(const arma::vec& s) {
    if (!s.is_finite())
        throw std::invalid_argument("selection_delta: entries must be finite");
    return arma::diagmat(s);
}

arma::cx_mat effective_channel(const arma::cx_mat& G, const arma::cx_vec& phi,
                               const std::vector<arma::cx_mat>& H,
                               const std::vector<arma::cx_mat>& P) {
    if (H.size() != P.size())
        throw std::invalid_argument("effective_channel: one precoder per user channel expected");
    if (phi.n_elem != G.n_cols)
        throw std::invalid_argument("effective_channel: phase count must match G columns");

    arma::uword total = 0;
    for (std::size_t k = 0; k < H.size(); ++k) {
        if (H[k].n_rows != G.n_cols)
            throw std::invalid_argument("effective_channel: user channel rows must match RIS size");
        if (P[k].n_rows != H[k].n_cols)
            throw std::invalid_argument("effective_channel: precoder rows must match user antennas");
        total += P[k].n_cols;
    }

    const arma::cx_mat front = G * arma::diagmat(phi);
    arma::cx_mat Hbar(G.n_rows, total);
    arma::uword col = 0;
    for (std::size_t k = 0; k < H.size(); ++k) {
        const arma::uword w = P[k].n_cols;
        if (w > 0)
            Hbar.cols(col, col + w - 1) = front * H[k] * P[k];
        col += w;
    }
    return Hbar;
}

double sum_rate(const arma::vec& s, const arma::cx_mat& Hbar, double sigma2) {
    if (!(sigma2 > 0.0) || !s.is_finite() || !Hbar.is_finite())
        throw std::invalid_argument("sum_rate: inputs must be finite with sigma2 > 0");
    if (s.n_elem != Hbar.n_rows)
        throw std::invalid_argument("sum_rate: selection length must match channel rows");
    if (Hbar.n_cols == 0)
        return 0.0;
    const arma::cx_mat A = arma::diagmat(arma::cx_vec(s, arma::vec(s.n_elem, arma::fill::zeros))) * Hbar;
    const arma::cx_mat gram = arma::cx_mat(arma::eye<arma::cx_mat>(Hbar.n_cols, Hbar.n_cols)) +
                              (1.0 / sigma2) * detail::symmetrize(A.t() * A);
    return detail::log_det_hermitian_pd(gram) / std::log(2.0);
}

double sum_rate_direct(const std::vector<arma::uword>& selected_rows, const arma::cx_mat& G,
                       const arma::cx_vec& phi, const std::vector<arma::cx_mat>& H,
                       const std::vector<arma::cx_mat>& Qcov, double sigma2) {
    for (std::size_t i = 0; i < selected_rows.size(); ++i) {
        if (selected_rows[i] >= G.n_rows)
            throw std::invalid_argument("sum_rate_direct: row index out of range");
        for (std::size_t j = i + 1; j < selected_rows.size(); ++j)
            if (selected_rows[i] == selected_rows[j])
                throw std::invalid_argument("sum_rate_direct: duplicate row indices");
    }
    if (H.size() != Qcov.size())
        throw std::invalid_argument("sum_rate_direct: one covariance per user expected");

    const arma::uvec rows(selected_rows);
    const arma::cx_mat front = G.rows(rows) * arma::diagmat(phi); // T x M
    arma::cx_mat inner =
        arma::eye<arma::cx_mat>(rows.n_elem, rows.n_elem);
    for (std::size_t k = 0; k < H.size(); ++k) {
        const arma::cx_mat B = front * H[k]; // T x N_k
        inner += (1.0 / sigma2) * B * Qcov[k] * B.t();
    }
    return detail::log_det_hermitian_pd(detail::symmetrize(inner)) / std::log(2.0);
}

arma::cx_mat mse_matrix(const arma::cx_mat& U, const arma::vec& s, const arma::cx_mat& Hbar,
                        double sigma2) {
    if (U.n_rows != Hbar.n_rows || s.n_elem != Hbar.n_rows)
        throw std::invalid_argument("mse_matrix: dimension mismatch");
    arma::cx_mat shifted = U.t() * (Hbar.each_col() % arma::cx_vec(
                                        s, arma::vec(s.n_elem, arma::fill::zeros)));
    shifted.diag() -= 1.0;
    return detail::symmetrize(shifted * shifted.t() + sigma2 * (U.t() * U));
}

double wmmse_objective(const arma::cx_mat& W, const arma::cx_mat& E) {
    double logdet;
    try {
        logdet = detail::log_det_hermitian_pd(W);
    } catch (const std::runtime_error&) {
        throw std::domain_error("wmmse_objective: weight matrix is not positive definite");
    }
    return std::real(arma::trace(W * E)) - logdet;
}

namespace detail {

arma::cx_mat symmetrize(const arma::cx_mat& M) { return 0.5 * (M + M.t()); }

double log_det_hermitian_pd(const arma::cx_mat& M) {
    arma::cx_mat R;
    if (!arma::chol(R, M))
        throw std::runtime_error("log_det_hermitian_pd: matrix is not positive definite");
    return 2.0 * arma::accu(arma::log(arma::real(R.diag())));
}

} // namespace detail

} // namespace risbf
