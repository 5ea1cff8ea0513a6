// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "risbf/so.hpp"

#include <cmath>
#include <stdexcept>

#include "risbf/rng.hpp"

namespace risbf {

void SoOptions::validate() const {
    if (ewbcd_sweeps < 1 || iwf_max_rounds < 1)
        throw std::invalid_argument("so options: iteration limits must be positive");
    if (!(ewbcd_tol > 0.0) || !(iwf_tol > 0.0) || !(wf_tol > 0.0))
        throw std::invalid_argument("so options: tolerances must be positive");
}

arma::cx_mat weighted_user_gram(const std::vector<arma::cx_mat>& H, const std::vector<double>& p,
                                const std::vector<int>& user_antennas) {
    if (H.empty() || H.size() != p.size() || H.size() != user_antennas.size())
        throw std::invalid_argument("weighted_user_gram: per-user lists must align");
    arma::cx_mat gram(H.front().n_rows, H.front().n_rows, arma::fill::zeros);
    for (std::size_t k = 0; k < H.size(); ++k)
        gram += (p[k] / double(user_antennas[k])) * (H[k] * H[k].t());
    return detail::symmetrize(gram);
}

arma::cx_mat gain_matrix(const arma::cx_mat& G, const std::vector<arma::cx_mat>& H,
                         const std::vector<double>& p, const std::vector<int>& user_antennas) {
    const arma::cx_mat gram = weighted_user_gram(H, p, user_antennas);
    return detail::symmetrize((G.t() * G) % gram.st());
}

arma::cx_vec ewbcd_phases(const arma::cx_mat& H_hat, int q_bits, const arma::cx_vec& phi_init,
                          const SoOptions& opts, std::vector<double>* objective_trace) {
    opts.validate();
    const arma::uword M = H_hat.n_rows;
    if (phi_init.n_elem != M)
        throw std::invalid_argument("ewbcd_phases: initial phases must match the surrogate size");

    arma::cx_vec phi = phi_init;
    arma::cx_vec coupled = H_hat * phi; // kept in sync across element updates
    double previous = std::real(arma::cdot(phi, coupled));
    if (objective_trace != nullptr)
        objective_trace->clear();

    for (int sweep = 0; sweep < opts.ewbcd_sweeps; ++sweep) {
        for (arma::uword m = 0; m < M; ++m) {
            const std::complex<double> coupling = coupled(m) - H_hat(m, m) * phi(m);
            if (coupling == std::complex<double>(0.0, 0.0))
                continue; // decoupled element, any phase is optimal
            const std::complex<double> updated = project_phase(coupling, q_bits);
            const std::complex<double> delta = updated - phi(m);
            if (delta != std::complex<double>(0.0, 0.0)) {
                coupled += H_hat.col(m) * delta;
                phi(m) = updated;
            }
        }
        const double objective = std::real(arma::cdot(phi, H_hat * phi));
        if (objective_trace != nullptr)
            objective_trace->push_back(objective);
        if (objective - previous < opts.ewbcd_tol * std::max(1.0, std::abs(previous)))
            break;
        previous = objective;
    }
    return phi;
}

arma::vec greedy_selection(const arma::cx_mat& X, double sigma2, int T) {
    const arma::uword N = X.n_rows;
    if (X.n_cols != N)
        throw std::invalid_argument("greedy_selection: X must be square");
    if (T < 0 || static_cast<arma::uword>(T) > N)
        throw std::invalid_argument("greedy_selection: T must be at most N");
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("greedy_selection: sigma2 must be positive");

    const double inv_sigma2 = 1.0 / sigma2;
    std::vector<arma::uword> chosen;
    std::vector<bool> used(N, false);
    // Cholesky factor of I + X[S,S]/sigma2, grown one row per round
    arma::cx_mat chol_factor(static_cast<arma::uword>(T), static_cast<arma::uword>(T),
                             arma::fill::zeros);

    for (int round = 0; round < T; ++round) {
        const arma::uword depth = chosen.size();
        arma::uword best = N;
        double best_gain = 0.0;
        arma::cx_vec best_column;

        for (arma::uword n = 0; n < N; ++n) {
            if (used[n])
                continue;
            arma::cx_vec column(depth);
            for (arma::uword i = 0; i < depth; ++i)
                column(i) = inv_sigma2 * X(chosen[i], n);
            if (depth > 0)
                column = arma::solve(
                    arma::trimatl(chol_factor.submat(0, 0, depth - 1, depth - 1)), column);
            // Schur complement of the candidate row in the grown Gram matrix
            const double gain = 1.0 + inv_sigma2 * std::real(X(n, n)) -
                                std::real(arma::cdot(column, column));
            if (best == N || gain > best_gain) {
                best = n;
                best_gain = gain;
                best_column = column;
            }
        }

        for (arma::uword i = 0; i < depth; ++i)
            chol_factor(depth, i) = best_column(i);
        chol_factor(depth, depth) = std::sqrt(std::max(best_gain, 1e-300));
        used[best] = true;
        chosen.push_back(best);
    }

    arma::vec s(N, arma::fill::zeros);
    for (arma::uword n : chosen)
        s(n) = 1.0;
    return s;
}

arma::vec waterfill(const arma::vec& eigenvalues, double budget, int max_modes, double tol) {
    if (!(budget > 0.0) || !(tol > 0.0))
        throw std::invalid_argument("waterfill: budget and tolerance must be positive");
    const arma::uword n = eigenvalues.n_elem;
    arma::vec powers(n, arma::fill::zeros);

    const double top = eigenvalues.max();
    if (!(top > 0.0))
        return powers; // no usable mode

    // eligibility: the max_modes strongest strictly positive gains
    const arma::uvec order = arma::sort_index(eigenvalues, "descend");
    std::vector<arma::uword> eligible;
    for (arma::uword i = 0; i < n && eligible.size() < static_cast<std::size_t>(max_modes); ++i) {
        if (eigenvalues(order(i)) > 1e-12 * top)
            eligible.push_back(order(i));
    }
    if (eligible.empty())
        return powers;

    const auto filled = [&](double level) {
        double acc = 0.0;
        for (arma::uword i : eligible)
            acc += std::max(0.0, level - 1.0 / eigenvalues(i));
        return acc;
    };

    double lo = 0.0;
    double hi = budget;
    for (arma::uword i : eligible)
        hi = std::max(hi, 1.0 / eigenvalues(i));
    hi += budget;

    double level = hi;
    for (int iter = 0; iter < 200; ++iter) {
        level = 0.5 * (lo + hi);
        const double total = filled(level);
        if (std::abs(total - budget) < tol * budget)
            break;
        (total < budget ? lo : hi) = level;
    }
    for (arma::uword i : eligible)
        powers(i) = std::max(0.0, level - 1.0 / eigenvalues(i));
    return powers;
}

namespace {

double mac_sum_rate(const std::vector<arma::cx_mat>& G_eff,
                    const std::vector<arma::cx_mat>& Q) {
    const arma::uword T = G_eff.front().n_rows;
    arma::cx_mat inner = arma::eye<arma::cx_mat>(T, T);
    for (std::size_t k = 0; k < G_eff.size(); ++k)
        inner += G_eff[k] * Q[k] * G_eff[k].t();
    return detail::log_det_hermitian_pd(detail::symmetrize(inner)) / std::log(2.0);
}

} // namespace

std::vector<arma::cx_mat> iterative_waterfilling(const std::vector<arma::cx_mat>& G_eff,
                                                 const std::vector<double>& p,
                                                 const std::vector<int>& user_streams,
                                                 const SoOptions& opts,
                                                 std::vector<double>* rate_trace) {
    opts.validate();
    const std::size_t K = G_eff.size();
    if (K == 0 || p.size() != K || user_streams.size() != K)
        throw std::invalid_argument("iterative_waterfilling: per-user lists must align");
    const arma::uword T = G_eff.front().n_rows;

    std::vector<arma::cx_mat> precoders(K);
    std::vector<arma::cx_mat> covariances(K);
    for (std::size_t k = 0; k < K; ++k) {
        precoders[k] = arma::cx_mat(G_eff[k].n_cols, static_cast<arma::uword>(user_streams[k]),
                                    arma::fill::zeros);
        covariances[k] = arma::cx_mat(G_eff[k].n_cols, G_eff[k].n_cols, arma::fill::zeros);
    }
    if (rate_trace != nullptr)
        rate_trace->clear();

    double previous = 0.0;
    for (int round = 0; round < opts.iwf_max_rounds; ++round) {
        for (std::size_t k = 0; k < K; ++k) {
            arma::cx_mat interference = arma::eye<arma::cx_mat>(T, T);
            for (std::size_t j = 0; j < K; ++j)
                if (j != k)
                    interference += G_eff[j] * covariances[j] * G_eff[j].t();

            const arma::cx_mat whitened = detail::symmetrize(
                G_eff[k].t() *
                arma::solve(detail::symmetrize(interference), arma::cx_mat(G_eff[k]),
                            arma::solve_opts::likely_sympd));

            arma::vec eigval;
            arma::cx_mat eigvec;
            if (!arma::eig_sym(eigval, eigvec, whitened))
                throw std::runtime_error("iterative_waterfilling: eigendecomposition failed");

            const arma::vec powers = waterfill(eigval, p[k], user_streams[k], opts.wf_tol);

            // strongest modes first; unused trailing columns stay zero
            const arma::uvec order = arma::sort_index(eigval, "descend");
            arma::cx_mat P(G_eff[k].n_cols, static_cast<arma::uword>(user_streams[k]),
                           arma::fill::zeros);
            for (int c = 0; c < user_streams[k]; ++c) {
                const arma::uword mode = order(static_cast<arma::uword>(c));
                if (powers(mode) > 0.0)
                    P.col(static_cast<arma::uword>(c)) =
                        eigvec.col(mode) * std::sqrt(powers(mode));
            }
            precoders[k] = P;
            covariances[k] = P * P.t();

            if (rate_trace != nullptr)
                rate_trace->push_back(mac_sum_rate(G_eff, covariances));
        }
        const double rate = mac_sum_rate(G_eff, covariances);
        if (std::abs(rate - previous) < opts.iwf_tol * std::max(1.0, std::abs(rate)))
            break;
        previous = rate;
    }
    return precoders;
}

DesignState so_solve(const ChannelRealization& ch, const SystemConfig& cfg, const SoOptions& opts,
                     std::uint64_t seed) {
    cfg.validate();
    ch.validate(cfg);
    opts.validate();

    const arma::cx_mat H_hat =
        gain_matrix(ch.ris_to_bs, ch.user_to_ris, cfg.power_budget_mw, cfg.user_antennas);

    RandomStream rng(seed, stream::kSoInit);
    arma::cx_vec phi_init(static_cast<arma::uword>(cfg.n_ris_elements));
    if (cfg.continuous_phases()) {
        for (auto& v : phi_init)
            v = std::polar(1.0, 2.0 * arma::datum::pi * rng.next_uniform());
    } else {
        const auto set = phase_set(cfg.q_bits);
        for (auto& v : phi_init)
            v = set[rng.next_below(set.size())];
    }

    DesignState design;
    design.phases = ewbcd_phases(H_hat, cfg.q_bits, phi_init, opts);

    const arma::cx_mat gram =
        weighted_user_gram(ch.user_to_ris, cfg.power_budget_mw, cfg.user_antennas);
    const arma::cx_mat front = ch.ris_to_bs * arma::diagmat(design.phases);
    const arma::cx_mat X = detail::symmetrize(front * gram * front.t());
    design.selection = greedy_selection(X, cfg.noise_power_mw, cfg.n_rf_chains);

    const arma::uvec rows = arma::find(design.selection == 1.0);
    const double inv_sigma = 1.0 / std::sqrt(cfg.noise_power_mw);
    std::vector<arma::cx_mat> G_eff;
    G_eff.reserve(static_cast<std::size_t>(cfg.n_users));
    for (int k = 0; k < cfg.n_users; ++k)
        G_eff.push_back(inv_sigma * front.rows(rows) *
                        ch.user_to_ris[static_cast<std::size_t>(k)]);

    design.precoders = iterative_waterfilling(G_eff, cfg.power_budget_mw, cfg.user_streams, opts);
    return design;
}

} // namespace risbf
