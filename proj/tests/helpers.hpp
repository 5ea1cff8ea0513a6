// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef RISBF_TESTS_HELPERS_HPP
#define RISBF_TESTS_HELPERS_HPP

#include <complex>
#include <vector>

#include "risbf/rng.hpp"
#include "risbf/types.hpp"

namespace risbf::test {

inline SystemConfig make_config(int N, int T, int M, int Q, int K, int Nk, int Lk,
                                double p_mw = 1.0, double sigma2 = 1.0) {
    SystemConfig cfg;
    cfg.n_antennas = N;
    cfg.n_rf_chains = T;
    cfg.n_ris_elements = M;
    cfg.q_bits = Q;
    cfg.n_users = K;
    cfg.user_antennas = std::vector<int>(static_cast<std::size_t>(K), Nk);
    cfg.user_streams = std::vector<int>(static_cast<std::size_t>(K), Lk);
    cfg.power_budget_mw = std::vector<double>(static_cast<std::size_t>(K), p_mw);
    cfg.noise_power_mw = sigma2;
    return cfg;
}

/// Desk-scale instance used throughout the solver tests.
inline SystemConfig desk_config(double p_mw = 0.316227766016838, double sigma2 = 1e-12) {
    return make_config(8, 3, 8, 4, 2, 2, 2, p_mw, sigma2);
}

inline arma::cx_mat random_matrix(RandomStream& rng, arma::uword rows, arma::uword cols,
                                  double variance = 1.0) {
    arma::cx_mat out(rows, cols);
    for (auto& v : out)
        v = rng.next_cgauss(variance);
    return out;
}

/// Unit-variance channel draw, convenient for scale-free algebra tests.
inline ChannelRealization unit_channel(const SystemConfig& cfg, std::uint64_t seed) {
    RandomStream rng(seed, 0xabc);
    ChannelRealization ch;
    ch.seed = seed;
    ch.ris_to_bs = random_matrix(rng, static_cast<arma::uword>(cfg.n_antennas),
                                 static_cast<arma::uword>(cfg.n_ris_elements));
    for (int k = 0; k < cfg.n_users; ++k)
        ch.user_to_ris.push_back(random_matrix(rng, static_cast<arma::uword>(cfg.n_ris_elements),
                                               static_cast<arma::uword>(cfg.user_antennas[k])));
    return ch;
}

inline arma::cx_vec random_unit_phases(RandomStream& rng, arma::uword M) {
    arma::cx_vec phi(M);
    for (auto& v : phi)
        v = std::polar(1.0, 2.0 * arma::datum::pi * rng.next_uniform());
    return phi;
}

/// Random precoders scaled to a fraction of the power budget.
inline std::vector<arma::cx_mat> random_precoders(RandomStream& rng, const SystemConfig& cfg,
                                                  double budget_fraction = 1.0) {
    std::vector<arma::cx_mat> P;
    for (int k = 0; k < cfg.n_users; ++k) {
        arma::cx_mat Pk = random_matrix(rng, static_cast<arma::uword>(cfg.user_antennas[k]),
                                        static_cast<arma::uword>(cfg.user_streams[k]));
        const double power = std::real(arma::trace(Pk * Pk.t()));
        Pk *= std::sqrt(budget_fraction * cfg.power_budget_mw[static_cast<std::size_t>(k)] /
                        power);
        P.push_back(std::move(Pk));
    }
    return P;
}

/// Random binary selection with exactly T active antennas.
inline arma::vec random_binary_selection(RandomStream& rng, int N, int T) {
    std::vector<arma::uword> pool(static_cast<std::size_t>(N));
    for (std::size_t i = 0; i < pool.size(); ++i)
        pool[i] = static_cast<arma::uword>(i);
    arma::vec s(static_cast<arma::uword>(N), arma::fill::zeros);
    for (int t = 0; t < T; ++t) {
        const auto j = static_cast<std::size_t>(t) +
                       static_cast<std::size_t>(rng.next_below(pool.size() - std::size_t(t)));
        std::swap(pool[static_cast<std::size_t>(t)], pool[j]);
        s(pool[static_cast<std::size_t>(t)]) = 1.0;
    }
    return s;
}

inline std::vector<arma::uword> active_rows(const arma::vec& s) {
    std::vector<arma::uword> rows;
    for (arma::uword n = 0; n < s.n_elem; ++n)
        if (s(n) == 1.0)
            rows.push_back(n);
    return rows;
}

/// Random Hermitian PSD matrix of the given rank.
inline arma::cx_mat random_psd(RandomStream& rng, arma::uword n, arma::uword rank) {
    const arma::cx_mat A = random_matrix(rng, n, rank);
    return 0.5 * (A * A.t() + (A * A.t()).t());
}

} // namespace risbf::test

#endif // RISBF_TESTS_HELPERS_HPP
