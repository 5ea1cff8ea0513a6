// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "risbf/benchmarks.hpp"

#include <cmath>
#include <stdexcept>

#include "risbf/rng.hpp"

namespace risbf {

void AoOptions::validate() const {
    if (max_rounds < 1)
        throw std::invalid_argument("ao options: max_rounds must be positive");
    if (!(tol > 0.0))
        throw std::invalid_argument("ao options: tolerance must be positive");
    so.validate();
}

DesignState random_design(const ChannelRealization& ch, const SystemConfig& cfg,
                          std::uint64_t seed) {
    cfg.validate();
    ch.validate(cfg);
    RandomStream rng(seed, stream::kRandomScheme);

    const auto N = static_cast<arma::uword>(cfg.n_antennas);
    DesignState design;

    // random T-subset via partial Fisher-Yates
    std::vector<arma::uword> pool(N);
    for (arma::uword i = 0; i < N; ++i)
        pool[i] = i;
    design.selection = arma::vec(N, arma::fill::zeros);
    for (int t = 0; t < cfg.n_rf_chains; ++t) {
        const auto j = static_cast<std::size_t>(t) +
                       static_cast<std::size_t>(rng.next_below(pool.size() - std::size_t(t)));
        std::swap(pool[static_cast<std::size_t>(t)], pool[j]);
        design.selection(pool[static_cast<std::size_t>(t)]) = 1.0;
    }

    design.phases.set_size(static_cast<arma::uword>(cfg.n_ris_elements));
    if (cfg.continuous_phases()) {
        for (auto& v : design.phases)
            v = std::polar(1.0, 2.0 * arma::datum::pi * rng.next_uniform());
    } else {
        const auto set = phase_set(cfg.q_bits);
        for (auto& v : design.phases)
            v = set[rng.next_below(set.size())];
    }

    design.precoders.reserve(static_cast<std::size_t>(cfg.n_users));
    for (int k = 0; k < cfg.n_users; ++k) {
        const auto Nk = static_cast<arma::uword>(cfg.user_antennas[k]);
        const auto Lk = static_cast<arma::uword>(cfg.user_streams[k]);
        arma::cx_mat P(Nk, Lk, arma::fill::zeros);
        const double amp =
            std::sqrt(cfg.power_budget_mw[static_cast<std::size_t>(k)] / double(Nk));
        for (arma::uword c = 0; c < Lk; ++c)
            P(c, c) = amp;
        design.precoders.push_back(std::move(P));
    }
    return design;
}

std::pair<DesignState, std::vector<double>> ao_solve(const ChannelRealization& ch,
                                                     const SystemConfig& cfg,
                                                     const AoOptions& opts, std::uint64_t seed) {
    opts.validate();
    DesignState design = random_design(ch, cfg, seed);

    const arma::cx_mat gram =
        weighted_user_gram(ch.user_to_ris, cfg.power_budget_mw, cfg.user_antennas);
    const double inv_sigma = 1.0 / std::sqrt(cfg.noise_power_mw);

    std::vector<double> trace;
    double previous = 0.0;
    for (int round = 0; round < opts.max_rounds; ++round) {
        // phase surrogate restricted to the currently selected antennas
        const arma::uvec active = arma::find(design.selection == 1.0);
        const arma::cx_mat G_sel = ch.ris_to_bs.rows(active);
        const arma::cx_mat surrogate = detail::symmetrize((G_sel.t() * G_sel) % gram.st());
        design.phases = ewbcd_phases(surrogate, cfg.q_bits, design.phases, opts.so);

        const arma::cx_mat front = ch.ris_to_bs * arma::diagmat(design.phases);
        const arma::cx_mat X = detail::symmetrize(front * gram * front.t());
        design.selection = greedy_selection(X, cfg.noise_power_mw, cfg.n_rf_chains);

        const arma::uvec rows = arma::find(design.selection == 1.0);
        std::vector<arma::cx_mat> G_eff;
        G_eff.reserve(static_cast<std::size_t>(cfg.n_users));
        for (int k = 0; k < cfg.n_users; ++k)
            G_eff.push_back(inv_sigma * front.rows(rows) *
                            ch.user_to_ris[static_cast<std::size_t>(k)]);
        design.precoders =
            iterative_waterfilling(G_eff, cfg.power_budget_mw, cfg.user_streams, opts.so);

        const arma::cx_mat Hbar =
            effective_channel(ch.ris_to_bs, design.phases, ch.user_to_ris, design.precoders);
        const double rate = sum_rate(design.selection, Hbar, cfg.noise_power_mw);
        trace.push_back(rate);
        if (round > 0 && std::abs(rate - previous) < opts.tol * std::max(1.0, std::abs(rate)))
            break;
        previous = rate;
    }
    return {std::move(design), std::move(trace)};
}

} // namespace risbf
