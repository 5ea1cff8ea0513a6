// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "risbf/pdd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "risbf/rng.hpp"

namespace risbf {

namespace {

arma::cx_vec complexify(const arma::vec& s) {
    return arma::cx_vec(s, arma::vec(s.n_elem, arma::fill::zeros));
}

arma::cx_mat scale_rows(const arma::cx_mat& M, const arma::vec& s) {
    arma::cx_mat out = M;
    out.each_col() %= complexify(s);
    return out;
}

/// Stacked single-stream channels [H_1 P_1, ..., H_K P_K], M x L.
arma::cx_mat stacked_user_channel(const std::vector<arma::cx_mat>& H,
                                  const std::vector<arma::cx_mat>& P) {
    arma::uword total = 0;
    for (const auto& Pk : P)
        total += Pk.n_cols;
    arma::cx_mat K(H.front().n_rows, total);
    arma::uword col = 0;
    for (std::size_t k = 0; k < H.size(); ++k) {
        const arma::uword w = P[k].n_cols;
        if (w > 0)
            K.cols(col, col + w - 1) = H[k] * P[k];
        col += w;
    }
    return K;
}

arma::vec solve_spd(const arma::mat& A, const arma::vec& rhs, const char* who) {
    arma::mat R;
    if (!arma::chol(R, A))
        throw std::logic_error(std::string(who) + ": quadratic form is not positive definite");
    return arma::solve(arma::trimatu(R), arma::solve(arma::trimatl(R.t()), rhs));
}

arma::cx_vec solve_hpd(const arma::cx_mat& A, const arma::cx_vec& rhs, const char* who) {
    arma::cx_mat R;
    if (!arma::chol(R, A))
        throw std::logic_error(std::string(who) + ": quadratic form is not positive definite");
    return arma::solve(arma::trimatu(R), arma::solve(arma::trimatl(R.t()), rhs));
}

/// Indices of the T largest entries; ties keep the lower index first.
arma::uvec top_indices(const arma::vec& s, int count) {
    std::vector<arma::uword> idx(s.n_elem);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](arma::uword a, arma::uword b) { return s(a) > s(b); });
    idx.resize(static_cast<std::size_t>(count));
    return arma::uvec(idx);
}

arma::vec binary_from_indices(const arma::uvec& active, arma::uword n) {
    arma::vec s(n, arma::fill::zeros);
    for (arma::uword i : active)
        s(i) = 1.0;
    return s;
}

} // namespace

void PddOptions::validate() const {
    if (!(inner_tol > 0.0) || !(outer_tol > 0.0) || !(bisect_tol > 0.0))
        throw std::invalid_argument("pdd options: tolerances must be positive");
    if (inner_max_iter < 1 || outer_max_iter < 1)
        throw std::invalid_argument("pdd options: iteration limits must be positive");
    if (!(rho0 > 0.0) || !(eta0 > 0.0))
        throw std::invalid_argument("pdd options: rho0 and eta0 must be positive");
    if (!(chi > 0.0 && chi < 1.0))
        throw std::invalid_argument("pdd options: chi must lie in (0,1)");
}

double penalty_term(const PddState& state, int n_rf_chains) {
    if (!(state.rho > 0.0))
        throw std::invalid_argument("penalty_term: rho must be positive");
    const double rho = state.rho;
    const auto& d = state.duals;

    const double budget =
        arma::accu(state.selection) - double(n_rf_chains) + rho * d.sum_to_budget;
    double acc = budget * budget;
    for (arma::uword n = 0; n < state.selection.n_elem; ++n) {
        const double mirror =
            state.selection(n) - state.selection_aux(n) + rho * d.aux_match(n);
        const double product =
            state.selection(n) * (1.0 - state.selection_aux(n)) + rho * d.binary_product(n);
        acc += mirror * mirror + product * product;
    }
    for (arma::uword m = 0; m < state.phases.n_elem; ++m) {
        const std::complex<double> r =
            state.phases(m) - state.phases_quant(m) + rho * d.phase_match(m);
        acc += std::norm(r);
    }
    return acc / (2.0 * rho);
}

double al_objective(const PddState& state, const ChannelRealization& ch, const SystemConfig& cfg) {
    const arma::cx_mat Hbar =
        effective_channel(ch.ris_to_bs, state.phases, ch.user_to_ris, state.precoders);
    const arma::cx_mat E =
        mse_matrix(state.wmmse.receiver, state.selection, Hbar, cfg.noise_power_mw);
    return wmmse_objective(state.wmmse.weight, E) + penalty_term(state, cfg.n_rf_chains);
}

arma::cx_mat update_weight(const arma::cx_mat& E) {
    arma::vec eigval;
    arma::cx_mat eigvec;
    if (!arma::eig_sym(eigval, eigvec, detail::symmetrize(E)))
        throw std::domain_error("update_weight: eigendecomposition failed");
    const double top = eigval.max();
    if (!(top > 0.0) || eigval.min() < 1e-14 * top)
        throw std::domain_error("update_weight: MSE matrix is numerically singular");
    return detail::symmetrize(eigvec * arma::diagmat(1.0 / eigval) * eigvec.t());
}

arma::cx_mat update_receiver(const arma::vec& s, const arma::cx_mat& Hbar, double sigma2) {
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("update_receiver: sigma2 must be positive");
    const arma::cx_mat A = scale_rows(Hbar, s);
    const arma::cx_mat lhs = sigma2 * arma::eye<arma::cx_mat>(A.n_rows, A.n_rows) +
                             detail::symmetrize(A * A.t());
    return arma::solve(lhs, A, arma::solve_opts::likely_sympd);
}

arma::vec update_aux_selection(const arma::vec& s, double rho, const arma::vec& mu,
                               const arma::vec& lam) {
    arma::vec sbar(s.n_elem);
    for (arma::uword n = 0; n < s.n_elem; ++n) {
        const double a = 1.0 + s(n) * s(n);
        const double b = s(n) + rho * mu(n) + s(n) * s(n) + s(n) * rho * lam(n);
        sbar(n) = b / a;
    }
    return sbar;
}

arma::vec update_selection(const arma::cx_mat& U, const arma::cx_mat& W, const arma::cx_mat& Hbar,
                           const arma::vec& sbar, const DualVariables& duals, double rho,
                           int n_rf_chains) {
    if (!(rho > 0.0))
        throw std::invalid_argument("update_selection: rho must be positive");
    const arma::uword N = U.n_rows;
    const arma::cx_mat UW = U * W;
    const arma::cx_mat receiver_gram = UW * U.t(); // U W U^H
    const arma::cx_mat channel_gram = Hbar * Hbar.t();

    // quadratic form of tr(W E) in s: Re{(U W U^H) o (Hbar Hbar^H)^T}
    arma::mat Q = arma::real(receiver_gram % channel_gram.st());
    Q += (0.5 / rho) * (arma::ones<arma::mat>(N, N) + arma::eye(N, N));
    Q += (0.5 / rho) * arma::diagmat(arma::square(1.0 - sbar));
    Q = 0.5 * (Q + Q.t());

    const arma::vec q = arma::real(arma::diagvec(UW * Hbar.t()));
    const arma::vec g =
        2.0 * q -
        (1.0 / rho) * ((rho * duals.sum_to_budget - double(n_rf_chains)) *
                           arma::ones<arma::vec>(N) +
                       (rho * duals.aux_match - sbar) +
                       rho * (1.0 - sbar) % duals.binary_product);

    return 0.5 * solve_spd(Q, g, "update_selection");
}

arma::cx_vec update_phases(const arma::cx_mat& U, const arma::cx_mat& W, const arma::cx_mat& G,
                           const arma::vec& s, const std::vector<arma::cx_mat>& H,
                           const std::vector<arma::cx_mat>& P, const arma::cx_vec& v,
                           const arma::cx_vec& tau, double rho) {
    if (!(rho > 0.0))
        throw std::invalid_argument("update_phases: rho must be positive");
    const arma::uword M = G.n_cols;
    const arma::cx_mat K = stacked_user_channel(H, P);
    const arma::cx_mat X = U.t() * scale_rows(G, s); // U^H Delta G, L x M

    arma::cx_mat B = (X.t() * W * X) % (K * K.t()).st();
    B += (0.5 / rho) * arma::eye<arma::cx_mat>(M, M);
    B = detail::symmetrize(B);

    const arma::cx_vec b =
        arma::diagvec(X.t() * W * K.t()) + (0.5 / rho) * (v - rho * tau);
    return solve_hpd(B, b, "update_phases");
}

arma::cx_vec update_quantized_phases(const arma::cx_vec& phi, const arma::cx_vec& tau, double rho,
                                     int q_bits) {
    if (!(rho > 0.0))
        throw std::invalid_argument("update_quantized_phases: rho must be positive");
    arma::cx_vec v(phi.n_elem);
    for (arma::uword m = 0; m < phi.n_elem; ++m)
        v(m) = project_phase(phi(m) + rho * tau(m), q_bits);
    return v;
}

PrecoderSolution solve_power_constrained(const arma::cx_mat& C, const arma::cx_mat& D, double p,
                                         double tol) {
    if (!(p > 0.0) || !(tol > 0.0))
        throw std::invalid_argument("solve_power_constrained: budget and tolerance must be positive");

    PrecoderSolution out;
    const double d_total = std::real(arma::trace(D.t() * D));
    if (d_total == 0.0) {
        out.precoder = arma::cx_mat(D.n_rows, D.n_cols, arma::fill::zeros);
        return out;
    }

    arma::vec eigval;
    arma::cx_mat eigvec;
    if (!arma::eig_sym(eigval, eigvec, detail::symmetrize(C)))
        throw std::runtime_error("solve_power_constrained: eigendecomposition failed");
    eigval.transform([](double x) { return x > 0.0 ? x : 0.0; });

    const arma::cx_mat Y = eigvec.t() * D;
    const arma::vec mode_mass = arma::sum(arma::square(arma::abs(Y)), 1);

    // power as a function of the multiplier, strictly decreasing on [0, inf)
    const auto power_at = [&](double lam) {
        double acc = 0.0;
        for (arma::uword i = 0; i < eigval.n_elem; ++i) {
            const double den = eigval(i) + lam;
            acc += mode_mass(i) / (den * den);
        }
        return acc;
    };

    // multiplier-free solution in the pseudo-inverse sense: admissible only
    // when the null space of C carries no component of D
    const double zero_tol = 1e-12 * std::max(eigval.max(), 1e-300);
    double null_mass = 0.0;
    double power0 = 0.0;
    for (arma::uword i = 0; i < eigval.n_elem; ++i) {
        if (eigval(i) <= zero_tol)
            null_mass += mode_mass(i);
        else
            power0 += mode_mass(i) / (eigval(i) * eigval(i));
    }
    if (null_mass <= 1e-20 * d_total && power0 <= p) {
        arma::cx_mat scaled = Y;
        for (arma::uword i = 0; i < eigval.n_elem; ++i)
            scaled.row(i) *= (eigval(i) > zero_tol) ? 1.0 / eigval(i) : 0.0;
        out.precoder = eigvec * scaled;
        return out;
    }

    double hi = 1.0;
    int doublings = 0;
    while (power_at(hi) >= p) {
        hi *= 2.0;
        if (++doublings > 200)
            throw std::runtime_error("solve_power_constrained: failed to bracket the multiplier");
    }
    double lo = 0.0;
    double lam = hi;
    for (int iter = 0; iter < 2000; ++iter) {
        lam = 0.5 * (lo + hi);
        const double pw = power_at(lam);
        if (std::abs(pw - p) < tol * p)
            break;
        (pw > p ? lo : hi) = lam;
    }

    arma::cx_mat scaled = Y;
    for (arma::uword i = 0; i < eigval.n_elem; ++i)
        scaled.row(i) *= 1.0 / (eigval(i) + lam);
    out.precoder = eigvec * scaled;
    out.multiplier = lam;
    return out;
}

arma::cx_mat update_precoder(int k, const SystemConfig& cfg, const ChannelRealization& ch,
                             const arma::vec& s, const arma::cx_vec& phi, const arma::cx_mat& U,
                             const arma::cx_mat& W, double bisect_tol) {
    const auto& Hk = ch.user_to_ris[static_cast<std::size_t>(k)];
    // O_k^H = U^H Delta G Phi H_k, L x N_k
    const arma::cx_mat A =
        U.t() * scale_rows(ch.ris_to_bs, s) * arma::diagmat(phi) * Hk;
    const arma::cx_mat O = A.t();

    const int off = cfg.stream_offset(k);
    const int width = cfg.user_streams[static_cast<std::size_t>(k)];
    const arma::cx_mat C = detail::symmetrize(O * W * O.t());
    const arma::cx_mat D =
        O * W.rows(static_cast<arma::uword>(off), static_cast<arma::uword>(off + width - 1)).t();

    return solve_power_constrained(C, D, cfg.power_budget_mw[static_cast<std::size_t>(k)],
                                   bisect_tol)
        .precoder;
}

double constraint_violation(const PddState& state, int n_rf_chains) {
    double h = std::abs(arma::accu(state.selection) - double(n_rf_chains));
    for (arma::uword n = 0; n < state.selection.n_elem; ++n) {
        h = std::max(h, std::abs(state.selection_aux(n) - state.selection(n)));
        h = std::max(h, std::abs(state.selection(n) * (1.0 - state.selection_aux(n))));
    }
    for (arma::uword m = 0; m < state.phases.n_elem; ++m)
        h = std::max(h, std::abs(state.phases(m) - state.phases_quant(m)));
    return h;
}

DualVariables dual_update(const PddState& state, int n_rf_chains) {
    if (!(state.rho > 0.0))
        throw std::invalid_argument("dual_update: rho must be positive");
    DualVariables next = state.duals;
    const double inv_rho = 1.0 / state.rho;
    next.sum_to_budget += inv_rho * (arma::accu(state.selection) - double(n_rf_chains));
    next.aux_match += inv_rho * (state.selection_aux - state.selection);
    next.binary_product += inv_rho * (state.selection % (1.0 - state.selection_aux));
    next.phase_match += inv_rho * (state.phases_quant - state.phases);
    return next;
}

PddState init_pdd_state(const ChannelRealization& ch, const SystemConfig& cfg,
                        const PddOptions& opts, std::uint64_t seed) {
    const auto N = static_cast<arma::uword>(cfg.n_antennas);
    const auto M = static_cast<arma::uword>(cfg.n_ris_elements);
    RandomStream rng(seed, stream::kPddInit);

    PddState state;
    state.selection =
        arma::vec(N, arma::fill::value(double(cfg.n_rf_chains) / double(cfg.n_antennas)));
    state.selection_aux = state.selection;

    state.phases.set_size(M);
    if (cfg.continuous_phases()) {
        for (arma::uword m = 0; m < M; ++m)
            state.phases(m) = std::polar(1.0, 2.0 * arma::datum::pi * rng.next_uniform());
    } else {
        const auto set = phase_set(cfg.q_bits);
        for (arma::uword m = 0; m < M; ++m)
            state.phases(m) = set[rng.next_below(set.size())];
    }
    state.phases_quant = state.phases;

    state.precoders.reserve(static_cast<std::size_t>(cfg.n_users));
    for (int k = 0; k < cfg.n_users; ++k) {
        arma::cx_mat P(static_cast<arma::uword>(cfg.user_antennas[k]),
                       static_cast<arma::uword>(cfg.user_streams[k]));
        for (auto& entry : P)
            entry = rng.next_cgauss(1.0);
        const double power = std::real(arma::trace(P * P.t()));
        P *= std::sqrt(cfg.power_budget_mw[static_cast<std::size_t>(k)] / power);
        state.precoders.push_back(std::move(P));
    }

    state.duals.aux_match = arma::vec(N, arma::fill::zeros);
    state.duals.binary_product = arma::vec(N, arma::fill::zeros);
    state.duals.phase_match = arma::cx_vec(M, arma::fill::zeros);

    state.rho = opts.rho0;
    state.eta = opts.eta0;
    state.chi = opts.chi;

    const arma::cx_mat Hbar =
        effective_channel(ch.ris_to_bs, state.phases, ch.user_to_ris, state.precoders);
    state.wmmse.receiver = update_receiver(state.selection, Hbar, cfg.noise_power_mw);
    state.wmmse.mse = mse_matrix(state.wmmse.receiver, state.selection, Hbar, cfg.noise_power_mw);
    state.wmmse.weight = update_weight(state.wmmse.mse);
    return state;
}

std::vector<double> inner_bcd(PddState& state, const ChannelRealization& ch,
                              const SystemConfig& cfg, const PddOptions& opts) {
    std::vector<double> trace;
    double previous = al_objective(state, ch, cfg);

    for (int iter = 0; iter < opts.inner_max_iter; ++iter) {
        arma::cx_mat Hbar =
            effective_channel(ch.ris_to_bs, state.phases, ch.user_to_ris, state.precoders);

        state.wmmse.mse =
            mse_matrix(state.wmmse.receiver, state.selection, Hbar, cfg.noise_power_mw);
        state.wmmse.weight = update_weight(state.wmmse.mse);
        state.wmmse.receiver = update_receiver(state.selection, Hbar, cfg.noise_power_mw);

        state.selection_aux = update_aux_selection(state.selection, state.rho,
                                                   state.duals.aux_match,
                                                   state.duals.binary_product);
        state.selection =
            update_selection(state.wmmse.receiver, state.wmmse.weight, Hbar, state.selection_aux,
                             state.duals, state.rho, cfg.n_rf_chains);

        state.phases = update_phases(state.wmmse.receiver, state.wmmse.weight, ch.ris_to_bs,
                                     state.selection, ch.user_to_ris, state.precoders,
                                     state.phases_quant, state.duals.phase_match, state.rho);
        state.phases_quant = update_quantized_phases(state.phases, state.duals.phase_match,
                                                     state.rho, cfg.q_bits);

        for (int k = 0; k < cfg.n_users; ++k)
            state.precoders[static_cast<std::size_t>(k)] =
                update_precoder(k, cfg, ch, state.selection, state.phases, state.wmmse.receiver,
                                state.wmmse.weight, opts.bisect_tol);

        const double objective = al_objective(state, ch, cfg);
        trace.push_back(objective);
        if (previous - objective < opts.inner_tol * std::max(1.0, std::abs(previous)))
            break;
        previous = objective;
    }
    return trace;
}

DesignState finalize_design(const PddState& state, const ChannelRealization& ch,
                            const SystemConfig& cfg, const PddOptions& opts) {
    DesignState design;
    design.selection =
        binary_from_indices(top_indices(state.selection, cfg.n_rf_chains), state.selection.n_elem);
    design.phases = state.phases_quant;
    design.precoders.reserve(static_cast<std::size_t>(cfg.n_users));
    for (int k = 0; k < cfg.n_users; ++k)
        design.precoders.push_back(update_precoder(k, cfg, ch, design.selection, design.phases,
                                                   state.wmmse.receiver, state.wmmse.weight,
                                                   opts.bisect_tol));
    return design;
}

std::pair<DesignState, PddDiagnostics> pdd_solve(const ChannelRealization& ch,
                                                 const SystemConfig& cfg, const PddOptions& opts,
                                                 std::uint64_t seed) {
    cfg.validate();
    ch.validate(cfg);
    opts.validate();

    PddState state = init_pdd_state(ch, cfg, opts, seed);
    PddDiagnostics diag;

    for (int t = 0; t < opts.outer_max_iter; ++t) {
        diag.inner_traces.push_back(inner_bcd(state, ch, cfg, opts));

        const double h = constraint_violation(state, cfg.n_rf_chains);
        diag.violation.push_back(h);
        diag.rho.push_back(state.rho);
        diag.eta.push_back(state.eta);
        {
            const arma::cx_mat Hbar =
                effective_channel(ch.ris_to_bs, state.phases, ch.user_to_ris, state.precoders);
            diag.rate_relaxed.push_back(sum_rate(state.selection, Hbar, cfg.noise_power_mw));
            const arma::vec rounded = binary_from_indices(
                top_indices(state.selection, cfg.n_rf_chains), state.selection.n_elem);
            const arma::cx_mat Hbar_quant = effective_channel(ch.ris_to_bs, state.phases_quant,
                                                              ch.user_to_ris, state.precoders);
            diag.rate_rounded.push_back(sum_rate(rounded, Hbar_quant, cfg.noise_power_mw));
        }
        state.outer_iter = t + 1;
        diag.outer_iterations = t + 1;

        if (h < opts.outer_tol) {
            diag.converged = true;
            break;
        }
        if (h < state.eta)
            state.duals = dual_update(state, cfg.n_rf_chains);
        else
            state.rho *= state.chi;
        state.eta = state.chi * h;
    }

    return {finalize_design(state, ch, cfg, opts), diag};
}

} // namespace risbf
