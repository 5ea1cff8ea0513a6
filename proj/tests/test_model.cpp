// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <complex>

#include "helpers.hpp"
#include "risbf/model.hpp"
#include "risbf/pdd.hpp"

using namespace risbf;
using Catch::Approx;

namespace {

// independent reference for nearest_phase: plain enumeration with the
// lowest-index tie rule
std::complex<double> nearest_phase_oracle(std::complex<double> z, int q) {
    const auto set = phase_set(q);
    std::size_t best = 0;
    double best_score = std::real(set[0] * std::conj(z));
    for (std::size_t t = 1; t < set.size(); ++t) {
        const double score = std::real(set[t] * std::conj(z));
        if (score > best_score) {
            best = t;
            best_score = score;
        }
    }
    return set[best];
}

} // namespace

TEST_CASE("phase_set basics", "[model]") {
    const auto q1 = phase_set(1);
    REQUIRE(q1.size() == 2);
    CHECK(q1[0] == std::complex<double>(1.0, 0.0));
    CHECK(std::abs(q1[1] - std::complex<double>(-1.0, 0.0)) < 1e-15);

    const auto q2 = phase_set(2);
    REQUIRE(q2.size() == 4);
    CHECK(std::abs(q2[1] - std::complex<double>(0.0, 1.0)) < 1e-15);
    CHECK(std::abs(q2[2] - std::complex<double>(-1.0, 0.0)) < 1e-15);
    CHECK(std::abs(q2[3] - std::complex<double>(0.0, -1.0)) < 1e-15);

    // roots of unity sum to zero; verified by direct summation
    const auto q3 = phase_set(3);
    REQUIRE(q3.size() == 8);
    std::complex<double> sum{0.0, 0.0};
    for (const auto& v : q3)
        sum += v;
    CHECK(std::abs(sum) < 1e-14);

    for (std::size_t i = 0; i < q3.size(); ++i)
        for (std::size_t j = i + 1; j < q3.size(); ++j)
            CHECK(q3[i] != q3[j]);

    CHECK_THROWS_AS(phase_set(0), std::invalid_argument);
    CHECK_THROWS_AS(phase_set(17), std::invalid_argument);
}

TEST_CASE("nearest_phase named cases", "[model]") {
    CHECK(nearest_phase(std::polar(1.0, 0.1), 2) == std::complex<double>(1.0, 0.0));
    CHECK(nearest_phase(std::polar(1.0, arma::datum::pi / 2.0), 1) ==
          std::complex<double>(1.0, 0.0));
    // equidistant between set index 1 (j) and 2 (-1): the lower index wins
    const auto v = nearest_phase(std::polar(5.0, 3.0 * arma::datum::pi / 4.0), 2);
    CHECK(v == phase_set(2)[1]);
}

TEST_CASE("nearest_phase matches exhaustive argmax", "[model]") {
    RandomStream rng(7, 1);
    for (int q = 1; q <= 3; ++q) {
        for (int i = 0; i < 200; ++i) {
            const std::complex<double> z = rng.next_cgauss(1.0);
            if (z == std::complex<double>(0.0, 0.0))
                continue;
            CHECK(nearest_phase(z, q) == nearest_phase_oracle(z, q));
        }
    }
}

TEST_CASE("nearest_phase degenerate input", "[model]") {
    bool degenerate = false;
    const auto v = nearest_phase({0.0, 0.0}, 3, &degenerate);
    CHECK(degenerate);
    CHECK(v == std::complex<double>(1.0, 0.0));

    degenerate = false;
    CHECK(project_phase({0.0, 0.0}, kContinuousPhases, &degenerate) ==
          std::complex<double>(1.0, 0.0));
    CHECK(degenerate);

    // continuous projection strips the modulus
    const auto u = project_phase(std::polar(3.0, 1.2), kContinuousPhases);
    CHECK(std::abs(u - std::polar(1.0, 1.2)) < 1e-15);
}

TEST_CASE("selection_delta forms the diagonal", "[model]") {
    CHECK(arma::norm(selection_delta({1.0, 0.0, 1.0}) - arma::diagmat(arma::vec{1, 0, 1})) == 0.0);
    CHECK(arma::norm(selection_delta(arma::ones<arma::vec>(4)) - arma::eye(4, 4)) == 0.0);
    const arma::mat d = selection_delta({0.3, 0.7});
    CHECK(d(0, 0) == 0.3);
    CHECK(d(1, 1) == 0.7);
    CHECK(d(0, 1) == 0.0);
}

TEST_CASE("effective_channel scalar and zero cases", "[model]") {
    const std::complex<double> g{0.3, -0.2}, f{0.0, 1.0}, h{1.5, 0.4}, p{-0.7, 0.1};
    const arma::cx_mat Hbar = effective_channel(arma::cx_mat{{g}}, arma::cx_vec{f},
                                                {arma::cx_mat{{h}}}, {arma::cx_mat{{p}}});
    REQUIRE(Hbar.n_rows == 1);
    REQUIRE(Hbar.n_cols == 1);
    CHECK(std::abs(Hbar(0, 0) - g * f * h * p) < 1e-15);

    SystemConfig cfg = test::make_config(4, 2, 3, 2, 2, 2, 1);
    ChannelRealization ch = test::unit_channel(cfg, 3);
    std::vector<arma::cx_mat> zeros;
    for (int k = 0; k < cfg.n_users; ++k)
        zeros.emplace_back(2, 1, arma::fill::zeros);
    CHECK(arma::norm(effective_channel(ch.ris_to_bs, arma::ones<arma::cx_vec>(3), ch.user_to_ris,
                                       zeros),
                     "fro") == 0.0);
}

TEST_CASE("effective_channel equals per-user block products", "[model]") {
    SystemConfig cfg = test::make_config(5, 2, 4, 2, 3, 2, 2);
    ChannelRealization ch = test::unit_channel(cfg, 11);
    RandomStream rng(12, 5);
    const arma::cx_vec phi = test::random_unit_phases(rng, 4);
    const auto P = test::random_precoders(rng, cfg);

    const arma::cx_mat Hbar = effective_channel(ch.ris_to_bs, phi, ch.user_to_ris, P);

    arma::uword col = 0;
    for (int k = 0; k < cfg.n_users; ++k) {
        const arma::cx_mat block =
            ch.ris_to_bs * arma::diagmat(phi) * ch.user_to_ris[std::size_t(k)] * P[std::size_t(k)];
        CHECK(arma::norm(Hbar.cols(col, col + block.n_cols - 1) - block, "fro") < 1e-12);
        col += block.n_cols;
    }

    std::vector<arma::cx_mat> bad = P;
    bad[0] = arma::cx_mat(3, 2, arma::fill::zeros); // wrong row count
    CHECK_THROWS_AS(effective_channel(ch.ris_to_bs, phi, ch.user_to_ris, bad),
                    std::invalid_argument);
}

TEST_CASE("sum_rate closed forms", "[model]") {
    CHECK(sum_rate(arma::vec{1.0, 1.0}, arma::cx_mat(2, 3, arma::fill::zeros), 0.5) == 0.0);

    const std::complex<double> h{0.8, -0.6};
    const double sigma2 = 0.25;
    const double expected = std::log2(1.0 + std::norm(h) / sigma2);
    CHECK(sum_rate(arma::vec{1.0}, arma::cx_mat{{h}}, sigma2) == Approx(expected).epsilon(1e-12));

    CHECK_THROWS_AS(sum_rate(arma::vec{1.0}, arma::cx_mat{{h}}, 0.0), std::invalid_argument);
}

TEST_CASE("sum_rate_direct closed forms and errors", "[model]") {
    SystemConfig cfg = test::make_config(4, 2, 3, 2, 2, 2, 1);
    ChannelRealization ch = test::unit_channel(cfg, 21);
    RandomStream rng(22, 9);
    const arma::cx_vec phi = test::random_unit_phases(rng, 3);

    std::vector<arma::cx_mat> zero_cov(2, arma::cx_mat(2, 2, arma::fill::zeros));
    CHECK(sum_rate_direct({0, 2}, ch.ris_to_bs, phi, ch.user_to_ris, zero_cov, 1.0) == 0.0);

    CHECK_THROWS_AS(sum_rate_direct({0, 0}, ch.ris_to_bs, phi, ch.user_to_ris, zero_cov, 1.0),
                    std::invalid_argument);

    // scalar chain: rate = log2(1 + |g f h|^2 q / sigma2)
    const std::complex<double> g{0.3, -0.2}, f{0.0, 1.0}, h{1.5, 0.4};
    const double q = 0.7, sigma2 = 0.2;
    const double expected = std::log2(1.0 + std::norm(g * f * h) * q / sigma2);
    CHECK(sum_rate_direct({0}, arma::cx_mat{{g}}, arma::cx_vec{f}, {arma::cx_mat{{h}}},
                          {arma::cx_mat{{std::complex<double>(q, 0.0)}}}, sigma2) ==
          Approx(expected).epsilon(1e-12));
}

TEST_CASE("sum_rate agrees with the covariance route", "[model]") {
    RandomStream rng(31, 2);
    for (int trial = 0; trial < 100; ++trial) {
        const int N = 3 + int(rng.next_below(6));
        const int T = 1 + int(rng.next_below(std::uint64_t(N - 1)));
        const int M = 2 + int(rng.next_below(5));
        const int K = 1 + int(rng.next_below(3));
        SystemConfig cfg = test::make_config(N, T, M, 2, K, 2, 2);
        ChannelRealization ch = test::unit_channel(cfg, 1000 + std::uint64_t(trial));
        const arma::cx_vec phi = test::random_unit_phases(rng, arma::uword(M));
        const auto P = test::random_precoders(rng, cfg);
        const arma::vec s = test::random_binary_selection(rng, N, T);

        std::vector<arma::cx_mat> Qcov;
        for (const auto& Pk : P)
            Qcov.push_back(Pk * Pk.t());

        const double via_gram =
            sum_rate(s, effective_channel(ch.ris_to_bs, phi, ch.user_to_ris, P), 0.37);
        const double via_cov =
            sum_rate_direct(test::active_rows(s), ch.ris_to_bs, phi, ch.user_to_ris, Qcov, 0.37);
        CHECK(via_gram == Approx(via_cov).epsilon(1e-10));
    }
}

TEST_CASE("sum_rate monotone in the selected set", "[model]") {
    RandomStream rng(41, 3);
    SystemConfig cfg = test::make_config(6, 3, 5, 2, 2, 2, 2);
    for (int trial = 0; trial < 50; ++trial) {
        ChannelRealization ch = test::unit_channel(cfg, 2000 + std::uint64_t(trial));
        const arma::cx_vec phi = test::random_unit_phases(rng, 5);
        const auto P = test::random_precoders(rng, cfg);
        const arma::cx_mat Hbar = effective_channel(ch.ris_to_bs, phi, ch.user_to_ris, P);

        arma::vec s = test::random_binary_selection(rng, 6, 3);
        const double before = sum_rate(s, Hbar, 1.0);
        for (arma::uword n = 0; n < 6; ++n)
            if (s(n) == 0.0) {
                s(n) = 1.0;
                break;
            }
        CHECK(sum_rate(s, Hbar, 1.0) >= before - 1e-10);
    }
}

TEST_CASE("sum_rate invariant under user permutation", "[model]") {
    SystemConfig cfg = test::make_config(5, 2, 4, 2, 3, 2, 2);
    ChannelRealization ch = test::unit_channel(cfg, 55);
    RandomStream rng(56, 4);
    const arma::cx_vec phi = test::random_unit_phases(rng, 4);
    auto P = test::random_precoders(rng, cfg);
    const arma::vec s = test::random_binary_selection(rng, 5, 2);

    const double base = sum_rate(s, effective_channel(ch.ris_to_bs, phi, ch.user_to_ris, P), 1.0);

    auto H_perm = ch.user_to_ris;
    std::rotate(H_perm.begin(), H_perm.begin() + 1, H_perm.end());
    std::rotate(P.begin(), P.begin() + 1, P.end());
    const double permuted = sum_rate(s, effective_channel(ch.ris_to_bs, phi, H_perm, P), 1.0);
    CHECK(base == Approx(permuted).epsilon(1e-12));
}

TEST_CASE("mse_matrix identities and positivity", "[model]") {
    SystemConfig cfg = test::make_config(5, 2, 4, 2, 2, 2, 2);
    ChannelRealization ch = test::unit_channel(cfg, 61);
    RandomStream rng(62, 6);
    const arma::cx_vec phi = test::random_unit_phases(rng, 4);
    const auto P = test::random_precoders(rng, cfg);
    const arma::cx_mat Hbar = effective_channel(ch.ris_to_bs, phi, ch.user_to_ris, P);
    const arma::vec s = test::random_binary_selection(rng, 5, 2);
    const auto L = arma::uword(cfg.total_streams());

    // zero receiver leaves the identity
    const arma::cx_mat E0 = mse_matrix(arma::cx_mat(5, L, arma::fill::zeros), s, Hbar, 0.8);
    CHECK(arma::norm(E0 - arma::eye<arma::cx_mat>(L, L), "fro") < 1e-14);

    const arma::cx_mat U = test::random_matrix(rng, 5, L);
    const arma::cx_mat E = mse_matrix(U, s, Hbar, 0.8);
    CHECK(arma::norm(E - E.t(), "fro") == 0.0); // exactly Hermitian
    arma::vec eig;
    REQUIRE(arma::eig_sym(eig, E));
    CHECK(eig.min() > 0.0);

    // the trace grows linearly in sigma2 with slope tr(U^H U)
    const double t1 = std::real(arma::trace(mse_matrix(U, s, Hbar, 1.0)));
    const double t2 = std::real(arma::trace(mse_matrix(U, s, Hbar, 101.0)));
    CHECK((t2 - t1) / 100.0 == Approx(std::real(arma::trace(U.t() * U))).epsilon(1e-10));
}

TEST_CASE("mse_matrix is minimized by the MMSE receiver", "[model]") {
    SystemConfig cfg = test::make_config(6, 3, 4, 2, 2, 2, 2);
    ChannelRealization ch = test::unit_channel(cfg, 71);
    RandomStream rng(72, 7);
    const arma::cx_vec phi = test::random_unit_phases(rng, 4);
    const auto P = test::random_precoders(rng, cfg);
    const arma::cx_mat Hbar = effective_channel(ch.ris_to_bs, phi, ch.user_to_ris, P);
    const arma::vec s = test::random_binary_selection(rng, 6, 3);

    const arma::cx_mat U_opt = update_receiver(s, Hbar, 0.5);
    const double best = std::real(arma::trace(mse_matrix(U_opt, s, Hbar, 0.5)));
    for (int i = 0; i < 100; ++i) {
        const arma::cx_mat U_pert =
            U_opt + 0.1 * test::random_matrix(rng, U_opt.n_rows, U_opt.n_cols);
        CHECK(std::real(arma::trace(mse_matrix(U_pert, s, Hbar, 0.5))) >= best - 1e-12);
    }
}

TEST_CASE("wmmse_objective identities", "[model]") {
    const arma::cx_mat I2 = arma::eye<arma::cx_mat>(2, 2);
    CHECK(wmmse_objective(I2, I2) == Approx(2.0).epsilon(1e-14));

    RandomStream rng(81, 8);
    const arma::cx_mat E = test::random_psd(rng, 3, 3) + 0.5 * arma::eye<arma::cx_mat>(3, 3);
    const arma::cx_mat W = update_weight(E);
    const double logdet_e = std::log(std::real(arma::det(E)));
    CHECK(wmmse_objective(W, E) == Approx(3.0 + logdet_e).epsilon(1e-10));

    CHECK_THROWS_AS(wmmse_objective(arma::cx_mat(2, 2, arma::fill::zeros), I2),
                    std::domain_error);
}

TEST_CASE("minimized WMMSE objective recovers the rate", "[model]") {
    SystemConfig cfg = test::make_config(6, 3, 5, 2, 2, 2, 2);
    ChannelRealization ch = test::unit_channel(cfg, 91);
    RandomStream rng(92, 9);
    const arma::cx_vec phi = test::random_unit_phases(rng, 5);
    const auto P = test::random_precoders(rng, cfg);
    const arma::cx_mat Hbar = effective_channel(ch.ris_to_bs, phi, ch.user_to_ris, P);
    const arma::vec s = test::random_binary_selection(rng, 6, 3);
    const double sigma2 = 0.4;

    const arma::cx_mat U = update_receiver(s, Hbar, sigma2);
    const arma::cx_mat E = mse_matrix(U, s, Hbar, sigma2);
    const arma::cx_mat W = update_weight(E);

    const double rate = sum_rate(s, Hbar, sigma2);
    CHECK(wmmse_objective(W, E) ==
          Approx(double(cfg.total_streams()) - rate * std::log(2.0)).epsilon(1e-8));
}

TEST_CASE("config validation rejects bad dimensions", "[model]") {
    SystemConfig cfg = test::make_config(8, 3, 8, 4, 2, 2, 2);
    CHECK_NOTHROW(cfg.validate());

    SystemConfig bad = cfg;
    bad.n_rf_chains = 8; // T >= N
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.user_streams[0] = 3; // L_k > N_k
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.q_bits = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.q_bits = kContinuousPhases;
    CHECK_NOTHROW(bad.validate());

    bad = cfg;
    bad.power_budget_mw[1] = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("validate_design enforces the feasibility contract", "[model]") {
    SystemConfig cfg = test::make_config(4, 2, 3, 2, 2, 2, 1.0);
    DesignState design;
    design.selection = {1.0, 0.0, 1.0, 0.0};
    design.phases = arma::cx_vec{phase_set(2)[1], phase_set(2)[0], phase_set(2)[3]};
    design.precoders = {arma::cx_mat(2, 2, arma::fill::zeros),
                        arma::cx_mat(2, 2, arma::fill::zeros)};
    CHECK_NOTHROW(validate_design(design, cfg));

    DesignState bad = design;
    bad.selection(1) = 0.5;
    CHECK_THROWS_AS(validate_design(bad, cfg), std::invalid_argument);

    bad = design;
    bad.phases(0) = std::polar(1.0, 0.123); // not in the quantized set
    CHECK_THROWS_AS(validate_design(bad, cfg), std::invalid_argument);

    bad = design;
    bad.precoders[0](0, 0) = 1.5; // power 2.25 > 1
    CHECK_THROWS_AS(validate_design(bad, cfg), std::invalid_argument);
}
