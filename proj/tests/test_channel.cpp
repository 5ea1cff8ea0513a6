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

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "risbf/channel.hpp"

using namespace risbf;
using Catch::Approx;

TEST_CASE("generation is deterministic in the seed", "[channel]") {
    const SystemConfig cfg = test::make_config(6, 2, 5, 3, 2, 2, 2);
    const FadingSpec fading;

    const ChannelRealization a = generate_realization(cfg, fading, 42);
    const ChannelRealization b = generate_realization(cfg, fading, 42);
    CHECK(arma::norm(a.ris_to_bs - b.ris_to_bs, "fro") == 0.0);
    for (std::size_t k = 0; k < a.user_to_ris.size(); ++k)
        CHECK(arma::norm(a.user_to_ris[k] - b.user_to_ris[k], "fro") == 0.0);

    const ChannelRealization c = generate_realization(cfg, fading, 43);
    CHECK(arma::norm(a.ris_to_bs - c.ris_to_bs, "fro") > 0.0);
    CHECK_NOTHROW(a.validate(cfg));
}

TEST_CASE("per-entry moments match the fading spec", "[channel]") {
    // 100 x 100 entries x 10 seeds = 1e5 draws per hop
    SystemConfig cfg = test::make_config(100, 10, 100, 1, 1, 1, 1);
    FadingSpec fading;
    fading.pathloss_db = -20.0; // variance 0.1 per hop
    const double v = fading.hop_variance();
    CHECK(v == Approx(0.1).epsilon(1e-12));
    CHECK(v * v == Approx(std::pow(10.0, fading.pathloss_db / 10.0)).epsilon(1e-12));

    double acc_sq = 0.0, acc_re = 0.0, acc_im = 0.0, acc_re_sq = 0.0, acc_im_sq = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const ChannelRealization ch = generate_realization(cfg, fading, seed);
        for (const auto& z : ch.ris_to_bs) {
            acc_sq += std::norm(z);
            acc_re += z.real();
            acc_im += z.imag();
            acc_re_sq += z.real() * z.real();
            acc_im_sq += z.imag() * z.imag();
            ++count;
        }
    }
    const double n = double(count);
    CHECK(acc_sq / n == Approx(v).epsilon(0.02));
    // real and imaginary parts carry half the variance each
    CHECK(acc_re_sq / n == Approx(v / 2.0).epsilon(0.05));
    CHECK(acc_im_sq / n == Approx(v / 2.0).epsilon(0.05));
    // zero mean within 3 sigma of the sample-mean estimator
    const double bound = 3.0 * std::sqrt(v / 2.0 / n);
    CHECK(std::abs(acc_re / n) < bound);
    CHECK(std::abs(acc_im / n) < bound);
}

TEST_CASE("user channels are uncorrelated", "[channel]") {
    SystemConfig cfg = test::make_config(4, 2, 64, 1, 2, 8, 1);
    FadingSpec fading;
    fading.pathloss_db = 0.0; // unit variance keeps the estimator simple

    std::complex<double> cross{0.0, 0.0};
    std::size_t count = 0;
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        const ChannelRealization ch = generate_realization(cfg, fading, seed);
        for (arma::uword i = 0; i < ch.user_to_ris[0].n_elem; ++i) {
            cross += ch.user_to_ris[0](i) * std::conj(ch.user_to_ris[1](i));
            ++count;
        }
    }
    CHECK(std::abs(cross) / double(count) < 3.0 / std::sqrt(double(count)));
}

TEST_CASE("channel records round-trip losslessly", "[channel]") {
    const SystemConfig cfg = test::make_config(5, 2, 4, 2, 2, 3, 2);
    const FadingSpec fading;
    std::vector<ChannelRealization> original;
    for (std::uint64_t seed = 7; seed < 10; ++seed)
        original.push_back(generate_realization(cfg, fading, seed));

    std::stringstream buffer;
    save_realizations(buffer, original);
    const auto loaded = load_realizations(buffer);

    REQUIRE(loaded.size() == original.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].seed == original[i].seed);
        CHECK(arma::norm(loaded[i].ris_to_bs - original[i].ris_to_bs, "fro") == 0.0);
        for (std::size_t k = 0; k < loaded[i].user_to_ris.size(); ++k)
            CHECK(arma::norm(loaded[i].user_to_ris[k] - original[i].user_to_ris[k], "fro") ==
                  0.0);
    }
}

TEST_CASE("fading spec validation", "[channel]") {
    FadingSpec bad;
    bad.pathloss_db = 3.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
