// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "risbf/channel.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "risbf/rng.hpp"

namespace risbf {

double FadingSpec::hop_variance() const { return std::pow(10.0, pathloss_db / 20.0); }

void FadingSpec::validate() const {
    if (pathloss_db > 0.0)
        throw std::invalid_argument("fading: path loss must be non-positive dB");
}

namespace {

arma::cx_mat draw_matrix(RandomStream& rng, arma::uword rows, arma::uword cols, double variance) {
    arma::cx_mat out(rows, cols);
    // row-major fill order is part of the reproducibility contract
    for (arma::uword r = 0; r < rows; ++r)
        for (arma::uword c = 0; c < cols; ++c)
            out(r, c) = rng.next_cgauss(variance);
    return out;
}

nlohmann::json matrix_to_json(const arma::cx_mat& M) {
    nlohmann::json entries = nlohmann::json::array();
    for (arma::uword r = 0; r < M.n_rows; ++r)
        for (arma::uword c = 0; c < M.n_cols; ++c)
            entries.push_back({M(r, c).real(), M(r, c).imag()});
    return {{"rows", M.n_rows}, {"cols", M.n_cols}, {"entries", std::move(entries)}};
}

arma::cx_mat matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<arma::uword>();
    const auto cols = j.at("cols").get<arma::uword>();
    const auto& entries = j.at("entries");
    if (entries.size() != rows * cols)
        throw std::invalid_argument("channel record: entry count does not match shape");
    arma::cx_mat M(rows, cols);
    std::size_t i = 0;
    for (arma::uword r = 0; r < rows; ++r)
        for (arma::uword c = 0; c < cols; ++c, ++i)
            M(r, c) = {entries[i][0].get<double>(), entries[i][1].get<double>()};
    return M;
}

} // namespace

ChannelRealization generate_realization(const SystemConfig& cfg, const FadingSpec& fading,
                                        std::uint64_t seed) {
    cfg.validate();
    fading.validate();
    const double v = fading.hop_variance();

    ChannelRealization ch;
    ch.seed = seed;
    {
        RandomStream rng(seed, stream::kRisToBs);
        ch.ris_to_bs = draw_matrix(rng, static_cast<arma::uword>(cfg.n_antennas),
                                   static_cast<arma::uword>(cfg.n_ris_elements), v);
    }
    ch.user_to_ris.reserve(static_cast<std::size_t>(cfg.n_users));
    for (int k = 0; k < cfg.n_users; ++k) {
        RandomStream rng(seed, stream::kUserToRisBase + static_cast<std::uint64_t>(k));
        ch.user_to_ris.push_back(draw_matrix(rng, static_cast<arma::uword>(cfg.n_ris_elements),
                                             static_cast<arma::uword>(cfg.user_antennas[k]), v));
    }
    return ch;
}

void save_realizations(std::ostream& out, const std::vector<ChannelRealization>& realizations) {
    for (const auto& ch : realizations) {
        nlohmann::json users = nlohmann::json::array();
        for (const auto& Hk : ch.user_to_ris)
            users.push_back(matrix_to_json(Hk));
        const nlohmann::json record = {
            {"seed", ch.seed}, {"ris_to_bs", matrix_to_json(ch.ris_to_bs)}, {"users", users}};
        out << record.dump() << '\n';
    }
    if (!out)
        throw std::runtime_error("save_realizations: write failed");
}

void save_realizations(const std::string& path,
                       const std::vector<ChannelRealization>& realizations) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("save_realizations: cannot open " + path);
    save_realizations(out, realizations);
}

std::vector<ChannelRealization> load_realizations(std::istream& in) {
    std::vector<ChannelRealization> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto record = nlohmann::json::parse(line);
        ChannelRealization ch;
        ch.seed = record.at("seed").get<std::uint64_t>();
        ch.ris_to_bs = matrix_from_json(record.at("ris_to_bs"));
        for (const auto& u : record.at("users"))
            ch.user_to_ris.push_back(matrix_from_json(u));
        out.push_back(std::move(ch));
    }
    return out;
}

std::vector<ChannelRealization> load_realizations(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_realizations: cannot open " + path);
    return load_realizations(in);
}

} // namespace risbf
