// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "risbf/experiment.hpp"

namespace {

std::vector<double> preset_sweep(risbf::SweepKind kind) {
    switch (kind) {
    case risbf::SweepKind::kPower:
        return {-15.0, -10.0, -5.0, 0.0};
    case risbf::SweepKind::kQBits:
        return {1, 2, 3, 4, 5, 6, std::numeric_limits<double>::infinity()};
    case risbf::SweepKind::kRfChains:
        return {2, 3, 4, 5, 6};
    case risbf::SweepKind::kNone:
        break;
    }
    return {};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo experiments for joint receive antenna selection, "
                 "RIS phase-shift design and uplink precoding"};

    std::string config_path;
    std::string schemes_csv;
    std::string sweep_flag;
    std::string out_dir = "results";
    std::string format = "csv";
    int realizations = -1;
    std::int64_t seed = -1;
    int jobs = -1;
    bool trace = false;

    app.add_option("--config", config_path, "experiment description (JSON)")
        ->check(CLI::ExistingFile);
    app.add_option("--schemes", schemes_csv, "comma-separated subset of pdd,so,ao,random");
    app.add_option("--realizations", realizations, "channel realizations per sweep point");
    app.add_option("--seed", seed, "base channel seed");
    app.add_option("--sweep", sweep_flag, "sweep variable: power, qbits or rf")
        ->check(CLI::IsMember({"power", "qbits", "rf"}));
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--trace", trace, "record PDD convergence traces");
    app.add_option("--jobs", jobs, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        risbf::ExperimentSpec spec =
            config_path.empty() ? risbf::default_spec() : risbf::load_spec(config_path);

        if (!schemes_csv.empty()) {
            spec.schemes.clear();
            std::size_t start = 0;
            while (start <= schemes_csv.size()) {
                const std::size_t end = schemes_csv.find(',', start);
                const std::string token =
                    schemes_csv.substr(start, end == std::string::npos ? end : end - start);
                if (!token.empty())
                    spec.schemes.push_back(risbf::scheme_from_name(token));
                if (end == std::string::npos)
                    break;
                start = end + 1;
            }
        }
        if (!sweep_flag.empty()) {
            const risbf::SweepKind kind = sweep_flag == "power" ? risbf::SweepKind::kPower
                                          : sweep_flag == "qbits" ? risbf::SweepKind::kQBits
                                                                  : risbf::SweepKind::kRfChains;
            if (spec.sweep != kind) {
                spec.sweep = kind;
                spec.sweep_values = preset_sweep(kind);
            }
        }
        if (realizations > 0)
            spec.n_realizations = realizations;
        if (seed >= 0)
            spec.seed0 = static_cast<std::uint64_t>(seed);
        if (jobs > 0)
            spec.jobs = jobs;
        if (trace)
            spec.record_traces = true;

        const risbf::ExperimentResult result = risbf::run_experiment(spec);
        risbf::emit_results(result, format, out_dir);

        int failures = 0;
        for (const auto& cell : result.cells) {
            failures += cell.failures;
            std::printf("%s=%s %s: mean %.4f bits/s/Hz (std %.4f, n=%d, failures=%d)\n",
                        result.sweep_var.c_str(),
                        risbf::format_double(cell.sweep_value).c_str(),
                        risbf::scheme_name(cell.scheme).c_str(), cell.mean, cell.stddev, cell.n_ok,
                        cell.failures);
        }
        if (failures > 0) {
            std::fprintf(stderr, "%d solver run(s) failed; see per-seed output\n", failures);
            return 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
