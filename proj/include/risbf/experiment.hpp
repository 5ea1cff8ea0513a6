// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef RISBF_EXPERIMENT_HPP
#define RISBF_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "risbf/benchmarks.hpp"
#include "risbf/channel.hpp"
#include "risbf/pdd.hpp"
#include "risbf/so.hpp"
#include "risbf/types.hpp"

namespace risbf {

enum class Scheme { kPdd, kSo, kAo, kRandom };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

enum class SweepKind { kNone, kPower, kQBits, kRfChains };

std::string sweep_name(SweepKind kind);

/// Copy of the base configuration with one sweep variable replaced. Power
/// values are dBm (applied to every user); an infinite q_bits value selects
/// continuous phases.
SystemConfig apply_sweep(const SystemConfig& base, SweepKind kind, double value);

/// Monte Carlo experiment description. Realization i uses channel seed
/// seed0 + i at every sweep point, so schemes see identical channels.
struct ExperimentSpec {
    SystemConfig base;
    FadingSpec fading;
    SweepKind sweep = SweepKind::kNone;
    std::vector<double> sweep_values; // ignored for kNone
    std::vector<Scheme> schemes = {Scheme::kPdd, Scheme::kSo, Scheme::kAo, Scheme::kRandom};
    int n_realizations = 50;
    std::uint64_t seed0 = 1;
    bool record_traces = false;
    int jobs = 1;
    PddOptions pdd;
    SoOptions so;
    AoOptions ao;

    void validate() const;
};

/// Paper-style defaults: N=16, T=6, M=32, Q=4, K=4, N_k=L_k=3, p=-5 dBm,
/// noise -120 dBm, composite path loss -120 dB.
ExperimentSpec default_spec();

/// Reads an ExperimentSpec from its JSON description; absent fields keep the
/// defaults. Accepts "inf" for q_bits.
ExperimentSpec parse_spec(const nlohmann::json& j);
ExperimentSpec load_spec(const std::string& path);

struct SeedOutcome {
    std::uint64_t seed = 0;
    double sum_rate_bpshz = 0.0;
    bool ok = true;
};

/// One outer-iteration sample of the PDD convergence trace.
struct TraceRow {
    std::uint64_t seed = 0;
    int outer_iter = 0;
    double violation = 0.0;
    double rho = 0.0;
    double sum_rate = 0.0;
};

struct ResultCell {
    double sweep_value = 0.0;
    Scheme scheme = Scheme::kRandom;
    std::vector<SeedOutcome> runs; // one per realization, ordered by seed
    std::vector<TraceRow> traces;  // pdd only, when enabled
    double mean = 0.0;             // over successful runs
    double stddev = 0.0;           // sample standard deviation
    int n_ok = 0;
    int failures = 0;
};

struct ExperimentResult {
    std::string sweep_var;          // "power_dbm", "q_bits", "rf_chains" or "none"
    std::vector<ResultCell> cells;  // ordered by (sweep point, scheme)
};

/// Rate of a finalized design evaluated from first principles (never a
/// solver's internal estimate).
double design_sum_rate(const DesignState& design, const ChannelRealization& ch,
                       const SystemConfig& cfg);

/// Runs every (sweep point x realization) task, dispatching each requested
/// scheme on the shared channel draw. Solver exceptions are recorded as
/// failed runs and excluded from the aggregates.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Writes results under the given directory. "csv" produces results.csv and
/// aggregates.csv (plus traces.csv when traces were recorded); "json"
/// produces results.json carrying the same data. Output bytes are a pure
/// function of the result.
void emit_results(const ExperimentResult& result, const std::string& format,
                  const std::string& out_dir);

/// Fixed-format decimal rendering used for all emitted numbers: shortest of
/// 17 significant digits, so parsing reproduces the double exactly.
std::string format_double(double v);

} // namespace risbf

#endif // RISBF_EXPERIMENT_HPP
