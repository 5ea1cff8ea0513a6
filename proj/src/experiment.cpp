// SPDX-License-Identifier: Apache-2.0
//
// risbf - joint receive antenna selection and beamforming for RIS-aided
// multiuser MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "risbf/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

namespace risbf {

std::string scheme_name(Scheme s) {
    switch (s) {
    case Scheme::kPdd:
        return "pdd";
    case Scheme::kSo:
        return "so";
    case Scheme::kAo:
        return "ao";
    case Scheme::kRandom:
        return "random";
    }
    throw std::logic_error("scheme_name: unknown scheme");
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "pdd")
        return Scheme::kPdd;
    if (name == "so")
        return Scheme::kSo;
    if (name == "ao")
        return Scheme::kAo;
    if (name == "random")
        return Scheme::kRandom;
    throw std::invalid_argument("unknown scheme: " + name);
}

std::string sweep_name(SweepKind kind) {
    switch (kind) {
    case SweepKind::kNone:
        return "none";
    case SweepKind::kPower:
        return "power_dbm";
    case SweepKind::kQBits:
        return "q_bits";
    case SweepKind::kRfChains:
        return "rf_chains";
    }
    throw std::logic_error("sweep_name: unknown sweep kind");
}

namespace {

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

} // namespace

SystemConfig apply_sweep(const SystemConfig& base, SweepKind kind, double value) {
    SystemConfig cfg = base;
    switch (kind) {
    case SweepKind::kNone:
        break;
    case SweepKind::kPower:
        for (auto& p : cfg.power_budget_mw)
            p = dbm_to_mw(value);
        break;
    case SweepKind::kQBits:
        cfg.q_bits = std::isinf(value) ? kContinuousPhases : static_cast<int>(value);
        break;
    case SweepKind::kRfChains:
        cfg.n_rf_chains = static_cast<int>(value);
        break;
    }
    cfg.validate();
    return cfg;
}

void ExperimentSpec::validate() const {
    base.validate();
    fading.validate();
    pdd.validate();
    so.validate();
    ao.validate();
    if (n_realizations < 1)
        throw std::invalid_argument("experiment: n_realizations must be positive");
    if (jobs < 1)
        throw std::invalid_argument("experiment: jobs must be positive");
    if (schemes.empty())
        throw std::invalid_argument("experiment: at least one scheme required");
    if (sweep != SweepKind::kNone && sweep_values.empty())
        throw std::invalid_argument("experiment: sweep requires a non-empty value list");
    for (double v : sweep_values)
        apply_sweep(base, sweep, v); // validates each point
}

ExperimentSpec default_spec() {
    ExperimentSpec spec;
    spec.base.n_antennas = 16;
    spec.base.n_rf_chains = 6;
    spec.base.n_ris_elements = 32;
    spec.base.q_bits = 4;
    spec.base.n_users = 4;
    spec.base.user_antennas = {3, 3, 3, 3};
    spec.base.user_streams = {3, 3, 3, 3};
    spec.base.power_budget_mw = std::vector<double>(4, dbm_to_mw(-5.0));
    spec.base.noise_power_mw = dbm_to_mw(-120.0);
    return spec;
}

namespace {

int parse_q_bits(const nlohmann::json& v) {
    if (v.is_string()) {
        if (v.get<std::string>() == "inf")
            return kContinuousPhases;
        throw std::invalid_argument("q_bits: expected a number or \"inf\"");
    }
    return v.get<int>();
}

std::vector<int> parse_per_user(const nlohmann::json& v, int n_users) {
    if (v.is_array())
        return v.get<std::vector<int>>();
    return std::vector<int>(static_cast<std::size_t>(n_users), v.get<int>());
}

std::vector<double> parse_sweep_values(const nlohmann::json& list) {
    std::vector<double> out;
    for (const auto& v : list)
        out.push_back(v.is_string() && v.get<std::string>() == "inf"
                          ? std::numeric_limits<double>::infinity()
                          : v.get<double>());
    return out;
}

} // namespace

ExperimentSpec parse_spec(const nlohmann::json& j) {
    ExperimentSpec spec = default_spec();

    if (j.contains("config")) {
        const auto& c = j.at("config");
        auto& cfg = spec.base;
        if (c.contains("n_antennas"))
            cfg.n_antennas = c.at("n_antennas").get<int>();
        if (c.contains("n_rf_chains"))
            cfg.n_rf_chains = c.at("n_rf_chains").get<int>();
        if (c.contains("n_ris_elements"))
            cfg.n_ris_elements = c.at("n_ris_elements").get<int>();
        if (c.contains("q_bits"))
            cfg.q_bits = parse_q_bits(c.at("q_bits"));
        if (c.contains("n_users"))
            cfg.n_users = c.at("n_users").get<int>();
        cfg.user_antennas = c.contains("user_antennas")
                                ? parse_per_user(c.at("user_antennas"), cfg.n_users)
                                : std::vector<int>(static_cast<std::size_t>(cfg.n_users), 3);
        cfg.user_streams = c.contains("user_streams")
                               ? parse_per_user(c.at("user_streams"), cfg.n_users)
                               : std::vector<int>(static_cast<std::size_t>(cfg.n_users), 3);
        if (c.contains("power_mw"))
            cfg.power_budget_mw = c.at("power_mw").get<std::vector<double>>();
        else {
            const double dbm = c.contains("power_dbm") ? c.at("power_dbm").get<double>() : -5.0;
            cfg.power_budget_mw =
                std::vector<double>(static_cast<std::size_t>(cfg.n_users), dbm_to_mw(dbm));
        }
        if (c.contains("noise_mw"))
            cfg.noise_power_mw = c.at("noise_mw").get<double>();
        else if (c.contains("noise_dbm"))
            cfg.noise_power_mw = dbm_to_mw(c.at("noise_dbm").get<double>());
    }

    if (j.contains("fading"))
        spec.fading.pathloss_db = j.at("fading").value("pathloss_db", -120.0);

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        if (s.contains("power_dbm")) {
            spec.sweep = SweepKind::kPower;
            spec.sweep_values = parse_sweep_values(s.at("power_dbm"));
        } else if (s.contains("q_bits")) {
            spec.sweep = SweepKind::kQBits;
            spec.sweep_values = parse_sweep_values(s.at("q_bits"));
        } else if (s.contains("rf_chains")) {
            spec.sweep = SweepKind::kRfChains;
            spec.sweep_values = parse_sweep_values(s.at("rf_chains"));
        } else if (!s.is_null() && !s.empty())
            throw std::invalid_argument("sweep: expected power_dbm, q_bits or rf_chains");
    }

    if (j.contains("schemes")) {
        spec.schemes.clear();
        for (const auto& s : j.at("schemes"))
            spec.schemes.push_back(scheme_from_name(s.get<std::string>()));
    }
    spec.n_realizations = j.value("realizations", spec.n_realizations);
    spec.seed0 = j.value("seed", spec.seed0);
    spec.record_traces = j.value("trace", spec.record_traces);
    spec.jobs = j.value("jobs", spec.jobs);

    if (j.contains("pdd")) {
        const auto& p = j.at("pdd");
        spec.pdd.inner_tol = p.value("inner_tol", spec.pdd.inner_tol);
        spec.pdd.inner_max_iter = p.value("inner_max_iter", spec.pdd.inner_max_iter);
        spec.pdd.outer_tol = p.value("outer_tol", spec.pdd.outer_tol);
        spec.pdd.outer_max_iter = p.value("outer_max_iter", spec.pdd.outer_max_iter);
        spec.pdd.rho0 = p.value("rho0", spec.pdd.rho0);
        spec.pdd.eta0 = p.value("eta0", spec.pdd.eta0);
        spec.pdd.chi = p.value("chi", spec.pdd.chi);
        spec.pdd.bisect_tol = p.value("bisect_tol", spec.pdd.bisect_tol);
    }
    if (j.contains("so")) {
        const auto& s = j.at("so");
        spec.so.ewbcd_sweeps = s.value("ewbcd_sweeps", spec.so.ewbcd_sweeps);
        spec.so.ewbcd_tol = s.value("ewbcd_tol", spec.so.ewbcd_tol);
        spec.so.iwf_max_rounds = s.value("iwf_max_rounds", spec.so.iwf_max_rounds);
        spec.so.iwf_tol = s.value("iwf_tol", spec.so.iwf_tol);
        spec.so.wf_tol = s.value("wf_tol", spec.so.wf_tol);
    }
    spec.ao.so = spec.so;
    if (j.contains("ao")) {
        const auto& a = j.at("ao");
        spec.ao.max_rounds = a.value("max_rounds", spec.ao.max_rounds);
        spec.ao.tol = a.value("tol", spec.ao.tol);
    }
    return spec;
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_spec: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return parse_spec(j);
}

double design_sum_rate(const DesignState& design, const ChannelRealization& ch,
                       const SystemConfig& cfg) {
    const arma::cx_mat Hbar =
        effective_channel(ch.ris_to_bs, design.phases, ch.user_to_ris, design.precoders);
    return sum_rate(design.selection, Hbar, cfg.noise_power_mw);
}

namespace {

std::vector<arma::uword> active_rows(const arma::vec& s) {
    std::vector<arma::uword> rows;
    for (arma::uword n = 0; n < s.n_elem; ++n)
        if (s(n) == 1.0)
            rows.push_back(n);
    return rows;
}

/// The random baseline reports the rate of its nominal isotropic covariance
/// Q_k = (p_k/N_k) I, evaluated through the explicit-covariance route.
double random_scheme_rate(const DesignState& design, const ChannelRealization& ch,
                          const SystemConfig& cfg) {
    std::vector<arma::cx_mat> Qcov;
    Qcov.reserve(static_cast<std::size_t>(cfg.n_users));
    for (int k = 0; k < cfg.n_users; ++k) {
        const auto Nk = static_cast<arma::uword>(cfg.user_antennas[k]);
        Qcov.push_back((cfg.power_budget_mw[static_cast<std::size_t>(k)] / double(Nk)) *
                       arma::eye<arma::cx_mat>(Nk, Nk));
    }
    return sum_rate_direct(active_rows(design.selection), ch.ris_to_bs, design.phases,
                           ch.user_to_ris, Qcov, cfg.noise_power_mw);
}

struct TaskOutput {
    std::vector<SeedOutcome> per_scheme; // aligned with spec.schemes
    std::vector<TraceRow> pdd_trace;
};

TaskOutput run_task(const ExperimentSpec& spec, const SystemConfig& cfg, std::uint64_t seed) {
    const ChannelRealization ch = generate_realization(cfg, spec.fading, seed);
    TaskOutput out;
    out.per_scheme.reserve(spec.schemes.size());

    for (Scheme scheme : spec.schemes) {
        SeedOutcome outcome;
        outcome.seed = seed;
        try {
            switch (scheme) {
            case Scheme::kPdd: {
                auto [design, diag] = pdd_solve(ch, cfg, spec.pdd, seed);
                outcome.sum_rate_bpshz = design_sum_rate(design, ch, cfg);
                if (spec.record_traces) {
                    for (int t = 0; t < diag.outer_iterations; ++t)
                        out.pdd_trace.push_back({seed, t + 1,
                                                 diag.violation[static_cast<std::size_t>(t)],
                                                 diag.rho[static_cast<std::size_t>(t)],
                                                 diag.rate_rounded[static_cast<std::size_t>(t)]});
                }
                break;
            }
            case Scheme::kSo:
                outcome.sum_rate_bpshz = design_sum_rate(so_solve(ch, cfg, spec.so, seed), ch, cfg);
                break;
            case Scheme::kAo:
                outcome.sum_rate_bpshz =
                    design_sum_rate(ao_solve(ch, cfg, spec.ao, seed).first, ch, cfg);
                break;
            case Scheme::kRandom:
                outcome.sum_rate_bpshz = random_scheme_rate(random_design(ch, cfg, seed), ch, cfg);
                break;
            }
        } catch (const std::exception&) {
            outcome.ok = false;
            outcome.sum_rate_bpshz = std::numeric_limits<double>::quiet_NaN();
        }
        out.per_scheme.push_back(outcome);
    }
    return out;
}

void finalize_cell(ResultCell& cell) {
    double sum = 0.0;
    cell.n_ok = 0;
    cell.failures = 0;
    for (const auto& run : cell.runs) {
        if (run.ok) {
            sum += run.sum_rate_bpshz;
            ++cell.n_ok;
        } else {
            ++cell.failures;
        }
    }
    cell.mean = cell.n_ok > 0 ? sum / double(cell.n_ok) : 0.0;
    double sq = 0.0;
    for (const auto& run : cell.runs)
        if (run.ok)
            sq += (run.sum_rate_bpshz - cell.mean) * (run.sum_rate_bpshz - cell.mean);
    cell.stddev = cell.n_ok > 1 ? std::sqrt(sq / double(cell.n_ok - 1)) : 0.0;
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();

    const std::vector<double> points =
        spec.sweep == SweepKind::kNone ? std::vector<double>{0.0} : spec.sweep_values;

    struct Task {
        std::size_t point;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    std::vector<SystemConfig> configs;
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        configs.push_back(apply_sweep(spec.base, spec.sweep, points[pi]));
        for (int i = 0; i < spec.n_realizations; ++i)
            tasks.push_back({pi, spec.seed0 + static_cast<std::uint64_t>(i)});
    }

    std::vector<TaskOutput> outputs(tasks.size());
    std::atomic<std::size_t> next{0};
    const int workers = std::min<int>(spec.jobs, static_cast<int>(tasks.size()));
    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
            outputs[i] = run_task(spec, configs[tasks[i].point], tasks[i].seed);
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }

    ExperimentResult result;
    result.sweep_var = sweep_name(spec.sweep);
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        for (std::size_t si = 0; si < spec.schemes.size(); ++si) {
            ResultCell cell;
            cell.sweep_value = points[pi];
            cell.scheme = spec.schemes[si];
            for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
                if (tasks[ti].point != pi)
                    continue;
                cell.runs.push_back(outputs[ti].per_scheme[si]);
                if (spec.schemes[si] == Scheme::kPdd)
                    cell.traces.insert(cell.traces.end(), outputs[ti].pdd_trace.begin(),
                                       outputs[ti].pdd_trace.end());
            }
            finalize_cell(cell);
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

nlohmann::json sweep_value_json(double v) {
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("emit_results: cannot open " + path.string());
    out << content;
    if (!out)
        throw std::runtime_error("emit_results: write failed for " + path.string());
}

} // namespace

void emit_results(const ExperimentResult& result, const std::string& format,
                  const std::string& out_dir) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);

    if (format == "csv") {
        std::string rows = "sweep_var,sweep_value,scheme,seed,sum_rate_bpshz\n";
        std::string aggregates = "sweep_var,sweep_value,scheme,mean,std,n\n";
        std::string traces = "scheme,seed,outer_iter,h,rho,sum_rate\n";
        bool any_trace = false;
        for (const auto& cell : result.cells) {
            const std::string prefix = result.sweep_var + "," + format_double(cell.sweep_value) +
                                       "," + scheme_name(cell.scheme);
            for (const auto& run : cell.runs)
                rows += prefix + "," + std::to_string(run.seed) + "," +
                        format_double(run.sum_rate_bpshz) + "\n";
            aggregates += prefix + "," + format_double(cell.mean) + "," +
                          format_double(cell.stddev) + "," + std::to_string(cell.n_ok) + "\n";
            for (const auto& row : cell.traces) {
                any_trace = true;
                traces += scheme_name(cell.scheme) + "," + std::to_string(row.seed) + "," +
                          std::to_string(row.outer_iter) + "," + format_double(row.violation) +
                          "," + format_double(row.rho) + "," + format_double(row.sum_rate) + "\n";
            }
        }
        write_file(dir / "results.csv", rows);
        write_file(dir / "aggregates.csv", aggregates);
        if (any_trace)
            write_file(dir / "traces.csv", traces);
        return;
    }

    if (format == "json") {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& cell : result.cells) {
            nlohmann::json runs = nlohmann::json::array();
            for (const auto& run : cell.runs) {
                nlohmann::json r = {{"seed", run.seed}, {"ok", run.ok}};
                if (run.ok)
                    r["sum_rate_bpshz"] = run.sum_rate_bpshz;
                runs.push_back(std::move(r));
            }
            nlohmann::json traces = nlohmann::json::array();
            for (const auto& row : cell.traces)
                traces.push_back({{"seed", row.seed},
                                  {"outer_iter", row.outer_iter},
                                  {"h", row.violation},
                                  {"rho", row.rho},
                                  {"sum_rate", row.sum_rate}});
            nlohmann::json c = {{"sweep_value", sweep_value_json(cell.sweep_value)},
                                {"scheme", scheme_name(cell.scheme)},
                                {"mean", cell.mean},
                                {"std", cell.stddev},
                                {"n", cell.n_ok},
                                {"failures", cell.failures},
                                {"runs", std::move(runs)}};
            if (!cell.traces.empty())
                c["traces"] = std::move(traces);
            cells.push_back(std::move(c));
        }
        const nlohmann::json doc = {{"sweep_var", result.sweep_var}, {"cells", std::move(cells)}};
        write_file(dir / "results.json", doc.dump(2) + "\n");
        return;
    }

    throw std::invalid_argument("emit_results: format must be csv or json");
}

} // namespace risbf
