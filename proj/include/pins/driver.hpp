#pragma once

#include <zlib.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pins/config.hpp"
#include "pins/estimator.hpp"
#include "pins/nested_sampling.hpp"

namespace pins {

struct SweepRow {
    double t_kelvin = 0.0;
    int beads = 1;
    int live_points = 0;
    int walk_steps = 0;
    double box_length = 0.0;
    int n_runs = 0;
    double q_mean = 0.0;
    double q_sigma = std::numeric_limits<double>::quiet_NaN();
    double log_z_mean = 0.0;
    double iterations_mean = 0.0;
    double wall_s = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr const char* sweep_csv_header =
    "T_K,M,K,S,L,n_runs,Q_mean,Q_sigma,logZ_mean,iterations_mean,wall_s";

namespace detail_driver {

inline std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string csv_line(const SweepRow& r)
{
    std::string s;
    s += fmt(r.t_kelvin);
    s += ',' + std::to_string(r.beads);
    s += ',' + std::to_string(r.live_points);
    s += ',' + std::to_string(r.walk_steps);
    s += ',' + fmt(r.box_length);
    s += ',' + std::to_string(r.n_runs);
    s += ',' + fmt(r.q_mean);
    s += ',' + fmt(r.q_sigma);
    s += ',' + fmt(r.log_z_mean);
    s += ',' + fmt(r.iterations_mean);
    s += ',' + fmt(r.wall_s);
    return s;
}

inline void write_trace_gz(const std::string& path, const NsTrace& trace)
{
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw Error("cannot open trace file " + path);
    for (std::size_t i = 0; i < trace.thresholds.size(); ++i) {
        gzprintf(f, "{\"i\":%zu,\"v\":%.17g,\"x\":%.17g,\"logz\":%.17g,\"acc\":%.6g}\n", i + 1,
                 trace.thresholds[i], trace.prior_masses[i], trace.log_evidence_history[i],
                 i < trace.acceptance_history.size()
                     ? static_cast<double>(trace.acceptance_history[i])
                     : 0.0);
    }
    gzclose(f);
}

inline std::string trace_path(const std::string& out_path, int t_index, int run_index)
{
    std::string stem = out_path;
    const auto dot = stem.rfind('.');
    if (dot != std::string::npos) stem.resize(dot);
    return stem + "_trace_t" + std::to_string(t_index) + "_r" + std::to_string(run_index) +
           ".jsonl.gz";
}

// run the same task over [0, n) with up to `threads` workers; results land
// by index so output never depends on scheduling
template <class Fn>
void parallel_for_index(int n, int threads, const Fn& fn)
{
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    detail::WalkerPool pool(std::min(threads, n));
    pool.run(n, fn);
}

}  // namespace detail_driver

// One row per temperature: n_runs independent estimates with seeds derived
// from (config seed, T index, run index), aggregated into mean and
// sigma-of-mean. Rows are flushed to the writer as they complete so an
// aborted sweep leaves the finished rows on disk.
template <class RowSink>
std::vector<SweepRow> run_sweep_rows(const RunConfig& cfg, int threads, const RowSink& sink)
{
    const JacobiFrame frame = cfg.frame();
    const double e0 = resolve_e0(cfg);
    const auto mass_per_dof = frame.masses_per_dof();

    std::vector<SweepRow> rows;
    for (std::size_t ti = 0; ti < cfg.temperatures_k.size(); ++ti) {
        const double t_kelvin = cfg.temperatures_k[ti];
        const int beads = cfg.beads[ti];
        const double beta = units::beta_from_temperature(t_kelvin);

        const auto wall_start = std::chrono::steady_clock::now();
        std::function<void(int, const SingleRun&)> per_run;
        if (cfg.output.write_traces)
            per_run = [&](int ri, const SingleRun& run) {
                detail_driver::write_trace_gz(
                    detail_driver::trace_path(cfg.output.path, static_cast<int>(ti), ri),
                    run.trace);
            };
        const PartitionEstimate est =
            estimate_ensemble(mass_per_dof, cfg.pes, beta, beads, e0, cfg.ns, cfg.n_runs,
                              cfg.n_ssw, threads, static_cast<int>(ti), per_run);

        SweepRow row;
        row.t_kelvin = t_kelvin;
        row.beads = beads;
        row.live_points = cfg.ns.live_points;
        row.walk_steps = cfg.ns.walk_steps;
        row.box_length = cfg.ns.box_length();
        row.n_runs = cfg.n_runs;
        row.q_mean = est.q_mean;
        if (cfg.n_runs >= 2) row.q_sigma = est.q_sigma_of_mean;
        row.log_z_mean = est.log_z_mean;
        row.iterations_mean = est.iterations_mean;
        if (cfg.output.include_timing) {
            row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                       wall_start)
                             .count();
        }
        rows.push_back(row);
        sink(row);
    }
    return rows;
}

inline void write_rows_json(const std::string& path, const std::vector<SweepRow>& rows)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file " + path);
    out << "[\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SweepRow& r = rows[i];
        out << "  {\"T_K\":" << detail_driver::fmt(r.t_kelvin) << ",\"M\":" << r.beads
            << ",\"K\":" << r.live_points << ",\"S\":" << r.walk_steps
            << ",\"L\":" << detail_driver::fmt(r.box_length) << ",\"n_runs\":" << r.n_runs
            << ",\"Q_mean\":" << detail_driver::fmt(r.q_mean)
            << ",\"Q_sigma\":" << detail_driver::fmt(r.q_sigma)
            << ",\"logZ_mean\":" << detail_driver::fmt(r.log_z_mean)
            << ",\"iterations_mean\":" << detail_driver::fmt(r.iterations_mean)
            << ",\"wall_s\":" << detail_driver::fmt(r.wall_s) << "}"
            << (i + 1 < rows.size() ? ",\n" : "\n");
    }
    out << "]\n";
}

// Executes the sweep and writes cfg.output. Returns the rows.
inline std::vector<SweepRow> run_sweep(const RunConfig& cfg, int threads)
{
    std::vector<SweepRow> rows;
    if (cfg.output.format == "csv") {
        std::ofstream out(cfg.output.path);
        if (!out) throw Error("cannot open output file " + cfg.output.path);
        out << sweep_csv_header << "\n";
        out.flush();
        rows = run_sweep_rows(cfg, threads, [&](const SweepRow& r) {
            out << detail_driver::csv_line(r) << "\n";
            out.flush();
        });
    } else {
        rows = run_sweep_rows(cfg, threads, [](const SweepRow&) {});
        write_rows_json(cfg.output.path, rows);
    }
    return rows;
}

// Convergence sweeps: the same config run across a list of box lengths or
// bead counts, one block of rows per value.
inline std::vector<SweepRow> sweep_box_length(RunConfig cfg, const std::vector<double>& l_values,
                                              int threads)
{
    if (l_values.empty()) throw InvalidInput("sweep-l: empty value list");
    std::vector<SweepRow> all;
    std::ofstream out;
    const bool csv = cfg.output.format == "csv";
    if (csv) {
        out.open(cfg.output.path);
        if (!out) throw Error("cannot open output file " + cfg.output.path);
        out << sweep_csv_header << "\n";
    }
    for (double l : l_values) {
        if (!(l > 0.0)) throw InvalidInput("sweep-l: box lengths must be positive");
        cfg.ns.box_half_width = l / 2.0;
        auto rows = run_sweep_rows(cfg, threads, [&](const SweepRow& r) {
            if (csv) {
                out << detail_driver::csv_line(r) << "\n";
                out.flush();
            }
        });
        all.insert(all.end(), rows.begin(), rows.end());
    }
    if (!csv) write_rows_json(cfg.output.path, all);
    return all;
}

inline std::vector<SweepRow> sweep_beads(RunConfig cfg, const std::vector<int>& m_values,
                                         int threads)
{
    if (m_values.empty()) throw InvalidInput("sweep-m: empty value list");
    std::vector<SweepRow> all;
    std::ofstream out;
    const bool csv = cfg.output.format == "csv";
    if (csv) {
        out.open(cfg.output.path);
        if (!out) throw Error("cannot open output file " + cfg.output.path);
        out << sweep_csv_header << "\n";
    }
    for (int m : m_values) {
        if (m < 1) throw InvalidInput("sweep-m: bead counts must be >= 1");
        cfg.beads.assign(cfg.temperatures_k.size(), m);
        auto rows = run_sweep_rows(cfg, threads, [&](const SweepRow& r) {
            if (csv) {
                out << detail_driver::csv_line(r) << "\n";
                out.flush();
            }
        });
        all.insert(all.end(), rows.begin(), rows.end());
    }
    if (!csv) write_rows_json(cfg.output.path, all);
    return all;
}

struct SelfTestReport {
    int live_points = 0;
    int walk_steps = 0;
    int n_runs = 0;
    double exact = 0.0;
    double mean = 0.0;
    double sigma_of_mean = 0.0;
    double rel_deviation = 0.0;
    std::vector<double> values;
};

// The nine-dimensional Gaussian integral driven through the identical
// sampler path as the physical systems: beta_eff = 1, single bead, no
// prefactor, uniform prior on [-5, 5]^9. Exact value (2 pi)^(9/2).
inline SelfTestReport selftest_i9(int live_points = 1000, int walk_steps = 800, int n_runs = 20,
                                  std::uint64_t seed = 20180926, int threads = 1)
{
    if (live_points < 2 || walk_steps < 1 || n_runs < 2)
        throw InvalidInput("selftest_i9: bad parameters");
    constexpr int dim = 9;
    const GaussianTest pot{dim};
    SelfTestReport rep;
    rep.live_points = live_points;
    rep.walk_steps = walk_steps;
    rep.n_runs = n_runs;
    rep.exact = std::pow(2.0 * std::numbers::pi, 4.5);
    rep.values.resize(n_runs);

    detail_driver::parallel_for_index(n_runs, threads, [&](int ri) {
        NsParams ns;
        ns.live_points = live_points;
        ns.walk_steps = walk_steps;
        ns.box_half_width = 5.0;  // L = 10
        ns.seed = derive_run_seed(seed, 0, ri);
        const NsTrace trace = ns_run(dim, pot, 1.0, ns);
        rep.values[ri] = std::exp(trace.log_evidence + dim * std::log(ns.box_length()));
    });

    const auto [mean, sigma] = aggregate_runs(rep.values);
    rep.mean = mean;
    rep.sigma_of_mean = sigma;
    rep.rel_deviation = 1.0 - mean / rep.exact;
    return rep;
}

}  // namespace pins
