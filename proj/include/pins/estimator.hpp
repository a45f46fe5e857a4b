#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "pins/errors.hpp"
#include "pins/external_pes.hpp"
#include "pins/jacobi.hpp"
#include "pins/nested_sampling.hpp"
#include "pins/numeric.hpp"
#include "pins/potentials.hpp"
#include "pins/ring_polymer.hpp"
#include "pins/units.hpp"

namespace pins {

// NS run ended without a usable evidence; carries the partial trace.
struct NsAborted : Error {
    NsAborted(std::string what, NsTrace t) : Error(std::move(what)), trace(std::move(t)) {}
    NsTrace trace;
};

struct SingleRun {
    double log_q = 0.0;  // log of the zero-shifted partition function
    double q = 0.0;
    NsTrace trace;
};

// One partition-function value with provenance and ensemble statistics.
struct PartitionEstimate {
    double t_kelvin = 0.0;
    double beta = 0.0;
    int beads = 1;
    double q_value = 0.0;  // ensemble mean, zero-shifted, n_ssw applied
    double log_q = 0.0;
    int n_runs = 0;
    double q_mean = 0.0;
    double q_sigma_of_mean = 0.0;
    NsParams params_echo;
    std::vector<std::uint64_t> seeds;
    int n_ssw = 1;
    double log_z_mean = 0.0;           // mean NS log-evidence (normalised prior)
    double iterations_mean = 0.0;
};

namespace detail {

// ring-polymer energy over an external evaluator: one process, one bead
// batch per configuration; init_batch streams the whole live set through
// in chunks to amortise round trips.
struct ExternalRpEnergy {
    ExternalEvaluator& eval;
    RingPolymerSystem sys;
    std::vector<double> half_mu_w2;
    mutable std::vector<double> bead_energies;

    ExternalRpEnergy(ExternalEvaluator& e, const RingPolymerSystem& s) : eval(e), sys(s)
    {
        half_mu_w2.resize(sys.fn());
        const double w2 = sys.omega_m * sys.omega_m;
        for (int i = 0; i < sys.fn(); ++i) half_mu_w2[i] = 0.5 * sys.mass_per_dof[i] * w2;
        bead_energies.resize(sys.beads);
    }

    double operator()(const double* config) const
    {
        const int fn = sys.fn();
        const int m = sys.beads;
        std::vector<const double*> beads(m);
        for (int j = 0; j < m; ++j) beads[j] = config + static_cast<std::ptrdiff_t>(j) * fn;
        eval.evaluate_batch(beads.data(), m, bead_energies.data());
        double v = 0.0;
        for (int j = 0; j < m; ++j) {
            if (m > 1) {
                const double* bead = beads[j];
                const double* prev = beads[j == 0 ? m - 1 : j - 1];
                for (int i = 0; i < fn; ++i) {
                    const double d = bead[i] - prev[i];
                    v += half_mu_w2[i] * d * d;
                }
            }
            v += bead_energies[j];
        }
        return v;
    }

    void init_batch(const double* coords, int n, int dim, double* out) const
    {
        const int fn = sys.fn();
        const int m = sys.beads;
        std::vector<const double*> beads;
        beads.reserve(static_cast<std::size_t>(n) * m);
        for (int p = 0; p < n; ++p)
            for (int j = 0; j < m; ++j)
                beads.push_back(coords + static_cast<std::ptrdiff_t>(p) * dim +
                                static_cast<std::ptrdiff_t>(j) * fn);
        std::vector<double> energies(beads.size());
        const int chunk = 8192;
        for (std::size_t off = 0; off < beads.size(); off += chunk) {
            const int len = static_cast<int>(std::min<std::size_t>(chunk, beads.size() - off));
            eval.evaluate_batch(beads.data() + off, len, energies.data() + off);
        }
        for (int p = 0; p < n; ++p) {
            const double* config = coords + static_cast<std::ptrdiff_t>(p) * dim;
            double v = 0.0;
            if (m > 1)
                for (int j = 0; j < m; ++j) {
                    const double* bead = config + static_cast<std::ptrdiff_t>(j) * fn;
                    const double* prev =
                        config + static_cast<std::ptrdiff_t>(j == 0 ? m - 1 : j - 1) * fn;
                    for (int i = 0; i < fn; ++i) {
                        const double d = bead[i] - prev[i];
                        v += half_mu_w2[i] * d * d;
                    }
                }
            for (int j = 0; j < m; ++j) v += energies[static_cast<std::size_t>(p) * m + j];
            out[p] = v;
        }
    }
};

}  // namespace detail

// Core single-run estimator over explicit per-dof masses; Q is assembled in
// log space: log Q = log prefactor + dim ln L + log Z + beta e0. The energy
// zero is shifted to e0 (multiplies Q by exp(+beta e0)).
inline SingleRun quantum_partition_run_beta(const std::vector<double>& mass_per_dof,
                                            const PotentialModel& pot, double beta, int beads,
                                            double e0, const NsParams& ns)
{
    if (!std::isfinite(e0)) throw InvalidInput("quantum_partition: e0 must be finite");
    const int fn = static_cast<int>(mass_per_dof.size());
    if (model_dim(pot) != fn)
        throw InvalidInput("quantum_partition: PES dimension does not match dof count");

    const RingPolymerSystem sys = make_ring_polymer(mass_per_dof, beads, beta);
    const int dim = sys.dim();

    NsTrace trace = std::visit(
        [&](const auto& p) -> NsTrace {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, ExternalModel>) {
                ExternalEvaluator eval(p.command, p.fn);
                detail::ExternalRpEnergy energy(eval, sys);
                return ns_run(dim, energy, sys.beta_m, ns);
            } else {
                RpEnergy<P> energy(p, sys);
                return ns_run(dim, energy, sys.beta_m, ns);
            }
        },
        pot);

    if (trace.termination == NsTermination::aborted)
        throw NsAborted("nested-sampling run aborted: " + trace.abort_reason, std::move(trace));

    SingleRun run;
    run.log_q = rp_log_prefactor(sys) + dim * std::log(ns.box_length()) + trace.log_evidence +
                beta * e0;
    run.q = std::exp(run.log_q);
    run.trace = std::move(trace);
    return run;
}

inline SingleRun quantum_partition_run(const JacobiFrame& frame, const PotentialModel& pot,
                                       double t_kelvin, int beads, double e0, const NsParams& ns)
{
    if (!(t_kelvin > 0.0)) throw InvalidInput("quantum_partition: temperature must be positive");
    return quantum_partition_run_beta(frame.masses_per_dof(), pot,
                                      units::beta_from_temperature(t_kelvin), beads, e0, ns);
}

// Classical column: a single bead.
inline SingleRun classical_partition_run(const JacobiFrame& frame, const PotentialModel& pot,
                                         double t_kelvin, double e0, const NsParams& ns)
{
    return quantum_partition_run(frame, pot, t_kelvin, 1, e0, ns);
}

// Q_cm = V / Lambda^3 with Lambda = h sqrt(beta / (2 pi M)), h = 2 pi a.u.
inline double translational_partition(double total_mass, double t_kelvin, double volume_bohr3)
{
    if (!(total_mass > 0.0 && t_kelvin > 0.0 && volume_bohr3 > 0.0))
        throw InvalidInput("translational_partition: inputs must be positive");
    const double beta = units::beta_from_temperature(t_kelvin);
    const double lambda =
        units::planck_h * std::sqrt(beta / (2.0 * std::numbers::pi * total_mass));
    return volume_bohr3 / (lambda * lambda * lambda);
}

// mean and sigma-of-mean over independent runs
inline std::pair<double, double> aggregate_runs(const std::vector<double>& values)
{
    const int n = static_cast<int>(values.size());
    if (n < 2) throw InvalidInput("aggregate_runs: need at least 2 values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sigma = std::sqrt(ss / (n - 1));
    return {mean, sigma / std::sqrt(static_cast<double>(n))};
}

inline double apply_ssw(double q, int n_ssw)
{
    if (n_ssw < 1) throw InvalidInput("apply_ssw: n_ssw must be >= 1");
    return q * static_cast<double>(n_ssw);
}

// Seed derivation for run ensembles: (config seed, temperature index, run
// index). Documented contract: changing any index gives an independent run.
inline std::uint64_t derive_run_seed(std::uint64_t config_seed, int t_index, int run_index)
{
    return derive_stream_seed(config_seed, 0x52554e53ULL, static_cast<std::uint64_t>(t_index),
                              static_cast<std::uint64_t>(run_index));
}

// n_runs independent estimates at one temperature, aggregated. Runs execute
// on up to `threads` workers; per-run results land by run index so the
// outcome is scheduling-independent. `per_run` (if given) sees each finished
// run, called from worker threads.
inline PartitionEstimate estimate_ensemble(
    const std::vector<double>& mass_per_dof, const PotentialModel& pot, double beta, int beads,
    double e0, const NsParams& base_params, int n_runs, int n_ssw, int threads, int t_index = 0,
    const std::function<void(int, const SingleRun&)>& per_run = {})
{
    if (n_runs < 1) throw InvalidInput("estimate_ensemble: n_runs must be >= 1");

    std::vector<double> q(n_runs), log_z(n_runs), iters(n_runs);
    std::vector<std::uint64_t> seeds(n_runs);
    for (int i = 0; i < n_runs; ++i) seeds[i] = derive_run_seed(base_params.seed, t_index, i);

    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto task = [&](int ri) {
        try {
            NsParams ns = base_params;
            ns.seed = seeds[ri];
            SingleRun run = quantum_partition_run_beta(mass_per_dof, pot, beta, beads, e0, ns);
            q[ri] = apply_ssw(run.q, n_ssw);
            log_z[ri] = run.trace.log_evidence;
            iters[ri] = static_cast<double>(run.trace.iterations);
            if (per_run) per_run(ri, run);
        } catch (...) {
            std::lock_guard lk(err_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };
    if (threads <= 1 || n_runs <= 1) {
        for (int i = 0; i < n_runs; ++i) task(i);
    } else {
        detail::WalkerPool pool(std::min(threads, n_runs));
        pool.run(n_runs, task);
    }
    if (first_error) std::rethrow_exception(first_error);

    PartitionEstimate est;
    est.beta = beta;
    est.t_kelvin = 1.0 / (units::kb_hartree_per_k * beta);
    est.beads = beads;
    est.n_runs = n_runs;
    est.params_echo = base_params;
    est.seeds = std::move(seeds);
    est.n_ssw = n_ssw;
    if (n_runs >= 2) {
        const auto [mean, sigma] = aggregate_runs(q);
        est.q_mean = mean;
        est.q_sigma_of_mean = sigma;
    } else {
        est.q_mean = q[0];
        est.q_sigma_of_mean = std::numeric_limits<double>::quiet_NaN();
    }
    est.q_value = est.q_mean;
    est.log_q = std::log(est.q_value);
    double lz = 0.0, it = 0.0;
    for (int i = 0; i < n_runs; ++i) {
        lz += log_z[i];
        it += iters[i];
    }
    est.log_z_mean = lz / n_runs;
    est.iterations_mean = it / n_runs;
    return est;
}

}  // namespace pins
