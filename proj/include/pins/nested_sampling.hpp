#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "pins/errors.hpp"
#include "pins/numeric.hpp"
#include "pins/rng.hpp"

namespace pins {

struct NsParams {
    int live_points = 1000;        // K
    int walk_steps = 800;          // S: total MCMC steps spent per replacement
    double box_half_width = 5.0;   // prior is uniform on [-L/2, L/2] per coordinate
    int walkers = 1;               // n_p: configurations evolved concurrently
    double stop_factor = 1e-5;     // stop when exp(-beta*V_j) X_j < eps * Z
    std::uint64_t seed = 1;
    std::int64_t max_iterations = 5'000'000;

    // Testing aid: route walks through the worker pool even for walkers == 1,
    // to demonstrate the pool is bit-identical to the inline path.
    bool use_worker_pool_for_single_walker = false;

    double box_length() const { return 2.0 * box_half_width; }
};

enum class NsTermination { converged, max_iterations, aborted };

struct NsTrace {
    std::vector<double> thresholds;           // removed V_rp, one per iteration
    std::vector<double> prior_masses;         // X_i
    std::vector<double> log_evidence_history; // running log Z after each removal
    std::vector<float> acceptance_history;    // per-replacement walk acceptance
    double log_evidence = numeric::neg_inf;   // final, with live-point remainder
    std::int64_t iterations = 0;
    NsTermination termination = NsTermination::converged;
    double final_step_size = 0.0;
    std::string abort_reason;
};

struct LiveSet {
    int dim = 0;
    std::vector<double> coords;    // live_points x dim, row-major
    std::vector<double> energies;  // V_rp per point

    int size() const { return static_cast<int>(energies.size()); }
    double* point(int i) { return coords.data() + static_cast<std::ptrdiff_t>(i) * dim; }
    const double* point(int i) const
    {
        return coords.data() + static_cast<std::ptrdiff_t>(i) * dim;
    }
};

// X_i ~ [K/(K+1)]^i, evaluated in log space.
inline double prior_mass(std::int64_t i, int live_points)
{
    return std::exp(static_cast<double>(i) * -std::log1p(1.0 / live_points));
}

// Step-size controller: nudge towards the ~20% acceptance band, never
// inside a walk (each walk stays a fixed-kernel chain).
inline double adapt_step(double window_acceptance, double step_size, double box_length)
{
    if (window_acceptance > 0.25)
        step_size *= 1.1;
    else if (window_acceptance < 0.15)
        step_size /= 1.1;
    return std::clamp(step_size, 1e-8 * box_length, box_length);
}

namespace detail {

template <class E>
concept HasEvalBelow = requires(const E& e, const double* x, double c) {
    { e.eval_below(x, c) } -> std::convertible_to<double>;
};

template <class E>
concept HasInitBatch = requires(const E& e, const double* x, int n, int d, double* out) {
    { e.init_batch(x, n, d, out) };
};

template <class EnergyFn>
double energy_below(const EnergyFn& energy, const double* x, double cutoff)
{
    if constexpr (HasEvalBelow<EnergyFn>)
        return energy.eval_below(x, cutoff);
    else
        return energy(x);
}

struct WalkOutcome {
    double energy = 0.0;
    long accepted = 0;
};

// Constrained random walk: displace every coordinate by step * U(-1,1),
// accept iff the proposal stays in the prior box and V_rp < v_limit.
// `cur` is a dim-sized buffer holding the start; `scratch` must hold
// 2*dim (proposal + noise). The walk ends with the final point in `cur`.
template <class EnergyFn, class Rng>
WalkOutcome walk_kernel(const EnergyFn& energy, double* cur, double* scratch, int dim,
                        double start_energy, double v_limit, long steps, double step_size,
                        double box_half_width, Rng& rng)
{
    WalkOutcome out;
    double cur_e = start_energy;
    double* a = cur;
    double* b = scratch;
    double* noise = scratch + dim;
    for (long s = 0; s < steps; ++s) {
        rng.fill_uniform_symmetric(noise, dim);
        double worst = 0.0;
        for (int d = 0; d < dim; ++d) {
            const double v = a[d] + step_size * noise[d];
            b[d] = v;
            worst = std::max(worst, std::fabs(v));
        }
        if (worst > box_half_width) continue;  // outside prior: rejected
        const double e = energy_below(energy, b, v_limit);
        if (e < v_limit) {
            std::swap(a, b);
            cur_e = e;
            ++out.accepted;
        }
    }
    if (a != cur) std::memcpy(cur, a, sizeof(double) * static_cast<std::size_t>(dim));
    out.energy = cur_e;
    return out;
}

// Max-heap over live-point energies with lazy invalidation; replaced or
// re-walked slots bump a stamp and stale entries are skipped on pop.
class WorstTracker {
public:
    void build(const std::vector<double>& energies)
    {
        const int n = static_cast<int>(energies.size());
        stamps_.assign(n, 0);
        entries_.clear();
        entries_.reserve(2 * n);
        for (int i = 0; i < n; ++i) entries_.push_back({energies[i], i, 0});
        std::make_heap(entries_.begin(), entries_.end(), less_);
    }

    int pop_worst(const std::vector<double>& energies)
    {
        for (;;) {
            std::pop_heap(entries_.begin(), entries_.end(), less_);
            const Entry top = entries_.back();
            entries_.pop_back();
            if (stamps_[top.slot] == top.stamp) return top.slot;
            if (entries_.empty()) rebuild(energies);
        }
    }

    void update(int slot, double energy)
    {
        ++stamps_[slot];
        entries_.push_back({energy, slot, stamps_[slot]});
        std::push_heap(entries_.begin(), entries_.end(), less_);
        if (entries_.size() > 4 * stamps_.size() + 64) {
            // drop stale entries and re-heapify
            std::vector<Entry> fresh;
            fresh.reserve(2 * stamps_.size());
            for (const Entry& e : entries_)
                if (stamps_[e.slot] == e.stamp) fresh.push_back(e);
            entries_ = std::move(fresh);
            std::make_heap(entries_.begin(), entries_.end(), less_);
        }
    }

private:
    struct Entry {
        double energy;
        int slot;
        std::uint32_t stamp;
    };
    // ties broken by slot so removal order never depends on heap history
    static bool less(const Entry& a, const Entry& b)
    {
        if (a.energy != b.energy) return a.energy < b.energy;
        return a.slot < b.slot;
    }
    static constexpr auto less_ = &less;

    void rebuild(const std::vector<double>& energies)
    {
        entries_.clear();
        for (int i = 0; i < static_cast<int>(energies.size()); ++i)
            entries_.push_back({energies[i], i, stamps_[i]});
        std::make_heap(entries_.begin(), entries_.end(), less_);
    }

    std::vector<Entry> entries_;
    std::vector<std::uint32_t> stamps_;
};

// Minimal persistent pool: one generation counter, tasks claimed by atomic
// increment. Results land in caller-indexed slots, so the outcome does not
// depend on which worker ran which task.
class WalkerPool {
public:
    explicit WalkerPool(int n_workers)
    {
        workers_.reserve(n_workers);
        for (int i = 0; i < n_workers; ++i)
            workers_.emplace_back([this] { worker_loop(); });
    }

    ~WalkerPool()
    {
        {
            std::lock_guard lk(mutex_);
            stop_ = true;
            ++generation_;
        }
        cv_start_.notify_all();
        for (auto& t : workers_) t.join();
    }

    void run(int n_tasks, const std::function<void(int)>& task)
    {
        std::unique_lock lk(mutex_);
        task_ = &task;
        n_tasks_ = n_tasks;
        next_task_.store(0, std::memory_order_relaxed);
        tasks_done_ = 0;
        first_error_ = nullptr;
        ++generation_;
        cv_start_.notify_all();
        cv_done_.wait(lk, [this] { return tasks_done_ == n_tasks_; });
        task_ = nullptr;
        if (first_error_) std::rethrow_exception(first_error_);
    }

private:
    void worker_loop()
    {
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(int)>* task;
            int n_tasks;
            {
                std::unique_lock lk(mutex_);
                cv_start_.wait(lk, [&] { return generation_ != seen; });
                seen = generation_;
                if (stop_) return;
                task = task_;
                n_tasks = n_tasks_;
            }
            int done_here = 0;
            std::exception_ptr err;
            for (;;) {
                const int i = next_task_.fetch_add(1, std::memory_order_relaxed);
                if (i >= n_tasks) break;
                try {
                    (*task)(i);
                } catch (...) {
                    if (!err) err = std::current_exception();
                }
                ++done_here;
            }
            if (done_here > 0 || err) {
                std::lock_guard lk(mutex_);
                if (err && !first_error_) first_error_ = err;
                tasks_done_ += done_here;
                if (tasks_done_ == n_tasks_) cv_done_.notify_one();
            } else {
                // raced past all tasks; still must not leave caller waiting
                std::lock_guard lk(mutex_);
                if (tasks_done_ == n_tasks_) cv_done_.notify_one();
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable cv_start_;
    std::condition_variable cv_done_;
    const std::function<void(int)>* task_ = nullptr;
    int n_tasks_ = 0;
    std::atomic<int> next_task_{0};
    int tasks_done_ = 0;
    std::uint64_t generation_ = 0;
    std::exception_ptr first_error_;
    bool stop_ = false;
};

inline constexpr std::uint64_t salt_init = 0x1;
inline constexpr std::uint64_t salt_orchestrator = 0x2;
inline constexpr std::uint64_t salt_walk = 0x3;

}  // namespace detail

// Public fixed-kernel walk, mainly for tests and diagnostics.
// steps == 0 returns the start unchanged with acceptance reported as 1.
template <class EnergyFn>
std::pair<std::vector<double>, double> walk(const EnergyFn& energy, std::vector<double> start,
                                            double v_limit, long steps, double step_size,
                                            double box_half_width, Xoshiro256& rng)
{
    const int dim = static_cast<int>(start.size());
    if (steps == 0) return {std::move(start), 1.0};
    std::vector<double> scratch(2 * dim);
    const double e0 = detail::energy_below(energy, start.data(), v_limit);
    const auto res = detail::walk_kernel(energy, start.data(), scratch.data(), dim, e0, v_limit,
                                         steps, step_size, box_half_width, rng);
    return {std::move(start), static_cast<double>(res.accepted) / static_cast<double>(steps)};
}

template <class EnergyFn>
LiveSet init_live_set(int dim, const NsParams& params, const EnergyFn& energy)
{
    if (dim < 1) throw InvalidInput("init_live_set: dim must be >= 1");
    if (params.live_points < 2) throw InvalidInput("init_live_set: need at least 2 live points");
    if (!(params.box_half_width > 0.0)) throw InvalidInput("init_live_set: box width must be > 0");

    LiveSet live;
    live.dim = dim;
    const int k = params.live_points;
    live.coords.resize(static_cast<std::size_t>(k) * dim);
    live.energies.resize(k);

    Xoshiro256 rng(derive_stream_seed(params.seed, detail::salt_init));
    const double hw = params.box_half_width;
    for (double& c : live.coords) c = hw * rng.uniform_symmetric();

    if constexpr (detail::HasInitBatch<EnergyFn>) {
        energy.init_batch(live.coords.data(), k, dim, live.energies.data());
    } else {
        for (int i = 0; i < k; ++i) live.energies[i] = energy(live.point(i));
    }
    return live;
}

// The nested-sampling iteration of the configurational integral:
//
//   Z ~ (1/L^dim) * Integral_box exp(-beta_eff * V(x)) dx
//
// i.e. the evidence of likelihood exp(-beta_eff V) under the normalised
// uniform prior on the box. Each iteration removes the live point with the
// lowest likelihood (largest V), credits it with prior-mass weight
// w_i = X_{i-1} - X_i, clones a surviving point and decorrelates the clone
// with a constrained walk under the removed point's energy. With
// walkers > 1 the clone plus walkers-1 further live points are evolved
// concurrently for walk_steps/walkers steps each. Stops when the removed
// point's possible contribution drops below stop_factor * Z, then adds the
// live-point remainder X_j * mean(exp(-beta_eff V)).
template <class EnergyFn>
NsTrace ns_run(int dim, const EnergyFn& energy, double beta_eff, const NsParams& params)
{
    if (params.live_points < 2) throw InvalidInput("ns_run: live_points must be >= 2");
    if (params.walk_steps < 1) throw InvalidInput("ns_run: walk_steps must be >= 1");
    if (!(params.box_half_width > 0.0)) throw InvalidInput("ns_run: box width must be > 0");
    if (params.walkers < 1 || params.walkers > params.live_points - 1)
        throw InvalidInput("ns_run: walkers must be in [1, live_points-1]");
    if (!(params.stop_factor > 0.0)) throw InvalidInput("ns_run: stop_factor must be > 0");

    const int k = params.live_points;
    const int n_p = params.walkers;
    const long steps_each = (params.walk_steps + n_p - 1) / n_p;

    NsTrace trace;
    LiveSet live;
    try {
        live = init_live_set(dim, params, energy);
    } catch (const std::exception& e) {
        trace.termination = NsTermination::aborted;
        trace.abort_reason = e.what();
        return trace;
    }

    detail::WorstTracker tracker;
    tracker.build(live.energies);

    Xoshiro256 orch(derive_stream_seed(params.seed, detail::salt_orchestrator));

    const double log_ratio = -std::log1p(1.0 / k);  // ln K/(K+1)
    const double log_one_minus_ratio = -std::log1p(static_cast<double>(k));  // ln 1/(K+1)
    const double log_eps = std::log(params.stop_factor);

    double log_z = numeric::neg_inf;
    double step_size = params.box_length() / 4.0;
    double log_x = 0.0;

    std::unique_ptr<detail::WalkerPool> pool;
    const bool use_pool = n_p > 1 || params.use_worker_pool_for_single_walker;
    if (use_pool) pool = std::make_unique<detail::WalkerPool>(n_p);

    std::vector<int> slots(n_p);
    std::vector<double> start_energies(n_p);
    std::vector<detail::WalkOutcome> outcomes(n_p);
    std::vector<std::vector<double>> scratch(n_p, std::vector<double>(dim));
    std::vector<std::uint64_t> walk_seeds(n_p);

    trace.termination = NsTermination::max_iterations;

    for (std::int64_t iter = 1; iter <= params.max_iterations; ++iter) {
        const int worst = tracker.pop_worst(live.energies);
        const double v_limit = live.energies[worst];

        log_x = iter * log_ratio;
        const double log_w = (iter - 1) * log_ratio + log_one_minus_ratio;
        log_z = numeric::log_add_exp(log_z, log_w - beta_eff * v_limit);

        trace.thresholds.push_back(v_limit);
        trace.prior_masses.push_back(std::exp(log_x));
        trace.log_evidence_history.push_back(log_z);
        trace.iterations = iter;

        // clone a survivor into the vacated slot
        {
            const auto pick = orch.uniform_below(static_cast<std::uint64_t>(k - 1));
            const int src = static_cast<int>(pick) >= worst ? static_cast<int>(pick) + 1
                                                            : static_cast<int>(pick);
            std::memcpy(live.point(worst), live.point(src),
                        sizeof(double) * static_cast<std::size_t>(dim));
            live.energies[worst] = live.energies[src];
        }
        slots[0] = worst;
        for (int t = 1; t < n_p; ++t) {
            int cand;
            for (;;) {
                cand = static_cast<int>(orch.uniform_below(static_cast<std::uint64_t>(k)));
                if (cand == worst) continue;
                bool dup = false;
                for (int u = 1; u < t; ++u) dup |= (slots[u] == cand);
                if (!dup) break;
            }
            slots[t] = cand;
        }
        for (int t = 0; t < n_p; ++t) {
            start_energies[t] = live.energies[slots[t]];
            walk_seeds[t] = derive_stream_seed(params.seed, detail::salt_walk,
                                               static_cast<std::uint64_t>(iter),
                                               static_cast<std::uint64_t>(t));
        }

        auto walk_task = [&](int t) {
            Xoshiro256 rng(walk_seeds[t]);
            outcomes[t] = detail::walk_kernel(energy, live.point(slots[t]), scratch[t].data(),
                                              dim, start_energies[t], v_limit, steps_each,
                                              step_size, params.box_half_width, rng);
        };

        try {
            if (use_pool)
                pool->run(n_p, walk_task);
            else
                walk_task(0);
        } catch (const std::exception& e) {
            trace.termination = NsTermination::aborted;
            trace.abort_reason = e.what();
            trace.final_step_size = step_size;
            trace.log_evidence = log_z;  // partial quadrature sum, no remainder
            return trace;
        }

        long accepted = 0;
        for (int t = 0; t < n_p; ++t) {
            live.energies[slots[t]] = outcomes[t].energy;
            tracker.update(slots[t], outcomes[t].energy);
            accepted += outcomes[t].accepted;
        }
        const double acc_ratio =
            static_cast<double>(accepted) / static_cast<double>(steps_each * n_p);
        trace.acceptance_history.push_back(static_cast<float>(acc_ratio));
        step_size = adapt_step(acc_ratio, step_size, params.box_length());

        if (-beta_eff * v_limit + log_x < log_eps + log_z) {
            trace.termination = NsTermination::converged;
            break;
        }
    }

    // live-point remainder: Z += X_j * (1/K) sum_live exp(-beta_eff V)
    {
        double max_arg = numeric::neg_inf;
        for (double e : live.energies) max_arg = std::max(max_arg, -beta_eff * e);
        if (max_arg > numeric::neg_inf) {
            double s = 0.0;
            for (double e : live.energies) s += std::exp(-beta_eff * e - max_arg);
            log_z = numeric::log_add_exp(log_z, log_x + max_arg + std::log(s) - std::log(k));
        }
    }

    trace.log_evidence = log_z;
    trace.final_step_size = step_size;
    return trace;
}

}  // namespace pins
