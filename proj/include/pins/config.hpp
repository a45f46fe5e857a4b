#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "pins/errors.hpp"
#include "pins/estimator.hpp"
#include "pins/jacobi.hpp"
#include "pins/oracles.hpp"
#include "pins/potentials.hpp"
#include "pins/units.hpp"

namespace pins {

struct OutputConfig {
    std::string path = "results.csv";
    std::string format = "csv";  // csv | json
    bool write_traces = false;
    bool include_timing = true;  // false gives byte-reproducible output files
};

struct RunConfig {
    std::vector<double> masses_u;
    PotentialModel pes{GaussianTest{}};
    std::string pes_kind;

    std::vector<double> temperatures_k;
    std::vector<int> beads;  // parallel to temperatures
    NsParams ns;             // live_points, walk_steps, box, walkers, stop_factor, seed
    int n_runs = 20;
    std::optional<double> e0_hartree;  // empty: resolve from the oracle
    bool e0_from_oracle = false;

    int n_ssw = 1;
    OutputConfig output;

    JacobiFrame frame() const
    {
        std::vector<double> masses_me;
        masses_me.reserve(masses_u.size());
        for (double m : masses_u) masses_me.push_back(units::mass_me_from_u(m));
        return build_jacobi_frame(masses_me);
    }
};

namespace detail_config {

using nlohmann::json;

inline const json& need(const json& j, const char* key, const char* where)
{
    auto it = j.find(key);
    if (it == j.end())
        throw InvalidInput(std::string("config: missing \"") + key + "\" in " + where);
    return *it;
}

inline PotentialModel parse_pes(const json& j, int fn, std::string& kind_out)
{
    const std::string kind = need(j, "kind", "system.pes").get<std::string>();
    kind_out = kind;
    if (kind == "harmonic_iso") {
        HarmonicIso p;
        const json& k = need(j, "k", "harmonic_iso");
        if (k.is_number())
            p.k.assign(fn, k.get<double>());
        else
            p.k = k.get<std::vector<double>>();
        if (static_cast<int>(p.k.size()) != fn)
            throw InvalidInput("config: harmonic_iso k length != 3(N-1)");
        return p;
    }
    if (kind == "morse_diatomic") {
        if (fn != 3) throw InvalidInput("config: morse_diatomic needs exactly two atoms");
        MorseDiatomic p;
        p.d_e = need(j, "d_e", "morse_diatomic").get<double>();
        p.a = need(j, "a", "morse_diatomic").get<double>();
        p.r_e = need(j, "r_e", "morse_diatomic").get<double>();
        if (!(p.d_e > 0.0 && p.a > 0.0 && p.r_e > 0.0))
            throw InvalidInput("config: morse_diatomic parameters must be positive");
        return p;
    }
    if (kind == "coupled_quartic") {
        CoupledQuartic p;
        p.k = need(j, "k", "coupled_quartic").get<std::vector<double>>();
        if (static_cast<int>(p.k.size()) != fn)
            throw InvalidInput("config: coupled_quartic k length != 3(N-1)");
        if (j.contains("couplings"))
            for (const auto& c : j["couplings"]) {
                CoupledQuartic::Coupling cc{c.at(0).get<int>(), c.at(1).get<int>(),
                                            c.at(2).get<double>()};
                if (cc.i < 0 || cc.j < 0 || cc.i >= fn || cc.j >= fn || cc.c < 0.0)
                    throw InvalidInput("config: bad quartic coupling");
                p.couplings.push_back(cc);
            }
        return p;
    }
    if (kind == "gaussian_test") return GaussianTest{fn};
    if (kind == "external") {
        ExternalModel p;
        p.command = need(j, "command", "external").get<std::string>();
        p.fn = fn;
        return p;
    }
    throw InvalidInput("config: unknown pes kind \"" + kind + "\"");
}

}  // namespace detail_config

inline RunConfig parse_run_config(const nlohmann::json& j)
{
    using detail_config::need;
    RunConfig cfg;

    const auto& system = need(j, "system", "top level");
    cfg.masses_u = need(system, "masses_u", "system").get<std::vector<double>>();
    if (cfg.masses_u.size() < 2) throw InvalidInput("config: need at least two masses");
    for (double m : cfg.masses_u)
        if (!(m > 0.0)) throw InvalidInput("config: masses must be positive");
    const int fn = 3 * (static_cast<int>(cfg.masses_u.size()) - 1);
    cfg.pes = detail_config::parse_pes(need(system, "pes", "system"), fn, cfg.pes_kind);

    const auto& run = need(j, "run", "top level");
    cfg.temperatures_k = need(run, "temperatures_K", "run").get<std::vector<double>>();
    if (cfg.temperatures_k.empty()) throw InvalidInput("config: temperatures_K is empty");
    for (double t : cfg.temperatures_k)
        if (!(t > 0.0)) throw InvalidInput("config: temperatures must be positive");

    const auto& beads = need(run, "beads", "run");
    if (beads.is_number_integer()) {
        cfg.beads.assign(cfg.temperatures_k.size(), beads.get<int>());
    } else {
        cfg.beads = beads.get<std::vector<int>>();
        if (cfg.beads.size() != cfg.temperatures_k.size())
            throw InvalidInput("config: beads list must parallel temperatures_K");
    }
    for (int m : cfg.beads)
        if (m < 1) throw InvalidInput("config: bead counts must be >= 1");

    cfg.ns.live_points = need(run, "live_points", "run").get<int>();
    cfg.ns.walk_steps = need(run, "walk_steps", "run").get<int>();
    cfg.ns.box_half_width = need(run, "box_L", "run").get<double>() / 2.0;
    cfg.n_runs = run.value("n_runs", 20);
    cfg.ns.walkers = run.value("walkers", 1);
    cfg.ns.seed = run.value("seed", std::uint64_t{1});
    cfg.ns.stop_factor = run.value("stop_factor", 1e-5);
    cfg.ns.max_iterations = run.value("max_iterations", std::int64_t{5'000'000});
    if (cfg.n_runs < 1) throw InvalidInput("config: n_runs must be >= 1");

    if (run.contains("e0_hartree")) {
        cfg.e0_hartree = run["e0_hartree"].get<double>();
    } else if (run.contains("e0")) {
        if (run["e0"].get<std::string>() != "oracle")
            throw InvalidInput("config: e0 must be \"oracle\" or use e0_hartree");
        cfg.e0_from_oracle = true;
    } else {
        cfg.e0_hartree = 0.0;
    }

    if (j.contains("ssw")) cfg.n_ssw = need(j["ssw"], "n_ssw", "ssw").get<int>();
    if (cfg.n_ssw < 1) throw InvalidInput("config: n_ssw must be >= 1");

    if (j.contains("output")) {
        const auto& out = j["output"];
        cfg.output.path = out.value("path", cfg.output.path);
        cfg.output.format = out.value("format", cfg.output.format);
        cfg.output.write_traces = out.value("write_traces", false);
        cfg.output.include_timing = out.value("include_timing", true);
        if (cfg.output.format != "csv" && cfg.output.format != "json")
            throw InvalidInput("config: output.format must be csv or json");
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidInput("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw InvalidInput(std::string("config: JSON parse failed: ") + e.what());
    }
    return parse_run_config(j);
}

// Energy zero from the analytic oracles (lowest vibrational eigenvalue).
inline double resolve_e0(const RunConfig& cfg)
{
    if (cfg.e0_hartree) return *cfg.e0_hartree;
    const JacobiFrame frame = cfg.frame();
    if (const auto* h = std::get_if<HarmonicIso>(&cfg.pes)) {
        const auto mu = frame.masses_per_dof();
        double e0 = 0.0;
        for (std::size_t i = 0; i < h->k.size(); ++i)
            e0 += 0.5 * std::sqrt(h->k[i] / mu[i]);
        return e0;
    }
    if (const auto* m = std::get_if<MorseDiatomic>(&cfg.pes)) {
        const auto s = oracle::morse_levels(m->d_e, m->a, m->r_e, frame.reduced_masses[0]);
        return s.e0;
    }
    if (std::holds_alternative<GaussianTest>(cfg.pes)) return 0.0;
    throw InvalidInput("config: e0 \"oracle\" is unavailable for pes kind \"" + cfg.pes_kind +
                       "\"; supply e0_hartree");
}

}  // namespace pins
