#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "pins/errors.hpp"
#include "pins/potentials.hpp"

namespace pins {

// The extended classical system: M copies of the physical coordinates with
// cyclic harmonic springs of angular frequency omega_M = M/beta between
// neighbouring beads. Bead configurations are flat vectors of fn*M
// coordinates in bead-major order (bead j's fn coordinates contiguous), so
// one PES call reads contiguous memory.
struct RingPolymerSystem {
    std::vector<double> mass_per_dof;  // mu_i, one per scalar dof (m_e)
    int beads = 1;                     // M
    double beta = 1.0;                 // 1/hartree
    double beta_m = 1.0;               // beta / M
    double omega_m = 1.0;              // 1 / beta_m

    int fn() const { return static_cast<int>(mass_per_dof.size()); }
    int dim() const { return fn() * beads; }
};

inline RingPolymerSystem make_ring_polymer(std::vector<double> mass_per_dof, int beads,
                                           double beta)
{
    if (beads < 1) throw InvalidInput("make_ring_polymer: beads must be >= 1");
    if (!(beta > 0.0)) throw InvalidInput("make_ring_polymer: beta must be positive");
    if (mass_per_dof.empty()) throw InvalidInput("make_ring_polymer: no degrees of freedom");
    for (double m : mass_per_dof)
        if (!(m > 0.0)) throw InvalidInput("make_ring_polymer: masses must be positive");
    RingPolymerSystem sys;
    sys.mass_per_dof = std::move(mass_per_dof);
    sys.beads = beads;
    sys.beta = beta;
    sys.beta_m = beta / beads;
    sys.omega_m = 1.0 / sys.beta_m;
    return sys;
}

// log of (2 pi beta_M)^(-fnM/2) * (prod mu_i)^(M/2). Kept in log space:
// for a few hundred dofs the linear-space factor over/underflows doubles.
inline double rp_log_prefactor(const RingPolymerSystem& sys)
{
    double log_mass_product = 0.0;
    for (double m : sys.mass_per_dof) log_mass_product += std::log(m);
    const double fnm = static_cast<double>(sys.dim());
    return -0.5 * fnm * std::log(2.0 * std::numbers::pi * sys.beta_m) +
           0.5 * sys.beads * log_mass_product;
}

inline double rp_prefactor(const RingPolymerSystem& sys)
{
    return std::exp(rp_log_prefactor(sys));
}

struct RpPotentialParts {
    double spring = 0.0;    // sum over beads of the harmonic link terms
    double physical = 0.0;  // sum over beads of V
    double total() const { return spring + physical; }
};

// Extended potential V_rp,tot evaluated against any callable V(const double*).
// With a single bead the cyclic neighbour is the bead itself and the spring
// term vanishes identically.
template <class PotFn>
RpPotentialParts rp_potential_parts(const RingPolymerSystem& sys, const PotFn& pot,
                                    const double* config)
{
    const int fn = sys.fn();
    const int m = sys.beads;
    RpPotentialParts parts;
    const double w2 = sys.omega_m * sys.omega_m;
    for (int j = 0; j < m; ++j) {
        const double* bead = config + static_cast<std::ptrdiff_t>(j) * fn;
        if (m > 1) {
            const double* prev = config + static_cast<std::ptrdiff_t>(j == 0 ? m - 1 : j - 1) * fn;
            double s = 0.0;
            for (int i = 0; i < fn; ++i) {
                const double d = bead[i] - prev[i];
                s += 0.5 * sys.mass_per_dof[i] * w2 * d * d;
            }
            parts.spring += s;
        }
        parts.physical += pot(bead);
    }
    return parts;
}

template <class PotFn>
double rp_potential(const RingPolymerSystem& sys, const PotFn& pot, const double* config)
{
    return rp_potential_parts(sys, pot, config).total();
}

namespace detail_rp {

template <class P>
concept DiagonalQuadratic = requires(const P& p) {
    { p.diagonal_quadratic_coefficients() } -> std::convertible_to<std::vector<double>>;
};

}  // namespace detail_rp

// Sampler-facing energy functor. For diagonal-quadratic models (harmonic,
// gaussian test) the spring and PES sums fuse into one flat pass over the
// fnM coordinates; other models use the per-bead path, where eval_below()
// abandons the sum as soon as the running value cannot fall back under the
// cutoff (exact when the PES has a known lower bound; 0 for all builtins).
template <class Pot>
struct RpEnergy {
    const Pot& pot;
    RingPolymerSystem sys;
    std::vector<double> half_mu_w2;   // 0.5 * mu_i * omega_M^2
    std::vector<double> spring_coeff; // fused path: per flat coordinate
    std::vector<double> phys_coeff;

    RpEnergy(const Pot& p, const RingPolymerSystem& s) : pot(p), sys(s)
    {
        half_mu_w2.resize(sys.fn());
        const double w2 = sys.omega_m * sys.omega_m;
        for (int i = 0; i < sys.fn(); ++i) half_mu_w2[i] = 0.5 * sys.mass_per_dof[i] * w2;
        if constexpr (detail_rp::DiagonalQuadratic<Pot>) {
            const std::vector<double> c = pot.diagonal_quadratic_coefficients();
            const int dim = sys.dim();
            spring_coeff.resize(dim);
            phys_coeff.resize(dim);
            for (int t = 0; t < dim; ++t) {
                spring_coeff[t] = half_mu_w2[t % sys.fn()];
                phys_coeff[t] = c[t % sys.fn()];
            }
        }
    }

    double operator()(const double* config) const
    {
        if constexpr (detail_rp::DiagonalQuadratic<Pot>)
            return eval_fused(config);
        else
            return eval_beadwise(config, std::numeric_limits<double>::infinity());
    }

    double eval_below(const double* config, double cutoff) const
    {
        if constexpr (detail_rp::DiagonalQuadratic<Pot>)
            return eval_fused(config);
        else
            return eval_beadwise(config, cutoff);
    }

    double eval_fused(const double* config) const
    {
        const int fn = sys.fn();
        const int dim = sys.dim();
        double v = 0.0;
        if (sys.beads > 1) {
            double s = 0.0;
            for (int t = fn; t < dim; ++t) {
                const double d = config[t] - config[t - fn];
                s += spring_coeff[t] * d * d;
            }
            for (int t = 0; t < fn; ++t) {
                const double d = config[t] - config[dim - fn + t];
                s += spring_coeff[t] * d * d;
            }
            v += s;
        }
        double w = 0.0;
        for (int t = 0; t < dim; ++t) w += phys_coeff[t] * config[t] * config[t];
        return v + w;
    }

    double eval_beadwise(const double* config, double cutoff) const
    {
        const int fn = sys.fn();
        const int m = sys.beads;
        const double lb = pot.lower_bound();
        double v = 0.0;
        for (int j = 0; j < m; ++j) {
            const double* bead = config + static_cast<std::ptrdiff_t>(j) * fn;
            if (m > 1) {
                const double* prev =
                    config + static_cast<std::ptrdiff_t>(j == 0 ? m - 1 : j - 1) * fn;
                double s = 0.0;
                for (int i = 0; i < fn; ++i) {
                    const double d = bead[i] - prev[i];
                    s += half_mu_w2[i] * d * d;
                }
                v += s;
            }
            v += pot(bead);
            // left-over beads contribute at least (m-j-1)*lb
            if (lb > -std::numeric_limits<double>::infinity()) {
                if (v + (m - j - 1) * lb >= cutoff) return std::numeric_limits<double>::infinity();
            }
        }
        return v;
    }
};

}  // namespace pins
