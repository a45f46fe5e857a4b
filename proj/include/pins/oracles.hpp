#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "pins/errors.hpp"
#include "pins/numeric.hpp"
#include "pins/ring_polymer.hpp"
#include "pins/units.hpp"

namespace pins::oracle {

// A reference spectrum: bound levels with degeneracies. e0 is the lowest
// level and doubles as the energy zero of the Boltzmann sum.
struct SpectrumOracle {
    std::vector<double> levels;  // hartree, sorted ascending
    std::vector<double> degeneracies;
    double e0 = 0.0;
};

// Q_ref(T) = sum_n g_n exp(-beta (E_n - e0)), log-sum-exp accumulated.
inline double boltzmann_sum(const SpectrumOracle& s, double t_kelvin)
{
    if (s.levels.empty()) throw InvalidInput("boltzmann_sum: empty spectrum");
    if (!(t_kelvin > 0.0)) throw InvalidInput("boltzmann_sum: temperature must be positive");
    const double beta = units::beta_from_temperature(t_kelvin);
    std::vector<double> args(s.levels.size());
    for (std::size_t n = 0; n < s.levels.size(); ++n)
        args[n] = std::log(s.degeneracies[n]) - beta * (s.levels[n] - s.e0);
    return std::exp(numeric::log_sum_exp(args));
}

// Separable harmonic spectrum: all sums of omega_i (n_i + 1/2), n_i <= n_max.
inline SpectrumOracle harmonic_levels(const std::vector<double>& omegas, int n_max)
{
    if (omegas.empty() || n_max < 0) throw InvalidInput("harmonic_levels: bad arguments");
    std::vector<double> levels{0.0};
    for (double w : omegas) {
        if (!(w > 0.0)) throw InvalidInput("harmonic_levels: omegas must be positive");
        std::vector<double> next;
        next.reserve(levels.size() * (n_max + 1));
        for (double base : levels)
            for (int n = 0; n <= n_max; ++n) next.push_back(base + w * (n + 0.5));
        levels = std::move(next);
    }
    std::sort(levels.begin(), levels.end());
    SpectrumOracle s;
    s.levels = std::move(levels);
    s.degeneracies.assign(s.levels.size(), 1.0);
    s.e0 = s.levels.front();
    return s;
}

// Analytic J=0 Morse ladder: E_n = w (n+1/2) - wx (n+1/2)^2 measured from the
// well bottom, w = a sqrt(2D/mu), wx = a^2/(2 mu), bound for
// n < sqrt(2 D mu)/a - 1/2.
inline SpectrumOracle morse_levels(double d_e, double a, double r_e, double mu)
{
    (void)r_e;  // levels do not depend on the equilibrium distance
    if (!(d_e > 0.0 && a > 0.0 && mu > 0.0))
        throw InvalidInput("morse_levels: parameters must be positive");
    const double w = a * std::sqrt(2.0 * d_e / mu);
    const double wx = a * a / (2.0 * mu);
    const double lambda = std::sqrt(2.0 * d_e * mu) / a;
    const int n_bound = static_cast<int>(std::ceil(lambda - 0.5)) - 1;
    if (n_bound < 0) throw InvalidInput("morse_levels: no bound levels");
    SpectrumOracle s;
    for (int n = 0; n <= n_bound; ++n) {
        const double v = n + 0.5;
        s.levels.push_back(w * v - wx * v * v);
    }
    s.degeneracies.assign(s.levels.size(), 1.0);
    s.e0 = s.levels.front();
    return s;
}

namespace detail {

// Sine-DVR kinetic matrix on (a, b) with n interior points (Colbert-Miller
// finite-interval form). Its eigenvalues for V = 0 are exactly the
// particle-in-a-box energies, which the tests lean on.
inline Eigen::MatrixXd sine_dvr_kinetic(double a, double b, int n, double mu)
{
    const int big_n = n + 1;
    const double len = b - a;
    const double pref = std::numbers::pi * std::numbers::pi / (4.0 * mu * len * len);
    Eigen::MatrixXd t(n, n);
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= i; ++j) {
            double v;
            if (i == j) {
                const double s = std::sin(std::numbers::pi * i / big_n);
                v = pref * ((2.0 * big_n * big_n + 1.0) / 3.0 - 1.0 / (s * s));
            } else {
                const double sm = std::sin(std::numbers::pi * (i - j) / (2.0 * big_n));
                const double sp = std::sin(std::numbers::pi * (i + j) / (2.0 * big_n));
                v = pref * (((i - j) % 2 == 0) ? 1.0 : -1.0) *
                    (1.0 / (sm * sm) - 1.0 / (sp * sp));
            }
            t(i - 1, j - 1) = v;
            t(j - 1, i - 1) = v;
        }
    }
    return t;
}

}  // namespace detail

struct RadialGrid {
    double r_min = 0.5;
    double r_max = 30.0;
    int n_points = 512;
};

// Rovibrational levels of a radial PES by sine-DVR diagonalisation of
// V(r) + J(J+1)/(2 mu r^2) per rotational channel, degeneracy 2J+1.
// Bound means below the r -> r_max asymptote of the bare potential; the
// discretised continuum above it is dropped. If check_convergence is set,
// the grid is doubled once and any retained level moving by more than
// 1e-8 hartree raises an error.
inline SpectrumOracle radial_dvr_levels(const std::function<double(double)>& pes_1d, double mu,
                                        int j_max, const RadialGrid& grid,
                                        bool check_convergence = false)
{
    if (!(mu > 0.0) || j_max < 0 || grid.n_points < 64 || !(grid.r_max > grid.r_min))
        throw InvalidInput("radial_dvr_levels: bad arguments");

    auto solve = [&](int n_pts) {
        const double dr = (grid.r_max - grid.r_min) / (n_pts + 1);
        Eigen::VectorXd r(n_pts), v(n_pts);
        for (int i = 0; i < n_pts; ++i) {
            r(i) = grid.r_min + (i + 1) * dr;
            v(i) = pes_1d(r(i));
        }
        const double asymptote = pes_1d(grid.r_max);
        const Eigen::MatrixXd t = detail::sine_dvr_kinetic(grid.r_min, grid.r_max, n_pts, mu);
        std::vector<std::vector<double>> by_j;
        for (int j = 0; j <= j_max; ++j) {
            Eigen::MatrixXd h = t;
            const double cent = j * (j + 1.0) / (2.0 * mu);
            for (int i = 0; i < n_pts; ++i) h(i, i) += v(i) + cent / (r(i) * r(i));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
            std::vector<double> bound;
            for (int i = 0; i < n_pts; ++i) {
                const double e = es.eigenvalues()(i);
                if (e < asymptote) bound.push_back(e);
            }
            if (j == 0 && bound.empty())
                throw InvalidInput("radial_dvr_levels: no bound J=0 levels on this grid");
            by_j.push_back(std::move(bound));
            if (by_j.back().empty()) break;  // centrifugal barrier unbinds higher J too
        }
        return by_j;
    };

    auto by_j = solve(grid.n_points);
    if (check_convergence) {
        const auto fine = solve(2 * grid.n_points);
        for (std::size_t j = 0; j < by_j.size(); ++j)
            for (std::size_t n = 0; n < by_j[j].size(); ++n) {
                if (j >= fine.size() || n >= fine[j].size() ||
                    std::fabs(by_j[j][n] - fine[j][n]) > 1e-8)
                    throw InvalidInput(
                        "radial_dvr_levels: grid too coarse (level shifts > 1e-8 hartree on "
                        "doubling)");
            }
    }

    SpectrumOracle s;
    for (std::size_t j = 0; j < by_j.size(); ++j)
        for (double e : by_j[j]) {
            s.levels.push_back(e);
            s.degeneracies.push_back(2.0 * j + 1.0);
        }
    // sort by level, carrying degeneracies along
    std::vector<std::size_t> order(s.levels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return s.levels[a] < s.levels[b]; });
    SpectrumOracle sorted;
    for (std::size_t i : order) {
        sorted.levels.push_back(s.levels[i]);
        sorted.degeneracies.push_back(s.degeneracies[i]);
    }
    sorted.e0 = sorted.levels.front();
    return sorted;
}

// Exact Q_M for a harmonic PES: the ring-polymer integral is Gaussian, so
// Q_M = prefactor * prod_k (2 pi / (beta_M lambda_k))^(1/2) over the
// eigenvalues of the fnM x fnM quadratic form of the extended potential
// (box -> infinity). Assembled densely and diagonalised; the analytic
// circulant eigenvalues serve as a cross-check in the tests.
inline double gaussian_rp_log_q(const RingPolymerSystem& sys, const HarmonicIso& pot)
{
    const int fn = sys.fn();
    const int m = sys.beads;
    if (pot.dim() != fn) throw InvalidInput("gaussian_rp_q: PES dimension != fn");

    const int n = fn * m;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    const double w2 = sys.omega_m * sys.omega_m;
    for (int i = 0; i < fn; ++i) {
        const double spring = sys.mass_per_dof[i] * w2;
        for (int j = 0; j < m; ++j) {
            const int row = j * fn + i;
            a(row, row) += pot.k[i];
            if (m > 1) {
                a(row, row) += 2.0 * spring;
                a(row, ((j + 1) % m) * fn + i) -= spring;
                a(row, ((j - 1 + m) % m) * fn + i) -= spring;
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    double log_q = rp_log_prefactor(sys);
    for (int i = 0; i < n; ++i) {
        const double lambda = es.eigenvalues()(i);
        if (!(lambda > 0.0)) throw InvalidInput("gaussian_rp_q: non-positive eigenvalue");
        log_q += 0.5 * std::log(2.0 * std::numbers::pi / (sys.beta_m * lambda));
    }
    return log_q;
}

inline double gaussian_rp_q(const RingPolymerSystem& sys, const HarmonicIso& pot)
{
    return std::exp(gaussian_rp_log_q(sys, pot));
}

// Analytic eigenvalues of the same quadratic form:
// lambda_{i,k} = mu_i omega_M^2 * 2(1-cos(2 pi k / M)) + k_i.
inline std::vector<double> gaussian_rp_circulant_eigenvalues(const RingPolymerSystem& sys,
                                                             const HarmonicIso& pot)
{
    std::vector<double> out;
    const double w2 = sys.omega_m * sys.omega_m;
    for (int i = 0; i < sys.fn(); ++i)
        for (int k = 0; k < sys.beads; ++k) {
            const double gamma = 2.0 * (1.0 - std::cos(2.0 * std::numbers::pi * k / sys.beads));
            out.push_back(sys.mass_per_dof[i] * w2 * gamma + pot.k[i]);
        }
    std::sort(out.begin(), out.end());
    return out;
}

// Brute-force configurational integral Integral_box exp(-beta V) dx on
// [-hw, hw]^dims by tensor-product trapezoid, refined until the relative
// change drops below tol. dims <= 3.
template <class PotFn>
double quadrature_config_integral(const PotFn& pot, double beta, int dims, double half_width,
                                  double tol = 1e-8, int max_refinements = 12)
{
    if (dims < 1 || dims > 3) throw InvalidInput("quadrature_config_integral: dims must be 1..3");
    if (!(half_width > 0.0)) throw InvalidInput("quadrature_config_integral: bad box");

    auto integrate = [&](int n) {
        const double h = 2.0 * half_width / (n - 1);
        auto node = [&](int i) { return -half_width + i * h; };
        auto weight = [&](int i) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; };
        double x[3] = {0, 0, 0};
        double sum = 0.0;
        if (dims == 1) {
            for (int i = 0; i < n; ++i) {
                x[0] = node(i);
                sum += weight(i) * std::exp(-beta * pot(x));
            }
        } else if (dims == 2) {
            for (int i = 0; i < n; ++i) {
                x[0] = node(i);
                double row = 0.0;
                for (int j = 0; j < n; ++j) {
                    x[1] = node(j);
                    row += weight(j) * std::exp(-beta * pot(x));
                }
                sum += weight(i) * row;
            }
        } else {
            for (int i = 0; i < n; ++i) {
                x[0] = node(i);
                double plane = 0.0;
                for (int j = 0; j < n; ++j) {
                    x[1] = node(j);
                    double row = 0.0;
                    for (int l = 0; l < n; ++l) {
                        x[2] = node(l);
                        row += weight(l) * std::exp(-beta * pot(x));
                    }
                    plane += weight(j) * row;
                }
                sum += weight(i) * plane;
            }
        }
        return sum * std::pow(h, dims);
    };

    int n = 33;
    double prev = integrate(n);
    for (int r = 0; r < max_refinements; ++r) {
        n = 2 * n - 1;
        const double cur = integrate(n);
        if (std::fabs(cur - prev) <= tol * std::fabs(cur)) return cur;
        prev = cur;
    }
    throw Error("quadrature_config_integral: did not converge");
}

}  // namespace pins::oracle
