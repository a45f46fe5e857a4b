#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pins/errors.hpp"

namespace pins {

// Analytic PES models over Jacobi coordinates. Each model exposes the
// unchecked fast path operator()(const double*) used by the sampler and a
// lower bound on the energy so constrained evaluations can abort early.

// V = sum_i k_i x_i^2 / 2
struct HarmonicIso {
    std::vector<double> k;
    int dim() const { return static_cast<int>(k.size()); }
    double lower_bound() const { return 0.0; }
    double operator()(const double* x) const
    {
        double v = 0.0;
        const int n = dim();
        for (int i = 0; i < n; ++i) v += 0.5 * k[i] * x[i] * x[i];
        return v;
    }
    // enables the fused flat-array ring-polymer evaluation
    std::vector<double> diagonal_quadratic_coefficients() const
    {
        std::vector<double> c(k.size());
        for (std::size_t i = 0; i < k.size(); ++i) c[i] = 0.5 * k[i];
        return c;
    }
};

// Diatomic Morse on the length of the single Jacobi vector:
// V = D (1 - exp(-a (|x| - r_e)))^2. Zero at r_e, -> D at dissociation.
struct MorseDiatomic {
    double d_e = 0.0;
    double a = 0.0;
    double r_e = 0.0;
    int dim() const { return 3; }
    double lower_bound() const { return 0.0; }
    double operator()(const double* x) const
    {
        const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        const double t = 1.0 - std::exp(-a * (r - r_e));
        return d_e * t * t;
    }
};

// V = sum_i k_i x_i^2 / 2 + sum_{i<j} c_ij x_i^2 x_j^2 with c_ij >= 0
struct CoupledQuartic {
    std::vector<double> k;
    struct Coupling {
        int i, j;
        double c;
    };
    std::vector<Coupling> couplings;
    int dim() const { return static_cast<int>(k.size()); }
    double lower_bound() const { return 0.0; }
    double operator()(const double* x) const
    {
        double v = 0.0;
        const int n = dim();
        for (int i = 0; i < n; ++i) v += 0.5 * k[i] * x[i] * x[i];
        for (const auto& c : couplings) v += c.c * x[c.i] * x[c.i] * x[c.j] * x[c.j];
        return v;
    }
};

// The unit-width Gaussian integrand, V = sum_i x_i^2 / 2; with beta = 1 and
// a single bead the sampler then integrates exp(-sum x^2/2) over the box.
struct GaussianTest {
    int n = 0;
    int dim() const { return n; }
    double lower_bound() const { return 0.0; }
    double operator()(const double* x) const
    {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += 0.5 * x[i] * x[i];
        return v;
    }
    std::vector<double> diagonal_quadratic_coefficients() const
    {
        return std::vector<double>(n, 0.5);
    }
};

// Placeholder for an external evaluator process; evaluation goes through
// ExternalEvaluator (external_pes.hpp), one process per walker.
struct ExternalModel {
    std::string command;
    int fn = 0;
    int dim() const { return fn; }
    double lower_bound() const { return -std::numeric_limits<double>::infinity(); }
};

using PotentialModel =
    std::variant<HarmonicIso, MorseDiatomic, CoupledQuartic, GaussianTest, ExternalModel>;

inline int model_dim(const PotentialModel& m)
{
    return std::visit([](const auto& p) { return p.dim(); }, m);
}

// Checked evaluation for library users; analytic models only.
inline double evaluate(const PotentialModel& m, std::span<const double> x)
{
    if (static_cast<int>(x.size()) != model_dim(m))
        throw InvalidInput("evaluate: coordinate count does not match model dimension");
    for (double xi : x)
        if (!std::isfinite(xi)) throw InvalidInput("evaluate: non-finite coordinate");
    return std::visit(
        [&](const auto& p) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, ExternalModel>)
                throw InvalidInput("evaluate: external models evaluate through ExternalEvaluator");
            else
                return p(x.data());
        },
        m);
}

inline std::vector<double> evaluate_batch(const PotentialModel& m,
                                          const std::vector<std::vector<double>>& points)
{
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(evaluate(m, p));
    return out;
}

}  // namespace pins
