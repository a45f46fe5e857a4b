#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace pins::numeric {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without leaving log space.
inline double log_add_exp(double a, double b)
{
    if (a == neg_inf) return b;
    if (b == neg_inf) return a;
    const double hi = a > b ? a : b;
    const double lo = a > b ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

inline double log_sum_exp(std::span<const double> args)
{
    double max_arg = neg_inf;
    for (double a : args)
        if (a > max_arg) max_arg = a;
    if (max_arg == neg_inf) return neg_inf;
    double sum = 0.0;
    for (double a : args) sum += std::exp(a - max_arg);
    return max_arg + std::log(sum);
}

// Compensated accumulator; keeps O(eps) error over millions of additions.
class KahanSum {
public:
    void add(double x)
    {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

}  // namespace pins::numeric
