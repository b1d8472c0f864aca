#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cylstefan {

// Continued fraction part of E1: E1(x) = exp(-x) * expint_cf(x), x > 0 (modified Lentz).
inline double expint_cf(double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) return h;
    }
    throw std::runtime_error("expint_cf: continued fraction did not converge");
}

// Exponential integral E1(x) = ∫_x^∞ e^{-s}/s ds: power series for x <= 1,
// continued fraction above.
inline double expint_e1(double x) {
    if (!(x > 0.0)) {
        if (x == 0.0) return std::numeric_limits<double>::infinity();
        throw std::domain_error("expint_e1: x must be positive");
    }
    if (x > 1.0) return std::exp(-x) * expint_cf(x);
    constexpr double euler = 0.57721566490153286061;
    double sum = 0.0, term = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= -x / k;
        const double add = term / k;
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return -euler - std::log(x) - sum;
}

// exp(x) * E1(x) without overflow for large x
inline double expint_e1_scaled(double x) {
    if (x > 1.0) return expint_cf(x);
    return std::exp(x) * expint_e1(x);
}

}  // namespace cylstefan
