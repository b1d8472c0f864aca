#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace cylstefan {

struct QuadResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    std::size_t evaluations = 0;
};

// Thrown when the adaptive scheme cannot meet the tolerance; carries the best estimate it had.
class QuadratureFailure : public std::runtime_error {
public:
    QuadratureFailure(const std::string& what, QuadResult best)
        : std::runtime_error(what), best_(best) {}
    const QuadResult& best() const noexcept { return best_; }

private:
    QuadResult best_;
};

struct QuadOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    std::size_t max_intervals = 2000;

    static QuadOptions with_tol(double tol) { return {tol, tol, 2000}; }
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights
inline constexpr std::array<double, 8> gk_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> gk_wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gk_wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double lo, hi, value, error;
};

template <class F>
Panel gk15(F& g, double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    const double fc = g(c);
    double k = fc * gk_wk[7];
    double gs = fc * gk_wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * gk_x[j];
        const double f1 = g(c - dx);
        const double f2 = g(c + dx);
        k += gk_wk[j] * (f1 + f2);
        if (j % 2 == 1) gs += gk_wg[j / 2] * (f1 + f2);
    }
    return {lo, hi, k * h, std::abs((k - gs) * h)};
}

}  // namespace detail

// Adaptive GK15 with global bisection of the worst panel.  Endpoint singularities of the
// form s^(p-1) are resolved by repeated halving toward the offending end; a non-integrable
// endpoint never settles and surfaces as QuadratureFailure.
template <class F>
QuadResult integrate_finite(F&& g, double lo, double hi, const QuadOptions& opt) {
    if (!(lo < hi)) {
        if (lo == hi) return {};
        throw std::invalid_argument("integrate_finite: lo must be < hi");
    }
    using detail::Panel;
    auto worse = [](const Panel& x, const Panel& y) { return x.error < y.error; };
    std::priority_queue<Panel, std::vector<Panel>, decltype(worse)> heap(worse);
    std::vector<Panel> frozen;  // panels too narrow to split further

    Panel first = detail::gk15(g, lo, hi);
    std::size_t evals = 15;
    double total = first.value, err = first.error;
    heap.push(first);

    // inf <= rel_tol * inf must not count as convergence
    auto converged = [&] {
        return std::isfinite(total) && std::isfinite(err) &&
               err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
    };
    auto finish = [&] {
        // re-sum from scratch so the reported value does not carry update drift
        double v = 0.0, e = 0.0;
        for (const auto& p : frozen) v += p.value, e += p.error;
        while (!heap.empty()) {
            v += heap.top().value;
            e += heap.top().error;
            heap.pop();
        }
        return QuadResult{v, e, evals};
    };

    while (!converged()) {
        if (!std::isfinite(total) || !std::isfinite(err)) {
            throw QuadratureFailure("quadrature: non-finite partial sum, integrand divergent or singular", {total, err, evals});
        }
        if (heap.empty() || heap.size() + frozen.size() >= opt.max_intervals) {
            QuadResult best = finish();
            throw QuadratureFailure("quadrature: no convergence within interval budget", best);
        }
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            frozen.push_back(worst);
            continue;
        }
        Panel left = detail::gk15(g, worst.lo, mid);
        Panel right = detail::gk15(g, mid, worst.hi);
        evals += 30;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    return finish();
}

template <class F>
QuadResult integrate_finite(F&& g, double lo, double hi, double tol) {
    return integrate_finite(g, lo, hi, QuadOptions::with_tol(tol));
}

// ∫_lo^∞ g via u = lo/s, so the tail becomes the endpoint u = 0 of (0, 1].
template <class F>
QuadResult integrate_halfline(F&& g, double lo, const QuadOptions& opt) {
    if (!(lo > 0.0)) throw std::invalid_argument("integrate_halfline: lo must be > 0");
    auto mapped = [&](double u) { return g(lo / u) * lo / (u * u); };
    try {
        return integrate_finite(mapped, 0.0, 1.0, opt);
    } catch (const QuadratureFailure& e) {
        throw QuadratureFailure("quadrature: divergent or unresolved tail on half-line", e.best());
    }
}

template <class F>
QuadResult integrate_halfline(F&& g, double lo, double tol) {
    return integrate_halfline(g, lo, QuadOptions::with_tol(tol));
}

}  // namespace cylstefan
