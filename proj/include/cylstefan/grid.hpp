#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadrature.hpp"

namespace cylstefan {

// Monotone change of variable x -> z used for node placement and interpolation.
//   identity:  z = x
//   lower:     z = ln x + x/ell          (geometric near x = 0, uniform far from it)
//   upper:     z = -ln(1 - x + shift) - (1 - x)/ell   on x in [0, 1], clustered at x = 1
struct Grading {
    enum class Kind { identity, lower, upper };
    Kind kind = Kind::identity;
    double inv_ell = 0.0;
    double shift = 0.0;

    double z(double x) const {
        switch (kind) {
            case Kind::lower: return std::log(x) + x * inv_ell;
            case Kind::upper: {
                const double y = 1.0 - x;
                return -std::log(y + shift) - y * inv_ell;
            }
            default: return x;
        }
    }
    double dz(double x) const {
        switch (kind) {
            case Kind::lower: return 1.0 / x + inv_ell;
            case Kind::upper: return 1.0 / (1.0 - x + shift) + inv_ell;
            default: return 1.0;
        }
    }
    // solve z(x) = target on [lo, hi]; z is strictly increasing
    double invert(double target, double lo, double hi) const {
        if (kind == Kind::identity) return target;
        double x = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            const double f = z(x) - target;
            if (f > 0) hi = x; else lo = x;
            double nx = x - f / dz(x);
            if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
            if (nx == x || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::abs(x)) break;
            x = nx;
        }
        return x;
    }
};

struct GradedNodes {
    std::vector<double> nodes;
    Grading grading;
};

// n nodes on [lo, hi] (lo > 0), uniform in z = ln x + x/ell with step ln(ratio).
// When ln(hi/lo) alone already exceeds the budget the map is purely logarithmic.
inline GradedNodes graded_toward_lower(double lo, double hi, std::size_t n, double ratio) {
    if (!(lo > 0 && lo < hi) || n < 2 || !(ratio > 1))
        throw std::invalid_argument("graded_toward_lower: bad arguments");
    Grading g{Grading::Kind::lower, 0.0, 0.0};
    const double span = static_cast<double>(n - 1) * std::log(ratio);
    const double logspan = std::log(hi / lo);
    if (span > logspan) g.inv_ell = (span - logspan) / (hi - lo);
    std::vector<double> x(n);
    const double z0 = g.z(lo), z1 = g.z(hi);
    x.front() = lo;
    x.back() = hi;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double zi = z0 + (z1 - z0) * static_cast<double>(i) / static_cast<double>(n - 1);
        x[i] = g.invert(zi, lo, hi);
    }
    return {std::move(x), g};
}

// n nodes on [0, 1] clustered geometrically toward 1 (first spacing ~ shift*(ratio-1)).
inline GradedNodes graded_toward_upper(std::size_t n, double ratio, double shift) {
    if (n < 2 || !(ratio > 1) || !(shift > 0))
        throw std::invalid_argument("graded_toward_upper: bad arguments");
    Grading g{Grading::Kind::upper, 0.0, shift};
    const double span = static_cast<double>(n - 1) * std::log(ratio);
    const double logspan = std::log((1.0 + shift) / shift);
    if (span > logspan) g.inv_ell = span - logspan;
    std::vector<double> x(n);
    const double z0 = g.z(0.0), z1 = g.z(1.0);
    x.front() = 0.0;
    x.back() = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double zi = z0 + (z1 - z0) * static_cast<double>(i) / static_cast<double>(n - 1);
        x[i] = g.invert(zi, 0.0, 1.0);
    }
    return {std::move(x), g};
}

// Sampled function with piecewise Hermite interpolation in the graded coordinate: quintic when
// exact slopes come with a graded grid, cubic otherwise.
//
// Finite(lo, hi): samples live at the domain coordinate.  Below the first node (which may
// sit above lo, e.g. the liquid grid starts at eta_min > 0) the first value is held.
// HalfLine(lo): samples live at u = lo/xi in [0, 1]; the node u = 0 carries the xi -> inf limit.
class GridFunction {
public:
    enum class Domain { finite, half_line };

    GridFunction() = default;

    // slopes are d(value)/d(sample coordinate); NaN entries (or an empty vector) are filled
    // with monotone three-point estimates.
    GridFunction(Domain domain, double lo, double hi, std::vector<double> nodes,
                 std::vector<double> values, std::vector<double> slopes = {},
                 Grading grading = {})
        : domain_(domain), lo_(lo), hi_(hi), x_(std::move(nodes)), v_(std::move(values)),
          raw_(std::move(slopes)), grading_(grading) {
        if (domain_ == Domain::half_line) hi_ = std::numeric_limits<double>::infinity();
        if (raw_.empty()) raw_.assign(x_.size(), std::numeric_limits<double>::quiet_NaN());
        validate();
        build();
    }

    static GridFunction finite(double lo, double hi, std::vector<double> nodes,
                               std::vector<double> values, std::vector<double> slopes = {},
                               Grading grading = {}) {
        return GridFunction(Domain::finite, lo, hi, std::move(nodes), std::move(values),
                            std::move(slopes), grading);
    }
    static GridFunction half_line(double lo, std::vector<double> u_nodes,
                                  std::vector<double> values, std::vector<double> slopes = {},
                                  Grading grading = {}) {
        return GridFunction(Domain::half_line, lo, std::numeric_limits<double>::infinity(),
                            std::move(u_nodes), std::move(values), std::move(slopes), grading);
    }

    Domain domain() const { return domain_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::vector<double>& nodes() const { return x_; }
    const std::vector<double>& values() const { return v_; }
    const std::vector<double>& input_slopes() const { return raw_; }
    const Grading& grading() const { return grading_; }
    std::size_t size() const { return x_.size(); }
    bool quintic() const { return !d2z_.empty(); }

    // domain coordinate of node i (xi = lo/u for half-line; inf at u = 0)
    double node_position(std::size_t i) const {
        if (domain_ == Domain::finite) return x_[i];
        return x_[i] == 0.0 ? std::numeric_limits<double>::infinity() : lo_ / x_[i];
    }

    double operator()(double x) const { return at_sample(to_sample(x)); }

    // derivative with respect to the domain coordinate
    double derivative(double x) const {
        const double s = to_sample(x);
        const double d = derivative_sample(s);
        if (domain_ == Domain::finite) return d;
        return -d * s * s / lo_;  // du/dxi = -u^2/lo
    }

    double at_sample(double s) const {
        if (s <= x_.front()) return v_.front();
        if (s >= x_.back()) return v_.back();
        auto it = std::upper_bound(x_.begin(), x_.end(), s);
        const std::size_t k = static_cast<std::size_t>(it - x_.begin()) - 1;
        if (x_[k] == s) return v_[k];
        const double h = z_[k + 1] - z_[k];
        const double t = (grading_.z(s) - z_[k]) / h;
        const double t2 = t * t, t3 = t2 * t;
        if (!d2z_.empty()) {
            const double t4 = t3 * t, t5 = t4 * t;
            const double q = (1 - 10 * t3 + 15 * t4 - 6 * t5) * v_[k] +
                             (t - 6 * t3 + 8 * t4 - 3 * t5) * h * dz_[k] +
                             0.5 * (t2 - 3 * t3 + 3 * t4 - t5) * h * h * d2z_[k] +
                             0.5 * (t3 - 2 * t4 + t5) * h * h * d2z_[k + 1] +
                             (-4 * t3 + 7 * t4 - 3 * t5) * h * dz_[k + 1] +
                             (10 * t3 - 15 * t4 + 6 * t5) * v_[k + 1];
            // on a monotone cell the data cannot leave the node range; the quintic can, near
            // the flat far field of a half-line function
            const double sec = v_[k + 1] - v_[k];
            if (sec * dz_[k] >= 0 && sec * dz_[k + 1] >= 0)
                return std::clamp(q, std::min(v_[k], v_[k + 1]), std::max(v_[k], v_[k + 1]));
            return q;
        }
        return (2 * t3 - 3 * t2 + 1) * v_[k] + (t3 - 2 * t2 + t) * h * dz_[k] +
               (-2 * t3 + 3 * t2) * v_[k + 1] + (t3 - t2) * h * dz_[k + 1];
    }

    double derivative_sample(double s) const {
        if (s < x_.front() || s > x_.back()) return 0.0;
        std::size_t k;
        if (s == x_.back()) {
            k = x_.size() - 2;
        } else {
            auto it = std::upper_bound(x_.begin(), x_.end(), s);
            k = static_cast<std::size_t>(it - x_.begin()) - 1;
        }
        const double h = z_[k + 1] - z_[k];
        const double t = (grading_.z(s) - z_[k]) / h;
        const double t2 = t * t;
        double dvdz;
        if (!d2z_.empty()) {
            const double t3 = t2 * t, t4 = t3 * t;
            dvdz = ((-30 * t2 + 60 * t3 - 30 * t4) * v_[k] +
                    (1 - 18 * t2 + 32 * t3 - 15 * t4) * h * dz_[k] +
                    (t - 4.5 * t2 + 6 * t3 - 2.5 * t4) * h * h * d2z_[k] +
                    (1.5 * t2 - 4 * t3 + 2.5 * t4) * h * h * d2z_[k + 1] +
                    (-12 * t2 + 28 * t3 - 15 * t4) * h * dz_[k + 1] +
                    (30 * t2 - 60 * t3 + 30 * t4) * v_[k + 1]) / h;
        } else {
            dvdz = ((6 * t2 - 6 * t) * v_[k] + (3 * t2 - 4 * t + 1) * h * dz_[k] +
                    (-6 * t2 + 6 * t) * v_[k + 1] + (3 * t2 - 2 * t) * h * dz_[k + 1]) / h;
        }
        return dvdz * grading_.dz(s);
    }

    double sample_of(double x) const { return to_sample(x); }

private:
    double to_sample(double x) const {
        if (std::isnan(x)) throw std::domain_error("GridFunction: NaN argument");
        if (domain_ == Domain::finite) {
            if (x < lo_ || x > hi_)
                throw std::domain_error("GridFunction: argument " + std::to_string(x) +
                                        " outside [" + std::to_string(lo_) + ", " +
                                        std::to_string(hi_) + "]");
            return x;
        }
        if (x < lo_)
            throw std::domain_error("GridFunction: argument below half-line start");
        if (std::isinf(x)) return 0.0;
        return lo_ / x;
    }

    void validate() const {
        if (x_.size() < 2) throw std::invalid_argument("GridFunction: need at least 2 nodes");
        if (v_.size() != x_.size() || raw_.size() != x_.size())
            throw std::invalid_argument("GridFunction: size mismatch");
        for (std::size_t i = 1; i < x_.size(); ++i)
            if (!(x_[i] > x_[i - 1]))
                throw std::invalid_argument("GridFunction: nodes must be strictly increasing");
        if (domain_ == Domain::finite && (x_.front() < lo_ || x_.back() > hi_))
            throw std::invalid_argument("GridFunction: nodes outside domain");
        if (domain_ == Domain::half_line && (x_.front() < 0.0 || x_.back() > 1.0))
            throw std::invalid_argument("GridFunction: half-line nodes must lie in [0, 1]");
    }

    void build() {
        const std::size_t n = x_.size();
        z_.resize(n);
        for (std::size_t i = 0; i < n; ++i) z_[i] = grading_.z(x_[i]);
        // graded maps can put the first node at z = -inf (x = 0 under the lower map)
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(z_[i]))
                throw std::invalid_argument("GridFunction: node not representable under grading");
        std::vector<double> sec(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) sec[k] = (v_[k + 1] - v_[k]) / (z_[k + 1] - z_[k]);

        dz_.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = raw_[i];
            if (std::isfinite(r)) {
                dz_[i] = r / grading_.dz(x_[i]);
                if (!std::isfinite(dz_[i])) dz_[i] = std::numeric_limits<double>::quiet_NaN();
            } else {
                dz_[i] = std::numeric_limits<double>::quiet_NaN();
            }
        }
        // fill gaps with Fritsch-Butland style estimates
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isnan(dz_[i])) continue;
            if (n == 2) { dz_[i] = sec[0]; continue; }
            if (i == 0 || i + 1 == n) {
                // one-sided three-point estimate, clipped to keep monotone data monotone
                const std::size_t a = (i == 0) ? 0 : n - 2, b = (i == 0) ? 1 : n - 3;
                const double h0 = z_[a + 1] - z_[a], h1 = z_[b + 1] - z_[b];
                double d = ((2 * h0 + h1) * sec[a] - h0 * sec[b]) / (h0 + h1);
                if (d * sec[a] <= 0) d = 0.0;
                else if (sec[a] * sec[b] < 0 && std::abs(d) > 3 * std::abs(sec[a])) d = 3 * sec[a];
                dz_[i] = d;
            } else {
                const double s0 = sec[i - 1], s1 = sec[i];
                if (s0 * s1 <= 0) {
                    dz_[i] = 0.0;
                } else {
                    const double h0 = z_[i] - z_[i - 1], h1 = z_[i + 1] - z_[i];
                    const double w0 = 2 * h1 + h0, w1 = h1 + 2 * h0;
                    dz_[i] = (w0 + w1) / (w0 / s0 + w1 / s1);
                }
            }
        }
        if (quintic_ready(n)) {
            build_second_derivatives(n);
            return;
        }
        // Fritsch-Carlson limiter: only acts where given slopes would overshoot monotone data
        for (std::size_t k = 0; k + 1 < n; ++k) {
            if (sec[k] == 0.0) continue;
            const double al = dz_[k] / sec[k], be = dz_[k + 1] / sec[k];
            if (al < 0 || be < 0) continue;
            const double r2 = al * al + be * be;
            if (r2 > 9.0) {
                const double tau = 3.0 / std::sqrt(r2);
                dz_[k] = tau * al * sec[k];
                dz_[k + 1] = tau * be * sec[k];
            }
        }
    }

    // Exact slopes at nodes equally spaced in z: second derivatives follow from fourth-order
    // differences of the slopes and the interpolant becomes quintic Hermite.
    bool quintic_ready(std::size_t n) const {
        if (grading_.kind == Grading::Kind::identity || n < 6) return false;
        std::size_t missing = 0;
        for (double r : raw_)
            if (!std::isfinite(r)) ++missing;
        // the half-line limit node legitimately has no slope
        if (missing > (domain_ == Domain::half_line ? 1u : 0u)) return false;
        const double h = (z_.back() - z_.front()) / static_cast<double>(n - 1);
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs((z_[i] - z_[i - 1]) - h) > 1e-9 * h) return false;
        return true;
    }

    void build_second_derivatives(std::size_t n) {
        const double h = (z_.back() - z_.front()) / static_cast<double>(n - 1);
        const auto& d = dz_;
        d2z_.assign(n, 0.0);
        for (std::size_t i = 2; i + 2 < n; ++i)
            d2z_[i] = (-d[i + 2] + 8 * d[i + 1] - 8 * d[i - 1] + d[i - 2]) / (12 * h);
        d2z_[0] = (-25 * d[0] + 48 * d[1] - 36 * d[2] + 16 * d[3] - 3 * d[4]) / (12 * h);
        d2z_[1] = (-3 * d[0] - 10 * d[1] + 18 * d[2] - 6 * d[3] + d[4]) / (12 * h);
        const std::size_t m = n - 1;
        d2z_[m] = (25 * d[m] - 48 * d[m - 1] + 36 * d[m - 2] - 16 * d[m - 3] + 3 * d[m - 4]) / (12 * h);
        d2z_[m - 1] = (3 * d[m] + 10 * d[m - 1] - 18 * d[m - 2] + 6 * d[m - 3] - d[m - 4]) / (12 * h);
    }

    Domain domain_ = Domain::finite;
    double lo_ = 0.0, hi_ = 1.0;
    std::vector<double> x_, v_, raw_;
    Grading grading_{};
    std::vector<double> z_, dz_, d2z_;
};

// Running integral of g sampled at the nodes, each panel to tol; slopes are g itself.
template <class F>
GridFunction cumulative(F&& g, const std::vector<double>& nodes, double tol = 1e-10) {
    if (nodes.size() < 2) throw std::invalid_argument("cumulative: need at least 2 nodes");
    std::vector<double> v(nodes.size(), 0.0), d(nodes.size());
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k)
        v[k + 1] = v[k] + integrate_finite(g, nodes[k], nodes[k + 1], tol).value;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double gk = g(nodes[k]);
        d[k] = std::isfinite(gk) ? gk : std::numeric_limits<double>::quiet_NaN();
    }
    return GridFunction::finite(nodes.front(), nodes.back(), nodes, std::move(v), std::move(d));
}

}  // namespace cylstefan
