// quadrature.hpp - adaptive composite Gauss-Legendre integration on a finite interval

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "quapi/errors.hpp"

namespace quapi::quad {

struct Options {
    double rel_tol{1e-10};
    // Absolute floor, expressed relative to the L1 norm of the integrand.
    double abs_floor{1e-15};
    std::size_t initial_panels{64};
    std::size_t max_panels{1u << 18};
};

namespace detail {

using Rule = boost::math::quadrature::gauss<double, 20>;

// Visits every node of a composite 20-point rule with `panels` equal panels on [a, b].
// Nodes never coincide with panel boundaries.
template <typename Visit>
void for_each_node(double a, double b, std::size_t panels, Visit&& visit) {
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    const double h = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = a + (static_cast<double>(p) + 0.5) * h;
        const double half = 0.5 * h;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double wi = w[i] * half;
            visit(mid - half * x[i], wi);
            if (x[i] != 0.0) visit(mid + half * x[i], wi);
        }
    }
}

} // namespace detail

// Integrates a complex-valued f over [a, b], doubling the panel count until two
// successive estimates agree to opts.rel_tol.
template <typename F>
std::complex<double> integrate(F&& f, double a, double b, const Options& opts = {}) {
    std::complex<double> prev{};
    double achieved = 1.0;
    for (std::size_t panels = opts.initial_panels; panels <= opts.max_panels; panels *= 2) {
        std::complex<double> sum{};
        double l1 = 0.0;
        detail::for_each_node(a, b, panels, [&](double x, double w) {
            const std::complex<double> v = f(x);
            sum += w * v;
            l1 += w * std::abs(v);
        });
        if (panels > opts.initial_panels) {
            const double diff = std::abs(sum - prev);
            const double scale = std::abs(sum);
            achieved = scale > 0.0 ? diff / scale : diff;
            if (diff <= opts.rel_tol * scale + opts.abs_floor * l1) return sum;
        }
        prev = sum;
    }
    throw NumericalError("quadrature did not converge", achieved);
}

// Integrates a family of integrands f_k(x) = base(x) * phase(x)^k, k = 0..count-1, on a
// shared node set. `term(x)` returns the pair {base(x), phase(x)}. All members must
// converge before the panel doubling stops.
template <typename F>
std::vector<std::complex<double>> integrate_power_family(F&& term, std::size_t count, double a, double b,
                                                         const Options& opts = {}) {
    std::vector<std::complex<double>> prev(count), sum(count);
    double achieved = 1.0;
    for (std::size_t panels = opts.initial_panels; panels <= opts.max_panels; panels *= 2) {
        std::fill(sum.begin(), sum.end(), std::complex<double>{});
        double l1 = 0.0;
        detail::for_each_node(a, b, panels, [&](double x, double w) {
            const auto [base, phase] = term(x);
            std::complex<double> v = w * base;
            l1 += std::abs(v);
            for (std::size_t k = 0; k < count; ++k) {
                sum[k] += v;
                v *= phase;
            }
        });
        if (panels > opts.initial_panels) {
            bool done = true;
            achieved = 0.0;
            for (std::size_t k = 0; k < count; ++k) {
                const double diff = std::abs(sum[k] - prev[k]);
                const double scale = std::abs(sum[k]);
                if (diff > opts.rel_tol * scale + opts.abs_floor * l1) done = false;
                achieved = std::max(achieved, scale > 0.0 ? diff / scale : diff);
            }
            if (done) return sum;
        }
        std::swap(prev, sum);
    }
    throw NumericalError("quadrature family did not converge", achieved);
}

} // namespace quapi::quad
