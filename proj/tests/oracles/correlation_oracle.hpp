// correlation_oracle.hpp - Ohmic bath correlation from its imaginary-time pole series, and
// eta coefficients as time-domain integrals of that series (no frequency integrals involved).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

struct Ohmic {
    double gamma, cutoff, beta;
};

// C(t) = (gamma/pi) [ sum_{n>=0} (a_n + i t)^-2 + sum_{n>=1} (a_n - i t)^-2 ],  a_n = 1/cutoff + n beta.
// Explicit terms up to n = M, Euler-Maclaurin for the tail.
inline cplx correlation(const Ohmic& b, double t, int explicit_terms = 4000) {
    const cplx it(0.0, t);
    const auto a = [&](int n) { return 1.0 / b.cutoff + n * b.beta; };
    cplx s = 1.0 / ((a(0) + it) * (a(0) + it));
    for (int n = 1; n < explicit_terms; ++n) {
        const cplx p = a(n) + it, m = a(n) - it;
        s += 1.0 / (p * p) + 1.0 / (m * m);
    }
    const int M = explicit_terms;
    for (const cplx z : {a(M) + it, a(M) - it}) s += 1.0 / (b.beta * z) + 0.5 / (z * z) + b.beta / (6.0 * z * z * z);
    return b.gamma / std::numbers::pi * s;
}

// 10-point Gauss-Legendre on [-1, 1].
inline const std::array<std::pair<double, double>, 10>& gl10() {
    static const std::array<std::pair<double, double>, 10> r = {{
        {-0.9739065285171717, 0.0666713443086881}, {-0.8650633666889845, 0.1494513491505806},
        {-0.6794095682990244, 0.2190863625159820}, {-0.4333953941292472, 0.2692667193099963},
        {-0.1488743389816312, 0.2955242247147529}, {0.1488743389816312, 0.2955242247147529},
        {0.4333953941292472, 0.2692667193099963},  {0.6794095682990244, 0.2190863625159820},
        {0.8650633666889845, 0.1494513491505806},  {0.9739065285171717, 0.0666713443086881},
    }};
    return r;
}

// Int_{a1}^{a2} dt' Int_{b1}^{b2} dt'' C(t' - t''), restricted to t'' <= t' when `ordered`.
// Reduced to Int du C(u) w(u) with the piecewise-linear overlap length w.
inline cplx cell_integral(const Ohmic& b, double a1, double a2, double b1, double b2, bool ordered, int panels = 64) {
    const auto w = [&](double u) {
        double lo = std::max(a1, b1 + u), hi = std::min(a2, b2 + u);
        return std::max(0.0, hi - lo);
    };
    std::vector<double> br = {a1 - b2, a1 - b1, a2 - b2, a2 - b1};
    if (ordered) br.push_back(0.0);
    std::sort(br.begin(), br.end());
    cplx total{};
    for (std::size_t s = 0; s + 1 < br.size(); ++s) {
        double lo = br[s], hi = br[s + 1];
        if (ordered) lo = std::max(lo, 0.0);
        if (hi <= lo) continue;
        const double h = (hi - lo) / panels;
        for (int p = 0; p < panels; ++p) {
            const double c = lo + (p + 0.5) * h;
            for (auto [x, wt] : gl10()) {
                const double u = c + 0.5 * h * x;
                total += 0.5 * h * wt * w(u) * correlation(b, u, 400);
            }
        }
    }
    return total;
}

// General-bath eta_{j j'} at horizon n: coordinate k owns [k - 1/2, k + 1/2] dt clipped to [0, n dt].
inline cplx eta_general(const Ohmic& b, int j, int jp, int n, double dt) {
    const auto lo = [&](int k) { return std::max(0.0, (k - 0.5) * dt); };
    const auto hi = [&](int k) { return std::min(n * dt, (k + 0.5) * dt); };
    return cell_integral(b, lo(j), hi(j), lo(jp), hi(jp), j == jp);
}

// Dephasing-bath eta_{j j'}: coordinate k owns [k, k + 1] dt.
inline cplx eta_dephasing(const Ohmic& b, int j, int jp, double dt) {
    return cell_integral(b, j * dt, (j + 1) * dt, jp * dt, (jp + 1) * dt, j == jp);
}

} // namespace oracle
