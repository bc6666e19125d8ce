// spectral.hpp - Ohmic-family spectral densities and the bath correlation function

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "quapi/errors.hpp"
#include "quapi/quadrature.hpp"

namespace quapi {

enum class Axis { X, Z };

inline const char* to_string(Axis a) { return a == Axis::X ? "x" : "z"; }

// J(w) = coupling * cutoff * (w / cutoff)^ohmicity * exp(-w / cutoff); ohmicity 1 is the Ohmic case.
struct SpectralDensity {
    double coupling{0.0};
    double cutoff{10.0};
    double ohmicity{1.0};
};

struct BathSpec {
    SpectralDensity spectral{};
    double beta{5.0}; // inverse temperature, units of 1/Delta
    Axis axis{Axis::Z};
};

inline void validate(const BathSpec& bath) {
    if (!(bath.beta > 0.0) || !std::isfinite(bath.beta))
        throw DomainError("bath inverse temperature must be finite and positive");
    if (!(bath.spectral.cutoff > 0.0)) throw DomainError("spectral cutoff must be positive");
    if (!(bath.spectral.ohmicity > 0.0)) throw DomainError("ohmicity must be positive");
}

inline double spectral_density(const SpectralDensity& sd, double omega) {
    if (omega < 0.0) throw DomainError("spectral density evaluated at negative frequency");
    if (sd.coupling == 0.0 || omega == 0.0) return 0.0;
    const double x = omega / sd.cutoff;
    return sd.coupling * sd.cutoff * std::pow(x, sd.ohmicity) * std::exp(-x);
}

namespace detail {

// J(|w|) / |w|, the even part left after the odd extension J(-w) = -J(w) is divided by w.
inline double density_over_omega(const SpectralDensity& sd, double omega) {
    const double x = std::abs(omega) / sd.cutoff;
    if (sd.ohmicity == 1.0) return sd.coupling * std::exp(-x);
    return sd.coupling * std::pow(x, sd.ohmicity - 1.0) * std::exp(-x);
}

// w / (1 - exp(-beta w)), smooth through w = 0.
inline double thermal_ratio(double beta, double omega, double cutoff) {
    if (std::abs(omega) < 1e-6 * cutoff) {
        const double bw = beta * omega;
        return (1.0 + 0.5 * bw + bw * bw / 12.0) / beta;
    }
    return omega / (-std::expm1(-beta * omega));
}

} // namespace detail

// K(w) = J(w) e^{beta w/2} / sinh(beta w/2) with J extended oddly to w < 0.
inline double thermal_kernel(const BathSpec& bath, double omega) {
    return 2.0 * detail::density_over_omega(bath.spectral, omega) *
           detail::thermal_ratio(bath.beta, omega, bath.spectral.cutoff);
}

// Frequency window [-Omega, Omega] outside which the kernel is negligible.
inline double frequency_window(const BathSpec& bath) {
    return std::max(40.0 * bath.spectral.cutoff, 40.0 / bath.beta);
}

inline double sinc(double x) {
    if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

// C(t) = (1/2pi) Int K(w) e^{-i w t} dw.
inline std::complex<double> correlation_function(const BathSpec& bath, double t, const quad::Options& opts = {}) {
    validate(bath);
    if (bath.spectral.coupling == 0.0) return {};
    const double W = frequency_window(bath);
    const auto f = [&](double w) {
        return thermal_kernel(bath, w) * std::complex<double>(std::cos(w * t), -std::sin(w * t));
    };
    return quad::integrate(f, -W, W, opts) / (2.0 * std::numbers::pi);
}

} // namespace quapi
