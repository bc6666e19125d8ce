// analytic.hpp - closed-form pure dephasing dynamics, exact and with a sharp memory cut-off

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "quapi/errors.hpp"
#include "quapi/eta.hpp"
#include "quapi/spectral.hpp"
#include "quapi/tls.hpp"

namespace quapi {

struct DephasingSolution {
    std::vector<double> times;
    std::vector<DensityMatrix> rho; // sigma_z basis
};

// Frequency renormalization factor exp(-i (s+^2 - s-^2) Im L); identically 1 for Pauli eigenvalues.
inline cplx renormalization_factor(int s_plus, int s_minus, cplx l) {
    const double e = static_cast<double>(s_plus * s_plus - s_minus * s_minus) * l.imag();
    return {std::cos(e), -std::sin(e)};
}

// Applies pure dephasing to rho0 (sigma_z basis) for time t given the integrated correlation L.
// In the sigma_x eigenbasis element (a, b) acquires
// exp(-i (e_a - e_b) t) exp(-(s_a - s_b)^2 Re L) exp(-i (s_a^2 - s_b^2) Im L).
inline DensityMatrix dephase(const TwoLevelSystem& tls, const DensityMatrix& rho0, double t, cplx l) {
    DensityMatrix rx = rho0.to_x_basis();
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const int sa = sigma_of(a), sb = sigma_of(b);
            const double phase = -(tls.energy(sa) - tls.energy(sb)) * t;
            const double diff = static_cast<double>(sa - sb);
            rx(a, b) *= cplx(std::cos(phase), std::sin(phase)) * std::exp(-diff * diff * l.real()) *
                        renormalization_factor(sa, sb, l);
        }
    }
    return rx.from_x_basis();
}

inline DensityMatrix analytic_dephasing(const BathSpec& bath, const TwoLevelSystem& tls, const DensityMatrix& rho0, double t,
                                        LMode mode, double dt = 0.0) {
    if (bath.axis != Axis::X) throw DomainError("analytic dephasing needs a sigma_x-coupled bath");
    if (t < 0.0) throw DomainError("analytic dephasing requires t >= 0");
    return dephase(tls, rho0, t, l_of_t(bath, t, mode, dt).value);
}

// Grid solution from a (possibly truncated) dephasing-bath table, using the discrete L at each point.
inline DephasingSolution analytic_dephasing_trajectory(const EtaTable& table, const TwoLevelSystem& tls,
                                                       const DensityMatrix& rho0) {
    if (table.axis() != Axis::X) throw DomainError("analytic dephasing needs a sigma_x-coupled table");
    const auto l = discrete_l_series(table);
    DephasingSolution out;
    for (int n = 0; n <= table.n_steps(); ++n) {
        const double t = n * table.dt();
        out.times.push_back(t);
        out.rho.push_back(dephase(tls, rho0, t, l[static_cast<std::size_t>(n)]));
    }
    return out;
}

// Memory-truncated closed form, valid for t >= t_mem: L(t) = L(t_mem) + Ldot(t_mem) (t - t_mem).
// DiscreteSum evaluates both terms from the truncated table (exact image of the engine's sum);
// ContinuousQuadrature uses the double integral and Int_0^t_mem C.
inline DensityMatrix analytic_truncated_dephasing(const BathSpec& bath, const TwoLevelSystem& tls, const DensityMatrix& rho0,
                                                  double t, double t_mem, LMode mode = LMode::DiscreteSum, double dt = 0.0) {
    if (bath.axis != Axis::X) throw DomainError("analytic dephasing needs a sigma_x-coupled bath");
    if (!(t_mem > 0.0)) throw DomainError("memory time must be positive");
    if (t < t_mem) throw DomainError("truncated closed form requires t >= t_mem");
    if (mode == LMode::ContinuousQuadrature) {
        const auto d = l_of_t(bath, t_mem, LMode::ContinuousQuadrature);
        return dephase(tls, rho0, t, d.value + d.derivative * (t - t_mem));
    }
    if (!(dt > 0.0)) throw DomainError("discrete mode requires a positive time step");
    const int n_mem = memory_steps(t_mem, dt);
    const auto table = truncate_eta(EtaTable::build(bath, dt, n_mem + 1), t_mem);
    const double t_cut = n_mem * dt;
    return dephase(tls, rho0, t, discrete_l(table, n_mem) + discrete_l_rate(table) * (t - t_cut));
}

// Rate -(s+ - s-)^2 Re Ldot of log|rho_x01| past the memory horizon for the dephasing bath.
inline double spurious_decay_slope(cplx l_rate) { return -4.0 * l_rate.real(); }

} // namespace quapi
