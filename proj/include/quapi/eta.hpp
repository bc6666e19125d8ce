// eta.hpp - influence coefficients for the general (sigma_z) and pure dephasing (sigma_x) baths
//
// Z-bath cells follow the QUAPI half-step convention: [0, dt/2], [(j-1/2)dt, (j+1/2)dt], ...,
// [(N-1/2)dt, N dt]. X-bath cells are the full intervals [j dt, (j+1) dt], j = 0..N-1.
// Every coefficient is the double time integral of C(tau - s) over its cell pair, evaluated
// in the frequency domain.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "quapi/errors.hpp"
#include "quapi/quadrature.hpp"
#include "quapi/spectral.hpp"

namespace quapi {

using cplx = std::complex<double>;

enum class EtaCase {
    // general bath, 0 <= j' <= j <= N
    Interior,          // 0 < j' < j < N
    DiagonalInterior,  // 0 < j' = j < N
    DiagonalStart,     // j' = j = 0
    DiagonalEnd,       // j' = j = N
    FromStart,         // 0 = j' < j < N
    ToEnd,             // 0 < j' < j = N
    StartToEnd,        // 0 = j' < j = N
    // dephasing bath, 0 <= j' <= j
    DephasingOffDiagonal,
    DephasingDiagonal,
};

inline EtaCase classify_general(int j, int jp, int n) {
    if (n < 1 || jp < 0 || jp > j || j > n) throw DomainError("general-bath eta index outside 0 <= j' <= j <= N");
    if (jp == j) {
        if (j == 0) return EtaCase::DiagonalStart;
        if (j == n) return EtaCase::DiagonalEnd;
        return EtaCase::DiagonalInterior;
    }
    if (j == n) return jp == 0 ? EtaCase::StartToEnd : EtaCase::ToEnd;
    return jp == 0 ? EtaCase::FromStart : EtaCase::Interior;
}

inline EtaCase classify_dephasing(int j, int jp) {
    if (jp < 0 || jp > j) throw DomainError("dephasing-bath eta index outside 0 <= j' <= j");
    return jp == j ? EtaCase::DephasingDiagonal : EtaCase::DephasingOffDiagonal;
}

namespace detail {

// (1 - e^{-ix} - ix) / x^2
inline cplx triangle_factor(double x) {
    const double re = 0.5 * sinc(0.5 * x) * sinc(0.5 * x);
    double im;
    if (std::abs(x) < 0.1) {
        const double x2 = x * x;
        im = -x / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
    } else {
        im = (std::sin(x) - x) / (x * x);
    }
    return {re, im};
}

inline cplx expi(double phi) { return {std::cos(phi), std::sin(phi)}; }

// Integrand of the requested case at frequency w for a given lag (j - j').
inline cplx case_integrand(const BathSpec& bath, EtaCase c, int lag, double dt, double w) {
    const double k = thermal_kernel(bath, w);
    const double q = w * dt;
    switch (c) {
    case EtaCase::Interior:
    case EtaCase::DephasingOffDiagonal: {
        const double s = 0.5 * dt * sinc(0.5 * q);
        return (4.0 * k * s * s) * expi(-q * lag);
    }
    case EtaCase::FromStart:
    case EtaCase::ToEnd: {
        const double s = 0.25 * dt * sinc(0.25 * q) * 0.5 * dt * sinc(0.5 * q);
        return (4.0 * k * s) * expi(-q * (lag - 0.25));
    }
    case EtaCase::StartToEnd: {
        const double s = 0.25 * dt * sinc(0.25 * q);
        return (4.0 * k * s * s) * expi(-q * (lag - 0.5));
    }
    case EtaCase::DiagonalInterior:
    case EtaCase::DephasingDiagonal:
        return k * dt * dt * triangle_factor(q);
    case EtaCase::DiagonalStart:
    case EtaCase::DiagonalEnd:
        return k * 0.25 * dt * dt * triangle_factor(0.5 * q);
    }
    return {};
}

inline cplx integrate_case(const BathSpec& bath, EtaCase c, int lag, double dt) {
    if (bath.spectral.coupling == 0.0) return {};
    const double W = frequency_window(bath);
    return quad::integrate([&](double w) { return case_integrand(bath, c, lag, dt, w); }, -W, W) /
           (2.0 * std::numbers::pi);
}

// Lags 0..count-1 of one lag-translated family, base(w) * e^{-i w dt lag}.
template <typename Base>
std::vector<cplx> integrate_family(const BathSpec& bath, double dt, int count, Base&& base) {
    if (bath.spectral.coupling == 0.0) return std::vector<cplx>(static_cast<std::size_t>(count));
    const double W = frequency_window(bath);
    auto v = quad::integrate_power_family(
        [&](double w) { return std::pair<cplx, cplx>{base(w), expi(-w * dt)}; }, static_cast<std::size_t>(count), -W, W);
    for (auto& x : v) x /= 2.0 * std::numbers::pi;
    return v;
}

} // namespace detail

// eta for the general bath, single coefficient.
inline cplx eta_general(const BathSpec& bath, int j, int jp, int n, double dt) {
    validate(bath);
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    return detail::integrate_case(bath, classify_general(j, jp, n), j - jp, dt);
}

// eta for the pure dephasing bath, single coefficient.
inline cplx eta_dephasing(const BathSpec& bath, int j, int jp, double dt) {
    validate(bath);
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    return detail::integrate_case(bath, classify_dephasing(j, jp), j - jp, dt);
}

// Precomputed influence coefficients for one bath and grid. Interior coefficients depend
// only on the lag, so storage is O(N). Entries with lag > mem_steps() read as zero.
class EtaTable {
public:
    EtaTable() = default;

    static EtaTable build(const BathSpec& bath, double dt, int n_steps) {
        validate(bath);
        if (!(dt > 0.0)) throw DomainError("time step must be positive");
        if (n_steps < 1) throw DomainError("eta table needs at least one step");
        EtaTable t;
        t.axis_ = bath.axis;
        t.n_steps_ = n_steps;
        t.dt_ = dt;
        t.mem_steps_ = n_steps;
        const int count = n_steps + 1;
        t.full_ = detail::integrate_family(bath, dt, count, [&](double w) {
            const double s = 0.5 * dt * sinc(0.5 * w * dt);
            return cplx(4.0 * thermal_kernel(bath, w) * s * s);
        });
        t.diag_full_ = detail::integrate_case(bath, EtaCase::DiagonalInterior, 0, dt);
        if (bath.axis == Axis::Z) {
            t.half_ = detail::integrate_family(bath, dt, count, [&](double w) {
                const double s = 0.25 * dt * sinc(0.25 * w * dt) * 0.5 * dt * sinc(0.5 * w * dt);
                return 4.0 * thermal_kernel(bath, w) * s * detail::expi(0.25 * w * dt);
            });
            t.quarter_ = detail::integrate_family(bath, dt, count, [&](double w) {
                const double s = 0.25 * dt * sinc(0.25 * w * dt);
                return 4.0 * thermal_kernel(bath, w) * s * s * detail::expi(0.5 * w * dt);
            });
            t.diag_half_ = detail::integrate_case(bath, EtaCase::DiagonalStart, 0, dt);
        }
        return t;
    }

    Axis axis() const noexcept { return axis_; }
    int n_steps() const noexcept { return n_steps_; }
    double dt() const noexcept { return dt_; }
    int mem_steps() const noexcept { return mem_steps_; }
    double t_mem() const noexcept { return mem_steps_ * dt_; }

    // eta_{j j'} with case selection at horizon N = n_steps().
    cplx operator()(int j, int jp) const { return at(j, jp, n_steps_); }

    // eta_{j j'} with case selection at an arbitrary horizon <= n_steps() (general bath);
    // the horizon is ignored for the dephasing bath.
    cplx at(int j, int jp, int horizon) const {
        if (axis_ == Axis::Z) {
            if (horizon > n_steps_) throw DomainError("eta horizon beyond table");
            return coefficient(classify_general(j, jp, horizon), j - jp);
        }
        if (j > n_steps_ - 1) throw DomainError("dephasing-bath eta index beyond N-1");
        return coefficient(classify_dephasing(j, jp), j - jp);
    }

    // Coefficient for a case at a given lag, honoring truncation.
    cplx coefficient(EtaCase c, int lag) const {
        if (lag < 0 || lag > n_steps_) throw DomainError("eta lag outside table");
        if (lag > mem_steps_) return {};
        switch (c) {
        case EtaCase::Interior:
        case EtaCase::DephasingOffDiagonal: return full_.at(static_cast<std::size_t>(lag));
        case EtaCase::FromStart:
        case EtaCase::ToEnd: return half_.at(static_cast<std::size_t>(lag));
        case EtaCase::StartToEnd: return quarter_.at(static_cast<std::size_t>(lag));
        case EtaCase::DiagonalInterior:
        case EtaCase::DephasingDiagonal: return diag_full_;
        case EtaCase::DiagonalStart:
        case EtaCase::DiagonalEnd: return diag_half_;
        }
        return {};
    }

    // Coefficient coupling coordinate index j to j - lag in the row for j. For the general
    // bath a terminal row uses the j = N (half cell) forms.
    cplx row(int j, int lag, bool terminal) const {
        if (axis_ == Axis::X) return coefficient(lag == 0 ? EtaCase::DephasingDiagonal : EtaCase::DephasingOffDiagonal, lag);
        const int jp = j - lag;
        if (lag == 0) {
            if (j == 0) return coefficient(EtaCase::DiagonalStart, 0);
            return coefficient(terminal ? EtaCase::DiagonalEnd : EtaCase::DiagonalInterior, 0);
        }
        if (terminal) return coefficient(jp == 0 ? EtaCase::StartToEnd : EtaCase::ToEnd, lag);
        return coefficient(jp == 0 ? EtaCase::FromStart : EtaCase::Interior, lag);
    }

    friend EtaTable truncate_eta(const EtaTable& table, double t_mem);
    friend bool operator==(const EtaTable&, const EtaTable&) = default;

private:
    Axis axis_{Axis::Z};
    int n_steps_{0};
    double dt_{0.0};
    int mem_steps_{0};
    std::vector<cplx> full_, half_, quarter_;
    cplx diag_full_{}, diag_half_{};
};

// Number of whole steps in t_mem, robust to representation error of t_mem / dt.
inline int memory_steps(double t_mem, double dt) {
    return static_cast<int>(std::floor(t_mem / dt * (1.0 + 1e-12) + 1e-9));
}

// Copy of `table` with every coefficient at lag * dt > t_mem set to zero.
inline EtaTable truncate_eta(const EtaTable& table, double t_mem) {
    if (!(t_mem > 0.0)) throw DomainError("memory time must be positive");
    EtaTable out = table;
    out.mem_steps_ = std::min(table.mem_steps_, memory_steps(t_mem, table.dt_));
    const auto zero_tail = [&](std::vector<cplx>& v) {
        for (std::size_t d = static_cast<std::size_t>(out.mem_steps_) + 1; d < v.size(); ++d) v[d] = {};
    };
    zero_tail(out.full_);
    zero_tail(out.half_);
    zero_tail(out.quarter_);
    return out;
}

enum class LMode { DiscreteSum, ContinuousQuadrature };

struct LDiagnostic {
    double t{0.0};
    cplx value{};
    cplx derivative{};
};

// L(n dt) as the double sum of the table's coefficients (honoring truncation).
// General bath: rows 0..n with case selection at horizon n. Dephasing bath: rows 0..n-1.
inline cplx discrete_l(const EtaTable& table, int n) {
    if (n < 0 || n > table.n_steps()) throw DomainError("discrete L index outside table");
    if (n == 0) return {};
    cplx sum{};
    const int last = table.axis() == Axis::Z ? n : n - 1;
    for (int j = 0; j <= last; ++j)
        for (int jp = std::max(0, j - table.mem_steps()); jp <= j; ++jp) sum += table.at(j, jp, n);
    return sum;
}

// Discrete L at every grid point 0..n_steps of the table.
inline std::vector<cplx> discrete_l_series(const EtaTable& table) {
    std::vector<cplx> out(static_cast<std::size_t>(table.n_steps()) + 1);
    if (table.axis() == Axis::X) {
        // rows are horizon-independent: accumulate row sums
        cplx acc{};
        for (int j = 0; j < table.n_steps(); ++j) {
            for (int d = 0; d <= std::min(j, table.mem_steps()); ++d) acc += table.row(j, d, false);
            out[static_cast<std::size_t>(j) + 1] = acc;
        }
        return out;
    }
    for (int n = 1; n <= table.n_steps(); ++n) out[static_cast<std::size_t>(n)] = discrete_l(table, n);
    return out;
}

// Dephasing-bath rate of the truncated table: the full row sum divided by dt. For rows past the
// memory horizon L grows linearly at exactly this rate.
inline cplx discrete_l_rate(const EtaTable& table) {
    cplx row{};
    for (int d = 0; d <= std::min(table.mem_steps(), table.n_steps() - 1); ++d) row += table.row(table.n_steps() - 1, d, false);
    return row / table.dt();
}

// L(t) = Int_0^t dt' Int_0^t' C(t' - t'') and its derivative Int_0^t C.
inline LDiagnostic l_of_t(const BathSpec& bath, double t, LMode mode, double dt = 0.0) {
    validate(bath);
    if (t < 0.0) throw DomainError("L(t) requires t >= 0");
    LDiagnostic out{t, {}, {}};
    if (t == 0.0 || bath.spectral.coupling == 0.0) return out;
    if (mode == LMode::DiscreteSum) {
        if (!(dt > 0.0)) throw DomainError("discrete L requires a positive time step");
        const double steps = t / dt;
        const int n = static_cast<int>(std::lround(steps));
        if (std::abs(steps - n) > 1e-9 * std::max(1.0, steps)) throw DomainError("discrete L requires t to be a multiple of dt");
        const auto table = EtaTable::build(bath, dt, n);
        out.value = discrete_l(table, n);
        out.derivative = (out.value - discrete_l(table, n - 1)) / dt;
        return out;
    }
    const double W = frequency_window(bath);
    const double two_pi = 2.0 * std::numbers::pi;
    out.value = quad::integrate([&](double w) { return thermal_kernel(bath, w) * t * t * detail::triangle_factor(w * t); }, -W, W) / two_pi;
    out.derivative = quad::integrate([&](double w) {
                         const double k = thermal_kernel(bath, w);
                         const double s = sinc(0.5 * w * t);
                         return cplx(k * t * sinc(w * t), -k * 0.5 * w * t * t * s * s);
                     }, -W, W) / two_pi;
    return out;
}

} // namespace quapi
