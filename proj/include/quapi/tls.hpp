// tls.hpp - symmetric two-level system H_S = (Delta/2) sigma_x, eigenbases, segment propagators

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "quapi/errors.hpp"
#include "quapi/spectral.hpp"

namespace quapi {

using cplx = std::complex<double>;

struct TwoLevelSystem {
    double tunneling{1.0}; // Delta, sets the energy unit

    // eigenvalue of H_S on |sigma_x = sigma>
    double energy(int sigma_x) const { return 0.5 * tunneling * sigma_x; }
};

// sigma = +1 maps to index 0, sigma = -1 to index 1.
constexpr int index_of(int sigma) { return sigma > 0 ? 0 : 1; }
constexpr int sigma_of(int index) { return index == 0 ? 1 : -1; }

// Forward/backward coordinate pair at one time point; packed as 2 * index(plus) + index(minus),
// which is also the row-major position of the matching density-matrix element.
struct SigmaPair {
    int plus{1};
    int minus{1};

    constexpr int code() const { return 2 * index_of(plus) + index_of(minus); }
    static constexpr SigmaPair from_code(int c) { return {sigma_of((c >> 1) & 1), sigma_of(c & 1)}; }
    friend constexpr bool operator==(SigmaPair, SigmaPair) = default;
};

struct EigenBasis {
    Axis axis{Axis::Z};
    Eigen::Matrix2cd vectors; // column k is the eigenvector with eigenvalue sigma_of(k), sigma_z components
};

// |x+-> = (|z+> +- |z->)/sqrt(2), real positive leading components.
inline EigenBasis eigenbasis(Axis axis) {
    EigenBasis b{axis, Eigen::Matrix2cd::Identity()};
    if (axis == Axis::X) {
        const double r = 1.0 / std::numbers::sqrt2;
        b.vectors << r, r, r, -r;
    }
    return b;
}

// <z_a | x_b> for sigma values a, b.
inline double zx_overlap(int z, int x) {
    const double r = 1.0 / std::numbers::sqrt2;
    return (z < 0 && x < 0) ? -r : r;
}

class DensityMatrix {
public:
    DensityMatrix() : m_(Eigen::Matrix2cd::Zero()) {}
    explicit DensityMatrix(const Eigen::Matrix2cd& m) : m_(m) {}

    // |up><up| in the sigma_z basis
    static DensityMatrix spin_up() {
        Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
        m(0, 0) = 1.0;
        return DensityMatrix(m);
    }

    // Pure state from sigma_z-basis amplitudes.
    static DensityMatrix pure(cplx a, cplx b) {
        Eigen::Vector2cd v(a, b);
        v.normalize();
        return DensityMatrix(v * v.adjoint());
    }

    const Eigen::Matrix2cd& matrix() const { return m_; }
    cplx operator()(int row, int col) const { return m_(row, col); }
    cplx& operator()(int row, int col) { return m_(row, col); }
    cplx element(int code) const { return m_(code >> 1, code & 1); }

    cplx trace() const { return m_.trace(); }
    double sigma_z() const { return (m_(0, 0) - m_(1, 1)).real(); }
    double hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

    // Change of basis: sigma_z components to the sigma_x eigenbasis and back.
    DensityMatrix to_x_basis() const {
        const auto v = eigenbasis(Axis::X).vectors;
        return DensityMatrix(v.adjoint() * m_ * v);
    }
    DensityMatrix from_x_basis() const {
        const auto v = eigenbasis(Axis::X).vectors;
        return DensityMatrix(v * m_ * v.adjoint());
    }

    DensityMatrix operator*(double s) const { return DensityMatrix(m_ * s); }

private:
    Eigen::Matrix2cd m_;
};

// |Tr rho|; path filtering shows up as trace leakage.
inline double norm(const DensityMatrix& rho) { return std::abs(rho.trace()); }

// exp(-i H_S dt) in the sigma_z basis.
inline Eigen::Matrix2cd segment_matrix(const TwoLevelSystem& tls, double dt) {
    const double phi = 0.5 * tls.tunneling * dt;
    Eigen::Matrix2cd u;
    u << std::cos(phi), cplx(0.0, -std::sin(phi)), cplx(0.0, -std::sin(phi)), std::cos(phi);
    return u;
}

enum class Direction { Forward, Backward };

// Forward: <to| exp(-i H_S dt) |from>. Backward: the factor the ket-bra's right index picks up,
// conj(<to| exp(-i H_S dt) |from>) = <from| exp(+i H_S dt) |to>.
inline cplx segment_propagator_general(const TwoLevelSystem& tls, double dt, int s_to, int s_from, Direction dir) {
    if (!(dt > 0.0)) throw DomainError("segment propagator needs dt > 0");
    const auto u = segment_matrix(tls, dt);
    const cplx fwd = u(index_of(s_to), index_of(s_from));
    if (dir == Direction::Forward) return fwd;
    return std::conj(fwd);
}

// One time step routed through the sigma_x eigenstates:
// <z_to+|x+> e^{-i e(x+) dt} <x+|z_from+>  *  <z_from-|x-> e^{+i e(x-) dt} <x-|z_to->.
inline cplx segment_propagator_xz(const TwoLevelSystem& tls, double dt, SigmaPair z_to, SigmaPair x_mid, SigmaPair z_from) {
    if (!(dt > 0.0)) throw DomainError("segment propagator needs dt > 0");
    const double mag = zx_overlap(z_to.plus, x_mid.plus) * zx_overlap(z_from.plus, x_mid.plus) *
                       zx_overlap(z_from.minus, x_mid.minus) * zx_overlap(z_to.minus, x_mid.minus);
    const double phase = -(tls.energy(x_mid.plus) - tls.energy(x_mid.minus)) * dt;
    return mag * cplx(std::cos(phase), std::sin(phase));
}

} // namespace quapi
