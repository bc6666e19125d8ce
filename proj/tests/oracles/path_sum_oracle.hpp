// path_sum_oracle.hpp - brute-force enumeration of every discrete path with the whole-path
// influence functional as a direct double sum. Exponential cost, small N only.

#pragma once

#include <complex>
#include <vector>

#include "quapi/eta.hpp"
#include "quapi/tls.hpp"

namespace oracle {

using quapi::cplx;
using quapi::DensityMatrix;
using quapi::EtaTable;
using quapi::SigmaPair;

// ln I = -sum_{j >= j'} (s+_j - s-_j)(eta_jj' s+_j' - conj(eta_jj') s-_j'), general bath at horizon n.
inline cplx log_influence(const std::vector<SigmaPair>& p, const EtaTable& t, int horizon, bool dephasing) {
    cplx s{};
    const int last = static_cast<int>(p.size()) - 1;
    for (int j = 0; j <= last; ++j)
        for (int jp = 0; jp <= j; ++jp) {
            const cplx e = dephasing ? t(j, jp) : t.at(j, jp, horizon);
            s -= double(p[j].plus - p[j].minus) * (e * double(p[jp].plus) - std::conj(e) * double(p[jp].minus));
        }
    return s;
}

inline std::vector<SigmaPair> decode(long long idx, int count) {
    std::vector<SigmaPair> out(count);
    for (int i = 0; i < count; ++i, idx >>= 2) out[i] = SigmaPair::from_code(int(idx & 3));
    return out;
}

// rho(n dt) with a single sigma_z-coupled bath.
inline DensityMatrix single_general(const EtaTable& t, const quapi::TwoLevelSystem& tls, double dt,
                                    const DensityMatrix& rho0, int n) {
    using quapi::Direction;
    DensityMatrix out;
    const long long total = 1LL << (2 * (n + 1));
    for (long long idx = 0; idx < total; ++idx) {
        const auto p = decode(idx, n + 1);
        cplx a = rho0.element(p[0].code());
        if (a == cplx{}) continue;
        for (int k = 1; k <= n; ++k)
            a *= quapi::segment_propagator_general(tls, dt, p[k].plus, p[k - 1].plus, Direction::Forward) *
                 quapi::segment_propagator_general(tls, dt, p[k].minus, p[k - 1].minus, Direction::Backward);
        a *= std::exp(log_influence(p, t, n, false));
        const int c = p[n].code();
        out(c >> 1, c & 1) += a;
    }
    return out;
}

// rho(n dt) with both baths; x_k lives on the segment (k, k + 1).
inline DensityMatrix two_baths(const EtaTable& tx, const EtaTable& tz, const quapi::TwoLevelSystem& tls, double dt,
                               const DensityMatrix& rho0, int n) {
    DensityMatrix out;
    const long long total = 1LL << (2 * (2 * n + 1));
    for (long long idx = 0; idx < total; ++idx) {
        const auto z = decode(idx, n + 1);
        const auto x = decode(idx >> (2 * (n + 1)), n);
        cplx a = rho0.element(z[0].code());
        if (a == cplx{}) continue;
        for (int k = 1; k <= n; ++k) a *= quapi::segment_propagator_xz(tls, dt, z[k], x[k - 1], z[k - 1]);
        if (a == cplx{}) continue;
        a *= std::exp(log_influence(z, tz, n, false) + log_influence(x, tx, 0, true));
        const int c = z[n].code();
        out(c >> 1, c & 1) += a;
    }
    return out;
}

} // namespace oracle
