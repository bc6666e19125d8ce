// influence.hpp - incremental influence-functional weights

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>

#include "quapi/errors.hpp"
#include "quapi/eta.hpp"
#include "quapi/tls.hpp"

namespace quapi {

// D = sum over lags d >= 1 of eta_row(d) s+_{j-d} - conj(eta_row(d)) s-_{j-d}.
// pair_at(d) returns the coordinate pair d steps back.
template <typename PairAt>
cplx history_sum(const EtaTable& table, int j, bool terminal, int max_lag, PairAt&& pair_at) {
    cplx d_sum{};
    for (int d = 1; d <= max_lag; ++d) {
        const cplx e = table.row(j, d, terminal);
        const SigmaPair p = pair_at(d);
        d_sum += e * static_cast<double>(p.plus) - std::conj(e) * static_cast<double>(p.minus);
    }
    return d_sum;
}

// exp(-(s+ - s-) (eta0 s+ - conj(eta0) s- + D)) for the new pair.
inline cplx increment_weight(SigmaPair now, cplx eta0, cplx d_sum) {
    const double diff = static_cast<double>(now.plus - now.minus);
    if (diff == 0.0) return 1.0;
    return std::exp(-diff * (eta0 * static_cast<double>(now.plus) - std::conj(eta0) * static_cast<double>(now.minus) + d_sum));
}

// Largest lag that couples row j: j itself when memory is extended, else the table's horizon.
inline int coupling_reach(const EtaTable& table, int j, bool extended) {
    return extended ? j : std::min(j, table.mem_steps());
}

// Weight contributed by the newest coordinate pair. `history` covers coordinate indexes
// j - size + 1 .. j, oldest first, so history.back() is the pair at index j. `terminal`
// selects the end-row coefficients of the general bath.
inline cplx influence_weight(std::span<const SigmaPair> history, const EtaTable& table, int j, bool extended,
                             bool terminal = false) {
    if (history.empty()) throw DomainError("influence weight needs at least the current pair");
    if (j < 0) throw DomainError("negative coordinate index");
    const int reach = coupling_reach(table, j, extended);
    if (static_cast<int>(history.size()) < reach + 1) throw DomainError("history shorter than the memory reach");
    const std::size_t last = history.size() - 1;
    const cplx d_sum = history_sum(table, j, terminal, reach, [&](int d) { return history[last - static_cast<std::size_t>(d)]; });
    return increment_weight(history.back(), table.row(j, 0, terminal), d_sum);
}

} // namespace quapi
