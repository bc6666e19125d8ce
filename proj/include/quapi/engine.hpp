// engine.hpp - iterative path-sum propagation with memory cut-off, masks and filtering

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <iterator>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "quapi/ensemble.hpp"
#include "quapi/errors.hpp"
#include "quapi/eta.hpp"
#include "quapi/influence.hpp"
#include "quapi/mask.hpp"
#include "quapi/path_key.hpp"
#include "quapi/spectral.hpp"
#include "quapi/tls.hpp"

namespace quapi {

struct EngineConfig {
    double dt{0.3};
    int n_steps{0};
    std::optional<double> t_mem_x, t_mem_z; // unset: memory spans the whole propagation
    std::optional<Mask> mask_x, mask_z;     // unset: every point of the memory window
    double theta{0.0};
    double drop_fraction{0.0};
    bool extended_memory{false};
    DensityMatrix initial_state = DensityMatrix::spin_up();
    unsigned workers{1};
    std::size_t max_paths{std::size_t{1} << 26};
};

struct StepStats {
    int step{0};
    std::size_t n_paths{0};   // merged keys after filtering; a mirrored pair sharing one key counts once
    std::size_t n_spawned{0}; // nonzero children before merging
    std::size_t n_merged{0};  // distinct keys after merging
    std::size_t n_dropped{0}; // removed by the threshold or quantile filter
    std::size_t mem_bytes{0};
    double min_abs{0.0}, max_abs{0.0}; // over merged nonzero amplitudes
};

struct RunStats {
    std::vector<StepStats> steps;
    double seconds{0.0};

    std::size_t total_paths() const {
        std::size_t s = 0;
        for (const auto& x : steps) s += x.n_paths;
        return s;
    }
    std::size_t peak_paths() const {
        std::size_t s = 0;
        for (const auto& x : steps) s = std::max(s, x.n_paths);
        return s;
    }
    std::size_t peak_mem() const {
        std::size_t s = 0;
        for (const auto& x : steps) s = std::max(s, x.mem_bytes);
        return s;
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> rho; // sigma_z basis
    RunStats stats;
};

// Mean path count of `run` relative to `reference`, step by step summed.
inline double path_fraction(const RunStats& run, const RunStats& reference) {
    const auto den = reference.total_paths();
    if (den == 0) throw DomainError("reference run has no paths");
    return static_cast<double>(run.total_paths()) / static_cast<double>(den);
}

namespace detail {

enum class Layout { Z, X, XZ };

struct BathSetup {
    EtaTable table;
    int window{0}; // stored points (memory steps, or n_steps + 1 when extended)
    Mask mask;
};

struct Plan {
    Layout layout{Layout::Z};
    EngineConfig cfg;
    std::optional<BathSetup> z, x;
    std::size_t window{0};
    KeyLayout keys;
};

inline void validate_config(const EngineConfig& c) {
    if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
    if (c.n_steps < 1) throw ConfigError("n_steps must be >= 1");
    if (!(c.theta >= 0.0)) throw ConfigError("theta must be >= 0");
    if (!(c.drop_fraction >= 0.0 && c.drop_fraction < 1.0)) throw ConfigError("drop_fraction must lie in [0, 1)");
    if (c.workers < 1) throw ConfigError("workers must be >= 1");
    if (c.max_paths < 1) throw ConfigError("max_paths must be >= 1");
    const auto& r = c.initial_state;
    if (std::abs(r.trace() - 1.0) > 1e-12 || r.hermiticity_error() > 1e-12)
        throw ConfigError("initial state must be Hermitian with unit trace");
}

inline BathSetup setup_bath(const EtaTable& given, const EngineConfig& c, std::optional<double> t_mem,
                            const std::optional<Mask>& mask, Axis axis) {
    const std::string who = std::string("bath ") + to_string(axis);
    if (given.axis() != axis) throw ConfigError(who + ": table coupled to the wrong axis");
    if (given.n_steps() < c.n_steps) throw ConfigError(who + ": table shorter than the propagation");
    if (std::abs(given.dt() - c.dt) > 1e-12 * c.dt) throw ConfigError(who + ": table time step differs from dt");
    BathSetup b;
    if (c.extended_memory) {
        if (given.mem_steps() < std::min(given.n_steps(), c.n_steps)) throw ConfigError(who + ": extended memory needs an untruncated table");
        b.table = given;
        b.window = c.n_steps + 1;
    } else {
        const double tm = t_mem.value_or(c.n_steps * c.dt);
        if (memory_steps(tm, c.dt) < 1) throw ConfigError(who + ": t_mem must be at least one time step");
        b.table = truncate_eta(given, tm);
        b.window = std::min(b.table.mem_steps(), c.n_steps);
    }
    b.mask = mask.value_or(Mask::uniform(b.window, axis));
    b.mask.axis = axis;
    b.mask.validate(b.window);
    return b;
}

// One propagation run. Children of every parent are generated code by code (the lag-0 pair
// code); paths in different partitions can never share a key, so each partition is merged
// independently and the output is their concatenation in code order.
template <typename Key>
class Engine {
public:
    Engine(const Plan& plan, const TwoLevelSystem& tls) : p_(plan), tls_(tls) {
        n_codes_ = p_.layout == Layout::XZ ? 16 : 4;
        const double dt = p_.cfg.dt;
        for (int to = 0; to < 4; ++to)
            for (int from = 0; from < 4; ++from) {
                const auto a = SigmaPair::from_code(to), b = SigmaPair::from_code(from);
                gz_[to][from] = segment_propagator_general(tls, dt, a.plus, b.plus, Direction::Forward) *
                                segment_propagator_general(tls, dt, a.minus, b.minus, Direction::Backward);
                for (int x = 0; x < 4; ++x) gxz_[to][x][from] = segment_propagator_xz(tls, dt, a, SigmaPair::from_code(x), b);
            }
        rho_x0_ = p_.cfg.initial_state.to_x_basis();
        for (int x = 0; x < 4; ++x) {
            const auto s = SigmaPair::from_code(x);
            const double ph = -(tls.energy(s.plus) - tls.energy(s.minus)) * dt;
            phase_x_[x] = {std::cos(ph), std::sin(ph)};
        }
    }

    Trajectory run() {
        const auto t0 = std::chrono::steady_clock::now();
        Trajectory out;
        PathEnsemble e = initial();
        out.times.push_back(0.0);
        out.rho.push_back(p_.cfg.initial_state);
        out.stats.steps.push_back(stats_of(e, 0, e.size(), e.size(), 0, 0));
        for (int k = 1; k <= p_.cfg.n_steps; ++k) {
            DensityMatrix rho;
            StepStats st;
            e = step(e, k, k == p_.cfg.n_steps, rho, st);
            out.times.push_back(k * p_.cfg.dt);
            out.rho.push_back(rho);
            out.stats.steps.push_back(st);
        }
        out.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }

private:
    struct ParentData {
        Key partial{};
        std::array<cplx, 2> wz{cplx(1.0), cplx(1.0)}, wz_end{cplx(1.0), cplx(1.0)}, wx{cplx(1.0), cplx(1.0)};
    };

    struct PartitionResult {
        KeyedMerger<Key> merger{16};
        cplx readout{};
        std::size_t spawned{0};
    };

    static cplx pick(const std::array<cplx, 2>& w, unsigned code) {
        if (code == 1) return w[0];
        if (code == 2) return w[1];
        return 1.0;
    }

    std::size_t stride_at(int step) const {
        const std::size_t held = p_.layout == Layout::X ? static_cast<std::size_t>(step) : static_cast<std::size_t>(step) + 1;
        return std::min(held, p_.window);
    }

    std::uint8_t byte_of(int c) const { return static_cast<std::uint8_t>(p_.layout == Layout::X ? c << 2 : c); }

    PathEnsemble initial() const {
        PathEnsemble e;
        e.step = 0;
        e.stride = stride_at(0);
        if (p_.layout == Layout::X) {
            e.amps.push_back(1.0);
            return e;
        }
        const cplx eta0 = p_.z->table.row(0, 0, false);
        for (int c = 0; c < 4; ++c) {
            const cplx a = p_.cfg.initial_state.element(c);
            if (a == cplx{}) continue;
            e.amps.push_back(a * increment_weight(SigmaPair::from_code(c), eta0, {}));
            e.history.push_back(static_cast<std::uint8_t>(c));
        }
        return e;
    }

    StepStats stats_of(const PathEnsemble& e, int k, std::size_t spawned, std::size_t merged, std::size_t dropped,
                       std::size_t transient) const {
        StepStats s;
        s.step = k;
        s.n_paths = e.size();
        s.n_spawned = spawned;
        s.n_merged = merged;
        s.n_dropped = dropped;
        s.mem_bytes = e.mem_bytes() + transient;
        if (!e.amps.empty()) {
            s.min_abs = std::abs(e.amps.front());
            for (const auto& a : e.amps) {
                s.min_abs = std::min(s.min_abs, std::abs(a));
                s.max_abs = std::max(s.max_abs, std::abs(a));
            }
        }
        return s;
    }

    template <typename F>
    void parallel(std::size_t n, F&& f) const {
        const std::size_t w = std::min<std::size_t>(p_.cfg.workers, std::max<std::size_t>(n, 1));
        if (w <= 1) {
            for (std::size_t i = 0; i < n; ++i) f(i, 0);
            return;
        }
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(w);
        for (std::size_t t = 0; t < w; ++t)
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = t; i < n; i += w) f(i, t);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& ex : errors)
            if (ex) std::rethrow_exception(ex);
    }

    void parent_data(const PathEnsemble& e, int k, std::vector<ParentData>& pd) const {
        const std::size_t len = e.stride;
        const bool ext = p_.cfg.extended_memory;
        const std::size_t chunk = 4096;
        const std::size_t n_chunks = (e.size() + chunk - 1) / chunk;
        parallel(n_chunks, [&](std::size_t c, std::size_t) {
            const std::size_t end = std::min(e.size(), (c + 1) * chunk);
            for (std::size_t i = c * chunk; i < end; ++i) {
                const std::uint8_t* h = e.hist(i);
                ParentData& d = pd[i];
                d.partial = history_key<Key>(h, len, k - 1, p_.keys, 1);
                if (p_.z) {
                    const auto& t = p_.z->table;
                    const int reach = coupling_reach(t, k, ext);
                    const auto at = [&](int lag) { return SigmaPair::from_code(static_cast<int>(z_code(h[len - static_cast<std::size_t>(lag)]))); };
                    const cplx s_int = history_sum(t, k, false, reach, at);
                    const cplx s_end = history_sum(t, k, true, reach, at);
                    const cplx e_int = t.row(k, 0, false), e_end = t.row(k, 0, true);
                    for (int c2 = 0; c2 < 2; ++c2) {
                        const auto pair = SigmaPair::from_code(c2 + 1);
                        d.wz[static_cast<std::size_t>(c2)] = increment_weight(pair, e_int, s_int);
                        d.wz_end[static_cast<std::size_t>(c2)] = increment_weight(pair, e_end, s_end);
                    }
                }
                if (p_.x) {
                    const auto& t = p_.x->table;
                    const int m = k - 1;
                    const int reach = coupling_reach(t, m, ext);
                    const auto at = [&](int lag) { return SigmaPair::from_code(static_cast<int>(x_code(h[len - static_cast<std::size_t>(lag)]))); };
                    const cplx s = history_sum(t, m, false, reach, at);
                    const cplx e0 = t.row(m, 0, false);
                    for (int c2 = 0; c2 < 2; ++c2) d.wx[static_cast<std::size_t>(c2)] = increment_weight(SigmaPair::from_code(c2 + 1), e0, s);
                }
            }
        });
    }

    cplx propagator(int c, const PathEnsemble& e, std::size_t i, int k) const {
        switch (p_.layout) {
        case Layout::Z: return gz_[c][z_code(e.hist(i)[e.stride - 1])];
        case Layout::XZ: return gxz_[c & 3][c >> 2][z_code(e.hist(i)[e.stride - 1])];
        case Layout::X:
            if (k == 1) return rho_x0_.element(c) * phase_x_[static_cast<std::size_t>(c)];
            return x_code(e.hist(i)[e.stride - 1]) == static_cast<unsigned>(c) ? phase_x_[static_cast<std::size_t>(c)] : cplx{};
        }
        return {};
    }

    Key lag0_bits(int c) const {
        Key k{};
        using T = KeyTraits<Key>;
        const int mz = static_cast<int>(p_.keys.z_lags.size());
        switch (p_.layout) {
        case Layout::Z: T::set(k, 0, static_cast<unsigned>(c)); break;
        case Layout::X: T::set(k, 0, static_cast<unsigned>(c)); break;
        case Layout::XZ:
            T::set(k, 0, static_cast<unsigned>(c & 3));
            T::set(k, mz, static_cast<unsigned>(c >> 2));
            break;
        }
        return k;
    }

    static Key combine(Key a, const Key& b) {
        if constexpr (std::is_same_v<Key, std::uint64_t>) {
            return a | b;
        } else {
            for (std::size_t i = 0; i < a.w.size(); ++i) a.w[i] |= b.w[i];
            return a;
        }
    }

    PathEnsemble step(const PathEnsemble& e, int k, bool last, DensityMatrix& rho, StepStats& st) const {
        std::vector<ParentData> pd(e.size());
        parent_data(e, k, pd);
        const std::size_t child_len = stride_at(k);
        const std::size_t keep_parent = child_len - 1; // parent bytes kept in the child

        std::vector<PartitionResult> parts(static_cast<std::size_t>(n_codes_));
        parallel(parts.size(), [&](std::size_t pi, std::size_t) {
            const int c = static_cast<int>(pi);
            const unsigned zc = p_.layout == Layout::X ? 0u : static_cast<unsigned>(c & 3);
            const unsigned xc = p_.layout == Layout::XZ ? static_cast<unsigned>(c >> 2) : static_cast<unsigned>(c);
            auto& part = parts[pi];
            if (!last) part.merger = KeyedMerger<Key>(e.size() / static_cast<std::size_t>(n_codes_) + 16);
            const Key bits = lag0_bits(c);
            const auto less = [&, newest = byte_of(c)](std::uint32_t a, std::uint32_t b) {
                return canonical_less(e.hist(a), e.hist(b), e.stride, keep_parent, newest);
            };
            for (std::size_t i = 0; i < e.size(); ++i) {
                const cplx g = propagator(c, e, i, k);
                if (g == cplx{}) continue;
                const ParentData& d = pd[i];
                cplx base = e.amps[i] * g;
                if (p_.x) base *= pick(d.wx, xc);
                cplx child = base, end = base;
                if (p_.z) {
                    child *= pick(d.wz, zc);
                    end *= pick(d.wz_end, zc);
                }
                part.readout += end;
                if (last) {
                    if (end != cplx{}) ++part.spawned;
                    continue;
                }
                if (child == cplx{}) continue;
                ++part.spawned;
                part.merger.add(combine(d.partial, bits), child, static_cast<std::uint32_t>(i), less);
                if (part.merger.size() > p_.cfg.max_paths)
                    throw ResourceError("path budget of " + std::to_string(p_.cfg.max_paths) + " exceeded at step " + std::to_string(k));
            }
        });

        Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
        for (int c = 0; c < n_codes_; ++c) {
            const int el = p_.layout == Layout::X ? c : (c & 3);
            m(el >> 1, el & 1) += parts[static_cast<std::size_t>(c)].readout;
        }
        rho = p_.layout == Layout::X ? DensityMatrix(m).from_x_basis() : DensityMatrix(m);

        PathEnsemble out;
        out.step = k;
        out.stride = child_len;
        std::size_t spawned = 0;
        for (const auto& part : parts) spawned += part.spawned;
        if (last) {
            st = stats_of(out, k, spawned, 0, 0, pd.size() * sizeof(ParentData) + e.mem_bytes());
            return out;
        }

        std::size_t merged = 0, transient = pd.size() * sizeof(ParentData) + e.mem_bytes();
        std::vector<cplx> all;
        std::vector<std::uint32_t> rep;
        std::vector<std::uint8_t> code;
        std::vector<bool> self_mirror;
        for (const auto& part : parts) merged += part.merger.size();
        if (merged > p_.cfg.max_paths)
            throw ResourceError("path budget of " + std::to_string(p_.cfg.max_paths) + " exceeded at step " + std::to_string(k));
        all.reserve(merged);
        rep.reserve(merged);
        code.reserve(merged);
        for (std::size_t pi = 0; pi < parts.size(); ++pi) {
            const auto& part = parts[pi];
            transient += part.merger.mem_bytes();
            all.insert(all.end(), part.merger.sums().begin(), part.merger.sums().end());
            rep.insert(rep.end(), part.merger.reps().begin(), part.merger.reps().end());
            code.insert(code.end(), part.merger.size(), byte_of(static_cast<int>(pi)));
            for (const auto& key : part.merger.keys()) self_mirror.push_back(KeyTraits<Key>::mirror(key) == key);
        }
        parts.clear();

        double min_abs = 0.0, max_abs = 0.0;
        bool first = true;
        for (const auto& a : all) {
            if (a == cplx{}) continue;
            const double v = std::abs(a);
            min_abs = first ? v : std::min(min_abs, v);
            max_abs = std::max(max_abs, v);
            first = false;
        }

        FilterCounts fc;
        const auto keep = filter_indices(all, p_.cfg.theta, p_.cfg.drop_fraction, &fc);
        out.amps.reserve(keep.size());
        out.history.reserve(keep.size() * child_len);
        for (auto i : keep) {
            const std::uint8_t* h = e.hist(rep[i]) + (e.stride - keep_parent);
            // A key equal to its own branch swap holds every member together with its mirror image, so
            // no single representative keeps the ensemble symmetric: the mirrored pair shares the sum.
            const bool twin = self_mirror[i] && std::any_of(h, h + keep_parent, [](std::uint8_t b) { return mirror_byte(b) != b; });
            if (!twin) {
                out.amps.push_back(all[i]);
                out.history.insert(out.history.end(), h, h + keep_parent);
                out.history.push_back(code[i]);
                continue;
            }
            out.amps.push_back(0.5 * all[i]);
            out.history.insert(out.history.end(), h, h + keep_parent);
            out.history.push_back(code[i]);
            out.amps.push_back(0.5 * std::conj(all[i]));
            std::transform(h, h + keep_parent, std::back_inserter(out.history), mirror_byte);
            out.history.push_back(code[i]);
        }
        st = stats_of(out, k, spawned, merged, fc.below_threshold + fc.quantile, transient);
        st.n_paths = keep.size();
        st.min_abs = min_abs;
        st.max_abs = max_abs;
        return out;
    }

    const Plan& p_;
    TwoLevelSystem tls_;
    int n_codes_{4};
    cplx gz_[4][4];
    cplx gxz_[4][4][4];
    DensityMatrix rho_x0_;
    std::array<cplx, 4> phase_x_{};
};

inline Trajectory execute(const Plan& plan, const TwoLevelSystem& tls) {
    const int slots = plan.keys.slots();
    if (slots <= KeyTraits<std::uint64_t>::slots) return Engine<std::uint64_t>(plan, tls).run();
    if (slots <= KeyTraits<WideKey<2>>::slots) return Engine<WideKey<2>>(plan, tls).run();
    if (slots <= KeyTraits<WideKey<4>>::slots) return Engine<WideKey<4>>(plan, tls).run();
    throw ConfigError("combined mask size " + std::to_string(slots) + " exceeds 128 points");
}

inline Plan make_plan(const EngineConfig& cfg, const EtaTable* x, const EtaTable* z) {
    validate_config(cfg);
    Plan p;
    p.cfg = cfg;
    p.layout = x && z ? Layout::XZ : (x ? Layout::X : Layout::Z);
    if (z) {
        p.z = setup_bath(*z, cfg, cfg.t_mem_z, cfg.mask_z, Axis::Z);
        p.keys.z_lags = p.z->mask.lags;
        p.window = std::max<std::size_t>(p.window, static_cast<std::size_t>(p.z->window));
    }
    if (x) {
        p.x = setup_bath(*x, cfg, cfg.t_mem_x, cfg.mask_x, Axis::X);
        p.keys.x_lags = p.x->mask.lags;
        p.window = std::max<std::size_t>(p.window, static_cast<std::size_t>(p.x->window));
    }
    return p;
}

inline EtaTable table_for(const BathSpec& bath, const EngineConfig& cfg, Axis axis) {
    if (bath.axis != axis) throw ConfigError(std::string("bath ") + to_string(axis) + " must couple to sigma_" + to_string(axis));
    validate_config(cfg);
    return EtaTable::build(bath, cfg.dt, cfg.n_steps);
}

} // namespace detail

inline Trajectory run_single_general(const EngineConfig& cfg, const EtaTable& z, const TwoLevelSystem& tls = {}) {
    return detail::execute(detail::make_plan(cfg, nullptr, &z), tls);
}

inline Trajectory run_single_general(const EngineConfig& cfg, const BathSpec& z, const TwoLevelSystem& tls = {}) {
    return run_single_general(cfg, detail::table_for(z, cfg, Axis::Z), tls);
}

inline Trajectory run_pure_dephasing(const EngineConfig& cfg, const EtaTable& x, const TwoLevelSystem& tls = {}) {
    return detail::execute(detail::make_plan(cfg, &x, nullptr), tls);
}

inline Trajectory run_pure_dephasing(const EngineConfig& cfg, const BathSpec& x, const TwoLevelSystem& tls = {}) {
    return run_pure_dephasing(cfg, detail::table_for(x, cfg, Axis::X), tls);
}

inline Trajectory run_two_baths(const EngineConfig& cfg, const EtaTable& x, const EtaTable& z, const TwoLevelSystem& tls = {}) {
    return detail::execute(detail::make_plan(cfg, &x, &z), tls);
}

inline Trajectory run_two_baths(const EngineConfig& cfg, const BathSpec& x, const BathSpec& z, const TwoLevelSystem& tls = {}) {
    return run_two_baths(cfg, detail::table_for(x, cfg, Axis::X), detail::table_for(z, cfg, Axis::Z), tls);
}

} // namespace quapi
