// experiments.hpp - dynamics runs, filter and memory sweeps, exhaustive mask search

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "quapi/analytic.hpp"
#include "quapi/engine.hpp"
#include "quapi/harness/config.hpp"

namespace quapi::harness {

// eta tables for the configured baths over the whole grid, shared by every run of an experiment.
struct BathTables {
    std::optional<EtaTable> x, z;

    static BathTables build(const ExperimentConfig& c) {
        BathTables t;
        if (c.bath_x) t.x = EtaTable::build(*c.bath_x, c.engine.dt, c.engine.n_steps);
        if (c.bath_z) t.z = EtaTable::build(*c.bath_z, c.engine.dt, c.engine.n_steps);
        return t;
    }
};

inline Trajectory run_engine(const ExperimentConfig& c, const BathTables& t, const EngineConfig& e) {
    if (t.x && t.z) return run_two_baths(e, *t.x, *t.z, c.system);
    if (t.x) return run_pure_dephasing(e, *t.x, c.system);
    return run_single_general(e, *t.z, c.system);
}

inline Trajectory run_dynamics(const ExperimentConfig& c, unsigned workers = 1) {
    auto e = c.engine;
    e.workers = workers;
    return run_engine(c, BathTables::build(c), e);
}

inline std::vector<double> observable_series(const Trajectory& tr, Observable o) {
    std::vector<double> v;
    v.reserve(tr.rho.size());
    for (const auto& r : tr.rho) v.push_back(observe(r, o));
    return v;
}

inline double rms_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) throw DomainError("rms distance needs equal, non-empty series");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

struct LineFit {
    double slope{std::numeric_limits<double>::quiet_NaN()};
    double intercept{std::numeric_limits<double>::quiet_NaN()};
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    const double n = static_cast<double>(x.size());
    if (x.size() < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double d = n * sxx - sx * sx;
    if (d == 0.0) return f;
    f.slope = (n * sxy - sx * sy) / d;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

// Angular frequency from the spacing of successive extrema (half periods) and decay rate from a
// log-linear fit of the extremum magnitudes. Extrema are refined by a parabola through 3 points.
struct OscillationFit {
    double frequency{std::numeric_limits<double>::quiet_NaN()};
    double decay_rate{std::numeric_limits<double>::quiet_NaN()};
    int n_extrema{0};
};

inline OscillationFit fit_oscillation(const std::vector<double>& t, const std::vector<double>& y, double t_from = 0.0) {
    std::vector<double> te, ye, idx;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (t[i] < t_from) continue;
        const bool is_max = y[i] > y[i - 1] && y[i] >= y[i + 1];
        const bool is_min = y[i] < y[i - 1] && y[i] <= y[i + 1];
        if (!is_max && !is_min) continue;
        const double curv = y[i - 1] - 2.0 * y[i] + y[i + 1];
        const double d = curv != 0.0 ? 0.5 * (y[i - 1] - y[i + 1]) / curv : 0.0;
        const double h = t[i + 1] - t[i];
        te.push_back(t[i] + d * h);
        ye.push_back(y[i] - 0.25 * (y[i - 1] - y[i + 1]) * d);
        idx.push_back(static_cast<double>(te.size() - 1));
    }
    OscillationFit f;
    f.n_extrema = static_cast<int>(te.size());
    if (te.size() < 3) return f;
    const auto spacing = fit_line(idx, te);
    f.frequency = std::numbers::pi / spacing.slope;
    std::vector<double> lg;
    for (double v : ye) lg.push_back(std::log(std::max(std::abs(v), 1e-300)));
    f.decay_rate = -fit_line(te, lg).slope;
    return f;
}

struct FilterEntry {
    double theta{0.0};
    Trajectory trajectory;
    double final_norm{0.0};
    double path_fraction{1.0};
    std::size_t dropped{0};
    double min_abs{0.0}; // smallest merged amplitude over the run
};

struct FilterSweepReport {
    Trajectory reference; // theta = 0
    std::vector<FilterEntry> entries;
};

inline FilterSweepReport filter_sweep(const ExperimentConfig& c, const std::vector<double>& thetas, unsigned workers = 1) {
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        if (thetas[i] < 0.0) throw ConfigError("filter thresholds must be >= 0");
        if (i > 0 && thetas[i] <= thetas[i - 1]) throw ConfigError("filter thresholds must be sorted ascending");
    }
    const auto tables = BathTables::build(c);
    auto e = c.engine;
    e.workers = workers;
    e.theta = 0.0;
    FilterSweepReport rep;
    rep.reference = run_engine(c, tables, e);
    for (double th : thetas) {
        FilterEntry f;
        f.theta = th;
        if (th == 0.0) {
            f.trajectory = rep.reference;
        } else {
            e.theta = th;
            f.trajectory = run_engine(c, tables, e);
        }
        f.final_norm = norm(f.trajectory.rho.back());
        f.path_fraction = path_fraction(f.trajectory.stats, rep.reference.stats);
        f.min_abs = std::numeric_limits<double>::infinity();
        for (const auto& s : f.trajectory.stats.steps) {
            f.dropped += s.n_dropped;
            if (s.step > 0 && s.n_merged > 0) f.min_abs = std::min(f.min_abs, s.min_abs);
        }
        if (!std::isfinite(f.min_abs)) f.min_abs = 0.0;
        rep.entries.push_back(std::move(f));
    }
    return rep;
}

struct MemoryEntry {
    double t_mem{0.0};
    Trajectory trajectory;
    double rms{0.0};
    OscillationFit fit;
    // pure-dephasing runs: fitted slope of log|rho_x01| past the cut-off and the prediction
    double fitted_slope{std::numeric_limits<double>::quiet_NaN()};
    double predicted_slope{std::numeric_limits<double>::quiet_NaN()};
    double predicted_slope_continuous{std::numeric_limits<double>::quiet_NaN()};
};

struct MemorySweepReport {
    SweepAxis axis{SweepAxis::Z};
    int benchmark_mask_size{0};
    Trajectory benchmark;
    OscillationFit benchmark_fit;
    std::vector<MemoryEntry> entries;
};

inline OscillationFit fit_observable(const Trajectory& tr, Observable o) {
    return fit_oscillation(tr.times, observable_series(tr, o));
}

// Slope of log|rho_x01| over grid points n >= first.
inline double coherence_slope(const Trajectory& tr, int first) {
    std::vector<double> x, y;
    for (std::size_t n = static_cast<std::size_t>(first); n < tr.rho.size(); ++n) {
        x.push_back(tr.times[n]);
        y.push_back(std::log(std::abs(tr.rho[n].to_x_basis()(0, 1))));
    }
    return fit_line(x, y).slope;
}

inline MemorySweepReport memory_sweep(const ExperimentConfig& c, SweepAxis axis, const std::vector<double>& t_mems,
                                      unsigned workers = 1, std::optional<int> benchmark_mask_size = std::nullopt) {
    if (t_mems.empty()) throw ConfigError("memory sweep needs at least one cut-off");
    if ((axis != SweepAxis::Z && !c.bath_x) || (axis != SweepAxis::X && !c.bath_z))
        throw ConfigError("memory sweep axis refers to an absent bath");
    const auto tables = BathTables::build(c);
    const double dt = c.engine.dt;
    MemorySweepReport rep;
    rep.axis = axis;
    int largest = 0;
    for (double tm : t_mems) largest = std::max(largest, memory_steps(tm, dt));
    rep.benchmark_mask_size = std::min(benchmark_mask_size.value_or(largest), c.engine.n_steps + 1);

    auto b = c.engine;
    b.workers = workers;
    b.extended_memory = true;
    b.t_mem_x.reset();
    b.t_mem_z.reset();
    if (c.bath_x) b.mask_x = Mask::uniform(rep.benchmark_mask_size, Axis::X);
    if (c.bath_z) b.mask_z = Mask::uniform(rep.benchmark_mask_size, Axis::Z);
    rep.benchmark = run_engine(c, tables, b);
    rep.benchmark_fit = fit_observable(rep.benchmark, c.observable);
    const auto bench = observable_series(rep.benchmark, c.observable);

    const bool dephasing_only = c.bath_x && !c.bath_z;
    for (double tm : t_mems) {
        auto e = c.engine;
        e.workers = workers;
        e.extended_memory = false;
        if (axis != SweepAxis::Z) {
            e.t_mem_x = tm;
            e.mask_x.reset();
        }
        if (axis != SweepAxis::X) {
            e.t_mem_z = tm;
            e.mask_z.reset();
        }
        MemoryEntry m;
        m.t_mem = tm;
        m.trajectory = run_engine(c, tables, e);
        m.rms = rms_distance(observable_series(m.trajectory, c.observable), bench);
        m.fit = fit_observable(m.trajectory, c.observable);
        if (dephasing_only) {
            const int steps = memory_steps(tm, dt);
            if (steps + 2 <= c.engine.n_steps) {
                m.fitted_slope = coherence_slope(m.trajectory, steps + 1);
                m.predicted_slope = spurious_decay_slope(discrete_l_rate(truncate_eta(*tables.x, tm)));
                m.predicted_slope_continuous =
                    spurious_decay_slope(l_of_t(*c.bath_x, steps * dt, LMode::ContinuousQuadrature).derivative);
            }
        }
        rep.entries.push_back(std::move(m));
    }
    return rep;
}

struct MaskCandidate {
    std::vector<int> mask_x, mask_z;
    double rms{0.0};
    std::size_t n_paths{0}; // plateau (peak) ensemble size
    std::string label;
};

struct MaskSearchReport {
    int n_mem_x{0}, n_mem_z{0};
    Trajectory benchmark;
    std::vector<MaskCandidate> ranked;
};

inline std::size_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::size_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
    return r;
}

// All masks of `size` lags within a window: lag 0 plus every (size-1)-subset of 1..window-1, lexicographic.
inline std::vector<std::vector<int>> enumerate_masks(int window, int size) {
    std::vector<std::vector<int>> out;
    if (size < 1 || size > window) return out;
    std::vector<int> pick(static_cast<std::size_t>(size - 1));
    for (int i = 0; i < size - 1; ++i) pick[static_cast<std::size_t>(i)] = i + 1;
    while (true) {
        std::vector<int> m{0};
        m.insert(m.end(), pick.begin(), pick.end());
        out.push_back(std::move(m));
        int i = size - 2;
        while (i >= 0 && pick[static_cast<std::size_t>(i)] == window - (size - 1) + i) --i;
        if (i < 0) break;
        ++pick[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < size - 1; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

inline int memory_window(const EngineConfig& e, std::optional<double> t_mem) {
    return std::min(memory_steps(t_mem.value_or(e.n_steps * e.dt), e.dt), e.n_steps);
}

inline MaskSearchReport mask_search(const ExperimentConfig& c, std::optional<int> n_mask_x, std::optional<int> n_mask_z,
                                    std::optional<int> total_budget, unsigned workers = 1) {
    const auto& p = c.experiment;
    MaskSearchReport rep;
    rep.n_mem_x = c.bath_x ? memory_window(c.engine, c.engine.t_mem_x) : 0;
    rep.n_mem_z = c.bath_z ? memory_window(c.engine, c.engine.t_mem_z) : 0;

    // (n_x, n_z) columns to search
    std::vector<std::pair<int, int>> splits;
    if (total_budget) {
        if (!(c.bath_x && c.bath_z)) throw ConfigError("a total mask budget needs both baths");
        for (int nx = 1; nx <= rep.n_mem_x; ++nx) {
            const int nz = *total_budget - nx;
            if (nz >= 1 && nz <= rep.n_mem_z) splits.emplace_back(nx, nz);
        }
        if (splits.empty()) throw ConfigError("total mask budget admits no split within the memory windows");
    } else {
        const int nx = c.bath_x ? n_mask_x.value_or(0) : 0, nz = c.bath_z ? n_mask_z.value_or(0) : 0;
        if (c.bath_x && (nx < 1 || nx > rep.n_mem_x)) throw ConfigError("n_mask_x must lie in 1..N_mem_x");
        if (c.bath_z && (nz < 1 || nz > rep.n_mem_z)) throw ConfigError("n_mask_z must lie in 1..N_mem_z");
        splits.emplace_back(nx, nz);
    }

    std::vector<std::tuple<std::vector<int>, std::vector<int>, std::pair<int, int>>> jobs;
    std::size_t expected = 0;
    for (auto [nx, nz] : splits) {
        const auto xs = c.bath_x ? enumerate_masks(rep.n_mem_x, nx) : std::vector<std::vector<int>>{{}};
        const auto zs = c.bath_z ? enumerate_masks(rep.n_mem_z, nz) : std::vector<std::vector<int>>{{}};
        expected += (c.bath_x ? binomial(rep.n_mem_x - 1, nx - 1) : 1) * (c.bath_z ? binomial(rep.n_mem_z - 1, nz - 1) : 1);
        for (const auto& mx : xs)
            for (const auto& mz : zs) jobs.emplace_back(mx, mz, std::make_pair(nx, nz));
    }
    if (jobs.size() != expected) throw NumericalError("mask enumeration disagrees with the combinatorial count", 0.0);
    if (jobs.size() > p.max_candidates)
        throw ResourceError("mask search needs " + std::to_string(jobs.size()) + " runs, budget is " + std::to_string(p.max_candidates));

    const auto tables = BathTables::build(c);
    auto e = c.engine;
    e.workers = workers;
    e.extended_memory = false;
    const auto full_x = Mask::uniform(rep.n_mem_x, Axis::X), full_z = Mask::uniform(rep.n_mem_z, Axis::Z);
    if (c.bath_x) e.mask_x = full_x;
    if (c.bath_z) e.mask_z = full_z;
    rep.benchmark = run_engine(c, tables, e);
    const auto bench = observable_series(rep.benchmark, c.observable);

    std::vector<std::pair<int, int>> column;
    bool benchmark_seen = false;
    for (const auto& [mx, mz, split] : jobs) {
        MaskCandidate m{mx, mz, 0.0, 0, ""};
        if (c.bath_x) e.mask_x = Mask{mx, Axis::X};
        if (c.bath_z) e.mask_z = Mask{mz, Axis::Z};
        const bool is_full = (!c.bath_x || mx == full_x.lags) && (!c.bath_z || mz == full_z.lags);
        const auto tr = is_full ? rep.benchmark : run_engine(c, tables, e);
        benchmark_seen = benchmark_seen || is_full;
        m.rms = rms_distance(observable_series(tr, c.observable), bench);
        m.n_paths = tr.stats.peak_paths();
        rep.ranked.push_back(std::move(m));
        column.push_back(split);
    }

    // labels relative to each column's minimum
    std::map<std::pair<int, int>, double> col_min;
    for (std::size_t i = 0; i < rep.ranked.size(); ++i) {
        auto it = col_min.find(column[i]);
        if (it == col_min.end()) col_min[column[i]] = rep.ranked[i].rms;
        else it->second = std::min(it->second, rep.ranked[i].rms);
    }
    for (std::size_t i = 0; i < rep.ranked.size(); ++i) {
        auto& m = rep.ranked[i];
        const double lo = col_min[column[i]];
        if (m.rms == lo) m.label = "optimal";
        else if (m.rms <= p.good_factor * lo) m.label = "good";
        else if (m.rms > p.bad_factor * lo) m.label = "unsatisfactory";
    }
    if (!benchmark_seen) rep.ranked.push_back({c.bath_x ? full_x.lags : std::vector<int>{}, c.bath_z ? full_z.lags : std::vector<int>{},
                                               0.0, rep.benchmark.stats.peak_paths(), "benchmark"});
    std::stable_sort(rep.ranked.begin(), rep.ranked.end(), [](const MaskCandidate& a, const MaskCandidate& b) {
        if (a.rms != b.rms) return a.rms < b.rms;
        if (a.mask_x != b.mask_x) return a.mask_x < b.mask_x;
        return a.mask_z < b.mask_z;
    });
    return rep;
}

} // namespace quapi::harness
