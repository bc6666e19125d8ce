// config.hpp - YAML experiment configuration: parsing and validation with field paths

#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "quapi/engine.hpp"
#include "quapi/errors.hpp"
#include "quapi/mask.hpp"
#include "quapi/spectral.hpp"
#include "quapi/tls.hpp"

namespace quapi::harness {

// Every problem found in one document, each prefixed by its field path.
class ValidationError : public ConfigError {
public:
    explicit ValidationError(std::vector<std::string> issues) : ConfigError(join(issues)), issues_(std::move(issues)) {}
    const std::vector<std::string>& issues() const { return issues_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : "\n") + x;
        return s;
    }
    std::vector<std::string> issues_;
};

enum class Kind { Dynamics, FilterSweep, MemorySweep, MaskSearch };
enum class SweepAxis { X, Z, Both };
enum class Observable { SigmaZ, SigmaX, SigmaY };

inline const char* to_string(Kind k) {
    switch (k) {
    case Kind::Dynamics: return "dynamics";
    case Kind::FilterSweep: return "filter_sweep";
    case Kind::MemorySweep: return "memory_sweep";
    case Kind::MaskSearch: return "mask_search";
    }
    return "";
}

struct ExperimentParams {
    std::optional<Kind> kind;
    std::vector<double> thetas;
    SweepAxis axis{SweepAxis::Z};
    std::vector<double> t_mems;
    std::optional<int> benchmark_mask_size;
    std::optional<int> n_mask_x, n_mask_z, total_mask_budget;
    double good_factor{2.0};
    double bad_factor{5.0};
    std::size_t max_candidates{5000};
};

struct ExperimentConfig {
    TwoLevelSystem system;
    std::optional<BathSpec> bath_x, bath_z;
    EngineConfig engine; // dt, n_steps, memory, masks, filter, initial state
    ExperimentParams experiment;
    std::string output_directory{"results"};
    Observable observable{Observable::SigmaZ};
};

inline double observe(const DensityMatrix& r, Observable o) {
    switch (o) {
    case Observable::SigmaZ: return r.sigma_z();
    case Observable::SigmaX: return 2.0 * r(0, 1).real();
    case Observable::SigmaY: return -2.0 * r(0, 1).imag();
    }
    return 0.0;
}

namespace detail {

class Reader {
public:
    std::vector<std::string> issues;

    void fail(const std::string& path, const std::string& msg) { issues.push_back(path + ": " + msg); }

    // Flags keys of `node` outside `allowed`.
    void only(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!node) return;
        if (!node.IsMap()) {
            fail(path, "expected a mapping");
            return;
        }
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        std::set<std::string> seen;
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            const auto where = path.empty() ? key : path + "." + key;
            if (!ok.count(key)) fail(where, "unknown field");
            if (!seen.insert(key).second) fail(where, "given more than once");
        }
    }

    template <typename T>
    std::optional<T> get(const YAML::Node& parent, const char* key, const std::string& path) {
        if (!parent || !parent.IsMap()) return std::nullopt;
        const YAML::Node n = parent[key];
        if (!n || n.IsNull()) return std::nullopt;
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(path, "has the wrong type");
            return std::nullopt;
        }
    }

    template <typename T>
    std::optional<std::vector<T>> list(const YAML::Node& parent, const char* key, const std::string& path) {
        if (!parent || !parent.IsMap()) return std::nullopt;
        const YAML::Node n = parent[key];
        if (!n || n.IsNull()) return std::nullopt;
        if (!n.IsSequence()) {
            fail(path, "expected a list");
            return std::nullopt;
        }
        std::vector<T> out;
        for (std::size_t i = 0; i < n.size(); ++i) {
            try {
                out.push_back(n[i].as<T>());
            } catch (const YAML::Exception&) {
                fail(path + "[" + std::to_string(i) + "]", "has the wrong type");
            }
        }
        return out;
    }
};

inline std::optional<DensityMatrix> parse_state(Reader& r, const YAML::Node& n, const std::string& path) {
    if (!n || n.IsNull()) return std::nullopt;
    if (n.IsScalar()) {
        const auto name = n.as<std::string>();
        const double s = 1.0 / std::sqrt(2.0);
        if (name == "up") return DensityMatrix::spin_up();
        if (name == "down") return DensityMatrix::pure(0.0, 1.0);
        if (name == "x_plus") return DensityMatrix::pure(s, s);
        if (name == "x_minus") return DensityMatrix::pure(s, -s);
        r.fail(path, "unknown state '" + name + "' (up, down, x_plus, x_minus or four row-major elements)");
        return std::nullopt;
    }
    if (!n.IsSequence() || n.size() != 4) {
        r.fail(path, "expected a state name or four row-major elements");
        return std::nullopt;
    }
    Eigen::Matrix2cd m;
    for (std::size_t i = 0; i < 4; ++i) {
        cplx v;
        try {
            if (n[i].IsSequence() && n[i].size() == 2) v = {n[i][0].as<double>(), n[i][1].as<double>()};
            else v = n[i].as<double>();
        } catch (const YAML::Exception&) {
            r.fail(path + "[" + std::to_string(i) + "]", "expected a number or [re, im]");
            return std::nullopt;
        }
        m(static_cast<int>(i / 2), static_cast<int>(i % 2)) = v;
    }
    DensityMatrix rho(m);
    if (std::abs(rho.trace() - 1.0) > 1e-12) r.fail(path, "trace must be 1");
    if (rho.hermiticity_error() > 1e-12) r.fail(path, "must be Hermitian");
    return rho;
}

inline std::optional<BathSpec> parse_bath(Reader& r, const YAML::Node& n, const std::string& path, Axis axis) {
    if (!n || n.IsNull()) return std::nullopt;
    r.only(n, path, {"gamma", "omega_c", "s", "beta"});
    if (!n.IsMap()) return std::nullopt;
    BathSpec b;
    b.axis = axis;
    const auto gamma = r.get<double>(n, "gamma", path + ".gamma");
    if (!gamma) r.fail(path + ".gamma", "required");
    else if (*gamma < 0.0) r.fail(path + ".gamma", "must be >= 0");
    else b.spectral.coupling = *gamma;
    if (auto v = r.get<double>(n, "omega_c", path + ".omega_c")) {
        if (*v <= 0.0) r.fail(path + ".omega_c", "must be > 0");
        else b.spectral.cutoff = *v;
    }
    if (auto v = r.get<double>(n, "s", path + ".s")) {
        if (*v <= 0.0) r.fail(path + ".s", "must be > 0");
        else b.spectral.ohmicity = *v;
    }
    const auto beta = r.get<double>(n, "beta", path + ".beta");
    if (!beta) r.fail(path + ".beta", "required (inverse temperature in units of 1/delta)");
    else if (!(*beta > 0.0) || !std::isfinite(*beta)) r.fail(path + ".beta", "must be finite and > 0");
    else b.beta = *beta;
    return b;
}

inline std::optional<Mask> parse_mask(Reader& r, const YAML::Node& engine, const char* key, const std::string& path, Axis axis) {
    auto lags = r.list<int>(engine, key, path);
    if (!lags) return std::nullopt;
    return Mask{*lags, axis};
}

} // namespace detail

// Parses and validates a configuration document; throws ValidationError listing every problem.
inline ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<config>") {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ValidationError({source + ": syntax error at line " + std::to_string(e.mark.line + 1) + ", column " +
                               std::to_string(e.mark.column + 1) + ": " + e.msg});
    }
    detail::Reader r;
    ExperimentConfig c;
    if (!root.IsMap()) throw ValidationError({source + ": top level must be a mapping"});
    r.only(root, "", {"system", "baths", "grid", "engine", "experiment", "output"});

    const auto sys = root["system"];
    r.only(sys, "system", {"delta", "initial_state"});
    if (auto d = r.get<double>(sys, "delta", "system.delta")) {
        if (*d <= 0.0) r.fail("system.delta", "must be > 0");
        else c.system.tunneling = *d;
    }
    if (sys && sys.IsMap())
        if (auto s = detail::parse_state(r, sys["initial_state"], "system.initial_state")) c.engine.initial_state = *s;

    const auto baths = root["baths"];
    r.only(baths, "baths", {"x", "z"});
    if (baths && baths.IsMap()) {
        c.bath_x = detail::parse_bath(r, baths["x"], "baths.x", Axis::X);
        c.bath_z = detail::parse_bath(r, baths["z"], "baths.z", Axis::Z);
    }
    if (!c.bath_x && !c.bath_z) r.fail("baths", "at least one of x, z is required");

    const auto grid = root["grid"];
    r.only(grid, "grid", {"dt", "n_steps"});
    const auto dt = r.get<double>(grid, "dt", "grid.dt");
    if (!dt) r.fail("grid.dt", "required");
    else if (*dt <= 0.0) r.fail("grid.dt", "must be > 0");
    else c.engine.dt = *dt;
    const auto n = r.get<int>(grid, "n_steps", "grid.n_steps");
    if (!n) r.fail("grid.n_steps", "required");
    else if (*n < 1) r.fail("grid.n_steps", "must be >= 1");
    else c.engine.n_steps = *n;

    const auto eng = root["engine"];
    r.only(eng, "engine", {"t_mem_x", "t_mem_z", "mask_x", "mask_z", "theta", "extended_memory", "drop_fraction", "max_paths"});
    c.engine.t_mem_x = r.get<double>(eng, "t_mem_x", "engine.t_mem_x");
    c.engine.t_mem_z = r.get<double>(eng, "t_mem_z", "engine.t_mem_z");
    c.engine.mask_x = detail::parse_mask(r, eng, "mask_x", "engine.mask_x", Axis::X);
    c.engine.mask_z = detail::parse_mask(r, eng, "mask_z", "engine.mask_z", Axis::Z);
    if (auto v = r.get<double>(eng, "theta", "engine.theta")) {
        if (*v < 0.0) r.fail("engine.theta", "must be >= 0");
        else c.engine.theta = *v;
    }
    if (auto v = r.get<bool>(eng, "extended_memory", "engine.extended_memory")) c.engine.extended_memory = *v;
    if (auto v = r.get<double>(eng, "drop_fraction", "engine.drop_fraction")) {
        if (*v < 0.0 || *v >= 1.0) r.fail("engine.drop_fraction", "must lie in [0, 1)");
        else c.engine.drop_fraction = *v;
    }
    if (auto v = r.get<long long>(eng, "max_paths", "engine.max_paths")) {
        if (*v < 1) r.fail("engine.max_paths", "must be >= 1");
        else c.engine.max_paths = static_cast<std::size_t>(*v);
    }

    // memory cut-offs and masks against the grid
    if (dt && *dt > 0.0 && n && *n >= 1) {
        const auto check_axis = [&](const std::optional<BathSpec>& bath, const std::optional<double>& tm,
                                    const std::optional<Mask>& mask, const char* ax) {
            const std::string tpath = std::string("engine.t_mem_") + ax, mpath = std::string("engine.mask_") + ax;
            if (!bath) {
                if (tm) r.fail(tpath, std::string("set but baths.") + ax + " is absent");
                if (mask) r.fail(mpath, std::string("set but baths.") + ax + " is absent");
                return;
            }
            int window = *n;
            if (c.engine.extended_memory) window = *n + 1;
            else if (tm) {
                if (*tm <= 0.0) {
                    r.fail(tpath, "must be > 0");
                    return;
                }
                const int steps = memory_steps(*tm, *dt);
                if (steps < 1) r.fail(tpath, "shorter than one time step");
                if (std::abs(*tm - steps * *dt) > 1e-9 * std::max(1.0, *tm)) r.fail(tpath, "must be a multiple of grid.dt");
                window = std::min(steps, *n);
            }
            if (mask) {
                try {
                    mask->validate(window);
                } catch (const ConfigError& e) {
                    r.fail(mpath, e.what());
                }
            }
        };
        check_axis(c.bath_x, c.engine.t_mem_x, c.engine.mask_x, "x");
        check_axis(c.bath_z, c.engine.t_mem_z, c.engine.mask_z, "z");
    }

    const auto ex = root["experiment"];
    r.only(ex, "experiment", {"kind", "thetas", "axis", "t_mems", "benchmark_mask_size", "n_mask_x", "n_mask_z",
                              "total_mask_budget", "good_factor", "bad_factor", "max_candidates"});
    auto& p = c.experiment;
    if (auto k = r.get<std::string>(ex, "kind", "experiment.kind")) {
        if (*k == "dynamics") p.kind = Kind::Dynamics;
        else if (*k == "filter_sweep") p.kind = Kind::FilterSweep;
        else if (*k == "memory_sweep") p.kind = Kind::MemorySweep;
        else if (*k == "mask_search") p.kind = Kind::MaskSearch;
        else r.fail("experiment.kind", "must be dynamics, filter_sweep, memory_sweep or mask_search");
    }
    if (auto v = r.list<double>(ex, "thetas", "experiment.thetas")) {
        p.thetas = *v;
        for (std::size_t i = 0; i < p.thetas.size(); ++i) {
            if (p.thetas[i] < 0.0) r.fail("experiment.thetas", "values must be >= 0");
            if (i > 0 && p.thetas[i] <= p.thetas[i - 1]) r.fail("experiment.thetas", "must be sorted ascending without repeats");
        }
    }
    if (auto a = r.get<std::string>(ex, "axis", "experiment.axis")) {
        if (*a == "x") p.axis = SweepAxis::X;
        else if (*a == "z") p.axis = SweepAxis::Z;
        else if (*a == "both") p.axis = SweepAxis::Both;
        else r.fail("experiment.axis", "must be x, z or both");
    }
    if (auto v = r.list<double>(ex, "t_mems", "experiment.t_mems")) {
        p.t_mems = *v;
        for (double tm : p.t_mems) {
            const int steps = dt && *dt > 0 ? memory_steps(tm, *dt) : 0;
            if (tm <= 0.0 || steps < 1 || (dt && std::abs(tm - steps * *dt) > 1e-9 * std::max(1.0, tm))) {
                r.fail("experiment.t_mems", "every cut-off must be a positive multiple of grid.dt");
                break;
            }
        }
    }
    const auto positive = [&](const char* key, std::optional<int>& dst) {
        dst = r.get<int>(ex, key, std::string("experiment.") + key);
        if (dst && *dst < 1) r.fail(std::string("experiment.") + key, "must be >= 1");
    };
    positive("benchmark_mask_size", p.benchmark_mask_size);
    positive("n_mask_x", p.n_mask_x);
    positive("n_mask_z", p.n_mask_z);
    positive("total_mask_budget", p.total_mask_budget);
    if (auto v = r.get<double>(ex, "good_factor", "experiment.good_factor")) p.good_factor = *v;
    if (auto v = r.get<double>(ex, "bad_factor", "experiment.bad_factor")) p.bad_factor = *v;
    if (!(p.good_factor >= 1.0 && p.bad_factor >= p.good_factor)) r.fail("experiment", "need 1 <= good_factor <= bad_factor");
    if (auto v = r.get<long long>(ex, "max_candidates", "experiment.max_candidates")) {
        if (*v < 1) r.fail("experiment.max_candidates", "must be >= 1");
        else p.max_candidates = static_cast<std::size_t>(*v);
    }

    const auto out = root["output"];
    r.only(out, "output", {"directory", "observable"});
    if (auto d = r.get<std::string>(out, "directory", "output.directory")) c.output_directory = *d;
    if (auto o = r.get<std::string>(out, "observable", "output.observable")) {
        if (*o == "sigma_z") c.observable = Observable::SigmaZ;
        else if (*o == "sigma_x") c.observable = Observable::SigmaX;
        else if (*o == "sigma_y") c.observable = Observable::SigmaY;
        else r.fail("output.observable", "must be sigma_z, sigma_x or sigma_y");
    }

    if (!r.issues.empty()) {
        for (auto& s : r.issues) s = source + ": " + s;
        throw ValidationError(r.issues);
    }
    return c;
}

inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError({path + ": cannot open file"});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

// Checks the experiment-specific fields needed by `kind`.
inline void require_kind(const ExperimentConfig& c, Kind kind) {
    std::vector<std::string> issues;
    const auto& p = c.experiment;
    if (p.kind && *p.kind != kind)
        issues.push_back(std::string("experiment.kind: is ") + to_string(*p.kind) + " but " + to_string(kind) + " was requested");
    if (kind == Kind::FilterSweep && p.thetas.empty()) issues.push_back("experiment.thetas: required for filter_sweep");
    if (kind == Kind::MemorySweep) {
        if (p.t_mems.empty()) issues.push_back("experiment.t_mems: required for memory_sweep");
        const bool need_x = p.axis != SweepAxis::Z, need_z = p.axis != SweepAxis::X;
        if ((need_x && !c.bath_x) || (need_z && !c.bath_z)) issues.push_back("experiment.axis: sweeps a bath that is not configured");
        if (c.engine.extended_memory) issues.push_back("engine.extended_memory: memory_sweep runs truncated memory");
    }
    if (kind == Kind::MaskSearch) {
        if (c.engine.extended_memory) issues.push_back("engine.extended_memory: mask_search fixes the memory window");
        if (!p.total_mask_budget) {
            if (c.bath_x && !p.n_mask_x) issues.push_back("experiment.n_mask_x: required (or total_mask_budget)");
            if (c.bath_z && !p.n_mask_z) issues.push_back("experiment.n_mask_z: required (or total_mask_budget)");
        } else if (!(c.bath_x && c.bath_z)) {
            issues.push_back("experiment.total_mask_budget: needs both baths");
        }
    }
    if (!issues.empty()) throw ValidationError(issues);
}

} // namespace quapi::harness
