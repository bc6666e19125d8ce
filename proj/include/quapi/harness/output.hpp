// output.hpp - CSV trajectories and JSON reports

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "quapi/errors.hpp"
#include "quapi/harness/experiments.hpp"

namespace quapi::harness {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline const char* csv_header() {
    return "t,rho00_re,rho00_im,rho01_re,rho01_im,rho10_re,rho10_im,rho11_re,rho11_im,sigma_z,trace_re,norm,n_paths,mem_bytes";
}

inline std::string trajectory_csv(const Trajectory& tr) {
    std::string s = csv_header();
    s += '\n';
    for (std::size_t n = 0; n < tr.rho.size(); ++n) {
        const auto& r = tr.rho[n];
        s += fmt17(tr.times[n]);
        for (int c = 0; c < 4; ++c) {
            s += ',' + fmt17(r.element(c).real());
            s += ',' + fmt17(r.element(c).imag());
        }
        s += ',' + fmt17(r.sigma_z());
        s += ',' + fmt17(r.trace().real());
        s += ',' + fmt17(norm(r));
        const auto& st = tr.stats.steps.at(n);
        s += ',' + std::to_string(st.n_paths);
        s += ',' + std::to_string(st.mem_bytes);
        s += '\n';
    }
    return s;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ResourceError("cannot write " + path.string());
    out << text;
    if (!out) throw ResourceError("write failed for " + path.string());
}

inline nlohmann::json fit_json(const OscillationFit& f) {
    const auto val = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    return {{"frequency", val(f.frequency)}, {"decay_rate", val(f.decay_rate)}, {"n_extrema", f.n_extrema}};
}

inline nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline nlohmann::json filter_json(const FilterSweepReport& r) {
    auto a = nlohmann::json::array();
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
        const auto& e = r.entries[i];
        a.push_back({{"theta", e.theta},
                     {"final_norm", e.final_norm},
                     {"path_fraction", e.path_fraction},
                     {"dropped", e.dropped},
                     {"min_abs", e.min_abs},
                     {"sigma_z_end", e.trajectory.rho.back().sigma_z()},
                     {"trajectory", "filter_" + std::to_string(i) + ".csv"}});
    }
    return a;
}

inline const char* axis_name(SweepAxis a) { return a == SweepAxis::X ? "x" : a == SweepAxis::Z ? "z" : "both"; }

inline nlohmann::json memory_json(const MemorySweepReport& r) {
    nlohmann::json j;
    j["axis"] = axis_name(r.axis);
    j["benchmark"] = {{"mask_size", r.benchmark_mask_size}, {"fit", fit_json(r.benchmark_fit)}, {"trajectory", "memory_benchmark.csv"}};
    auto a = nlohmann::json::array();
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
        const auto& e = r.entries[i];
        a.push_back({{"t_mem", e.t_mem},
                     {"rms", e.rms},
                     {"fit", fit_json(e.fit)},
                     {"fitted_slope", finite_or_null(e.fitted_slope)},
                     {"predicted_slope", finite_or_null(e.predicted_slope)},
                     {"predicted_slope_continuous", finite_or_null(e.predicted_slope_continuous)},
                     {"trajectory", "memory_" + std::to_string(i) + ".csv"}});
    }
    j["entries"] = a;
    return j;
}

inline nlohmann::json mask_json(const MaskSearchReport& r) {
    auto a = nlohmann::json::array();
    for (const auto& m : r.ranked)
        a.push_back({{"mask_x", m.mask_x}, {"mask_z", m.mask_z}, {"rms", m.rms}, {"n_paths", m.n_paths}, {"label", m.label}});
    return a;
}

} // namespace quapi::harness
