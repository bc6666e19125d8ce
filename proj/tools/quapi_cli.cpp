// quapi_cli.cpp - command-line driver: dynamics, filter-sweep, memory-sweep, mask-search

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "quapi/harness/config.hpp"
#include "quapi/harness/experiments.hpp"
#include "quapi/harness/output.hpp"

namespace fs = std::filesystem;
using namespace quapi;
using namespace quapi::harness;

namespace {

struct Options {
    std::string config;
    std::string out;
    unsigned workers{1};
};

fs::path out_dir(const Options& o, const ExperimentConfig& c) { return o.out.empty() ? fs::path(c.output_directory) : fs::path(o.out); }

int dynamics(const Options& o) {
    const auto c = parse_config(o.config);
    require_kind(c, Kind::Dynamics);
    const auto tr = run_dynamics(c, o.workers);
    const auto dir = out_dir(o, c);
    write_text(dir / "dynamics.csv", trajectory_csv(tr));
    std::cout << "wrote " << (dir / "dynamics.csv").string() << " (" << tr.rho.size() << " rows, " << tr.stats.seconds << " s)\n";
    return 0;
}

int filter(const Options& o) {
    const auto c = parse_config(o.config);
    require_kind(c, Kind::FilterSweep);
    const auto rep = filter_sweep(c, c.experiment.thetas, o.workers);
    const auto dir = out_dir(o, c);
    for (std::size_t i = 0; i < rep.entries.size(); ++i)
        write_text(dir / ("filter_" + std::to_string(i) + ".csv"), trajectory_csv(rep.entries[i].trajectory));
    write_text(dir / "filter_sweep.json", filter_json(rep).dump(2) + "\n");
    for (const auto& e : rep.entries)
        std::cout << "theta " << e.theta << "  <N_paths> " << e.path_fraction << "  norm " << e.final_norm << "\n";
    return 0;
}

int memory(const Options& o) {
    const auto c = parse_config(o.config);
    require_kind(c, Kind::MemorySweep);
    const auto rep = memory_sweep(c, c.experiment.axis, c.experiment.t_mems, o.workers, c.experiment.benchmark_mask_size);
    const auto dir = out_dir(o, c);
    write_text(dir / "memory_benchmark.csv", trajectory_csv(rep.benchmark));
    for (std::size_t i = 0; i < rep.entries.size(); ++i)
        write_text(dir / ("memory_" + std::to_string(i) + ".csv"), trajectory_csv(rep.entries[i].trajectory));
    write_text(dir / "memory_sweep.json", memory_json(rep).dump(2) + "\n");
    for (const auto& e : rep.entries) std::cout << "t_mem " << e.t_mem << "  rms " << e.rms << "\n";
    return 0;
}

int masks(const Options& o) {
    const auto c = parse_config(o.config);
    require_kind(c, Kind::MaskSearch);
    const auto& p = c.experiment;
    const auto rep = mask_search(c, p.n_mask_x, p.n_mask_z, p.total_mask_budget, o.workers);
    const auto dir = out_dir(o, c);
    write_text(dir / "mask_benchmark.csv", trajectory_csv(rep.benchmark));
    write_text(dir / "mask_search.json", mask_json(rep).dump(2) + "\n");
    for (std::size_t i = 0; i < std::min<std::size_t>(rep.ranked.size(), 5); ++i) {
        const auto& m = rep.ranked[i];
        std::cout << "#" << i + 1 << "  x" << nlohmann::json(m.mask_x).dump() << " z" << nlohmann::json(m.mask_z).dump()
                  << "  rms " << m.rms << "  " << m.label << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"QUAPI path-sum simulator for a two-level system in sigma_x and/or sigma_z baths"};
    app.require_subcommand(1);
    Options opt;
    const auto add = [&](const char* name, const char* help) {
        auto* s = app.add_subcommand(name, help);
        s->add_option("--config", opt.config, "experiment configuration (YAML)")->required();
        s->add_option("--out", opt.out, "output directory (default: output.directory)");
        s->add_option("--workers", opt.workers, "worker threads")->check(CLI::Range(1u, 1024u));
        return s;
    };
    auto* dyn = add("dynamics", "propagate and write the trajectory CSV");
    auto* fil = add("filter-sweep", "trajectories and path statistics for a list of filter thresholds");
    auto* mem = add("memory-sweep", "trajectories for a list of memory cut-offs against an extended-memory benchmark");
    auto* msk = add("mask-search", "rank all masks of the requested sizes against the full-mask benchmark");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        if (dyn->parsed()) return dynamics(opt);
        if (fil->parsed()) return filter(opt);
        if (mem->parsed()) return memory(opt);
        if (msk->parsed()) return masks(opt);
    } catch (const ValidationError& e) {
        for (const auto& s : e.issues()) std::cerr << "error: " << s << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const std::bad_alloc&) {
        std::cerr << "resource error: out of memory\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
