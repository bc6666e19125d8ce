// test_harness.cpp - configuration parsing, experiments, report formats and the CLI

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "quapi/harness/config.hpp"
#include "quapi/harness/experiments.hpp"
#include "quapi/harness/output.hpp"

using namespace quapi;
using namespace quapi::harness;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
baths:
  z: {gamma: 0.0625, beta: 5.0}
grid: {dt: 0.3, n_steps: 10}
)";

std::vector<std::string> issues_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ValidationError& e) {
        return e.issues();
    }
    return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& what) {
    for (const auto& s : v)
        if (s.find(what) != std::string::npos) return true;
    return false;
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("quapi_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args) {
    const int rc = std::system((std::string(QUAPI_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST(Config, MinimalGetsDefaults) {
    const auto c = parse_config_text(kMinimal);
    EXPECT_EQ(c.engine.theta, 0.0);
    EXPECT_FALSE(c.engine.extended_memory);
    EXPECT_EQ(c.engine.n_steps, 10);
    ASSERT_TRUE(c.bath_z);
    EXPECT_EQ(c.bath_z->spectral.cutoff, 10.0);
    EXPECT_EQ(c.bath_z->spectral.ohmicity, 1.0);
    EXPECT_FALSE(c.bath_x);
    EXPECT_EQ(c.engine.initial_state.matrix(), DensityMatrix::spin_up().matrix());
}

TEST(Config, MissingBetaNamesField) {
    const auto v = issues_of("baths:\n  z: {gamma: 0.1}\ngrid: {dt: 0.3, n_steps: 4}\n");
    EXPECT_TRUE(mentions(v, "baths.z.beta"));
}

TEST(Config, CollectsEveryProblem) {
    const auto v = issues_of(R"(
baths:
  x: {gamma: -1, beta: 5}
grid: {dt: -0.3}
engine: {theta: -1, colour: red}
)");
    EXPECT_TRUE(mentions(v, "baths.x.gamma"));
    EXPECT_TRUE(mentions(v, "grid.dt"));
    EXPECT_TRUE(mentions(v, "grid.n_steps"));
    EXPECT_TRUE(mentions(v, "engine.theta"));
    EXPECT_TRUE(mentions(v, "engine.colour"));
}

TEST(Config, MaskLagBeyondMemoryRejected) {
    const auto v = issues_of(R"(
baths:
  z: {gamma: 0.1, beta: 5}
grid: {dt: 0.3, n_steps: 10}
engine: {t_mem_z: 0.9, mask_z: [0, 3]}
)");
    EXPECT_TRUE(mentions(v, "engine.mask_z"));
    EXPECT_TRUE(issues_of("baths:\n  z: {gamma: 0.1, beta: 5}\ngrid: {dt: 0.3, n_steps: 10}\nengine: {t_mem_z: 0.9, mask_z: [0, 2]}\n").empty());
    EXPECT_TRUE(mentions(issues_of("baths:\n  z: {gamma: 0.1, beta: 5}\ngrid: {dt: 0.3, n_steps: 10}\nengine: {t_mem_z: 1.0}\n"),
                         "engine.t_mem_z"));
}

TEST(Config, DuplicateKeyRejected) {
    EXPECT_TRUE(mentions(issues_of(std::string(kMinimal) + "baths:\n  z: {gamma: 0.0, beta: 5.0}\n"), "baths: given more than once"));
}

TEST(Config, SyntaxErrorHasPosition) {
    const auto v = issues_of("baths:\n  z: {gamma: 0.1, beta: 5\ngrid: [\n");
    ASSERT_EQ(v.size(), 1u);
    EXPECT_TRUE(mentions(v, "line"));
    EXPECT_TRUE(mentions(v, "column"));
}

TEST(Config, InitialStateForms) {
    auto c = parse_config_text(std::string(kMinimal) + "system: {initial_state: x_plus}\n");
    EXPECT_NEAR(c.engine.initial_state(0, 1).real(), 0.5, 1e-15);
    c = parse_config_text(std::string(kMinimal) + "system: {initial_state: [0.6, [0.1, 0.2], [0.1, -0.2], 0.4]}\n");
    EXPECT_EQ(c.engine.initial_state(0, 1), cplx(0.1, 0.2));
    EXPECT_TRUE(mentions(issues_of(std::string(kMinimal) + "system: {initial_state: [0.6, 0.1, 0.2, 0.4]}\n"), "Hermitian"));
    EXPECT_TRUE(mentions(issues_of(std::string(kMinimal) + "system: {initial_state: sideways}\n"), "system.initial_state"));
}

TEST(Config, PresetRequiresBeta) {
    const auto v = [] {
        try {
            parse_config(std::string(QUAPI_CONFIG_DIR) + "/preset.yaml");
        } catch (const ValidationError& e) {
            return e.issues();
        }
        return std::vector<std::string>{};
    }();
    EXPECT_TRUE(mentions(v, "baths.x.beta"));
    EXPECT_TRUE(mentions(v, "baths.z.beta"));
    EXPECT_EQ(v.size(), 2u);
}

TEST(Config, ShippedSamplesParse) {
    for (const char* f : {"single_z", "pure_dephasing", "two_baths", "filter_sweep", "memory_sweep", "mask_search"})
        EXPECT_NO_THROW(parse_config(std::string(QUAPI_CONFIG_DIR) + "/" + f + ".yaml")) << f;
}

TEST(Config, KindMismatch) {
    const auto c = parse_config_text(std::string(kMinimal) + "experiment: {kind: dynamics}\n");
    EXPECT_NO_THROW(require_kind(c, Kind::Dynamics));
    EXPECT_THROW(require_kind(c, Kind::FilterSweep), ValidationError);
}

TEST(Csv, HeaderAndPrecision) {
    const auto c = parse_config_text("baths:\n  z: {gamma: 0.0, beta: 5.0}\ngrid: {dt: 0.3, n_steps: 10}\n");
    const auto tr = run_dynamics(c);
    const auto text = trajectory_csv(tr);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,rho00_re,rho00_im,rho01_re,rho01_im,rho10_re,rho10_im,rho11_re,rho11_im,sigma_z,trace_re,norm,n_paths,mem_bytes");
    int rows = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> cols;
        std::stringstream ls(line);
        for (std::string f; std::getline(ls, f, ',');) cols.push_back(f);
        ASSERT_EQ(cols.size(), 14u);
        const double t = std::stod(cols[0]);
        EXPECT_NEAR(std::stod(cols[9]), std::cos(t), 1e-12);
        ++rows;
    }
    EXPECT_EQ(rows, 11);
    EXPECT_EQ(fmt17(0.1), "0.10000000000000001");
}

TEST(Oscillation, RecoversDampedCosine) {
    std::vector<double> t, y;
    for (int i = 0; i <= 400; ++i) {
        t.push_back(0.05 * i);
        y.push_back(std::exp(-0.13 * t.back()) * std::cos(1.7 * t.back()));
    }
    const auto f = fit_oscillation(t, y);
    EXPECT_NEAR(f.frequency, 1.7, 5e-3);
    EXPECT_NEAR(f.decay_rate, 0.13, 5e-3);
    EXPECT_GE(f.n_extrema, 8);
}

TEST(MaskEnumeration, CountsMatchBinomial) {
    for (int w = 1; w <= 7; ++w)
        for (int s = 1; s <= w; ++s) {
            const auto m = enumerate_masks(w, s);
            EXPECT_EQ(m.size(), binomial(w - 1, s - 1));
            for (const auto& x : m) EXPECT_NO_THROW((Mask{x, Axis::Z}).validate(w));
        }
    EXPECT_EQ(enumerate_masks(6, 3).front(), (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(enumerate_masks(6, 3).back(), (std::vector<int>{0, 4, 5}));
}

TEST(MaskSearch, FullSizeIsSingleZeroDistanceCandidate) {
    const auto c = parse_config_text(R"(
baths:
  z: {gamma: 0.0625, beta: 5.0}
grid: {dt: 0.3, n_steps: 20}
engine: {t_mem_z: 0.9}
)");
    const auto rep = mask_search(c, std::nullopt, 3, std::nullopt);
    ASSERT_EQ(rep.ranked.size(), 1u);
    EXPECT_EQ(rep.ranked[0].rms, 0.0);
    EXPECT_EQ(rep.ranked[0].label, "optimal");
    const auto two = mask_search(c, std::nullopt, 2, std::nullopt);
    ASSERT_EQ(two.ranked.size(), 3u); // {0,1}, {0,2} and the benchmark
    EXPECT_EQ(two.ranked[0].label, "benchmark");
    EXPECT_LE(two.ranked[1].rms, two.ranked[2].rms);
}

TEST(MaskSearch, CandidateBudget) {
    auto c = parse_config_text(R"(
baths:
  z: {gamma: 0.0625, beta: 5.0}
grid: {dt: 0.3, n_steps: 20}
engine: {t_mem_z: 1.8}
experiment: {max_candidates: 4}
)");
    EXPECT_THROW(mask_search(c, std::nullopt, 3, std::nullopt), ResourceError);
}

TEST(MemorySweep, PureDephasingDistanceShrinksWithMemory) {
    const auto c = parse_config_text(R"(
baths:
  x: {gamma: 0.0625, beta: 5.0}
grid: {dt: 0.3, n_steps: 40}
)");
    const auto rep = memory_sweep(c, SweepAxis::X, {0.3, 0.6, 0.9, 1.5}, 1, 2);
    for (std::size_t i = 1; i < rep.entries.size(); ++i) EXPECT_LE(rep.entries[i].rms, rep.entries[i - 1].rms);
    for (const auto& e : rep.entries) EXPECT_NEAR(e.fitted_slope, e.predicted_slope, 1e-9 * std::abs(e.predicted_slope));
}

TEST(FilterSweep, ZeroThresholdIsReference) {
    const auto c = parse_config_text(R"(
baths:
  z: {gamma: 0.0625, beta: 5.0}
grid: {dt: 0.3, n_steps: 30}
engine: {t_mem_z: 1.2}
)");
    const auto rep = filter_sweep(c, {0.0, 1e-5, 1e-3});
    EXPECT_EQ(rep.entries[0].path_fraction, 1.0);
    EXPECT_NEAR(rep.entries[0].final_norm, 1.0, 1e-10);
    EXPECT_LT(rep.entries[1].path_fraction, 1.0);
    EXPECT_LE(rep.entries[2].path_fraction, rep.entries[1].path_fraction);
    EXPECT_THROW(filter_sweep(c, {1e-3, 1e-5}), ConfigError);
}

TEST(Cli, ExitCodesAndDeterministicCsv) {
    const auto dir = scratch("cli");
    const auto cfg = dir / "run.yaml";
    write_text(cfg, R"(
baths:
  x: {gamma: 0.05, beta: 5.0}
  z: {gamma: 0.05, beta: 5.0}
grid: {dt: 0.3, n_steps: 12}
engine: {t_mem_x: 0.6, t_mem_z: 0.6}
)");
    EXPECT_EQ(cli("dynamics --config " + cfg.string() + " --out " + (dir / "a").string() + " --workers 1"), 0);
    EXPECT_EQ(cli("dynamics --config " + cfg.string() + " --out " + (dir / "b").string() + " --workers 2"), 0);
    EXPECT_EQ(cli("dynamics --config " + cfg.string() + " --out " + (dir / "c").string() + " --workers 8"), 0);
    const auto a = slurp(dir / "a" / "dynamics.csv");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(dir / "b" / "dynamics.csv"));
    EXPECT_EQ(a, slurp(dir / "c" / "dynamics.csv"));

    const auto bad = dir / "bad.yaml";
    write_text(bad, "baths:\n  z: {gamma: 0.05}\ngrid: {dt: 0.3, n_steps: 12}\n");
    EXPECT_EQ(cli("dynamics --config " + bad.string() + " --out " + dir.string()), 2);
    EXPECT_EQ(cli("dynamics --config " + (dir / "missing.yaml").string()), 2);
    EXPECT_EQ(cli("filter-sweep --config " + cfg.string() + " --out " + dir.string()), 2); // no thetas

    const auto big = dir / "big.yaml";
    write_text(big, "baths:\n  z: {gamma: 0.05, beta: 5}\ngrid: {dt: 0.3, n_steps: 12}\nengine: {max_paths: 50}\n");
    EXPECT_EQ(cli("dynamics --config " + big.string() + " --out " + dir.string()), 3);
}

TEST(Cli, MaskSearchJsonSchema) {
    const auto dir = scratch("mask");
    const auto cfg = dir / "m.yaml";
    write_text(cfg, R"(
baths:
  z: {gamma: 0.0625, beta: 5.0}
grid: {dt: 0.3, n_steps: 20}
engine: {t_mem_z: 1.2}
experiment: {kind: mask_search, n_mask_z: 2}
)");
    ASSERT_EQ(cli("mask-search --config " + cfg.string() + " --out " + dir.string()), 0);
    const auto j = nlohmann::json::parse(slurp(dir / "mask_search.json"));
    ASSERT_TRUE(j.is_array());
    EXPECT_EQ(j.size(), 4u);
    for (const auto& e : j) {
        EXPECT_TRUE(e["mask_x"].is_array());
        EXPECT_TRUE(e["mask_z"].is_array());
        EXPECT_TRUE(e["rms"].is_number_float());
        EXPECT_TRUE(e["n_paths"].is_number_integer());
        EXPECT_TRUE(e["label"].is_string());
    }
}
