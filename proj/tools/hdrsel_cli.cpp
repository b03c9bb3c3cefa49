// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdrsel/image_io.hpp"
#include "hdrsel/pipeline.hpp"

using namespace hdrsel;

namespace {

struct CommonArgs {
    std::string profile;
    std::string ladder = "canon55";
    std::string stack_dir;
    std::string simulate;
    std::string cost_mode = "unit";
    double t_over = 0.150;
    double snr_db = kDefaultSnrThresholdDb;
    std::string imin = std::to_string(kDefaultImin);
    std::string imax = std::to_string(kDefaultImax);
    std::uint64_t seed = 1;
    std::string out;
    bool dump_instance = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--profile", a.profile, "Camera profile JSON (default: gamma 2.2, 12-bit, r=2)");
    cmd->add_option("--ladder", a.ladder, "canon55 | survey9 | geom:FIRST:STEP:N | T1,T2,...")->capture_default_str();
    cmd->add_option("--stack-dir", a.stack_dir, "Directory with manifest.json and P5/P6 preview images");
    cmd->add_option("--simulate", a.simulate, "KIND[:w=,h=,span=,noise=,channels=,k=]");
    cmd->add_option("--cost-mode", a.cost_mode, "unit | time")
        ->check(CLI::IsMember({"unit", "time"}))
        ->capture_default_str();
    cmd->add_option("--t-over", a.t_over, "Per-shot overhead in seconds (time cost mode)")->capture_default_str();
    cmd->add_option("--snr-db", a.snr_db, "SNR threshold used when --imin auto")->capture_default_str();
    cmd->add_option("--imin", a.imin, "Darkest accurate grayscale value, or 'auto' (from --snr-db)")
        ->capture_default_str();
    cmd->add_option("--imax", a.imax, "Brightest accurate grayscale value, or 'auto' (from the stack)")
        ->capture_default_str();
    cmd->add_option("--seed", a.seed, "Simulation seed")->capture_default_str();
    cmd->add_option("--out", a.out, "Output directory for report.json / methods.csv");
    cmd->add_flag("--dump-instance", a.dump_instance, "Also write instance.txt to --out");
}

int parse_level(const std::string& flag, const std::string& value) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(value, &used);
        if (used == value.size() && v >= 0 && v <= kMaxLevel)
            return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(flag + " expects 0..255 or 'auto', got '" + value + "'");
}

RunConfig to_config(const CommonArgs& a) {
    RunConfig cfg;
    if (!a.profile.empty()) {
        cfg.profile = load_profile(a.profile);
        cfg.profile_source = a.profile;
    }
    cfg.ladder = parse_ladder(a.ladder);
    cfg.ladder.cost_mode = a.cost_mode == "time" ? CostMode::capture_time : CostMode::unit;
    cfg.ladder.t_over = a.t_over;
    cfg.snr_threshold_db = a.snr_db;
    if (a.imin == "auto")
        cfg.imin_mode = IminMode::from_snr;
    else
        cfg.i_min = parse_level("--imin", a.imin);
    if (a.imax == "auto")
        cfg.imax_mode = ImaxMode::estimated;
    else
        cfg.i_max = parse_level("--imax", a.imax);
    if (!a.stack_dir.empty())
        cfg.stack_dir = a.stack_dir;
    if (!a.simulate.empty())
        cfg.simulate = parse_simulation(a.simulate);
    if (!a.out.empty())
        cfg.out_dir = a.out;
    cfg.dump_instance = a.dump_instance;
    cfg.seed = a.seed;
    cfg.validate();
    return cfg;
}

int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const IoError& ex) {
        std::cerr << "io error: " << ex.what() << '\n';
        return kExitIo;
    } catch (const InfeasibleError& ex) {
        std::cerr << "infeasible: " << ex.what() << '\n';
        return kExitInfeasible;
    } catch (const DomainError& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return kExitConfig;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimal exposure set selection for HDR capture"};
    app.require_subcommand(1);

    CommonArgs select_args;
    auto* select = app.add_subcommand("select", "Classify a preview stack and select exposures");
    add_common(select, select_args);

    CommonArgs bench_args;
    std::vector<std::string> methods = kBenchmarkMethods;
    auto* bench = app.add_subcommand("benchmark", "Compare selections against ground truth on a simulated scene");
    add_common(bench, bench_args);
    bench->add_option("--methods", methods, "Subset of setcover,bracket,extent,full_ladder")
        ->delimiter(',')
        ->check(CLI::IsMember(kBenchmarkMethods));
    bool no_methods = false;
    bench->add_flag("--no-methods", no_methods, "Report stack statistics only");

    CommonArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Write a simulated preview stack directory");
    add_common(simulate, sim_args);

    CLI11_PARSE(app, argc, argv);

    if (select->parsed()) {
        return run_guarded([&] {
            const SelectionReport report = run_select(to_config(select_args));
            std::cout << report.to_json().dump(2) << '\n';
        });
    }
    if (bench->parsed()) {
        return run_guarded([&] {
            const SelectionReport report =
                run_benchmark(to_config(bench_args), no_methods ? std::vector<std::string>{} : methods);
            std::cout << report.to_json().dump(2) << '\n';
        });
    }
    return run_guarded([&] {
        if (sim_args.simulate.empty() || sim_args.out.empty())
            throw ConfigError("simulate requires --simulate and --out");
        RunConfig cfg = to_config(sim_args);
        const SimulationSpec& sim = *cfg.simulate;
        SceneIrradiance scene = make_scene(sim.kind, sim.width, sim.height, sim.span_stops, derive_seed(cfg.seed, 100));
        scene.channel_scale = sim.channel_scale;
        CaptureBounds bounds{cfg.i_min, cfg.i_max, cfg.snr_threshold_db};
        scene.values *= placement_scale(scene, cfg.profile, cfg.ladder, bounds, sim.scene_to_raw);
        const auto stack = sweep_stack(scene, cfg.profile, cfg.ladder, derive_seed(cfg.seed, 1),
                                       SimOptions{sim.noise_on, sim.scene_to_raw, sim.channels});
        write_stack_dir(*cfg.out_dir, stack);
        write_pfm(*cfg.out_dir / "ground_truth.pfm", scene.values);
        std::cout << "wrote " << stack.size() << " images to " << cfg.out_dir->string() << '\n';
    });
}
