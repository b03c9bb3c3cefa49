// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#include "hdrsel/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hdrsel/image_io.hpp"

namespace hdrsel {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double parse_time(const std::string& tok) {
    try {
        const auto slash = tok.find('/');
        std::size_t used = 0;
        if (slash == std::string::npos) {
            const double v = std::stod(tok, &used);
            if (used != tok.size())
                throw std::invalid_argument(tok);
            return v;
        }
        const std::string num = tok.substr(0, slash), den = tok.substr(slash + 1);
        const double a = std::stod(num, &used);
        if (used != num.size())
            throw std::invalid_argument(tok);
        const double b = std::stod(den, &used);
        if (used != den.size() || b == 0.0)
            throw std::invalid_argument(tok);
        return a / b;
    } catch (const std::invalid_argument&) {
        throw ConfigError("cannot parse time value '" + tok + "'");
    } catch (const std::out_of_range&) {
        throw ConfigError("time value out of range '" + tok + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        out.push_back(cur);
    return out;
}

std::string cost_mode_name(CostMode mode) { return mode == CostMode::unit ? "unit" : "time"; }

// Lowest encoded level inside the bounds that maps to a positive RAW value.
double reliable_raw_floor(const CameraProfile& profile, const CaptureBounds& bounds) {
    for (int p = bounds.i_min; p <= bounds.i_max; ++p)
        if (profile.raw_of_pixel(p) > 0.0)
            return profile.raw_of_pixel(p);
    throw InfeasibleError("capture bounds admit no positive RAW value");
}

Selection ladder_selection(const ExposureLadder& ladder, std::vector<int> columns) {
    std::sort(columns.begin(), columns.end());
    columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
    Selection sel;
    sel.columns = std::move(columns);
    for (int c : sel.columns)
        sel.total_cost += ladder.cost(c);
    return sel;
}

std::vector<double> shutters_of(const ExposureLadder& ladder, const std::vector<int>& columns) {
    std::vector<double> out;
    for (int c : columns)
        out.push_back(ladder.shutters[static_cast<std::size_t>(c - 1)]);
    return out;
}

// Everything the selection stage produces; benchmarks reuse it.
struct Prepared {
    RunConfig cfg;
    ExposureLadder ladder;
    std::vector<LdrImage> stack;
    std::optional<SceneIrradiance> scene;
    CoverageInstance coverage;
    SelectionReport report;
};

Prepared prepare(const RunConfig& cfg_in) {
    cfg_in.validate();
    Prepared run;
    run.cfg = cfg_in;
    const RunConfig& cfg = run.cfg;
    const CameraProfile& profile = cfg.profile;
    SelectionReport& report = run.report;
    report.seed = cfg.seed;

    // Capture bounds first: scene placement depends on them.
    CaptureBounds bounds;
    bounds.snr_threshold_db = cfg.snr_threshold_db;
    bounds.i_min = cfg.imin_mode == IminMode::fixed ? cfg.i_min : compute_imin(profile, cfg.snr_threshold_db);
    bounds.i_max = cfg.i_max;
    if (bounds.i_min > bounds.i_max)
        throw InfeasibleError("i_min " + std::to_string(bounds.i_min) + " exceeds i_max " + std::to_string(bounds.i_max));

    // Step 1: preview sweep.
    auto start = Clock::now();
    run.ladder = cfg.ladder;
    run.ladder.gain = profile.iso_gain;
    if (cfg.stack_dir) {
        run.stack = read_stack_dir(*cfg.stack_dir);
        run.ladder.shutters.clear();
        for (const auto& img : run.stack)
            run.ladder.shutters.push_back(img.shutter);
        try {
            run.ladder.validate();
        } catch (const DomainError& ex) {
            throw IoError(std::string("stack manifest: ") + ex.what());
        }
        report.input = "stack:" + cfg.stack_dir->string();
    } else {
        const SimulationSpec& sim = *cfg.simulate;
        SceneIrradiance scene = make_scene(sim.kind, sim.width, sim.height, sim.span_stops, derive_seed(cfg.seed, 100));
        scene.channel_scale = sim.channel_scale;
        const double scale = placement_scale(scene, profile, run.ladder, bounds, sim.scene_to_raw);
        scene.values *= scale;
        report.scene_scale = scale;
        SimOptions opts{sim.noise_on, sim.scene_to_raw, sim.channels};
        run.stack = sweep_stack(scene, profile, run.ladder, derive_seed(cfg.seed, 1), opts);
        run.scene = std::move(scene);
        std::ostringstream desc;
        desc << "simulate:" << to_string(sim.kind) << ":w=" << sim.width << ",h=" << sim.height
             << ",span=" << sim.span_stops << ",noise=" << (sim.noise_on ? 1 : 0) << ",channels=" << sim.channels;
        report.input = desc.str();
    }
    report.timings_ms["load_stack"] = ms_since(start);

    // Step 2: classification.
    start = Clock::now();
    if (cfg.imax_mode == ImaxMode::estimated) {
        if (run.stack.front().channels != 3)
            throw ConfigError("--imax auto requires a 3-channel stack");
        bounds.i_max = estimate_imax(run.stack, cfg.imax_epsilon);
        if (bounds.i_min > bounds.i_max)
            throw InfeasibleError("estimated i_max falls below i_min");
    }
    report.bounds = bounds;
    run.coverage = coverage_intervals(run.stack, bounds);
    report.timings_ms["classify"] = ms_since(start);

    report.ladder_size = run.coverage.n;
    report.pixel_count = run.coverage.pixel_count;
    report.distinct_intervals = run.coverage.rows.size();
    report.uncoverable_pixels = run.coverage.uncoverable_count;
    report.repaired_rows = run.coverage.repaired_count;
    if (run.coverage.rows.empty())
        throw InfeasibleError("no pixel is accurately captured by any exposure");

    // Step 3: set covering.
    start = Clock::now();
    const auto weights = run.ladder.weights();
    const WeightedInstance inst = WeightedInstance::from_coverage(run.coverage, weights);
    Selection sel;
    if (run.ladder.cost_mode == CostMode::unit) {
        const UnitSolveResult unit = solve_unit_detailed(inst);
        sel = unit.selection;
        report.reduction_sufficient = unit.reduction_sufficient;
        const Reduction red = reduce(inst);
        report.reduced_rows = red.instance.rows.size();
        report.reduced_columns = static_cast<std::uint64_t>(red.instance.n);
    } else {
        const Reduction red = reduce(inst);
        const Selection reduced = solve_weighted(red.instance);
        for (int c : reduced.columns)
            sel.columns.push_back(red.column_map[static_cast<std::size_t>(c - 1)]);
        sel.total_cost = selection_cost(inst, sel.columns);
        report.reduced_rows = red.instance.rows.size();
        report.reduced_columns = static_cast<std::uint64_t>(red.instance.n);
    }
    if (!verify_cover(inst, sel))
        throw std::logic_error("solver returned a selection that does not cover the instance");
    report.timings_ms["solve"] = ms_since(start);

    report.selected_indices = sel.columns;
    report.selected_shutters = shutters_of(run.ladder, sel.columns);
    report.total_cost = sel.total_cost;
    report.cost_mode = run.ladder.cost_mode;
    return run;
}

void maybe_write(const Prepared& run) {
    if (!run.cfg.out_dir)
        return;
    write_report(*run.cfg.out_dir, run.report);
    if (run.cfg.dump_instance) {
        std::ofstream os(*run.cfg.out_dir / "instance.txt");
        if (!os)
            throw IoError("cannot write instance dump");
        write_instance(os, run.coverage);
    }
}

} // namespace

ExposureLadder parse_ladder(const std::string& desc) {
    ExposureLadder ladder;
    if (desc == "canon55") {
        ladder = ExposureLadder::geometric(1.0 / 8000.0, 1.0 / 3.0, 55);
    } else if (desc == "survey9") {
        ladder = ExposureLadder::geometric(1.0 / 1000.0, 1.0, 9);
    } else if (desc.rfind("geom:", 0) == 0) {
        const auto parts = split(desc.substr(5), ':');
        if (parts.size() != 3)
            throw ConfigError("ladder 'geom:FIRST:STEP:COUNT' expects three fields");
        int count = 0;
        try {
            count = std::stoi(parts[2]);
        } catch (const std::exception&) {
            throw ConfigError("ladder count '" + parts[2] + "' is not an integer");
        }
        try {
            ladder = ExposureLadder::geometric(parse_time(parts[0]), parse_time(parts[1]), count);
        } catch (const DomainError& ex) {
            throw ConfigError(std::string("ladder: ") + ex.what());
        }
    } else {
        for (const auto& tok : split(desc, ','))
            ladder.shutters.push_back(parse_time(tok));
    }
    try {
        ladder.validate();
    } catch (const DomainError& ex) {
        throw ConfigError(std::string("ladder: ") + ex.what());
    }
    return ladder;
}

SimulationSpec parse_simulation(const std::string& desc) {
    SimulationSpec sim;
    const auto colon = desc.find(':');
    try {
        sim.kind = parse_scene_kind(desc.substr(0, colon));
    } catch (const DomainError& ex) {
        throw ConfigError(ex.what());
    }
    if (colon == std::string::npos)
        return sim;
    for (const auto& kv : split(desc.substr(colon + 1), ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("simulation option '" + kv + "' is not key=value");
        const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
        try {
            if (key == "w")
                sim.width = std::stoi(value);
            else if (key == "h")
                sim.height = std::stoi(value);
            else if (key == "span")
                sim.span_stops = std::stod(value);
            else if (key == "noise")
                sim.noise_on = std::stoi(value) != 0;
            else if (key == "channels")
                sim.channels = std::stoi(value);
            else if (key == "k")
                sim.scene_to_raw = std::stod(value);
            else
                throw ConfigError("unknown simulation option '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad value for simulation option '" + key + "'");
        }
    }
    if (sim.width <= 0 || sim.height <= 0 || !(sim.span_stops >= 0.0) || !(sim.scene_to_raw > 0.0) ||
        (sim.channels != 1 && sim.channels != 3))
        throw ConfigError("simulation description out of range");
    if (sim.channels == 3)
        sim.channel_scale = std::array<double, 3>{0.8, 1.0, 0.6};
    return sim;
}

void RunConfig::validate() const {
    if (stack_dir.has_value() == simulate.has_value())
        throw ConfigError("exactly one of --stack-dir and --simulate is required");
    try {
        profile.validate();
        ladder.validate();
    } catch (const DomainError& ex) {
        throw ConfigError(ex.what());
    }
    if (i_min < 0 || i_min > kMaxLevel || i_max < 0 || i_max > kMaxLevel)
        throw ConfigError("--imin/--imax must lie in 0..255");
    if (!(imax_epsilon >= 0.0 && imax_epsilon < 1.0))
        throw ConfigError("i_max epsilon must lie in [0, 1)");
    if (bracket_count < 1 || !(bracket_step_stops > 0.0))
        throw ConfigError("bracket baseline needs count >= 1 and a positive step");
}

double placement_scale(const SceneIrradiance& scene, const CameraProfile& profile, const ExposureLadder& ladder,
                       const CaptureBounds& bounds, double scene_to_raw) {
    scene.validate();
    ladder.validate();
    const double window_lo = reliable_raw_floor(profile, bounds) / ladder.shutters.back();
    const double window_hi = profile.raw_of_pixel(bounds.i_max) / ladder.shutters.front();
    const double window_center = std::sqrt(window_lo * window_hi);
    const double scene_center = std::sqrt(scene.values.minCoeff() * scene.values.maxCoeff());
    return window_center / (scene_center * scene_to_raw);
}

Selection baseline_bracket(const ExposureLadder& ladder, int center_index, double step_stops, int count) {
    ladder.validate();
    if (count < 1)
        throw DomainError("baseline_bracket: count must be >= 1");
    if (center_index < 1 || center_index > ladder.size())
        throw DomainError("baseline_bracket: center index outside the ladder");
    const int n = ladder.size();
    const double spacing =
        n > 1 ? std::log2(ladder.shutters.back() / ladder.shutters.front()) / (n - 1) : 1.0;
    const int stride = std::max(1, static_cast<int>(std::lround(step_stops / spacing)));
    std::vector<int> cols;
    for (int k = 0; k < count; ++k) {
        const int offset = k - count / 2;
        cols.push_back(std::clamp(center_index + offset * stride, 1, n));
    }
    return ladder_selection(ladder, std::move(cols));
}

ExtentSelection baseline_extent(const HdrHistogram& hist, const CameraProfile& profile,
                                const ExposureLadder& ladder, const CaptureBounds& bounds, double p_lo,
                                double p_hi) {
    ladder.validate();
    bounds.validate();
    const auto [e_lo, e_hi] = extent_from_histogram(hist, p_lo, p_hi);
    const double raw_lo = std::log10(reliable_raw_floor(profile, bounds));
    const double raw_hi = std::log10(profile.raw_of_pixel(bounds.i_max));

    const int n = ladder.size();
    auto window_lo = [&](int j) { return raw_lo - std::log10(ladder.shutters[static_cast<std::size_t>(j - 1)]); };
    auto window_hi = [&](int j) { return raw_hi - std::log10(ladder.shutters[static_cast<std::size_t>(j - 1)]); };

    ExtentSelection out;
    std::vector<int> picks;
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    double current = e_lo;
    // Windows shrink toward darker irradiance as shutters lengthen.
    while (true) {
        int pick = 0;
        for (int j = 1; j <= n; ++j) {
            if (used[static_cast<std::size_t>(j)] || window_lo(j) > current || window_hi(j) < current)
                continue;
            if (pick == 0 || window_hi(j) > window_hi(pick))
                pick = j;
        }
        if (pick == 0) {
            // Nothing covers the current low end: jump to the nearest window above it.
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)] || window_lo(j) <= current)
                    continue;
                if (pick == 0 || window_lo(j) < window_lo(pick))
                    pick = j;
            }
            if (pick == 0) {
                out.uncovered_log10 += std::max(0.0, e_hi - current);
                break;
            }
            out.uncovered_log10 += std::min(window_lo(pick), e_hi) - current;
            if (window_lo(pick) >= e_hi)
                break;
        }
        used[static_cast<std::size_t>(pick)] = 1;
        picks.push_back(pick);
        if (window_hi(pick) >= e_hi)
            break;
        current = window_hi(pick);
    }
    out.selection = ladder_selection(ladder, std::move(picks));
    return out;
}

SelectionReport run_select(const RunConfig& cfg) {
    Prepared run = prepare(cfg);
    maybe_write(run);
    return run.report;
}

SelectionReport run_benchmark(const RunConfig& cfg, const std::vector<std::string>& methods) {
    if (!cfg.simulate)
        throw ConfigError("benchmark mode requires --simulate (ground truth is needed)");
    for (const auto& m : methods)
        if (std::find(kBenchmarkMethods.begin(), kBenchmarkMethods.end(), m) == kBenchmarkMethods.end())
            throw ConfigError("unknown benchmark method '" + m + "'");

    Prepared run = prepare(cfg);
    if (methods.empty()) {
        maybe_write(run);
        return run.report;
    }
    const SimulationSpec& sim = *cfg.simulate;
    const SceneIrradiance& scene = *run.scene;
    const CameraProfile& profile = cfg.profile;

    // Steps 4-5 stand-in: full-resolution RAW captures at every shutter.
    auto start = Clock::now();
    const SimOptions raw_opts{sim.noise_on, sim.scene_to_raw, 1};
    const std::vector<RawImage> raws = sweep_raw(scene, profile, run.ladder, derive_seed(cfg.seed, 2), raw_opts);
    run.report.timings_ms["simulate_raw"] = ms_since(start);

    for (const auto& name : methods) {
        MethodResult result;
        result.method = name;
        start = Clock::now();
        if (name == "setcover") {
            result.selection.columns = run.report.selected_indices;
            result.selection.total_cost = run.report.total_cost;
        } else if (name == "bracket") {
            // Center on the exposure that captures the most pixels accurately.
            std::vector<std::uint64_t> hits(static_cast<std::size_t>(run.ladder.size()) + 1, 0);
            for (const auto& r : run.coverage.rows)
                for (int j = r.lo; j <= r.hi; ++j)
                    hits[static_cast<std::size_t>(j)] += r.multiplicity;
            const int center = static_cast<int>(std::max_element(hits.begin() + 1, hits.end()) - hits.begin());
            result.selection = baseline_bracket(run.ladder, center, cfg.bracket_step_stops, cfg.bracket_count);
        } else if (name == "extent") {
            const HdrHistogram hist = hdr_histogram(run.stack, profile, run.report.bounds);
            const ExtentSelection ext =
                baseline_extent(hist, profile, run.ladder, run.report.bounds, cfg.extent_p_lo, cfg.extent_p_hi);
            result.selection = ext.selection;
            result.uncovered_log10 = ext.uncovered_log10;
        } else {
            std::vector<int> all(static_cast<std::size_t>(run.ladder.size()));
            std::iota(all.begin(), all.end(), 1);
            result.selection = ladder_selection(run.ladder, std::move(all));
        }
        result.select_ms = ms_since(start);
        result.shutters = shutters_of(run.ladder, result.selection.columns);

        start = Clock::now();
        std::vector<RawImage> chosen;
        for (int c : result.selection.columns)
            chosen.push_back(raws[static_cast<std::size_t>(c - 1)]);
        if (!chosen.empty()) {
            const IrradianceMap merged = merge_hdr(chosen, profile);
            try {
                const LogMse mse = log_mse(merged, scene);
                result.log_mse = mse.value;
                result.sentinel_pixels = mse.sentinel_pixels;
            } catch (const InfeasibleError&) {
                result.sentinel_pixels = merged.sentinel_count();
            }
        }
        result.merge_ms = ms_since(start);
        run.report.methods.push_back(std::move(result));
    }
    maybe_write(run);
    return run.report;
}

json SelectionReport::to_json(bool include_timings) const {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["input"] = input;
    j["seed"] = seed;
    j["selected_indices"] = selected_indices;
    j["selected_shutters"] = selected_shutters;
    j["total_cost"] = total_cost;
    j["cost_mode"] = cost_mode_name(cost_mode);
    j["bounds"] = {{"i_min", bounds.i_min}, {"i_max", bounds.i_max}, {"snr_threshold_db", bounds.snr_threshold_db}};
    j["counts"] = {{"ladder_size", ladder_size},
                   {"pixels", pixel_count},
                   {"distinct_intervals", distinct_intervals},
                   {"uncoverable_pixels", uncoverable_pixels},
                   {"uncoverable_fraction", uncoverable_fraction()},
                   {"repaired_rows", repaired_rows},
                   {"reduced_rows", reduced_rows},
                   {"reduced_columns", reduced_columns}};
    j["reduction_sufficient"] = reduction_sufficient;
    if (scene_scale)
        j["scene_scale"] = *scene_scale;
    if (include_timings)
        j["timings_ms"] = timings_ms;
    json ms = json::array();
    for (const auto& m : methods) {
        json e;
        e["method"] = m.method;
        e["columns"] = m.selection.columns;
        e["shutters"] = m.shutters;
        e["count"] = m.selection.columns.size();
        e["total_cost"] = m.selection.total_cost;
        e["log_mse"] = m.log_mse ? json(*m.log_mse) : json(nullptr);
        e["sentinel_pixels"] = m.sentinel_pixels;
        if (m.uncovered_log10)
            e["uncovered_log10"] = *m.uncovered_log10;
        if (include_timings)
            e["timings_ms"] = {{"select", m.select_ms}, {"merge", m.merge_ms}};
        ms.push_back(std::move(e));
    }
    if (!methods.empty())
        j["methods"] = std::move(ms);
    return j;
}

void write_report(const fs::path& dir, const SelectionReport& report) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    {
        std::ofstream os(dir / "report.json");
        if (!os)
            throw IoError("cannot write " + (dir / "report.json").string());
        os << report.to_json().dump(2) << '\n';
    }
    if (report.methods.empty())
        return;
    std::ofstream csv(dir / "methods.csv");
    if (!csv)
        throw IoError("cannot write " + (dir / "methods.csv").string());
    csv.precision(17);
    csv << "method,count,total_cost,log_mse,sentinel_pixels\n";
    for (const auto& m : report.methods) {
        csv << m.method << ',' << m.selection.columns.size() << ',' << m.selection.total_cost << ',';
        if (m.log_mse)
            csv << *m.log_mse;
        csv << ',' << m.sentinel_pixels << '\n';
    }
}

} // namespace hdrsel
