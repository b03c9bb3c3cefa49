// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdrsel/camera_model.hpp"
#include "hdrsel/capture_sim.hpp"
#include "hdrsel/exposure_classify.hpp"
#include "hdrsel/hdr_tools.hpp"
#include "hdrsel/interval_cover.hpp"

namespace hdrsel {

inline constexpr int kReportSchemaVersion = 1;

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitIo = 3, kExitInfeasible = 4 };

/// Parses a ladder description:
///   canon55             55 shutters, 1/3 stop apart, from 1/8000 s
///   survey9             9 shutters, 1 stop apart, from 1/1000 s
///   geom:FIRST:STEP:N   N shutters from FIRST seconds, STEP stops apart
///   T1,T2,...           explicit increasing list
/// Times accept fractions such as 1/8000.
ExposureLadder parse_ladder(const std::string& desc);

struct SimulationSpec {
    SceneKind kind = SceneKind::log_gradient;
    int width = 96;
    int height = 64;
    double span_stops = 12.0;
    bool noise_on = true;
    int channels = 1;
    double scene_to_raw = 1.0;
    std::optional<std::array<double, 3>> channel_scale;
};

/// `KIND[:key=value,...]` with keys w, h, span, noise, channels, k.
SimulationSpec parse_simulation(const std::string& desc);

enum class IminMode { fixed, from_snr };
enum class ImaxMode { fixed, estimated };

struct RunConfig {
    CameraProfile profile;
    std::string profile_source = "default";
    ExposureLadder ladder = ExposureLadder::geometric(1.0 / 8000.0, 1.0 / 3.0, 55);

    IminMode imin_mode = IminMode::fixed;
    ImaxMode imax_mode = ImaxMode::fixed;
    int i_min = kDefaultImin;
    int i_max = kDefaultImax;
    double snr_threshold_db = kDefaultSnrThresholdDb;
    double imax_epsilon = 0.01;

    std::optional<std::filesystem::path> stack_dir;
    std::optional<SimulationSpec> simulate;
    std::optional<std::filesystem::path> out_dir;
    bool dump_instance = false;
    std::uint64_t seed = 1;

    int bracket_count = 3;
    double bracket_step_stops = 2.0;
    double extent_p_lo = 1.0;
    double extent_p_hi = 99.0;

    void validate() const;
};

struct MethodResult {
    std::string method;
    Selection selection;
    std::vector<double> shutters;
    std::optional<double> log_mse;
    std::size_t sentinel_pixels = 0;
    /// Log10 irradiance range left uncovered (extent baseline only).
    std::optional<double> uncovered_log10;
    double select_ms = 0.0;
    double merge_ms = 0.0;
};

struct SelectionReport {
    std::vector<int> selected_indices; // 1-based ladder columns
    std::vector<double> selected_shutters;
    double total_cost = 0.0;
    CostMode cost_mode = CostMode::unit;

    int ladder_size = 0;
    std::uint64_t pixel_count = 0;
    std::uint64_t distinct_intervals = 0;
    std::uint64_t uncoverable_pixels = 0;
    std::uint64_t repaired_rows = 0;
    std::uint64_t reduced_rows = 0;
    std::uint64_t reduced_columns = 0;
    bool reduction_sufficient = true;
    CaptureBounds bounds;

    std::uint64_t seed = 0;
    std::string input;
    std::optional<double> scene_scale;

    std::map<std::string, double> timings_ms;
    std::vector<MethodResult> methods;

    double uncoverable_fraction() const {
        return pixel_count == 0 ? 0.0 : static_cast<double>(uncoverable_pixels) / static_cast<double>(pixel_count);
    }
    nlohmann::json to_json(bool include_timings = true) const;
};

SelectionReport run_select(const RunConfig& cfg);

inline const std::vector<std::string> kBenchmarkMethods = {"setcover", "bracket", "extent", "full_ladder"};

/// Selection plus ground-truth evaluation of each requested method.
SelectionReport run_benchmark(const RunConfig& cfg, const std::vector<std::string>& methods);

/// `count` ladder indices centered on `center_index`, `step_stops` apart,
/// clamped to the ladder and deduplicated.
Selection baseline_bracket(const ExposureLadder& ladder, int center_index, double step_stops, int count);

struct ExtentSelection {
    Selection selection;
    double uncovered_log10 = 0.0;
};

/// Tiles the histogram's extent left to right with each shutter's reliable
/// irradiance window [raw(i_min)/t, raw(i_max)/t].
ExtentSelection baseline_extent(const HdrHistogram& hist, const CameraProfile& profile,
                                const ExposureLadder& ladder, const CaptureBounds& bounds, double p_lo,
                                double p_hi);

/// Factor that centers the scene's log irradiance range on the ladder's
/// combined reliable window.
double placement_scale(const SceneIrradiance& scene, const CameraProfile& profile, const ExposureLadder& ladder,
                       const CaptureBounds& bounds, double scene_to_raw);

/// Writes `report.json`, and for benchmarks `methods.csv`, into `dir`.
void write_report(const std::filesystem::path& dir, const SelectionReport& report);

} // namespace hdrsel
