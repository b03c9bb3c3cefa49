// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hdrsel/camera_model.hpp"

namespace hdrsel {

/// Row-major raster; rows = image height, cols = image width.
template <typename Scalar>
using Raster = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using RasterD = Raster<double>;

struct SceneIrradiance {
    RasterD values;
    /// Per-channel multipliers for 3-channel simulation.
    std::optional<std::array<double, 3>> channel_scale;

    int width() const { return static_cast<int>(values.cols()); }
    int height() const { return static_cast<int>(values.rows()); }
    void validate() const;
};

/// 8-bit encoded image, interleaved channels.
struct LdrImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;
    double shutter = 1.0;
    double gain = 1.0;

    LdrImage() = default;
    LdrImage(int w, int h, int ch, double t, double g);

    std::uint8_t& at(int x, int y, int c = 0) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    void validate() const;
};

/// Linear sensor image in absolute RAW units.
struct RawImage {
    RasterD mu;
    double shutter = 1.0;
    double gain = 1.0;
};

enum class CostMode { unit, capture_time };

struct ExposureLadder {
    std::vector<double> shutters; // strictly increasing, seconds
    double gain = 1.0;
    double t_over = 0.150;
    CostMode cost_mode = CostMode::unit;

    int size() const { return static_cast<int>(shutters.size()); }
    /// Cost of 1-based column j.
    double cost(int j) const;
    std::vector<double> weights() const;
    void validate() const;

    /// `count` shutters starting at `first`, each `step_stops` stops apart.
    static ExposureLadder geometric(double first, double step_stops, int count);
};

enum class SceneKind { log_gradient, bimodal, spotlight };

SceneKind parse_scene_kind(const std::string& name);
std::string to_string(SceneKind kind);

/// Synthetic relative irradiance with min(E) near 1. Deterministic in seed.
SceneIrradiance make_scene(SceneKind kind, int width, int height, double span_stops, std::uint64_t seed);

struct SimOptions {
    bool noise_on = true;
    double scene_to_raw = 1.0; // k in mu = E*t*k
    int channels = 1;
};

/// mu = E*t*k (+ Gaussian noise from the profile), clamped to [0, mu_sat].
RawImage simulate_raw(const SceneIrradiance& scene, const CameraProfile& profile, double shutter,
                      std::uint64_t seed, const SimOptions& opts = {}, double channel_scale = 1.0);

/// Encodes RAW planes (1 or 3) through the response function.
LdrImage encode(std::span<const RawImage> planes, const CameraProfile& profile);

LdrImage simulate_capture(const SceneIrradiance& scene, const CameraProfile& profile, double shutter,
                          std::uint64_t seed, const SimOptions& opts = {});

/// One encoded image per ladder shutter, in ladder order.
std::vector<LdrImage> sweep_stack(const SceneIrradiance& scene, const CameraProfile& profile,
                                  const ExposureLadder& ladder, std::uint64_t seed, const SimOptions& opts = {});

/// RAW-domain captures at every ladder shutter (monochrome).
std::vector<RawImage> sweep_raw(const SceneIrradiance& scene, const CameraProfile& profile,
                                const ExposureLadder& ladder, std::uint64_t seed, const SimOptions& opts = {});

/// Per-image seed for image `index` of a sweep started with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

} // namespace hdrsel
