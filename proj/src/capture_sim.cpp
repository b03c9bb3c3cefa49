// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#include "hdrsel/capture_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace hdrsel {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Box-Muller over mt19937_64. std::normal_distribution is not specified
// bit-for-bit across standard libraries, and sweeps must reproduce exactly.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0)
            u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 1));
}

void SceneIrradiance::validate() const {
    if (values.rows() == 0 || values.cols() == 0)
        throw DomainError("scene must have positive dimensions");
    if (!values.allFinite() || (values <= 0.0).any())
        throw DomainError("scene irradiance must be positive and finite");
    if (channel_scale) {
        for (double s : *channel_scale)
            if (!(s > 0.0) || !std::isfinite(s))
                throw DomainError("channel scale must be positive");
    }
}

LdrImage::LdrImage(int w, int h, int ch, double t, double g)
    : width(w), height(h), channels(ch),
      pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(ch), 0),
      shutter(t), gain(g) {
    validate();
}

void LdrImage::validate() const {
    if (width <= 0 || height <= 0)
        throw DomainError("image must have positive dimensions");
    if (channels != 1 && channels != 3)
        throw DomainError("image must have 1 or 3 channels");
    if (!(shutter > 0.0))
        throw DomainError("image shutter must be positive");
    if (pixels.size() != pixel_count() * static_cast<std::size_t>(channels))
        throw DomainError("image pixel buffer has the wrong size");
}

double ExposureLadder::cost(int j) const {
    if (j < 1 || j > size())
        throw DomainError("ladder column out of range");
    return cost_mode == CostMode::unit ? 1.0 : shutters[static_cast<std::size_t>(j - 1)] + t_over;
}

std::vector<double> ExposureLadder::weights() const {
    std::vector<double> w(shutters.size());
    for (int j = 1; j <= size(); ++j)
        w[static_cast<std::size_t>(j - 1)] = cost(j);
    return w;
}

void ExposureLadder::validate() const {
    if (shutters.empty())
        throw DomainError("exposure ladder must not be empty");
    if (!(shutters.front() > 0.0))
        throw DomainError("shutter times must be positive");
    for (std::size_t i = 1; i < shutters.size(); ++i)
        if (!(shutters[i] > shutters[i - 1]))
            throw DomainError("shutter times must be strictly increasing");
    if (!(gain > 0.0))
        throw DomainError("ladder gain must be positive");
    if (!(t_over >= 0.0))
        throw DomainError("t_over must be non-negative");
}

ExposureLadder ExposureLadder::geometric(double first, double step_stops, int count) {
    if (count < 1 || !(first > 0.0) || !(step_stops > 0.0))
        throw DomainError("geometric ladder requires count >= 1, first > 0, step > 0");
    ExposureLadder ladder;
    ladder.shutters.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        ladder.shutters.push_back(first * std::exp2(step_stops * i));
    return ladder;
}

SceneKind parse_scene_kind(const std::string& name) {
    if (name == "log_gradient")
        return SceneKind::log_gradient;
    if (name == "bimodal")
        return SceneKind::bimodal;
    if (name == "spotlight")
        return SceneKind::spotlight;
    throw DomainError("unknown scene kind '" + name + "'");
}

std::string to_string(SceneKind kind) {
    switch (kind) {
    case SceneKind::log_gradient:
        return "log_gradient";
    case SceneKind::bimodal:
        return "bimodal";
    case SceneKind::spotlight:
        return "spotlight";
    }
    return "unknown";
}

SceneIrradiance make_scene(SceneKind kind, int width, int height, double span_stops, std::uint64_t seed) {
    if (width <= 0 || height <= 0)
        throw DomainError("make_scene: dimensions must be positive");
    if (!(span_stops >= 0.0) || !std::isfinite(span_stops))
        throw DomainError("make_scene: span_stops must be non-negative");

    SceneIrradiance scene;
    scene.values.resize(height, width);
    GaussianSource rng(seed);

    switch (kind) {
    case SceneKind::log_gradient: {
        for (int x = 0; x < width; ++x) {
            const double a = width > 1 ? static_cast<double>(x) / (width - 1) : 0.0;
            scene.values.col(x).setConstant(std::exp2(span_stops * a));
        }
        break;
    }
    case SceneKind::bimodal: {
        // A bright Gaussian-profile blob on a dark background; both
        // populations carry +-0.25 stop uniform jitter.
        const double cx = (0.3 + 0.4 * rng.uniform()) * width;
        const double cy = (0.3 + 0.4 * rng.uniform()) * height;
        const double radius = std::max(1.0, 0.3 * std::min(width, height));
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                const double profile = std::exp(-d2 / (2.0 * radius * radius));
                const double level = profile > 0.5 ? span_stops : 0.0;
                const double jitter = 0.5 * rng.uniform() - 0.25;
                scene.values(y, x) = std::exp2(level + jitter);
            }
        }
        break;
    }
    case SceneKind::spotlight: {
        const double cx = (0.25 + 0.5 * rng.uniform()) * width;
        const double cy = (0.25 + 0.5 * rng.uniform()) * height;
        const double radius = std::max(1.0, 0.15 * std::min(width, height));
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                scene.values(y, x) = d2 <= radius * radius ? std::exp2(span_stops) : 1.0;
            }
        }
        break;
    }
    }
    return scene;
}

RawImage simulate_raw(const SceneIrradiance& scene, const CameraProfile& profile, double shutter,
                      std::uint64_t seed, const SimOptions& opts, double channel_scale) {
    if (!(shutter > 0.0))
        throw DomainError("simulate_raw: shutter must be positive");
    const double mu_sat = profile.noise.mu_sat;
    const double g = profile.iso_gain;

    RawImage raw;
    raw.shutter = shutter;
    raw.gain = g;
    raw.mu = scene.values * (shutter * opts.scene_to_raw * channel_scale);
    if (opts.noise_on) {
        GaussianSource rng(seed);
        const double floor = profile.noise.read_noise * profile.noise.read_noise * g * g +
                             profile.noise.const_noise * profile.noise.const_noise;
        for (Eigen::Index i = 0; i < raw.mu.size(); ++i) {
            double& mu = raw.mu.data()[i];
            mu += std::sqrt(mu * g + floor) * rng();
        }
    }
    raw.mu = raw.mu.max(0.0).min(mu_sat);
    return raw;
}

LdrImage encode(std::span<const RawImage> planes, const CameraProfile& profile) {
    if (planes.size() != 1 && planes.size() != 3)
        throw DomainError("encode: expected 1 or 3 planes");
    const auto& first = planes.front();
    LdrImage img(static_cast<int>(first.mu.cols()), static_cast<int>(first.mu.rows()),
                 static_cast<int>(planes.size()), first.shutter, first.gain);
    const double inv_sat = 1.0 / profile.noise.mu_sat;
    for (std::size_t c = 0; c < planes.size(); ++c) {
        const auto& mu = planes[c].mu;
        if (mu.rows() != first.mu.rows() || mu.cols() != first.mu.cols())
            throw DomainError("encode: plane dimensions differ");
        for (Eigen::Index i = 0; i < mu.size(); ++i) {
            const double v = std::clamp(mu.data()[i] * inv_sat, 0.0, 1.0);
            img.pixels[static_cast<std::size_t>(i) * planes.size() + c] =
                static_cast<std::uint8_t>(profile.response.apply(v));
        }
    }
    return img;
}

LdrImage simulate_capture(const SceneIrradiance& scene, const CameraProfile& profile, double shutter,
                          std::uint64_t seed, const SimOptions& opts) {
    scene.validate();
    if (opts.channels == 1) {
        const RawImage raw = simulate_raw(scene, profile, shutter, seed, opts);
        return encode(std::span(&raw, 1), profile);
    }
    if (opts.channels != 3)
        throw DomainError("simulate_capture: channels must be 1 or 3");
    const std::array<double, 3> scale = scene.channel_scale.value_or(std::array<double, 3>{1.0, 1.0, 1.0});
    std::vector<RawImage> planes;
    for (std::uint64_t c = 0; c < 3; ++c)
        planes.push_back(simulate_raw(scene, profile, shutter, derive_seed(seed, c), opts, scale[c]));
    return encode(planes, profile);
}

std::vector<LdrImage> sweep_stack(const SceneIrradiance& scene, const CameraProfile& profile,
                                  const ExposureLadder& ladder, std::uint64_t seed, const SimOptions& opts) {
    ladder.validate();
    std::vector<LdrImage> stack;
    stack.reserve(ladder.shutters.size());
    for (std::size_t i = 0; i < ladder.shutters.size(); ++i)
        stack.push_back(simulate_capture(scene, profile, ladder.shutters[i], derive_seed(seed, i), opts));
    return stack;
}

std::vector<RawImage> sweep_raw(const SceneIrradiance& scene, const CameraProfile& profile,
                                const ExposureLadder& ladder, std::uint64_t seed, const SimOptions& opts) {
    ladder.validate();
    scene.validate();
    std::vector<RawImage> frames;
    frames.reserve(ladder.shutters.size());
    for (std::size_t i = 0; i < ladder.shutters.size(); ++i)
        frames.push_back(simulate_raw(scene, profile, ladder.shutters[i], derive_seed(seed, i), opts));
    return frames;
}

} // namespace hdrsel
