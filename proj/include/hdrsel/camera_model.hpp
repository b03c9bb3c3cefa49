// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hdrsel/errors.hpp"

namespace hdrsel {

inline constexpr int kLevels = 256;
inline constexpr int kMaxLevel = kLevels - 1;

/// Monotone map between normalized RAW values in [0,1] and 8-bit encoded
/// pixel values. The table is indexed by the encoded value, so lookups in the
/// inverse direction (`invert`) are direct and the forward direction
/// (`apply`) is a binary search.
class ResponseFunction {
public:
    enum class Source { gamma, fitted };

    using Table = std::array<double, kLevels>;

    /// Validates non-decreasing order and the pinned endpoints lut[0] = 0,
    /// lut[255] = 1.
    explicit ResponseFunction(const Table& lut, Source source = Source::fitted, double gamma = 0.0);

    static ResponseFunction gamma(double gamma);

    /// Largest encoded value whose table entry does not exceed `raw_norm`.
    int apply(double raw_norm) const;
    double invert(int pixel) const;

    const Table& lut() const { return lut_; }
    Source source() const { return source_; }
    double gamma_value() const { return gamma_; }
    bool strictly_increasing() const;

private:
    Table lut_;
    Source source_;
    double gamma_;
};

int response_apply(const ResponseFunction& rf, double raw_norm);
double response_invert(const ResponseFunction& rf, int pixel);
ResponseFunction gamma_response(double gamma);

struct ResponseSample {
    int pixel;
    double raw_norm;
};

/// Isotonic (pool-adjacent-violators) fit of a response table to observed
/// (encoded, normalized RAW) pairs. Levels without samples are filled by
/// linear interpolation; the endpoints are pinned to 0 and 1.
ResponseFunction fit_response(std::span<const ResponseSample> pairs);

/// Sensor noise, sigma^2 = mu*g + r^2*g^2 + c^2 in absolute RAW units.
struct NoiseModel {
    double read_noise = 2.0;  // r
    double const_noise = 0.0; // c
    double mu_sat = 4095.0;

    void validate() const;
};

template <typename Scalar>
Scalar noise_sigma(const NoiseModel& nm, Scalar mu, Scalar gain) {
    if (!(mu >= Scalar(0)) || !(gain > Scalar(0)))
        throw DomainError("noise_sigma: requires mu >= 0 and gain > 0");
    const Scalar r = Scalar(nm.read_noise);
    const Scalar c = Scalar(nm.const_noise);
    return std::sqrt(mu * gain + r * r * gain * gain + c * c);
}

/// Coefficient-wise sigma^2 over a RAW raster, as an Eigen expression. Negative entries must be
/// masked by the caller; no domain checks are made here.
template <typename Derived>
auto noise_variance(const NoiseModel& nm, const Eigen::ArrayBase<Derived>& mu, typename Derived::Scalar gain) {
    using Scalar = typename Derived::Scalar;
    const Scalar floor = Scalar(nm.read_noise * nm.read_noise) * gain * gain +
                         Scalar(nm.const_noise * nm.const_noise);
    return mu.derived() * gain + floor;
}

/// 20*log10(mu/sigma). Exactly 0 at or above saturation; -infinity at mu = 0.
template <typename Scalar>
Scalar snr_db(const NoiseModel& nm, Scalar mu, Scalar gain) {
    if (!(mu >= Scalar(0)) || !(gain > Scalar(0)))
        throw DomainError("snr_db: requires mu >= 0 and gain > 0");
    if (mu >= Scalar(nm.mu_sat))
        return Scalar(0);
    if (mu == Scalar(0))
        return -std::numeric_limits<Scalar>::infinity();
    return Scalar(20) * std::log10(mu / noise_sigma(nm, mu, gain));
}

struct NoiseSample {
    double mu;
    double sigma;
    double gain;
};

/// Weighted least-squares fit of (r^2, c^2) in sigma^2 - mu*g = r^2*g^2 + c^2.
/// With a single distinct gain the two terms are not separable; the combined
/// floor is then attributed to read noise and c is reported as 0.
NoiseModel fit_noise_model(std::span<const NoiseSample> samples, double mu_sat = 4095.0);

struct CameraProfile {
    ResponseFunction response = ResponseFunction::gamma(2.2);
    NoiseModel noise{};
    double iso_gain = 1.0;

    void validate() const;

    /// Normalized response value of an encoded pixel, in absolute RAW units.
    double raw_of_pixel(int pixel) const { return response.invert(pixel) * noise.mu_sat; }
};

} // namespace hdrsel
