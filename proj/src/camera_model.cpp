// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#include "hdrsel/camera_model.hpp"

#include <algorithm>
#include <set>
#include <string>

#include <Eigen/Dense>

namespace hdrsel {

ResponseFunction::ResponseFunction(const Table& lut, Source source, double gamma)
    : lut_(lut), source_(source), gamma_(gamma) {
    if (lut_.front() != 0.0 || lut_.back() != 1.0)
        throw DomainError("response table must satisfy lut[0] = 0 and lut[255] = 1");
    for (int p = 1; p < kLevels; ++p) {
        if (!std::isfinite(lut_[p]) || lut_[p] < lut_[p - 1])
            throw DomainError("response table must be non-decreasing (level " + std::to_string(p) + ")");
    }
}

ResponseFunction ResponseFunction::gamma(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw DomainError("gamma must be positive");
    Table lut{};
    for (int p = 0; p < kLevels; ++p)
        lut[p] = std::pow(static_cast<double>(p) / kMaxLevel, gamma);
    lut.front() = 0.0;
    lut.back() = 1.0;
    return ResponseFunction(lut, Source::gamma, gamma);
}

int ResponseFunction::apply(double raw_norm) const {
    if (!(raw_norm >= 0.0 && raw_norm <= 1.0))
        throw DomainError("response_apply: raw value outside [0, 1]");
    const auto it = std::upper_bound(lut_.begin(), lut_.end(), raw_norm);
    return static_cast<int>(it - lut_.begin()) - 1;
}

double ResponseFunction::invert(int pixel) const {
    if (pixel < 0 || pixel > kMaxLevel)
        throw DomainError("response_invert: pixel outside 0..255");
    return lut_[pixel];
}

bool ResponseFunction::strictly_increasing() const {
    return std::adjacent_find(lut_.begin(), lut_.end(), std::greater_equal<>()) == lut_.end();
}

int response_apply(const ResponseFunction& rf, double raw_norm) { return rf.apply(raw_norm); }

double response_invert(const ResponseFunction& rf, int pixel) { return rf.invert(pixel); }

ResponseFunction gamma_response(double gamma) { return ResponseFunction::gamma(gamma); }

ResponseFunction fit_response(std::span<const ResponseSample> pairs) {
    if (pairs.size() < 2)
        throw FitError("fit_response: at least two samples are required");

    std::array<double, kLevels> sum{};
    std::array<double, kLevels> weight{};
    int lo = kMaxLevel, hi = 0;
    for (const auto& s : pairs) {
        if (s.pixel < 0 || s.pixel > kMaxLevel || !(s.raw_norm >= 0.0 && s.raw_norm <= 1.0))
            throw DomainError("fit_response: sample outside the valid range");
        sum[s.pixel] += s.raw_norm;
        weight[s.pixel] += 1.0;
        lo = std::min(lo, s.pixel);
        hi = std::max(hi, s.pixel);
    }
    if (lo > 10 || hi < 245)
        throw FitError("fit_response: samples cover pixel range [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "], need at least [10, 245]");

    // Pool adjacent violators over the populated levels, in level order.
    struct Block {
        double mean;
        double weight;
        int first, last;
    };
    std::vector<Block> blocks;
    for (int p = 0; p < kLevels; ++p) {
        if (weight[p] == 0.0)
            continue;
        blocks.push_back({sum[p] / weight[p], weight[p], p, p});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
            Block top = blocks.back();
            blocks.pop_back();
            Block& prev = blocks.back();
            const double w = prev.weight + top.weight;
            prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / w;
            prev.weight = w;
            prev.last = top.last;
        }
    }

    std::array<double, kLevels> value{};
    std::array<bool, kLevels> known{};
    for (const auto& b : blocks) {
        for (int p = b.first; p <= b.last; ++p) {
            if (weight[p] > 0.0) {
                value[p] = b.mean;
                known[p] = true;
            }
        }
    }
    value[0] = 0.0;
    value[kMaxLevel] = 1.0;
    known[0] = known[kMaxLevel] = true;

    ResponseFunction::Table lut{};
    int prev = 0;
    for (int p = 1; p < kLevels; ++p) {
        if (!known[p])
            continue;
        for (int q = prev; q <= p; ++q) {
            const double a = static_cast<double>(q - prev) / (p - prev);
            lut[q] = value[prev] + a * (value[p] - value[prev]);
        }
        prev = p;
    }
    lut[0] = 0.0;
    lut[kMaxLevel] = 1.0;
    for (int p = 1; p < kLevels; ++p)
        lut[p] = std::clamp(lut[p], lut[p - 1], 1.0);
    return ResponseFunction(lut, ResponseFunction::Source::fitted);
}

void NoiseModel::validate() const {
    if (!(read_noise >= 0.0) || !(const_noise >= 0.0))
        throw DomainError("noise model requires r >= 0 and c >= 0");
    if (!(mu_sat >= 1.0) || mu_sat != std::floor(mu_sat))
        throw DomainError("noise model requires an integer mu_sat >= 1");
}

NoiseModel fit_noise_model(std::span<const NoiseSample> samples, double mu_sat) {
    if (samples.size() < 3)
        throw FitError("fit_noise_model: at least three samples are required");
    std::set<double> mus, gains;
    for (const auto& s : samples) {
        if (!(s.mu >= 0.0) || !(s.sigma >= 0.0) || !(s.gain > 0.0))
            throw DomainError("fit_noise_model: invalid sample");
        mus.insert(s.mu);
        gains.insert(s.gain);
    }
    if (mus.size() < 2)
        throw FitError("fit_noise_model: samples must span at least two distinct mu values");

    const auto m = static_cast<Eigen::Index>(samples.size());
    const bool separable = gains.size() >= 2;
    Eigen::MatrixXd design(m, separable ? 2 : 1);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        const double var = s.sigma * s.sigma;
        // Relative weighting: perturbations scale with sigma^2.
        const double w = var > 0.0 ? 1.0 / var : 1.0;
        design(i, 0) = s.gain * s.gain * w;
        if (separable)
            design(i, 1) = w;
        rhs(i) = (var - s.mu * s.gain) * w;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < design.cols())
        throw FitError("fit_noise_model: degenerate design matrix");
    const Eigen::VectorXd x = qr.solve(rhs);
    if (!x.allFinite())
        throw FitError("fit_noise_model: non-finite solution");

    NoiseModel nm;
    nm.read_noise = std::sqrt(std::max(0.0, x(0)));
    nm.const_noise = separable ? std::sqrt(std::max(0.0, x(1))) : 0.0;
    nm.mu_sat = mu_sat;
    nm.validate();
    return nm;
}

void CameraProfile::validate() const {
    noise.validate();
    if (!(iso_gain > 0.0) || !std::isfinite(iso_gain))
        throw DomainError("camera profile requires iso_gain > 0");
}

} // namespace hdrsel
