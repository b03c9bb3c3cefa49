// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "hdrsel/capture_sim.hpp"
#include "hdrsel/exposure_classify.hpp"

namespace hdrsel {

/// Reconstructed relative irradiance (RAW units per second). Pixels without
/// any usable sample hold kNoSample.
struct IrradianceMap {
    static constexpr double kNoSample = -1.0;

    RasterD values;

    int width() const { return static_cast<int>(values.cols()); }
    int height() const { return static_cast<int>(values.rows()); }
    std::size_t sentinel_count() const;
};

/// Inverse-variance merge: E = sum(u*mu/t) / sum(u), u = t^2 / sigma^2(mu).
/// Saturated and zero samples carry no weight.
IrradianceMap merge_hdr(std::span<const RawImage> stack, const CameraProfile& profile);

/// Histogram over log10 irradiance with uniform bins.
struct HdrHistogram {
    std::vector<double> edges;  // bins + 1, strictly increasing
    std::vector<double> counts; // bins

    std::size_t bins() const { return counts.size(); }
    double total() const;
};

inline constexpr int kDefaultHistogramBins = 256;

/// Per-image empirical CDFs over the log irradiance of reliably captured
/// pixels, averaged at each bin edge over the images whose reliable range
/// contains it, then differentiated back into counts.
HdrHistogram hdr_histogram(std::span<const LdrImage> stack, const CameraProfile& profile,
                           const CaptureBounds& bounds, int bins = kDefaultHistogramBins);

/// log10 irradiance at the two percentiles, interpolated within bins. When
/// all mass falls in a single bin it is treated as a point at the bin center.
std::pair<double, double> extent_from_histogram(const HdrHistogram& h, double p_lo, double p_hi);

struct LogMse {
    double value = 0.0;
    std::size_t valid_pixels = 0;
    std::size_t sentinel_pixels = 0;
};

/// Mean squared log10 error after dividing each map by its own median over
/// the pixels that carry a sample in `test`.
LogMse log_mse(const IrradianceMap& test, const SceneIrradiance& truth);

/// CSV with header `bin_lo,bin_hi,count`.
void write_histogram_csv(std::ostream& os, const HdrHistogram& h);

} // namespace hdrsel
