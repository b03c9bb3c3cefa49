// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hdrsel/camera_model.hpp"
#include "hdrsel/capture_sim.hpp"

namespace hdrsel {

inline constexpr int kDefaultImin = 20;
inline constexpr int kDefaultImax = 230;
inline constexpr double kDefaultSnrThresholdDb = 20.0;

/// Inclusive range of encoded values counted as accurately captured.
struct CaptureBounds {
    int i_min = kDefaultImin;
    int i_max = kDefaultImax;
    double snr_threshold_db = kDefaultSnrThresholdDb;

    void validate() const;
    bool contains(int gray) const { return gray >= i_min && gray <= i_max; }
};

/// BT.601 luma, rounded half-up.
constexpr int grayscale(int r, int g, int b) { return (299 * r + 587 * g + 114 * b + 500) / 1000; }

/// Grayscale plane of an image (the image itself if it is single channel).
std::vector<std::uint8_t> grayscale_plane(const LdrImage& img);

/// Darkest encoded value whose RAW estimate reaches the SNR threshold.
/// Throws InfeasibleError when no value qualifies.
int compute_imin(const CameraProfile& profile, double snr_threshold_db);

/// Brightest grayscale level below the first populated level at which more
/// than `epsilon` of the pixels have two or more saturated channels.
int estimate_imax(std::span<const LdrImage> stack, double epsilon);

/// One distinct coverage interval over 1-based ladder columns.
struct CoverageRow {
    int lo;
    int hi;
    std::uint64_t multiplicity;

    friend bool operator==(const CoverageRow&, const CoverageRow&) = default;
};

struct CoverageInstance {
    int n = 0;
    std::vector<CoverageRow> rows; // sorted by (lo, hi), distinct
    std::uint64_t uncoverable_count = 0;
    std::uint64_t repaired_count = 0;
    std::uint64_t pixel_count = 0;
    /// Pixel -> index into `rows`, or -1 for uncoverable pixels.
    std::optional<std::vector<std::int32_t>> origin_map;

    std::uint64_t total_multiplicity() const;
    void validate() const;
};

/// Classifies every pixel of an increasing-shutter stack and compacts each
/// pixel's covered exposures into one interval. Non-consecutive covered sets
/// keep their longest run (lowest start on ties) and are counted as repaired.
CoverageInstance coverage_intervals(std::span<const LdrImage> stack, const CaptureBounds& bounds,
                                    bool keep_origin_map = false);

/// Text dump: header `n uncoverable_count`, then `lo hi multiplicity` lines.
void write_instance(std::ostream& os, const CoverageInstance& inst);
CoverageInstance read_instance(std::istream& is);

} // namespace hdrsel
