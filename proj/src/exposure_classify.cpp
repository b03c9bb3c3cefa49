// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#include "hdrsel/exposure_classify.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <string>

namespace hdrsel {

void CaptureBounds::validate() const {
    if (i_min < 0 || i_max > kMaxLevel || i_min > i_max)
        throw DomainError("capture bounds require 0 <= i_min <= i_max <= 255");
}

std::vector<std::uint8_t> grayscale_plane(const LdrImage& img) {
    if (img.channels == 1)
        return img.pixels;
    std::vector<std::uint8_t> gray(img.pixel_count());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const std::uint8_t* px = &img.pixels[i * 3];
        gray[i] = static_cast<std::uint8_t>(grayscale(px[0], px[1], px[2]));
    }
    return gray;
}

int compute_imin(const CameraProfile& profile, double snr_threshold_db) {
    profile.validate();
    for (int p = 0; p < kLevels; ++p) {
        if (snr_db(profile.noise, profile.raw_of_pixel(p), profile.iso_gain) >= snr_threshold_db)
            return p;
    }
    throw InfeasibleError("no pixel value reaches an SNR of " + std::to_string(snr_threshold_db) + " dB");
}

int estimate_imax(std::span<const LdrImage> stack, double epsilon) {
    if (stack.empty())
        throw DomainError("estimate_imax: empty stack");
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw DomainError("estimate_imax: epsilon must lie in [0, 1)");

    std::array<std::uint64_t, kLevels> total{};
    std::array<std::uint64_t, kLevels> clipped{};
    for (const auto& img : stack) {
        if (img.channels != 3)
            throw DomainError("estimate_imax: requires 3-channel images");
        for (std::size_t i = 0; i < img.pixel_count(); ++i) {
            const std::uint8_t* px = &img.pixels[i * 3];
            const int v = grayscale(px[0], px[1], px[2]);
            const int saturated = (px[0] == kMaxLevel) + (px[1] == kMaxLevel) + (px[2] == kMaxLevel);
            ++total[v];
            clipped[v] += saturated >= 2 ? 1 : 0;
        }
    }
    for (int v = 0; v < kLevels; ++v) {
        if (total[v] == 0)
            continue;
        if (static_cast<double>(clipped[v]) > epsilon * static_cast<double>(total[v]))
            return std::max(0, v - 1);
    }
    return kMaxLevel;
}

std::uint64_t CoverageInstance::total_multiplicity() const {
    std::uint64_t sum = 0;
    for (const auto& r : rows)
        sum += r.multiplicity;
    return sum;
}

void CoverageInstance::validate() const {
    for (const auto& r : rows) {
        if (r.lo < 1 || r.lo > r.hi || r.hi > n)
            throw DomainError("coverage row outside [1, n]");
        if (r.multiplicity == 0)
            throw DomainError("coverage row with zero multiplicity");
    }
}

CoverageInstance coverage_intervals(std::span<const LdrImage> stack, const CaptureBounds& bounds,
                                    bool keep_origin_map) {
    bounds.validate();
    if (stack.empty())
        throw DomainError("coverage_intervals: empty stack");
    const int width = stack.front().width;
    const int height = stack.front().height;
    for (const auto& img : stack)
        if (img.width != width || img.height != height)
            throw DomainError("coverage_intervals: image dimensions differ within the stack");

    const int n = static_cast<int>(stack.size());
    const std::size_t pixels = static_cast<std::size_t>(width) * height;

    // Per-column membership as a byte plane keeps the inner loop branch-light.
    std::array<std::uint8_t, kLevels> inside{};
    for (int v = 0; v < kLevels; ++v)
        inside[v] = bounds.contains(v) ? 1 : 0;
    std::vector<std::vector<std::uint8_t>> covered;
    covered.reserve(stack.size());
    for (const auto& img : stack) {
        auto gray = grayscale_plane(img);
        for (auto& g : gray)
            g = inside[g];
        covered.push_back(std::move(gray));
    }

    const std::size_t nn = static_cast<std::size_t>(n);
    std::vector<std::uint64_t> counts(nn * nn, 0);
    std::vector<std::int32_t> pixel_slot;
    if (keep_origin_map)
        pixel_slot.assign(pixels, -1);

    CoverageInstance inst;
    inst.n = n;
    inst.pixel_count = pixels;
    for (std::size_t i = 0; i < pixels; ++i) {
        int best_lo = 0, best_len = 0, runs = 0;
        int j = 0;
        while (j < n) {
            if (!covered[static_cast<std::size_t>(j)][i]) {
                ++j;
                continue;
            }
            const int start = j;
            while (j < n && covered[static_cast<std::size_t>(j)][i])
                ++j;
            ++runs;
            if (j - start > best_len) {
                best_len = j - start;
                best_lo = start;
            }
        }
        if (runs == 0) {
            ++inst.uncoverable_count;
            continue;
        }
        if (runs > 1)
            ++inst.repaired_count;
        const std::size_t slot = static_cast<std::size_t>(best_lo) * nn + static_cast<std::size_t>(best_lo + best_len - 1);
        ++counts[slot];
        if (keep_origin_map)
            pixel_slot[i] = static_cast<std::int32_t>(slot);
    }

    std::vector<std::int32_t> slot_to_row(keep_origin_map ? nn * nn : 0, -1);
    for (std::size_t lo = 0; lo < nn; ++lo) {
        for (std::size_t hi = lo; hi < nn; ++hi) {
            const std::uint64_t c = counts[lo * nn + hi];
            if (c == 0)
                continue;
            if (keep_origin_map)
                slot_to_row[lo * nn + hi] = static_cast<std::int32_t>(inst.rows.size());
            inst.rows.push_back({static_cast<int>(lo) + 1, static_cast<int>(hi) + 1, c});
        }
    }
    if (keep_origin_map) {
        for (auto& s : pixel_slot)
            if (s >= 0)
                s = slot_to_row[static_cast<std::size_t>(s)];
        inst.origin_map = std::move(pixel_slot);
    }
    return inst;
}

void write_instance(std::ostream& os, const CoverageInstance& inst) {
    os << inst.n << ' ' << inst.uncoverable_count << '\n';
    for (const auto& r : inst.rows)
        os << r.lo << ' ' << r.hi << ' ' << r.multiplicity << '\n';
}

CoverageInstance read_instance(std::istream& is) {
    CoverageInstance inst;
    if (!(is >> inst.n >> inst.uncoverable_count) || inst.n < 1)
        throw IoError("instance dump: malformed header");
    CoverageRow row{};
    while (is >> row.lo >> row.hi >> row.multiplicity) {
        inst.rows.push_back(row);
        inst.pixel_count += row.multiplicity;
    }
    if (!is.eof())
        throw IoError("instance dump: malformed row");
    inst.pixel_count += inst.uncoverable_count;
    inst.validate();
    return inst;
}

} // namespace hdrsel
