// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#include "hdrsel/hdr_tools.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace hdrsel {

std::size_t IrradianceMap::sentinel_count() const {
    return static_cast<std::size_t>((values < 0.0).count());
}

IrradianceMap merge_hdr(std::span<const RawImage> stack, const CameraProfile& profile) {
    if (stack.empty())
        throw DomainError("merge_hdr: empty stack");
    profile.validate();
    const auto rows = stack.front().mu.rows();
    const auto cols = stack.front().mu.cols();

    RasterD num = RasterD::Zero(rows, cols);
    RasterD den = RasterD::Zero(rows, cols);
    for (const auto& frame : stack) {
        if (frame.mu.rows() != rows || frame.mu.cols() != cols)
            throw DomainError("merge_hdr: image dimensions differ within the stack");
        if (!(frame.shutter > 0.0) || !(frame.gain > 0.0))
            throw DomainError("merge_hdr: shutter and gain must be positive");
        const double t = frame.shutter;
        const auto usable = (frame.mu > 0.0) && (frame.mu < profile.noise.mu_sat);
        const RasterD weight =
            usable.select((t * t) / noise_variance(profile.noise, frame.mu, frame.gain), 0.0);
        num += weight * (frame.mu / t);
        den += weight;
    }

    IrradianceMap out;
    out.values = (den > 0.0).select(num / den, IrradianceMap::kNoSample);
    return out;
}

double HdrHistogram::total() const {
    double sum = 0.0;
    for (double c : counts)
        sum += c;
    return sum;
}

HdrHistogram hdr_histogram(std::span<const LdrImage> stack, const CameraProfile& profile,
                           const CaptureBounds& bounds, int bins) {
    if (stack.empty())
        throw DomainError("hdr_histogram: empty stack");
    if (bins < 2)
        throw DomainError("hdr_histogram: at least two bins are required");
    bounds.validate();
    profile.validate();

    const std::size_t pixels = stack.front().pixel_count();
    // Darkest level that maps to a positive RAW estimate.
    int lowest = bounds.i_min;
    while (lowest <= bounds.i_max && profile.raw_of_pixel(lowest) <= 0.0)
        ++lowest;
    if (lowest > bounds.i_max)
        throw InfeasibleError("hdr_histogram: capture bounds admit no positive RAW estimate");

    struct ImageCdf {
        std::vector<double> sorted; // log10 estimates of reliable pixels
        std::size_t below = 0;      // pixels darker than the reliable range
        double range_lo = 0.0, range_hi = 0.0;
    };
    std::vector<ImageCdf> cdfs;
    cdfs.reserve(stack.size());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& img : stack) {
        if (img.pixel_count() != pixels)
            throw DomainError("hdr_histogram: image dimensions differ within the stack");
        const auto gray = grayscale_plane(img);
        ImageCdf cdf;
        cdf.range_lo = std::log10(profile.raw_of_pixel(lowest) / img.shutter);
        cdf.range_hi = std::log10(profile.raw_of_pixel(bounds.i_max) / img.shutter);
        std::array<double, kLevels> level_log{};
        for (int p = lowest; p <= bounds.i_max; ++p)
            level_log[p] = std::log10(profile.raw_of_pixel(p) / img.shutter);
        for (auto g : gray) {
            if (g < lowest)
                ++cdf.below;
            else if (g <= bounds.i_max)
                cdf.sorted.push_back(level_log[g]);
        }
        std::sort(cdf.sorted.begin(), cdf.sorted.end());
        if (!cdf.sorted.empty()) {
            lo = std::min(lo, cdf.sorted.front());
            hi = std::max(hi, cdf.sorted.back());
        }
        cdfs.push_back(std::move(cdf));
    }
    if (!(lo <= hi))
        throw InfeasibleError("hdr_histogram: no reliably captured pixels in the stack");
    if (hi - lo < 1e-9) {
        lo -= 0.05;
        hi += 0.05;
    }

    HdrHistogram h;
    const auto nb = static_cast<std::size_t>(bins);
    h.edges.resize(nb + 1);
    for (std::size_t k = 0; k <= nb; ++k)
        h.edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(nb);
    h.edges.back() = hi;

    const double total = static_cast<double>(pixels);
    std::vector<double> cdf(nb + 1, 0.0);
    std::vector<char> known(nb + 1, 0);
    for (std::size_t k = 0; k <= nb; ++k) {
        const double e = h.edges[k];
        double sum = 0.0;
        int contributors = 0;
        for (const auto& c : cdfs) {
            if (e < c.range_lo || e > c.range_hi)
                continue;
            const auto at_or_below = std::upper_bound(c.sorted.begin(), c.sorted.end(), e) - c.sorted.begin();
            sum += (static_cast<double>(c.below) + static_cast<double>(at_or_below)) / total;
            ++contributors;
        }
        if (contributors > 0) {
            cdf[k] = sum / contributors;
            known[k] = 1;
        }
    }
    cdf.front() = 0.0;
    cdf.back() = 1.0;
    known.front() = known.back() = 1;
    for (std::size_t k = 1, prev = 0; k <= nb; ++k) {
        if (!known[k])
            continue;
        for (std::size_t q = prev + 1; q < k; ++q)
            cdf[q] = cdf[prev] + (cdf[k] - cdf[prev]) * static_cast<double>(q - prev) / static_cast<double>(k - prev);
        prev = k;
    }
    for (std::size_t k = 1; k <= nb; ++k)
        cdf[k] = std::clamp(cdf[k], cdf[k - 1], 1.0);

    h.counts.resize(nb);
    for (std::size_t k = 0; k < nb; ++k)
        h.counts[k] = total * (cdf[k + 1] - cdf[k]);
    return h;
}

std::pair<double, double> extent_from_histogram(const HdrHistogram& h, double p_lo, double p_hi) {
    if (!(p_lo >= 0.0 && p_lo < p_hi && p_hi <= 100.0))
        throw DomainError("extent_from_histogram: need 0 <= p_lo < p_hi <= 100");
    if (h.edges.size() != h.counts.size() + 1 || h.counts.empty())
        throw DomainError("extent_from_histogram: malformed histogram");
    const double total = h.total();
    if (!(total > 0.0))
        throw DomainError("extent_from_histogram: empty histogram");

    std::size_t first = h.bins(), last = 0, occupied = 0;
    for (std::size_t k = 0; k < h.bins(); ++k) {
        if (h.counts[k] > 0.0) {
            first = std::min(first, k);
            last = k;
            ++occupied;
        }
    }
    if (occupied == 1) {
        const double center = 0.5 * (h.edges[first] + h.edges[first + 1]);
        return {center, center};
    }

    auto quantile = [&](double percent) {
        const double target = percent / 100.0 * total;
        double before = 0.0;
        for (std::size_t k = first; k <= last; ++k) {
            const double c = h.counts[k];
            if (c > 0.0 && before + c >= target) {
                const double frac = std::clamp((target - before) / c, 0.0, 1.0);
                return h.edges[k] + frac * (h.edges[k + 1] - h.edges[k]);
            }
            before += c;
        }
        return h.edges[last + 1];
    };
    return {quantile(p_lo), quantile(p_hi)};
}

namespace {

double median_of(std::vector<double> v) {
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1)
        return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

} // namespace

LogMse log_mse(const IrradianceMap& test, const SceneIrradiance& truth) {
    if (test.values.rows() != truth.values.rows() || test.values.cols() != truth.values.cols())
        throw DomainError("log_mse: dimensions differ");

    std::vector<double> t, e;
    t.reserve(static_cast<std::size_t>(test.values.size()));
    e.reserve(t.capacity());
    LogMse out;
    for (Eigen::Index i = 0; i < test.values.size(); ++i) {
        const double v = test.values.data()[i];
        if (!(v > 0.0)) {
            ++out.sentinel_pixels;
            continue;
        }
        t.push_back(v);
        e.push_back(truth.values.data()[i]);
    }
    if (t.empty())
        throw InfeasibleError("log_mse: test map holds no samples");

    const double med_t = median_of(t);
    const double med_e = median_of(e);
    double sum = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = std::log10(t[i] / med_t) - std::log10(e[i] / med_e);
        sum += d * d;
    }
    out.valid_pixels = t.size();
    out.value = sum / static_cast<double>(t.size());
    return out;
}

void write_histogram_csv(std::ostream& os, const HdrHistogram& h) {
    os << "bin_lo,bin_hi,count\n";
    os.precision(17);
    for (std::size_t k = 0; k < h.bins(); ++k)
        os << h.edges[k] << ',' << h.edges[k + 1] << ',' << h.counts[k] << '\n';
}

} // namespace hdrsel
