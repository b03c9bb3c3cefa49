// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "hdrsel/hdr_tools.hpp"

using namespace hdrsel;

namespace {

CameraProfile default_profile() { return CameraProfile{}; }

RawImage raw_from(const RasterD& e, double t, const CameraProfile& p) {
    return RawImage{(e * t).min(p.noise.mu_sat), t, p.iso_gain};
}

} // namespace

TEST_CASE("merge_hdr noiseless") {
    const auto profile = default_profile();
    RasterD e(2, 3);
    e << 1.0, 10.0, 100.0, 1000.0, 5000.0, 40.0;

    SUBCASE("single unsaturated image") {
        const std::vector<RawImage> stack{raw_from(e, 0.5, profile)};
        const auto m = merge_hdr(stack, profile);
        CHECK(m.values(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(m.values(1, 1) == doctest::Approx(5000.0).epsilon(1e-15));
        CHECK(m.sentinel_count() == 0);
    }
    SUBCASE("two images agree") {
        const std::vector<RawImage> stack{raw_from(e, 0.1, profile), raw_from(e, 0.4, profile)};
        const auto m = merge_hdr(stack, profile);
        for (Eigen::Index i = 0; i < e.size(); ++i)
            CHECK(m.values.data()[i] == doctest::Approx(e.data()[i]).epsilon(1e-12));
    }
    SUBCASE("saturated everywhere gives the sentinel") {
        const std::vector<RawImage> stack{raw_from(e, 100.0, profile)};
        const auto m = merge_hdr(stack, profile);
        CHECK(m.values(1, 1) == IrradianceMap::kNoSample);
        CHECK(m.values(0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("zero samples carry no weight") {
        RawImage dark{RasterD::Zero(2, 3), 0.01, 1.0};
        const std::vector<RawImage> stack{dark, raw_from(e, 0.5, profile)};
        const auto m = merge_hdr(stack, profile);
        CHECK(m.values(0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("dimension mismatch") {
        const std::vector<RawImage> stack{raw_from(e, 0.1, profile), RawImage{RasterD::Ones(3, 3), 0.2, 1.0}};
        CHECK_THROWS_AS(merge_hdr(stack, profile), DomainError);
    }
}

TEST_CASE("merge_hdr inverse-variance weighting") {
    CameraProfile profile;
    profile.noise = {2.0, 0.0, 4095};
    RawImage a{RasterD::Constant(1, 1, 100.0), 1.0, 1.0};
    RawImage b{RasterD::Constant(1, 1, 420.0), 4.0, 1.0};
    const std::vector<RawImage> stack{a, b};
    // Hand evaluation of sum(u*mu/t)/sum(u), u = t^2/(mu*g + r^2 g^2).
    const double ua = 1.0 / (100.0 + 4.0), ub = 16.0 / (420.0 + 4.0);
    const double expected = (ua * 100.0 + ub * 105.0) / (ua + ub);
    CHECK(merge_hdr(stack, profile).values(0, 0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("log_mse") {
    SceneIrradiance truth;
    truth.values.resize(2, 2);
    truth.values << 1.0, 2.0, 3.0, 4.0;
    IrradianceMap same{truth.values};
    CHECK(log_mse(same, truth).value == 0.0);

    IrradianceMap doubled{truth.values * 2.0};
    CHECK(log_mse(doubled, truth).value == 0.0);

    IrradianceMap half_off{truth.values};
    half_off.values(0, 0) *= 10.0;
    half_off.values(0, 1) *= 10.0;
    // Hand evaluation: medians 7 (of 3,4,10,20) and 2.5 (of 1..4).
    double expected = 0.0;
    const double test_v[] = {10.0, 20.0, 3.0, 4.0}, truth_v[] = {1.0, 2.0, 3.0, 4.0};
    for (int i = 0; i < 4; ++i)
        expected += std::pow(std::log10(test_v[i] / 7.0) - std::log10(truth_v[i] / 2.5), 2);
    expected /= 4.0;
    CHECK(expected == doctest::Approx(0.2527922736516299).epsilon(1e-12));
    CHECK(log_mse(half_off, truth).value == doctest::Approx(expected).epsilon(1e-12));

    IrradianceMap with_hole{truth.values};
    with_hole.values(1, 1) = IrradianceMap::kNoSample;
    const auto r = log_mse(with_hole, truth);
    CHECK(r.sentinel_pixels == 1);
    CHECK(r.valid_pixels == 3);
    CHECK(r.value == 0.0);

    IrradianceMap none{RasterD::Constant(2, 2, IrradianceMap::kNoSample)};
    CHECK_THROWS_AS(log_mse(none, truth), InfeasibleError);
    IrradianceMap wrong{RasterD::Ones(3, 2)};
    CHECK_THROWS_AS(log_mse(wrong, truth), DomainError);
}

TEST_CASE("extent_from_histogram") {
    HdrHistogram uniform;
    for (int k = 0; k <= 10; ++k)
        uniform.edges.push_back(k);
    uniform.counts.assign(10, 5.0);
    auto [lo, hi] = extent_from_histogram(uniform, 10.0, 90.0);
    CHECK(lo == doctest::Approx(1.0));
    CHECK(hi == doctest::Approx(9.0));

    HdrHistogram gappy;
    for (int k = 0; k <= 6; ++k)
        gappy.edges.push_back(k);
    gappy.counts = {0, 3, 0, 2, 4, 0};
    std::tie(lo, hi) = extent_from_histogram(gappy, 0.0, 100.0);
    CHECK(lo == 1.0);
    CHECK(hi == 5.0);

    HdrHistogram point;
    point.edges = {0.0, 1.0, 2.0, 3.0};
    point.counts = {0.0, 7.0, 0.0};
    std::tie(lo, hi) = extent_from_histogram(point, 5.0, 95.0);
    CHECK(lo == hi);

    // Widening the percentiles never shrinks the extent.
    double prev_lo = 1e9, prev_hi = -1e9;
    for (double p = 45.0; p >= 0.0; p -= 5.0) {
        std::tie(lo, hi) = extent_from_histogram(gappy, p, 100.0 - p);
        CHECK(lo <= prev_lo);
        CHECK(hi >= prev_hi);
        prev_lo = lo;
        prev_hi = hi;
    }

    HdrHistogram empty;
    empty.edges = {0.0, 1.0};
    empty.counts = {0.0};
    CHECK_THROWS_AS(extent_from_histogram(empty, 0.0, 100.0), DomainError);
    CHECK_THROWS_AS(extent_from_histogram(uniform, 50.0, 50.0), DomainError);
}

TEST_CASE("hdr_histogram") {
    CameraProfile profile;
    profile.response = gamma_response(1.0);
    const CaptureBounds all{0, 255, 0.0};

    SUBCASE("single fully reliable image matches its own histogram") {
        LdrImage img(64, 1, 1, 0.5, 1.0);
        for (int x = 0; x < 64; ++x)
            img.at(x, 0) = static_cast<std::uint8_t>(1 + 4 * x);
        const std::vector<LdrImage> stack{img};
        const auto h = hdr_histogram(stack, profile, all, 16);
        CHECK(h.total() == doctest::Approx(64.0).epsilon(1e-12));

        std::vector<double> direct(16, 0.0);
        for (int x = 0; x < 64; ++x) {
            const double v = std::log10(profile.raw_of_pixel(img.at(x, 0)) / 0.5);
            for (std::size_t k = 0; k < 16; ++k) {
                if ((k == 0 ? v >= h.edges[0] : v > h.edges[k]) && v <= h.edges[k + 1]) {
                    direct[k] += 1.0;
                    break;
                }
            }
        }
        for (std::size_t k = 0; k < 16; ++k)
            CHECK(h.counts[k] == doctest::Approx(direct[k]).epsilon(1e-12));
    }

    SUBCASE("two-image noiseless log gradient is close to the truth histogram") {
        CameraProfile p;
        const CaptureBounds bounds{20, 230, 20.0};
        auto scene = make_scene(SceneKind::log_gradient, 2000, 1, 10.0, 1);
        scene.values *= 2.0;
        const auto ladder = ExposureLadder::geometric(1.0, 6.0, 2);
        const auto stack = sweep_stack(scene, p, ladder, 1, {.noise_on = false});
        const int bins = 20;
        const auto h = hdr_histogram(stack, p, bounds, bins);
        CHECK(h.total() == doctest::Approx(2000.0).epsilon(1e-9));

        std::vector<double> truth(bins, 0.0);
        for (Eigen::Index x = 0; x < scene.values.cols(); ++x) {
            const double v = std::log10(scene.values(0, x));
            const auto k = std::clamp<Eigen::Index>(
                static_cast<Eigen::Index>((v - h.edges.front()) / (h.edges.back() - h.edges.front()) * bins), 0,
                bins - 1);
            truth[static_cast<std::size_t>(k)] += 1.0;
        }
        // Histogram range follows observed estimates; compare the interior,
        // where quantization of the 8-bit preview dominates the error.
        double l1 = 0.0;
        for (int k = 1; k < bins - 1; ++k)
            l1 += std::abs(h.counts[static_cast<std::size_t>(k)] - truth[static_cast<std::size_t>(k)]);
        CHECK(l1 / 2000.0 < 0.1);
    }

    SUBCASE("mass is conserved") {
        const auto scene = make_scene(SceneKind::bimodal, 60, 40, 9.0, 3);
        const auto ladder = ExposureLadder::geometric(0.5, 1.0, 9);
        CameraProfile p;
        const auto stack = sweep_stack(scene, p, ladder, 5);
        const auto h = hdr_histogram(stack, p, CaptureBounds{}, 64);
        CHECK(std::abs(h.total() - 2400.0) <= 1.0);
        for (double c : h.counts)
            CHECK(c >= 0.0);
        for (std::size_t k = 1; k < h.edges.size(); ++k)
            CHECK(h.edges[k] > h.edges[k - 1]);

        std::ostringstream csv;
        write_histogram_csv(csv, h);
        CHECK(csv.str().rfind("bin_lo,bin_hi,count\n", 0) == 0);
    }

    SUBCASE("no reliable pixels") {
        LdrImage img(4, 4, 1, 0.5, 1.0);
        const std::vector<LdrImage> stack{img};
        CHECK_THROWS_AS(hdr_histogram(stack, profile, CaptureBounds{20, 230, 20.0}), InfeasibleError);
    }
}
