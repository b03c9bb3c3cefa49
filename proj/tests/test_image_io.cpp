// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "hdrsel/image_io.hpp"

using namespace hdrsel;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "hdrsel_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream os(p, std::ios::binary);
    os << bytes;
}

} // namespace

TEST_CASE("pnm round trip") {
    for (int channels : {1, 3}) {
        LdrImage img(5, 3, channels, 0.25, 2.0);
        for (std::size_t i = 0; i < img.pixels.size(); ++i)
            img.pixels[i] = static_cast<std::uint8_t>(i * 17 % 256);
        const auto path = scratch(channels == 1 ? "a.pgm" : "a.ppm");
        write_pnm(path, img);
        const auto back = read_pnm(path, 0.25, 2.0);
        CHECK(back.width == 5);
        CHECK(back.height == 3);
        CHECK(back.channels == channels);
        CHECK(back.pixels == img.pixels);
    }
}

TEST_CASE("pnm header comments and errors") {
    const auto p = scratch("c.pgm");
    write_bytes(p, std::string("P5\n# made by hand\n2 1\n# depth\n255\n") + std::string("\x01\xfe", 2));
    const auto img = read_pnm(p);
    CHECK(img.at(0, 0) == 1);
    CHECK(img.at(1, 0) == 254);

    write_bytes(p, "P2\n2 1\n255\n1 2\n");
    CHECK_THROWS_AS(read_pnm(p), IoError);
    write_bytes(p, "P5\n2 1\n65535\n\x01\x02\x03\x04");
    CHECK_THROWS_AS(read_pnm(p), IoError);
    write_bytes(p, "P5\n4 4\n255\n\x01\x02");
    CHECK_THROWS_AS(read_pnm(p), IoError);
    CHECK_THROWS_AS(read_pnm(scratch("missing.pgm")), IoError);
}

TEST_CASE("pfm round trip and byte order") {
    RasterD v(2, 3);
    v << 1.5, 2.0, 1e6, 0.125, -1.0, 3.25;
    const auto p = scratch("m.pfm");
    write_pfm(p, v);
    CHECK((read_pfm(p) == v).all());

    // Bottom row first on disk.
    std::ifstream is(p, std::ios::binary);
    std::string header;
    std::getline(is, header);
    CHECK(header == "Pf");
    std::getline(is, header);
    CHECK(header == "3 2");
    std::getline(is, header);
    CHECK(header == "-1.0");
    float first = 0.0f;
    is.read(reinterpret_cast<char*>(&first), 4);
    CHECK(first == 0.125f);

    // Big-endian file (positive scale).
    std::string be = "Pf\n1 1\n1.0\n";
    const float f = 6.5f;
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    for (int s = 24; s >= 0; s -= 8)
        be.push_back(static_cast<char>((u >> s) & 0xff));
    write_bytes(p, be);
    CHECK(read_pfm(p)(0, 0) == 6.5);

    write_bytes(p, "PF\n1 1\n-1.0\n");
    CHECK_THROWS_AS(read_pfm(p), IoError);
}

TEST_CASE("stack directory") {
    const fs::path dir = scratch("stack");
    fs::remove_all(dir);
    std::vector<LdrImage> stack;
    for (int j = 0; j < 3; ++j) {
        LdrImage img(4, 2, 1, 0.01 * (j + 1), 1.0);
        std::fill(img.pixels.begin(), img.pixels.end(), static_cast<std::uint8_t>(40 * j));
        stack.push_back(img);
    }
    write_stack_dir(dir, stack);
    const auto back = read_stack_dir(dir);
    REQUIRE(back.size() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(back[j].shutter == stack[j].shutter);
        CHECK(back[j].pixels == stack[j].pixels);
    }

    // Manifest order does not matter; the stack comes back sorted.
    auto manifest = nlohmann::json::parse(std::ifstream(dir / "manifest.json"));
    std::reverse(manifest["images"].begin(), manifest["images"].end());
    std::ofstream(dir / "manifest.json") << manifest.dump();
    const auto sorted = read_stack_dir(dir);
    CHECK(sorted.front().shutter == doctest::Approx(0.01));

    std::ofstream(dir / "manifest.json") << "{\"images\": [{\"file\": \"img_000.pgm\"}]}";
    CHECK_THROWS_AS(read_stack_dir(dir), IoError);
    CHECK_THROWS_AS(read_stack_dir(scratch("nowhere")), IoError);
}

TEST_CASE("camera profile json") {
    const auto p = parse_profile(R"({"gamma": 2.2, "mu_sat": 4095, "iso_gain": 1.0, "read_noise_r": 2.0, "const_noise_c": 0.0})");
    CHECK(p.response.gamma_value() == 2.2);
    CHECK(p.noise.mu_sat == 4095.0);
    CHECK(p.noise.read_noise == 2.0);

    std::vector<double> lut(256);
    for (int i = 0; i < 256; ++i)
        lut[static_cast<std::size_t>(i)] = i / 255.0;
    nlohmann::json j;
    j["lut"] = lut;
    j["mu_sat"] = 1023;
    j["iso_gain"] = 4.0;
    const auto q = parse_profile(j.dump());
    CHECK(q.response.source() == ResponseFunction::Source::fitted);
    CHECK(q.response.invert(51) == doctest::Approx(0.2));
    CHECK(q.iso_gain == 4.0);

    const auto round = parse_profile(profile_to_json(p));
    CHECK(round.response.lut() == p.response.lut());
    CHECK(round.noise.read_noise == p.noise.read_noise);

    CHECK_THROWS_AS(parse_profile("{\"gamma\": 2.2, \"lut\": []}"), ConfigError);
    CHECK_THROWS_AS(parse_profile("{\"lut\": [0, 1]}"), ConfigError);
    CHECK_THROWS_AS(parse_profile("{\"gamma\": -1}"), ConfigError);
    CHECK_THROWS_AS(parse_profile("{\"iso_gain\": 0}"), ConfigError);
    CHECK_THROWS_AS(parse_profile("{\"mu_sat\": \"big\"}"), ConfigError);
    CHECK_THROWS_AS(parse_profile("not json"), ConfigError);
    CHECK_THROWS_AS(load_profile(scratch("absent.json")), IoError);
}
