// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#include "hdrsel/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace hdrsel {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reads the next whitespace-separated header token, skipping '#' comments.
std::string header_token(std::istream& is) {
    std::string tok;
    int ch;
    while ((ch = is.get()) != EOF) {
        if (ch == '#') {
            while ((ch = is.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty())
                break;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

int header_int(std::istream& is, const fs::path& path) {
    const std::string tok = header_token(is);
    try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size())
            throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw IoError(path.string() + ": malformed header field '" + tok + "'");
    }
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open " + path.string());
    return is;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot write " + path.string());
    return os;
}

} // namespace

void write_pnm(const fs::path& path, const LdrImage& img) {
    img.validate();
    auto os = open_out(path);
    os << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!os)
        throw IoError("short write to " + path.string());
}

LdrImage read_pnm(const fs::path& path, double shutter, double gain) {
    auto is = open_in(path);
    const std::string magic = header_token(is);
    int channels = 0;
    if (magic == "P5")
        channels = 1;
    else if (magic == "P6")
        channels = 3;
    else
        throw IoError(path.string() + ": not a binary P5/P6 file");
    const int w = header_int(is, path);
    const int h = header_int(is, path);
    const int maxval = header_int(is, path);
    if (w <= 0 || h <= 0)
        throw IoError(path.string() + ": invalid dimensions");
    if (maxval != 255)
        throw IoError(path.string() + ": only maxval 255 is supported");
    LdrImage img(w, h, channels, shutter, gain);
    is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (is.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw IoError(path.string() + ": truncated pixel data");
    return img;
}

void write_pfm(const fs::path& path, const RasterD& values) {
    auto os = open_out(path);
    os << "Pf\n" << values.cols() << ' ' << values.rows() << "\n-1.0\n";
    std::vector<float> row(static_cast<std::size_t>(values.cols()));
    for (Eigen::Index y = values.rows() - 1; y >= 0; --y) {
        for (Eigen::Index x = 0; x < values.cols(); ++x) {
            float f = static_cast<float>(values(y, x));
            if constexpr (std::endian::native == std::endian::big) {
                std::uint32_t u;
                std::memcpy(&u, &f, 4);
                u = __builtin_bswap32(u);
                std::memcpy(&f, &u, 4);
            }
            row[static_cast<std::size_t>(x)] = f;
        }
        os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
    }
    if (!os)
        throw IoError("short write to " + path.string());
}

RasterD read_pfm(const fs::path& path) {
    auto is = open_in(path);
    const std::string magic = header_token(is);
    if (magic != "Pf")
        throw IoError(path.string() + ": only grayscale 'Pf' float maps are supported");
    const int w = header_int(is, path);
    const int h = header_int(is, path);
    const std::string scale_tok = header_token(is);
    double scale = 0.0;
    try {
        scale = std::stod(scale_tok);
    } catch (const std::exception&) {
        throw IoError(path.string() + ": malformed scale");
    }
    if (w <= 0 || h <= 0 || scale == 0.0)
        throw IoError(path.string() + ": invalid header");
    const bool little = scale < 0.0;
    const bool swap = little != (std::endian::native == std::endian::little);

    RasterD values(h, w);
    std::vector<float> row(static_cast<std::size_t>(w));
    for (int y = h - 1; y >= 0; --y) {
        is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
        if (is.gcount() != static_cast<std::streamsize>(row.size() * 4))
            throw IoError(path.string() + ": truncated float data");
        for (int x = 0; x < w; ++x) {
            float f = row[static_cast<std::size_t>(x)];
            if (swap) {
                std::uint32_t u;
                std::memcpy(&u, &f, 4);
                u = __builtin_bswap32(u);
                std::memcpy(&f, &u, 4);
            }
            values(y, x) = f;
        }
    }
    return values;
}

void write_stack_dir(const fs::path& dir, const std::vector<LdrImage>& stack) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    json manifest;
    manifest["images"] = json::array();
    for (std::size_t i = 0; i < stack.size(); ++i) {
        std::ostringstream name;
        name << "img_" << std::setw(3) << std::setfill('0') << i << (stack[i].channels == 1 ? ".pgm" : ".ppm");
        write_pnm(dir / name.str(), stack[i]);
        manifest["images"].push_back({{"file", name.str()}, {"shutter", stack[i].shutter}, {"gain", stack[i].gain}});
    }
    auto os = open_out(dir / "manifest.json");
    os << manifest.dump(2) << '\n';
}

std::vector<LdrImage> read_stack_dir(const fs::path& dir) {
    const fs::path manifest_path = dir / "manifest.json";
    auto is = open_in(manifest_path);
    std::vector<StackEntry> entries;
    try {
        const json manifest = json::parse(is);
        for (const auto& e : manifest.at("images"))
            entries.push_back({e.at("file").get<std::string>(), e.at("shutter").get<double>(),
                               e.value("gain", 1.0)});
    } catch (const json::exception& ex) {
        throw IoError(manifest_path.string() + ": " + ex.what());
    }
    if (entries.empty())
        throw IoError(manifest_path.string() + ": no images listed");
    std::sort(entries.begin(), entries.end(),
              [](const StackEntry& a, const StackEntry& b) { return a.shutter < b.shutter; });

    std::vector<LdrImage> stack;
    for (const auto& e : entries) {
        if (!(e.shutter > 0.0))
            throw IoError(manifest_path.string() + ": non-positive shutter for " + e.file);
        stack.push_back(read_pnm(dir / e.file, e.shutter, e.gain));
    }
    return stack;
}

CameraProfile parse_profile(const std::string& json_text) {
    try {
        const json j = json::parse(json_text);
        CameraProfile profile;
        if (j.contains("lut") && j.contains("gamma"))
            throw ConfigError("camera profile: give either 'gamma' or 'lut', not both");
        if (j.contains("lut")) {
            const auto values = j.at("lut").get<std::vector<double>>();
            if (values.size() != static_cast<std::size_t>(kLevels))
                throw ConfigError("camera profile: 'lut' must hold 256 values");
            ResponseFunction::Table lut{};
            std::copy(values.begin(), values.end(), lut.begin());
            profile.response = ResponseFunction(lut);
        } else if (j.contains("gamma")) {
            profile.response = ResponseFunction::gamma(j.at("gamma").get<double>());
        }
        profile.noise.mu_sat = j.value("mu_sat", profile.noise.mu_sat);
        profile.noise.read_noise = j.value("read_noise_r", profile.noise.read_noise);
        profile.noise.const_noise = j.value("const_noise_c", profile.noise.const_noise);
        profile.iso_gain = j.value("iso_gain", profile.iso_gain);
        profile.validate();
        return profile;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("camera profile: ") + ex.what());
    } catch (const DomainError& ex) {
        throw ConfigError(std::string("camera profile: ") + ex.what());
    }
}

CameraProfile load_profile(const fs::path& path) {
    auto is = open_in(path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_profile(buf.str());
}

std::string profile_to_json(const CameraProfile& profile) {
    json j;
    if (profile.response.source() == ResponseFunction::Source::gamma)
        j["gamma"] = profile.response.gamma_value();
    else
        j["lut"] = profile.response.lut();
    j["mu_sat"] = profile.noise.mu_sat;
    j["iso_gain"] = profile.iso_gain;
    j["read_noise_r"] = profile.noise.read_noise;
    j["const_noise_c"] = profile.noise.const_noise;
    return j.dump(2);
}

} // namespace hdrsel
