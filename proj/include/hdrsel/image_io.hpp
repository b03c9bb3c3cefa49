// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hdrsel/camera_model.hpp"
#include "hdrsel/capture_sim.hpp"

namespace hdrsel {

/// Binary P5 (1 channel) or P6 (3 channels), maxval 255. Shutter and gain
/// are not stored in the file; see the stack manifest.
void write_pnm(const std::filesystem::path& path, const LdrImage& img);
LdrImage read_pnm(const std::filesystem::path& path, double shutter = 1.0, double gain = 1.0);

/// Grayscale portable float map ("Pf"), little-endian, bottom row first.
void write_pfm(const std::filesystem::path& path, const RasterD& values);
RasterD read_pfm(const std::filesystem::path& path);

struct StackEntry {
    std::string file;
    double shutter;
    double gain;
};

/// Writes `manifest.json` plus one P5/P6 file per image into `dir`.
void write_stack_dir(const std::filesystem::path& dir, const std::vector<LdrImage>& stack);
/// Loads a stack directory, sorted by increasing shutter.
std::vector<LdrImage> read_stack_dir(const std::filesystem::path& dir);

/// Camera profile JSON: `gamma` or `lut` (256 values), `mu_sat`, `iso_gain`,
/// `read_noise_r`, `const_noise_c`. Missing keys take the default profile.
CameraProfile parse_profile(const std::string& json_text);
CameraProfile load_profile(const std::filesystem::path& path);
std::string profile_to_json(const CameraProfile& profile);

} // namespace hdrsel
