// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace echoscout {

using json = nlohmann::ordered_json;

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// Two-channel 32-bit float WAV. Samples are converted from double on write.
void write_wav_f32(const std::filesystem::path& path, double sample_rate,
                   const std::array<std::vector<double>, 2>& channels);
struct WavData {
    double sample_rate = 0.0;
    std::array<std::vector<double>, 2> channels;
};
WavData read_wav_f32(const std::filesystem::path& path);

// Binary P5 graymap / P6 pixmap.
void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<uint8_t>& gray);
void write_ppm(const std::filesystem::path& path, int width, int height,
               const std::vector<uint8_t>& rgb);

// Raw little-endian float64 dump; shape metadata goes in a JSON sidecar
// written by the caller.
void write_f64_raw(const std::filesystem::path& path, const std::vector<double>& data);
std::vector<double> read_f64_raw(const std::filesystem::path& path);

json parse_json(const std::string& text, const std::string& what);

// create parent directories, open for binary writing/reading, throw IoError on failure
std::ofstream open_out(const std::filesystem::path& path);
std::ifstream open_in(const std::filesystem::path& path);

// Strict object access: every key in `obj` must be in `allowed`.
void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& context);

}  // namespace echoscout
