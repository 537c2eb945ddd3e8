// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "echoscout/io.hpp"

#include <cstring>
#include <fstream>

#include "echoscout/common.hpp"

namespace echoscout {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    return f;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    return f;
}

namespace {

void put_u32(std::ofstream& f, uint32_t v) {
    const uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                          static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
    f.write(reinterpret_cast<const char*>(b), 4);
}

void put_u16(std::ofstream& f, uint16_t v) {
    const uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
    f.write(reinterpret_cast<const char*>(b), 2);
}

uint32_t get_u32(std::ifstream& f) {
    uint8_t b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t get_u16(std::ifstream& f) {
    uint8_t b[2];
    f.read(reinterpret_cast<char*>(b), 2);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
    auto f = open_in(path);
    std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return s;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    auto f = open_out(path);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
}

void write_wav_f32(const std::filesystem::path& path, double sample_rate,
                   const std::array<std::vector<double>, 2>& channels) {
    if (channels[0].size() != channels[1].size())
        throw ShapeMismatch("wav channels differ in length");
    const uint32_t nframes = static_cast<uint32_t>(channels[0].size());
    const uint16_t nch = 2;
    const uint32_t rate = static_cast<uint32_t>(sample_rate);
    const uint32_t data_bytes = nframes * nch * 4;

    auto f = open_out(path);
    f.write("RIFF", 4);
    put_u32(f, 36 + data_bytes);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    put_u32(f, 16);
    put_u16(f, 3);  // IEEE float
    put_u16(f, nch);
    put_u32(f, rate);
    put_u32(f, rate * nch * 4);
    put_u16(f, nch * 4);
    put_u16(f, 32);
    f.write("data", 4);
    put_u32(f, data_bytes);
    for (uint32_t i = 0; i < nframes; ++i) {
        for (int c = 0; c < 2; ++c) {
            const float v = static_cast<float>(channels[c][i]);
            static_assert(sizeof(float) == 4);
            char b[4];
            std::memcpy(b, &v, 4);
            f.write(b, 4);
        }
    }
}

WavData read_wav_f32(const std::filesystem::path& path) {
    auto f = open_in(path);
    char tag[5] = {};
    f.read(tag, 4);
    if (std::string(tag, 4) != "RIFF") throw IoError("not a RIFF file: " + path.string());
    get_u32(f);
    f.read(tag, 4);
    if (std::string(tag, 4) != "WAVE") throw IoError("not a WAVE file: " + path.string());

    WavData out;
    uint16_t nch = 0;
    while (f.read(tag, 4)) {
        const uint32_t size = get_u32(f);
        const std::string chunk(tag, 4);
        if (chunk == "fmt ") {
            const uint16_t fmt = get_u16(f);
            nch = get_u16(f);
            out.sample_rate = static_cast<double>(get_u32(f));
            get_u32(f);
            get_u16(f);
            const uint16_t bits = get_u16(f);
            if (fmt != 3 || bits != 32) throw IoError("expected 32-bit float wav");
            if (nch != 2) throw IoError("expected 2 channels");
            if (size > 16) f.seekg(size - 16, std::ios::cur);
        } else if (chunk == "data") {
            const uint32_t nframes = size / (nch * 4);
            out.channels[0].resize(nframes);
            out.channels[1].resize(nframes);
            for (uint32_t i = 0; i < nframes; ++i) {
                for (int c = 0; c < 2; ++c) {
                    char b[4];
                    f.read(b, 4);
                    float v;
                    std::memcpy(&v, b, 4);
                    out.channels[c][i] = static_cast<double>(v);
                }
            }
            return out;
        } else {
            f.seekg(size, std::ios::cur);
        }
    }
    throw IoError("no data chunk in wav: " + path.string());
}

void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<uint8_t>& gray) {
    if (static_cast<int>(gray.size()) != width * height)
        throw ShapeMismatch("pgm buffer size mismatch");
    auto f = open_out(path);
    f << "P5\n" << width << " " << height << "\n255\n";
    f.write(reinterpret_cast<const char*>(gray.data()), static_cast<std::streamsize>(gray.size()));
}

void write_ppm(const std::filesystem::path& path, int width, int height,
               const std::vector<uint8_t>& rgb) {
    if (static_cast<int>(rgb.size()) != width * height * 3)
        throw ShapeMismatch("ppm buffer size mismatch");
    auto f = open_out(path);
    f << "P6\n" << width << " " << height << "\n255\n";
    f.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
}

void write_f64_raw(const std::filesystem::path& path, const std::vector<double>& data) {
    auto f = open_out(path);
    f.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
}

std::vector<double> read_f64_raw(const std::filesystem::path& path) {
    auto f = open_in(path);
    f.seekg(0, std::ios::end);
    const auto bytes = static_cast<size_t>(f.tellg());
    f.seekg(0, std::ios::beg);
    std::vector<double> out(bytes / sizeof(double));
    f.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
    return out;
}

json parse_json(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigInvalid("malformed JSON in " + what);
    return j;
}

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& context) {
    if (!obj.is_object()) throw ConfigInvalid(context + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigInvalid(context + ": unknown key '" + it.key() + "'");
    }
}

}  // namespace echoscout
