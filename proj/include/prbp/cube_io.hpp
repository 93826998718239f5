#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "prbp/plane.hpp"

namespace prbp {

enum class Endianness { Little, Big };

// Sidecar descriptor for planar raw cubes. Raw files carry no metadata of
// their own, so the descriptor is mandatory.
struct CubeDescriptor {
    int width = 0;
    int height = 0;
    int bands = 0;
    int bit_depth = 0;
    Endianness endianness = Endianness::Little;
};

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open file: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

inline void write_file(const std::filesystem::path& path,
                       const std::uint8_t* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open file for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw io_error("write failed: " + path.string());
}

}  // namespace detail

// ----------------------------------------------------------------------------
// Descriptor sidecar (JSON)
// ----------------------------------------------------------------------------

inline CubeDescriptor parse_descriptor(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("descriptor is not valid JSON: ") + e.what());
    }
    CubeDescriptor d;
    try {
        d.width = j.at("width").get<int>();
        d.height = j.at("height").get<int>();
        d.bands = j.at("bands").get<int>();
        d.bit_depth = j.at("bit_depth").get<int>();
        const std::string e = j.at("endianness").get<std::string>();
        if (e == "little") d.endianness = Endianness::Little;
        else if (e == "big") d.endianness = Endianness::Big;
        else throw format_error("descriptor endianness must be \"little\" or \"big\"");
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("descriptor field missing or mistyped: ") + e.what());
    }
    if (d.width < 4 || d.height < 4 || d.bands < 1 || d.width > 65536 ||
        d.height > 65536 || d.bands > 65536)
        throw format_error("descriptor dimensions out of range");
    if (!valid_bit_depth(d.bit_depth))
        throw format_error("unsupported bit depth: " + std::to_string(d.bit_depth));
    return d;
}

inline CubeDescriptor load_descriptor(const std::filesystem::path& path) {
    const auto bytes = detail::read_file(path);
    return parse_descriptor(std::string(bytes.begin(), bytes.end()));
}

inline void store_descriptor(const CubeDescriptor& d, const std::filesystem::path& path) {
    nlohmann::json j;
    j["width"] = d.width;
    j["height"] = d.height;
    j["bands"] = d.bands;
    j["bit_depth"] = d.bit_depth;
    j["endianness"] = d.endianness == Endianness::Little ? "little" : "big";
    const std::string text = j.dump(2) + "\n";
    detail::write_file(path, reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
}

// ----------------------------------------------------------------------------
// Planar raw cubes (band-major, row-major within a band)
// ----------------------------------------------------------------------------

inline SpectralCube cube_from_bytes(const std::vector<std::uint8_t>& bytes,
                                    const CubeDescriptor& d) {
    const int bytes_per_sample = d.bit_depth <= 8 ? 1 : 2;
    const std::size_t expected = static_cast<std::size_t>(d.width) * d.height *
                                 d.bands * bytes_per_sample;
    if (bytes.size() != expected) {
        throw format_error("raw cube size mismatch: got " + std::to_string(bytes.size()) +
                           " bytes, descriptor implies " + std::to_string(expected));
    }
    SpectralCube cube(d.width, d.height, d.bands, d.bit_depth);
    const Sample hi = max_sample(d.bit_depth);
    std::size_t pos = 0;
    for (int b = 0; b < d.bands; ++b) {
        Plane& plane = cube.band(b);
        for (Sample& s : plane.samples) {
            std::uint32_t v;
            if (bytes_per_sample == 1) {
                v = bytes[pos++];
            } else if (d.endianness == Endianness::Big) {
                v = static_cast<std::uint32_t>(bytes[pos]) << 8 | bytes[pos + 1];
                pos += 2;
            } else {
                v = static_cast<std::uint32_t>(bytes[pos + 1]) << 8 | bytes[pos];
                pos += 2;
            }
            if (static_cast<Sample>(v) > hi) {
                throw format_error("sample " + std::to_string(v) +
                                   " exceeds bit depth " + std::to_string(d.bit_depth));
            }
            s = static_cast<Sample>(v);
        }
    }
    return cube;
}

inline std::vector<std::uint8_t> cube_to_bytes(const SpectralCube& cube,
                                               Endianness endianness) {
    const int bytes_per_sample = cube.bit_depth <= 8 ? 1 : 2;
    std::vector<std::uint8_t> bytes;
    bytes.reserve(cube.sample_count() * bytes_per_sample);
    for (const Plane& plane : cube.bands) {
        for (Sample s : plane.samples) {
            const auto v = static_cast<std::uint32_t>(s);
            if (bytes_per_sample == 1) {
                bytes.push_back(static_cast<std::uint8_t>(v));
            } else if (endianness == Endianness::Big) {
                bytes.push_back(static_cast<std::uint8_t>(v >> 8));
                bytes.push_back(static_cast<std::uint8_t>(v & 0xff));
            } else {
                bytes.push_back(static_cast<std::uint8_t>(v & 0xff));
                bytes.push_back(static_cast<std::uint8_t>(v >> 8));
            }
        }
    }
    return bytes;
}

inline SpectralCube load_cube(const std::filesystem::path& raw_path,
                              const CubeDescriptor& d) {
    return cube_from_bytes(detail::read_file(raw_path), d);
}

// Convenience: raw file plus "<raw>.json" sidecar.
inline SpectralCube load_cube(const std::filesystem::path& raw_path) {
    return load_cube(raw_path, load_descriptor(raw_path.string() + ".json"));
}

inline void store_cube(const SpectralCube& cube, const std::filesystem::path& raw_path,
                       Endianness endianness = Endianness::Little) {
    const auto bytes = cube_to_bytes(cube, endianness);
    detail::write_file(raw_path, bytes.data(), bytes.size());
    CubeDescriptor d{cube.width, cube.height, cube.band_count(), cube.bit_depth,
                     endianness};
    store_descriptor(d, raw_path.string() + ".json");
}

// ----------------------------------------------------------------------------
// Binary PGM (P5)
// ----------------------------------------------------------------------------

namespace detail {

// Reads one whitespace-delimited token, skipping '#' comment lines.
inline std::string next_pgm_token(const std::vector<std::uint8_t>& bytes,
                                  std::size_t& pos) {
    while (pos < bytes.size()) {
        const char c = static_cast<char>(bytes[pos]);
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    std::string tok;
    while (pos < bytes.size() &&
           !std::isspace(static_cast<unsigned char>(bytes[pos])) && bytes[pos] != '#') {
        tok.push_back(static_cast<char>(bytes[pos++]));
    }
    if (tok.empty()) throw format_error("truncated PGM header");
    return tok;
}

inline long parse_pgm_int(const std::string& tok) {
    if (tok.size() > 9) throw format_error("malformed PGM header token: " + tok);
    for (char c : tok) {
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw format_error("malformed PGM header token: " + tok);
    }
    return std::stol(tok);
}

}  // namespace detail

inline Plane plane_from_pgm_bytes(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    if (detail::next_pgm_token(bytes, pos) != "P5")
        throw format_error("not a binary PGM (P5) file");
    const long w = detail::parse_pgm_int(detail::next_pgm_token(bytes, pos));
    const long h = detail::parse_pgm_int(detail::next_pgm_token(bytes, pos));
    const long maxval = detail::parse_pgm_int(detail::next_pgm_token(bytes, pos));
    if (w < 1 || h < 1) throw format_error("PGM dimensions out of range");
    if (maxval < 1 || maxval > 65535)
        throw format_error("PGM maxval out of range: " + std::to_string(maxval));
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
        throw format_error("malformed PGM header");
    ++pos;  // single whitespace separates header from raster

    const int bytes_per_sample = maxval > 255 ? 2 : 1;
    const std::size_t expected = static_cast<std::size_t>(w) * h * bytes_per_sample;
    if (bytes.size() - pos != expected)
        throw format_error("PGM raster size mismatch");

    Plane plane(static_cast<int>(w), static_cast<int>(h),
                ceil_log2(static_cast<std::uint64_t>(maxval) + 1));
    for (Sample& s : plane.samples) {
        std::uint32_t v;
        if (bytes_per_sample == 1) {
            v = bytes[pos++];
        } else {
            // 16-bit PGM samples are big-endian by convention
            v = static_cast<std::uint32_t>(bytes[pos]) << 8 | bytes[pos + 1];
            pos += 2;
        }
        if (v > static_cast<std::uint32_t>(maxval))
            throw format_error("PGM sample exceeds maxval");
        s = static_cast<Sample>(v);
    }
    return plane;
}

inline Plane load_pgm_band(const std::filesystem::path& path) {
    return plane_from_pgm_bytes(detail::read_file(path));
}

inline void store_pgm_band(const Plane& plane, const std::filesystem::path& path) {
    const long maxval = max_sample(plane.bit_depth);
    std::string header = "P5\n" + std::to_string(plane.width) + " " +
                         std::to_string(plane.height) + "\n" +
                         std::to_string(maxval) + "\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    for (Sample s : plane.samples) {
        const auto v = static_cast<std::uint32_t>(s);
        if (maxval > 255) {
            bytes.push_back(static_cast<std::uint8_t>(v >> 8));
            bytes.push_back(static_cast<std::uint8_t>(v & 0xff));
        } else {
            bytes.push_back(static_cast<std::uint8_t>(v));
        }
    }
    detail::write_file(path, bytes.data(), bytes.size());
}

// A directory of one PGM per band (lexicographic file order = band order).
inline SpectralCube load_cube_pgm_dir(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        if (entry.path().extension() == ".pgm") files.push_back(entry.path());
    }
    if (ec) throw io_error("cannot read directory: " + dir.string());
    if (files.empty()) throw io_error("no .pgm files in " + dir.string());
    std::sort(files.begin(), files.end());

    SpectralCube cube;
    for (const auto& f : files) {
        Plane p = load_pgm_band(f);
        if (cube.bands.empty()) {
            cube.width = p.width;
            cube.height = p.height;
            cube.bit_depth = p.bit_depth;
        } else if (p.width != cube.width || p.height != cube.height ||
                   p.bit_depth != cube.bit_depth) {
            throw format_error("PGM band shape mismatch: " + f.string());
        }
        cube.bands.push_back(std::move(p));
    }
    return cube;
}

inline void store_cube_pgm_dir(const SpectralCube& cube, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (int b = 0; b < cube.band_count(); ++b) {
        char name[32];
        std::snprintf(name, sizeof(name), "band_%03d.pgm", b);
        store_pgm_band(cube.band(b), dir / name);
    }
}

// ----------------------------------------------------------------------------
// Synthetic correlated cubes (test/demo fixture generator)
// ----------------------------------------------------------------------------

// Per-band affine transform applied to the shared base structure.
struct BandSchedule {
    double scale = 1.0;
    double offset = 0.0;
};

// Default schedule: scale cycles through 0.6..1.4 and offset through five
// steps of 2 % of range, so dynamic ranges differ between bands while the
// underlying structure is common to all of them.
inline BandSchedule default_band_schedule(int band, int bit_depth) {
    const double range = static_cast<double>(max_sample(bit_depth));
    return {0.6 + 0.1 * ((band * 7) % 9), range * (0.03 + 0.02 * (band % 5))};
}

// Deterministic structured cube: every band is clamp(round(a_i * base + b_i +
// noise)) for a shared base image of smooth waves plus rectangular steps.
// Noise is uniform in [-noise_amplitude, noise_amplitude] (sample units).
// With an explicit integer-valued schedule and zero noise, bands are exactly
// affine images of one another.
inline SpectralCube synthesize_correlated_cube(
    int width, int height, int bands, int bit_depth, std::uint64_t seed,
    double noise_amplitude, const std::vector<BandSchedule>& schedule = {}) {
    if (bands < 4) throw std::invalid_argument("synthesize_correlated_cube: bands must be >= 4");
    if (noise_amplitude < 0) throw std::invalid_argument("noise_amplitude must be >= 0");
    if (width < 4 || height < 4) throw std::invalid_argument("cube dimensions must be >= 4");
    if (!valid_bit_depth(bit_depth)) throw std::invalid_argument("unsupported bit depth");
    if (!schedule.empty() && static_cast<int>(schedule.size()) != bands)
        throw std::invalid_argument("schedule size must match band count");

    std::mt19937_64 rng(seed);
    auto unit = [&rng]() {  // uniform in [0,1), bit-reproducible
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };

    const double range = static_cast<double>(max_sample(bit_depth));

    // Shared base structure: crossed cosine waves, a busy diagonal texture
    // and a pile of sharp-edged rectangles. Values stay inside [0.12, 0.92]
    // of the working band so no default-schedule band clamps.
    const double fx = 1.0 + 3.0 * unit();
    const double fy = 1.0 + 3.0 * unit();
    const double px = unit();
    const double py = unit();
    const double hx = 5.0 + 6.0 * unit();
    const double hy = 5.0 + 6.0 * unit();
    const double ph = unit();
    struct Rect {
        int x0, y0, x1, y1;
        double amp;
    };
    std::vector<Rect> rects(26);
    for (Rect& r : rects) {
        const int x0 = static_cast<int>(unit() * width);
        const int y0 = static_cast<int>(unit() * height);
        const int rw = 2 + static_cast<int>(unit() * width / 4);
        const int rh = 2 + static_cast<int>(unit() * height / 4);
        r = {x0, y0, std::min(width, x0 + rw), std::min(height, y0 + rh),
             0.44 * (unit() - 0.5)};
    }

    Plane base(width, height, bit_depth);
    constexpr double kTau = 6.283185307179586476925286766559;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double f = 0.5 + 0.16 * std::cos(kTau * (fx * x / width + px)) *
                                 std::cos(kTau * (fy * y / height + py));
            f += 0.12 * std::cos(kTau * (hx * x / width + hy * y / height + ph));
            f += 0.06 * (2.0 * unit() - 1.0);  // fine grain shared by all bands
            for (const Rect& r : rects) {
                if (x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1) f += r.amp;
            }
            f = std::clamp(f, 0.12, 0.92);
            base.at(y, x) = static_cast<Sample>(round_half_away(f * 0.6 * range));
        }
    }

    SpectralCube cube(width, height, bands, bit_depth);
    for (int b = 0; b < bands; ++b) {
        const BandSchedule sc =
            schedule.empty() ? default_band_schedule(b, bit_depth) : schedule[b];
        Plane& plane = cube.band(b);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                double v = sc.scale * base.at(y, x) + sc.offset;
                if (noise_amplitude > 0) v += noise_amplitude * (2.0 * unit() - 1.0);
                plane.at(y, x) = clamp_sample(round_half_away(v), bit_depth);
            }
        }
    }
    return cube;
}

}  // namespace prbp
