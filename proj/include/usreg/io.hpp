// io.hpp - file formats.
//
//   .pgm     16-bit binary PGM (P5), intensities mapped [0,1] <-> [0,65535]
//   .f32img  u32 width, u32 height, float32 row-major (little-endian)
//   .f32vol  u32 w, u32 h, u32 d, float32 slice-major
//   .f32fld  u32 w, u32 h, interleaved (vx, vy) float32
//   .ppm     8-bit binary PPM (P6), used for fused overlays
//   .csv     landmark pairs, one "fx,fy,mx,my" row per pair
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "usreg/image.hpp"

namespace usreg {

namespace detail {

inline void write_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("io: truncated file");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

inline void write_f32(std::ostream& os, const std::vector<double>& vals) {
    std::vector<float> buf(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) buf[i] = static_cast<float>(vals[i]);
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

inline void read_f32(std::istream& is, std::vector<double>& vals, size_t n) {
    std::vector<float> buf(n);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!is) throw std::runtime_error("io: truncated float payload");
    vals.resize(n);
    for (size_t i = 0; i < n; ++i) vals[i] = buf[i];
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("io: cannot open for writing: " + path);
    return os;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("io: cannot open for reading: " + path);
    return is;
}

}  // namespace detail

inline void write_f32img(const std::string& path, const Image2D& img) {
    auto os = detail::open_out(path);
    detail::write_u32(os, static_cast<uint32_t>(img.width));
    detail::write_u32(os, static_cast<uint32_t>(img.height));
    detail::write_f32(os, img.data);
}

inline Image2D read_f32img(const std::string& path) {
    auto is = detail::open_in(path);
    const uint32_t w = detail::read_u32(is);
    const uint32_t h = detail::read_u32(is);
    if (w == 0 || h == 0) throw std::runtime_error("io: zero dimension in " + path);
    Image2D img(static_cast<int>(w), static_cast<int>(h));
    detail::read_f32(is, img.data, static_cast<size_t>(w) * h);
    return img;
}

inline void write_f32vol(const std::string& path, const Volume3D& vol) {
    auto os = detail::open_out(path);
    detail::write_u32(os, static_cast<uint32_t>(vol.width));
    detail::write_u32(os, static_cast<uint32_t>(vol.height));
    detail::write_u32(os, static_cast<uint32_t>(vol.depth));
    detail::write_f32(os, vol.data);
}

inline Volume3D read_f32vol(const std::string& path) {
    auto is = detail::open_in(path);
    const uint32_t w = detail::read_u32(is);
    const uint32_t h = detail::read_u32(is);
    const uint32_t d = detail::read_u32(is);
    if (w == 0 || h == 0 || d == 0) throw std::runtime_error("io: zero dimension in " + path);
    Volume3D vol(static_cast<int>(w), static_cast<int>(h), static_cast<int>(d));
    detail::read_f32(is, vol.data, static_cast<size_t>(w) * h * d);
    return vol;
}

inline void write_f32fld(const std::string& path, const DeformationField2D& field) {
    auto os = detail::open_out(path);
    detail::write_u32(os, static_cast<uint32_t>(field.width));
    detail::write_u32(os, static_cast<uint32_t>(field.height));
    std::vector<double> flat(field.vectors.size() * 2);
    for (size_t i = 0; i < field.vectors.size(); ++i) {
        flat[2 * i] = field.vectors[i].x;
        flat[2 * i + 1] = field.vectors[i].y;
    }
    detail::write_f32(os, flat);
}

inline DeformationField2D read_f32fld(const std::string& path) {
    auto is = detail::open_in(path);
    const uint32_t w = detail::read_u32(is);
    const uint32_t h = detail::read_u32(is);
    if (w == 0 || h == 0) throw std::runtime_error("io: zero dimension in " + path);
    DeformationField2D field(static_cast<int>(w), static_cast<int>(h));
    std::vector<double> flat;
    detail::read_f32(is, flat, static_cast<size_t>(w) * h * 2);
    for (size_t i = 0; i < field.vectors.size(); ++i)
        field.vectors[i] = {flat[2 * i], flat[2 * i + 1]};
    return field;
}

inline void write_pgm16(const std::string& path, const Image2D& img) {
    auto os = detail::open_out(path);
    os << "P5\n" << img.width << " " << img.height << "\n65535\n";
    for (double v : img.data) {
        const int q = static_cast<int>(std::clamp(v, 0.0, 1.0) * 65535.0 + 0.5);
        const unsigned char b[2] = {static_cast<unsigned char>((q >> 8) & 0xff),
                                    static_cast<unsigned char>(q & 0xff)};
        os.write(reinterpret_cast<const char*>(b), 2);
    }
}

inline Image2D read_pgm16(const std::string& path) {
    auto is = detail::open_in(path);
    std::string magic;
    is >> magic;
    if (magic != "P5") throw std::runtime_error("io: not a binary PGM: " + path);
    auto next_token = [&is, &path]() {
        std::string tok;
        while (is >> tok) {
            if (tok[0] == '#') { std::string line; std::getline(is, line); continue; }
            return tok;
        }
        throw std::runtime_error("io: malformed PGM header: " + path);
    };
    const int w = std::stoi(next_token());
    const int h = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    is.get();  // single whitespace after maxval
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
        throw std::runtime_error("io: bad PGM header: " + path);
    Image2D img(w, h);
    const size_t n = img.size();
    if (maxval > 255) {
        std::vector<unsigned char> buf(n * 2);
        is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!is) throw std::runtime_error("io: truncated PGM: " + path);
        for (size_t i = 0; i < n; ++i)
            img.data[i] = ((buf[2 * i] << 8) | buf[2 * i + 1]) / static_cast<double>(maxval);
    } else {
        std::vector<unsigned char> buf(n);
        is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!is) throw std::runtime_error("io: truncated PGM: " + path);
        for (size_t i = 0; i < n; ++i) img.data[i] = buf[i] / static_cast<double>(maxval);
    }
    return img;
}

// Masks travel as PGM: nonzero = inside.
inline void write_mask_pgm(const std::string& path, const Mask2D& mask) {
    Image2D img(mask.width, mask.height);
    for (size_t i = 0; i < mask.bits.size(); ++i) img.data[i] = mask.bits[i] ? 1.0 : 0.0;
    write_pgm16(path, img);
}

inline Mask2D read_mask_pgm(const std::string& path) {
    const Image2D img = read_pgm16(path);
    Mask2D mask(img.width, img.height);
    for (size_t i = 0; i < img.data.size(); ++i) mask.bits[i] = img.data[i] > 0.5 ? 1 : 0;
    return mask;
}

// RGB overlay of two images: a on red, b on green, mean on blue.
inline void write_fused_ppm(const std::string& path, const Image2D& a, const Image2D& b) {
    require(a.same_dims(b), "write_fused_ppm: dimension mismatch");
    auto os = detail::open_out(path);
    os << "P6\n" << a.width << " " << a.height << "\n255\n";
    auto q8 = [](double v) {
        return static_cast<unsigned char>(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
    };
    for (size_t i = 0; i < a.data.size(); ++i) {
        const unsigned char px[3] = {q8(a.data[i]), q8(b.data[i]),
                                     q8(0.5 * (a.data[i] + b.data[i]))};
        os.write(reinterpret_cast<const char*>(px), 3);
    }
}

struct LandmarkPairs {
    std::vector<Vec2> fixed;
    std::vector<Vec2> moving;
};

inline LandmarkPairs read_landmarks_csv(const std::string& path) {
    auto is = detail::open_in(path);
    LandmarkPairs lm;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double fx, fy, mx, my;
        if (!(ss >> fx >> fy >> mx >> my))
            throw std::runtime_error("io: malformed landmark row: " + line);
        lm.fixed.push_back({fx, fy});
        lm.moving.push_back({mx, my});
    }
    return lm;
}

inline void write_landmarks_csv(const std::string& path, const LandmarkPairs& lm) {
    auto os = detail::open_out(path);
    os << "# fx,fy,mx,my\n";
    for (size_t i = 0; i < lm.fixed.size(); ++i)
        os << lm.fixed[i].x << "," << lm.fixed[i].y << ","
           << lm.moving[i].x << "," << lm.moving[i].y << "\n";
}

}  // namespace usreg
