// grid.hpp - interpolation, resampling, gradients and convolution on the
// basic containers.
//
// Border policies: clamp for sampling, reflect for convolution, one-sided
// differences for gradients.
#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "usreg/image.hpp"
#include "usreg/parallel.hpp"

namespace usreg {

// Bilinear interpolation with border clamping; total on all finite (x, y).
inline double bilinear_sample(const Image2D& img, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    const int x0 = std::min(static_cast<int>(x), std::max(img.width - 2, 0));
    const int y0 = std::min(static_cast<int>(y), std::max(img.height - 2, 0));
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = img.at(x0, y0) * (1.0 - fx) + img.at(x1, y0) * fx;
    const double bot = img.at(x0, y1) * (1.0 - fx) + img.at(x1, y1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

// Trilinear interpolation with border clamping.
inline double trilinear_sample(const Volume3D& vol, double x, double y, double z) {
    x = std::clamp(x, 0.0, static_cast<double>(vol.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(vol.height - 1));
    z = std::clamp(z, 0.0, static_cast<double>(vol.depth - 1));
    const int x0 = std::min(static_cast<int>(x), std::max(vol.width - 2, 0));
    const int y0 = std::min(static_cast<int>(y), std::max(vol.height - 2, 0));
    const int z0 = std::min(static_cast<int>(z), std::max(vol.depth - 2, 0));
    const int x1 = std::min(x0 + 1, vol.width - 1);
    const int y1 = std::min(y0 + 1, vol.height - 1);
    const int z1 = std::min(z0 + 1, vol.depth - 1);
    const double fx = x - x0, fy = y - y0, fz = z - z0;
    auto lerp = [](double a, double b, double t) { return a * (1.0 - t) + b * t; };
    const double c00 = lerp(vol.at(x0, y0, z0), vol.at(x1, y0, z0), fx);
    const double c10 = lerp(vol.at(x0, y1, z0), vol.at(x1, y1, z0), fx);
    const double c01 = lerp(vol.at(x0, y0, z1), vol.at(x1, y0, z1), fx);
    const double c11 = lerp(vol.at(x0, y1, z1), vol.at(x1, y1, z1), fx);
    return lerp(lerp(c00, c10, fy), lerp(c01, c11, fy), fz);
}

// Bilinear interpolation of a deformation field, border-clamped.
inline Vec2 bilinear_sample(const DeformationField2D& field, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(field.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(field.height - 1));
    const int x0 = std::min(static_cast<int>(x), std::max(field.width - 2, 0));
    const int y0 = std::min(static_cast<int>(y), std::max(field.height - 2, 0));
    const int x1 = std::min(x0 + 1, field.width - 1);
    const int y1 = std::min(y0 + 1, field.height - 1);
    const double fx = x - x0, fy = y - y0;
    auto lerp = [](double a, double b, double t) { return a * (1.0 - t) + b * t; };
    const Vec2& v00 = field.at(x0, y0);
    const Vec2& v10 = field.at(x1, y0);
    const Vec2& v01 = field.at(x0, y1);
    const Vec2& v11 = field.at(x1, y1);
    return {lerp(lerp(v00.x, v10.x, fx), lerp(v01.x, v11.x, fx), fy),
            lerp(lerp(v00.y, v10.y, fx), lerp(v01.y, v11.y, fx), fy)};
}

// output(p) = bilinear_sample(img, p + field(p))
inline Image2D warp(const Image2D& img, const DeformationField2D& field) {
    require(img.width == field.width && img.height == field.height,
            "warp: field dimensions must match image");
    Image2D out(img.width, img.height);
    out.spacing = img.spacing;
    parallel_for(0, img.height, [&](int y) {
        for (int x = 0; x < img.width; ++x) {
            const Vec2& v = field.at(x, y);
            out.at(x, y) = bilinear_sample(img, x + v.x, y + v.y);
        }
    });
    return out;
}

// Central differences in the interior, one-sided at borders.
inline std::pair<Image2D, Image2D> gradient_xy(const Image2D& img) {
    require(img.width >= 3 && img.height >= 3, "gradient_xy: image must be at least 3x3");
    Image2D gx(img.width, img.height), gy(img.width, img.height);
    parallel_for(0, img.height, [&](int y) {
        for (int x = 0; x < img.width; ++x) {
            if (x == 0)
                gx.at(x, y) = img.at(1, y) - img.at(0, y);
            else if (x == img.width - 1)
                gx.at(x, y) = img.at(x, y) - img.at(x - 1, y);
            else
                gx.at(x, y) = 0.5 * (img.at(x + 1, y) - img.at(x - 1, y));
            if (y == 0)
                gy.at(x, y) = img.at(x, 1) - img.at(x, 0);
            else if (y == img.height - 1)
                gy.at(x, y) = img.at(x, y) - img.at(x, y - 1);
            else
                gy.at(x, y) = 0.5 * (img.at(x, y + 1) - img.at(x, y - 1));
        }
    });
    return {std::move(gx), std::move(gy)};
}

inline Image2D extract_slice(const Volume3D& vol, int k) {
    require(k >= 0 && k < vol.depth, "extract_slice: slice index out of range");
    Image2D out(vol.width, vol.height);
    out.spacing = {vol.spacing_x, vol.spacing_y};
    std::copy_n(vol.data.begin() + static_cast<size_t>(k) * vol.width * vol.height,
                static_cast<size_t>(vol.width) * vol.height, out.data.begin());
    return out;
}

namespace detail {

inline std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += k[i + radius];
    }
    for (auto& v : k) v /= sum;
    return k;
}

// index reflection: ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
inline int reflect(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

inline void convolve_rows(const std::vector<double>& in, std::vector<double>& out,
                          int w, int h, const std::vector<double>& kernel) {
    const int radius = static_cast<int>(kernel.size() / 2);
    parallel_for(0, h, [&](int y) {
        const double* row = in.data() + static_cast<size_t>(y) * w;
        double* orow = out.data() + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += kernel[t + radius] * row[reflect(x + t, w)];
            orow[x] = acc;
        }
    });
}

inline void convolve_cols(const std::vector<double>& in, std::vector<double>& out,
                          int w, int h, const std::vector<double>& kernel) {
    const int radius = static_cast<int>(kernel.size() / 2);
    parallel_for(0, h, [&](int y) {
        double* orow = out.data() + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += kernel[t + radius] * in[static_cast<size_t>(reflect(y + t, h)) * w + x];
            orow[x] = acc;
        }
    });
}

inline std::vector<double> gaussian_blur_plane(const std::vector<double>& in, int w, int h,
                                               double sigma) {
    const auto kernel = gaussian_kernel(sigma);
    std::vector<double> tmp(in.size()), out(in.size());
    convolve_rows(in, tmp, w, h, kernel);
    convolve_cols(tmp, out, w, h, kernel);
    return out;
}

}  // namespace detail

// Separable Gaussian, kernel radius ceil(3*sigma), reflective boundary.
inline Image2D gaussian_blur(const Image2D& img, double sigma) {
    require(sigma >= 0.0, "gaussian_blur: sigma must be non-negative");
    if (sigma == 0.0) return img;
    Image2D out = img;
    out.data = detail::gaussian_blur_plane(img.data, img.width, img.height, sigma);
    return out;
}

// Component-wise Gaussian regularization of a deformation field.
inline DeformationField2D gaussian_blur(const DeformationField2D& field, double sigma) {
    require(sigma >= 0.0, "gaussian_blur: sigma must be non-negative");
    if (sigma == 0.0) return field;
    const size_t n = field.vectors.size();
    std::vector<double> vx(n), vy(n);
    for (size_t i = 0; i < n; ++i) { vx[i] = field.vectors[i].x; vy[i] = field.vectors[i].y; }
    vx = detail::gaussian_blur_plane(vx, field.width, field.height, sigma);
    vy = detail::gaussian_blur_plane(vy, field.width, field.height, sigma);
    DeformationField2D out(field.width, field.height);
    for (size_t i = 0; i < n; ++i) out.vectors[i] = {vx[i], vy[i]};
    return out;
}

// Linear remap of [c - w/2, c + w/2] to [0, 1], clamped outside.
inline Image2D window_level(const Image2D& img, double window_center, double window_width) {
    require(window_width > 0.0, "window_level: window width must be positive");
    Image2D out = img;
    const double lo = window_center - 0.5 * window_width;
    for (auto& v : out.data) v = std::clamp((v - lo) / window_width, 0.0, 1.0);
    return out;
}

inline Volume3D window_level(const Volume3D& vol, double window_center, double window_width) {
    require(window_width > 0.0, "window_level: window width must be positive");
    Volume3D out = vol;
    const double lo = window_center - 0.5 * window_width;
    for (auto& v : out.data) v = std::clamp((v - lo) / window_width, 0.0, 1.0);
    return out;
}

inline Image2D apply_mask(const Image2D& img, const Mask2D& mask) {
    require(img.width == mask.width && img.height == mask.height,
            "apply_mask: dimensions must match");
    Image2D out = img;
    for (size_t i = 0; i < out.data.size(); ++i)
        if (!mask.bits[i]) out.data[i] = 0.0;
    return out;
}

}  // namespace usreg
