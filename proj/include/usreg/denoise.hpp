// denoise.hpp - pluggable denoisers: a Gaussian baseline and a single-stage
// block-matching collaborative filter (group similar patches, transform the
// group, hard-threshold, invert, aggregate overlapping estimates).
//
// The 2D and 3D entry points share one engine; a depth-1 volume degenerates
// exactly to the 2D case.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "usreg/grid.hpp"
#include "usreg/image.hpp"

namespace usreg {

struct DenoiseParams {
    int block_size = 8;            // power of two, >= 4
    int search_radius = 12;
    int max_group = 16;
    double match_threshold = 0.02; // mean squared distance per pixel
    double hard_threshold = -1.0;  // < 0 means auto: 2.7 * noise_sigma
    double noise_sigma = 0.05;

    double effective_threshold() const {
        return hard_threshold >= 0.0 ? hard_threshold : 2.7 * noise_sigma;
    }

    void validate() const {
        require(block_size >= 4 && (block_size & (block_size - 1)) == 0,
                "DenoiseParams: block_size must be a power of two >= 4");
        require(max_group >= 1, "DenoiseParams: max_group >= 1");
        require(search_radius >= 0, "DenoiseParams: search_radius >= 0");
        require(match_threshold >= 0.0, "DenoiseParams: match_threshold >= 0");
        require(noise_sigma >= 0.0, "DenoiseParams: noise_sigma >= 0");
    }
};

inline Image2D denoise_gaussian(const Image2D& img, double sigma) {
    return gaussian_blur(img, sigma);
}

namespace detail {

// Orthonormal DCT-II matrix, row k = basis k.
inline std::vector<double> dct_matrix(int n) {
    std::vector<double> m(static_cast<size_t>(n) * n);
    const double pi = 3.14159265358979323846;
    for (int k = 0; k < n; ++k) {
        const double s = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        for (int i = 0; i < n; ++i)
            m[static_cast<size_t>(k) * n + i] = s * std::cos(pi * (i + 0.5) * k / n);
    }
    return m;
}

// In-place transform along one axis of a contiguous block laid out with the
// given stride pattern; fwd=false applies the transpose (inverse).
inline void apply_1d(double* data, const std::vector<double>& m, int n, int count, int stride,
                     int block_stride, bool fwd) {
    std::vector<double> tmp(n);
    for (int b = 0; b < count; ++b) {
        double* base = data + static_cast<size_t>(b) * block_stride;
        for (int k = 0; k < n; ++k) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                const double c = fwd ? m[static_cast<size_t>(k) * n + i]
                                     : m[static_cast<size_t>(i) * n + k];
                acc += c * base[static_cast<size_t>(i) * stride];
            }
            tmp[k] = acc;
        }
        for (int k = 0; k < n; ++k) base[static_cast<size_t>(k) * stride] = tmp[k];
    }
}

// Orthonormal Haar wavelet along the group axis; len is a power of two.
inline void haar_forward(std::vector<double>& g, int len, int block_len) {
    const double inv_sqrt2 = 0.7071067811865475244;
    std::vector<double> tmp(static_cast<size_t>(len) * block_len);
    for (int n = len; n > 1; n /= 2) {
        for (int i = 0; i < n / 2; ++i)
            for (int j = 0; j < block_len; ++j) {
                const double a = g[static_cast<size_t>(2 * i) * block_len + j];
                const double b = g[static_cast<size_t>(2 * i + 1) * block_len + j];
                tmp[static_cast<size_t>(i) * block_len + j] = (a + b) * inv_sqrt2;
                tmp[static_cast<size_t>(n / 2 + i) * block_len + j] = (a - b) * inv_sqrt2;
            }
        std::copy_n(tmp.begin(), static_cast<size_t>(n) * block_len, g.begin());
    }
}

inline void haar_inverse(std::vector<double>& g, int len, int block_len) {
    const double inv_sqrt2 = 0.7071067811865475244;
    std::vector<double> tmp(static_cast<size_t>(len) * block_len);
    for (int n = 2; n <= len; n *= 2) {
        for (int i = 0; i < n / 2; ++i)
            for (int j = 0; j < block_len; ++j) {
                const double a = g[static_cast<size_t>(i) * block_len + j];
                const double d = g[static_cast<size_t>(n / 2 + i) * block_len + j];
                tmp[static_cast<size_t>(2 * i) * block_len + j] = (a + d) * inv_sqrt2;
                tmp[static_cast<size_t>(2 * i + 1) * block_len + j] = (a - d) * inv_sqrt2;
            }
        std::copy_n(tmp.begin(), static_cast<size_t>(n) * block_len, g.begin());
    }
}

// strided reference positions covering [0, limit] including the end
inline std::vector<int> ref_positions(int limit, int stride) {
    std::vector<int> pos;
    for (int p = 0; p < limit; p += stride) pos.push_back(p);
    pos.push_back(limit);
    return pos;
}

struct Candidate {
    double dist;
    int x, y, z;
    bool operator<(const Candidate& o) const {
        if (dist != o.dist) return dist < o.dist;
        if (z != o.z) return z < o.z;
        if (y != o.y) return y < o.y;
        return x < o.x;
    }
};

inline Volume3D denoise_bm_volume(const Volume3D& vol, const DenoiseParams& params) {
    params.validate();
    const int bs = params.block_size;
    require(vol.width >= bs && vol.height >= bs && vol.depth >= 1,
            "denoise: input smaller than one block");
    const int bz = std::min(bs, vol.depth);
    const int w = vol.width, h = vol.height, d = vol.depth;
    const int stride = 4;  // reference-block stride, 4x overlap
    const int npix = bs * bs * bz;
    const double thr = params.effective_threshold();
    const double match_limit = params.match_threshold * npix;

    const auto dct_xy = dct_matrix(bs);
    const auto dct_z = dct_matrix(bz);

    const auto xs = ref_positions(w - bs, stride);
    const auto ys = ref_positions(h - bs, stride);
    const auto zs = ref_positions(d - bz, std::max(1, stride / 2));

    std::vector<double> num(vol.data.size(), 0.0), den(vol.data.size(), 0.0);

    auto block_ssd = [&](int ax, int ay, int az, int bx, int by, int bzp, double limit) {
        double ssd = 0.0;
        for (int z = 0; z < bz; ++z) {
            for (int y = 0; y < bs; ++y) {
                const double* ra = &vol.data[(static_cast<size_t>(az + z) * h + (ay + y)) * w + ax];
                const double* rb = &vol.data[(static_cast<size_t>(bzp + z) * h + (by + y)) * w + bx];
                for (int x = 0; x < bs; ++x) {
                    const double diff = ra[x] - rb[x];
                    ssd += diff * diff;
                }
            }
            if (ssd > limit) return ssd;
        }
        return ssd;
    };

    std::vector<Candidate> cands;
    std::vector<double> group;
    for (int rz : zs) {
        for (int ry : ys) {
            for (int rx : xs) {
                cands.clear();
                const int x_lo = std::max(0, rx - params.search_radius);
                const int x_hi = std::min(w - bs, rx + params.search_radius);
                const int y_lo = std::max(0, ry - params.search_radius);
                const int y_hi = std::min(h - bs, ry + params.search_radius);
                const int z_lo = std::max(0, rz - params.search_radius);
                const int z_hi = std::min(d - bz, rz + params.search_radius);
                for (int cz = z_lo; cz <= z_hi; ++cz)
                    for (int cy = y_lo; cy <= y_hi; ++cy)
                        for (int cx = x_lo; cx <= x_hi; ++cx) {
                            const double ssd = block_ssd(rx, ry, rz, cx, cy, cz, match_limit);
                            if (ssd <= match_limit) cands.push_back({ssd, cx, cy, cz});
                        }
                if (cands.empty()) cands.push_back({0.0, rx, ry, rz});
                std::sort(cands.begin(), cands.end());
                int g = 1;
                while (2 * g <= std::min<int>(params.max_group, static_cast<int>(cands.size())))
                    g *= 2;

                // gather group, 3D-transform each block, Haar across the group
                group.assign(static_cast<size_t>(g) * npix, 0.0);
                for (int gi = 0; gi < g; ++gi) {
                    double* blk = group.data() + static_cast<size_t>(gi) * npix;
                    const auto& c = cands[gi];
                    for (int z = 0; z < bz; ++z)
                        for (int y = 0; y < bs; ++y)
                            for (int x = 0; x < bs; ++x)
                                blk[(static_cast<size_t>(z) * bs + y) * bs + x] =
                                    vol.at(c.x + x, c.y + y, c.z + z);
                    // x axis: bs*bz rows of length bs, stride 1
                    apply_1d(blk, dct_xy, bs, bs * bz, 1, bs, true);
                    // y axis
                    for (int z = 0; z < bz; ++z)
                        for (int x = 0; x < bs; ++x)
                            apply_1d(blk + static_cast<size_t>(z) * bs * bs + x, dct_xy, bs, 1,
                                     bs, 0, true);
                    // z axis
                    if (bz > 1)
                        for (int y = 0; y < bs; ++y)
                            for (int x = 0; x < bs; ++x)
                                apply_1d(blk + static_cast<size_t>(y) * bs + x, dct_z, bz, 1,
                                         bs * bs, 0, true);
                }
                haar_forward(group, g, npix);

                int retained = 0;
                for (auto& c : group) {
                    if (std::abs(c) < thr)
                        c = 0.0;
                    else
                        ++retained;
                }

                haar_inverse(group, g, npix);
                const double weight = 1.0 / static_cast<double>(std::max(1, retained));
                for (int gi = 0; gi < g; ++gi) {
                    double* blk = group.data() + static_cast<size_t>(gi) * npix;
                    if (bz > 1)
                        for (int y = 0; y < bs; ++y)
                            for (int x = 0; x < bs; ++x)
                                apply_1d(blk + static_cast<size_t>(y) * bs + x, dct_z, bz, 1,
                                         bs * bs, 0, false);
                    for (int z = 0; z < bz; ++z)
                        for (int x = 0; x < bs; ++x)
                            apply_1d(blk + static_cast<size_t>(z) * bs * bs + x, dct_xy, bs, 1,
                                     bs, 0, false);
                    apply_1d(blk, dct_xy, bs, bs * bz, 1, bs, false);
                    const auto& c = cands[gi];
                    for (int z = 0; z < bz; ++z)
                        for (int y = 0; y < bs; ++y)
                            for (int x = 0; x < bs; ++x) {
                                const size_t idx =
                                    (static_cast<size_t>(c.z + z) * h + (c.y + y)) * w +
                                    (c.x + x);
                                num[idx] += weight * blk[(static_cast<size_t>(z) * bs + y) * bs + x];
                                den[idx] += weight;
                            }
                }
            }
        }
    }

    Volume3D out = vol;
    for (size_t i = 0; i < out.data.size(); ++i)
        if (den[i] > 0.0) out.data[i] = num[i] / den[i];
    return out;
}

}  // namespace detail

inline Image2D denoise_bm_2d(const Image2D& img, const DenoiseParams& params) {
    params.validate();
    require(img.width >= params.block_size && img.height >= params.block_size,
            "denoise_bm_2d: image smaller than one block");
    Volume3D vol(img.width, img.height, 1);
    vol.data = img.data;
    const Volume3D out = detail::denoise_bm_volume(vol, params);
    Image2D res = img;
    res.data = out.data;
    return res;
}

inline Volume3D denoise_bm_3d(const Volume3D& vol, const DenoiseParams& params) {
    params.validate();
    require(vol.width >= params.block_size && vol.height >= params.block_size && vol.depth >= 1,
            "denoise_bm_3d: volume smaller than one block");
    return detail::denoise_bm_volume(vol, params);
}

}  // namespace usreg
