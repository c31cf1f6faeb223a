// rigid.hpp - 3D affine registration by steepest ascent on NMI (used to pick
// the corresponding CT slice) and exhaustive 2D translation pre-alignment.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "usreg/grid.hpp"
#include "usreg/image.hpp"
#include "usreg/infometrics.hpp"

namespace usreg {

struct AffineTransform3D {
    // row-major 3x3 matrix q and translation t, both in voxel units
    std::array<double, 9> q{1, 0, 0, 0, 1, 0, 0, 0, 1};
    std::array<double, 3> t{0, 0, 0};

    static AffineTransform3D identity() { return {}; }

    double det() const {
        return q[0] * (q[4] * q[8] - q[5] * q[7]) - q[1] * (q[3] * q[8] - q[5] * q[6]) +
               q[2] * (q[3] * q[7] - q[4] * q[6]);
    }
};

inline std::array<double, 3> apply_affine(const AffineTransform3D& T,
                                          const std::array<double, 3>& p) {
    return {T.q[0] * p[0] + T.q[1] * p[1] + T.q[2] * p[2] + T.t[0],
            T.q[3] * p[0] + T.q[4] * p[1] + T.q[5] * p[2] + T.t[1],
            T.q[6] * p[0] + T.q[7] * p[1] + T.q[8] * p[2] + T.t[2]};
}

struct RigidSearchParams {
    int max_iter = 200;
    double step0 = 0.1;
    double step_shrink = 0.5;
    double min_step = 1e-5;
    int bins = 64;
    double fd_delta = 1e-3;
    double rel_tol = 1e-6;   // relative NMI improvement stop
    int sample_stride = 0;   // 0 = auto (~128 samples per axis)
    AffineTransform3D initial = AffineTransform3D::identity();  // ascent start

    void validate() const {
        require(initial.det() > 0.0, "RigidSearchParams: initial transform must have det > 0");
        require(max_iter >= 1, "RigidSearchParams: max_iter >= 1");
        require(step_shrink > 0.0 && step_shrink < 1.0, "RigidSearchParams: 0 < step_shrink < 1");
        require(step0 > 0.0 && min_step > 0.0 && fd_delta > 0.0,
                "RigidSearchParams: steps and fd_delta must be positive");
        require(bins >= 2, "RigidSearchParams: bins >= 2");
    }
};

// Samples the volume trilinearly at T(x, y, k) for every output pixel.
inline Image2D resample_volume_slice(const Volume3D& vol, const AffineTransform3D& T, int k) {
    require(k >= 0 && k < vol.depth, "resample_volume_slice: slice index out of range");
    Image2D out(vol.width, vol.height);
    out.spacing = {vol.spacing_x, vol.spacing_y};
    const double kz = static_cast<double>(k);
    parallel_for(0, vol.height, [&](int y) {
        for (int x = 0; x < vol.width; ++x) {
            const auto p = apply_affine(T, {static_cast<double>(x), static_cast<double>(y), kz});
            out.at(x, y) = trilinear_sample(vol, p[0], p[1], p[2]);
        }
    });
    return out;
}

namespace detail {

// NMI between the fixed image and the affinely resampled slice, evaluated on
// a strided sample grid for speed. Large images keep roughly 128 samples per
// axis; small images are evaluated densely.
inline double affine_nmi(const Volume3D& vol, const Image2D& us, const AffineTransform3D& T,
                         int k, int bins, int stride) {
    const int n = bins;
    std::vector<double> joint(static_cast<size_t>(n) * n, 0.0);
    size_t count = 0;
    const double kz = static_cast<double>(k);
    for (int y = 0; y < us.height; y += stride) {
        for (int x = 0; x < us.width; x += stride) {
            const auto p = apply_affine(T, {static_cast<double>(x), static_cast<double>(y), kz});
            const double v = trilinear_sample(vol, p[0], p[1], p[2]);
            const int ba = intensity_bin(us.at(x, y), n);
            const int bb = intensity_bin(v, n);
            joint[static_cast<size_t>(ba) * n + bb] += 1.0;
            ++count;
        }
    }
    double ha = 0.0, hb = 0.0, hab = 0.0;
    std::vector<double> ma(n, 0.0), mb(n, 0.0);
    const double inv = 1.0 / static_cast<double>(count);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double p = joint[static_cast<size_t>(i) * n + j] * inv;
            if (p > 0.0) hab -= p * std::log2(p);
            ma[i] += p;
            mb[j] += p;
        }
    for (int i = 0; i < n; ++i) {
        if (ma[i] > 0.0) ha -= ma[i] * std::log2(ma[i]);
        if (mb[i] > 0.0) hb -= mb[i] * std::log2(mb[i]);
    }
    require(hab > 0.0, "register_affine: degenerate NMI (constant images)");
    return (ha + hb) / hab;
}

}  // namespace detail

struct AffineResult {
    AffineTransform3D transform;
    double nmi_initial = 0.0;
    double nmi_final = 0.0;
    int iterations = 0;
    std::vector<double> nmi_trace;  // accepted iterations, non-decreasing
};

// Steepest ascent on NMI over the 12 affine parameters, numerical central
// differences, backtracking line search. Matrix entries move on a 1/100
// scale relative to translations so one step length serves all parameters.
inline AffineResult register_affine_full(const Volume3D& vol, const Image2D& us, int center_slice,
                                         const RigidSearchParams& params) {
    params.validate();
    require(vol.depth >= 3, "register_affine: volume depth must be >= 3");
    require(vol.width == us.width && vol.height == us.height,
            "register_affine: image dimensions must match volume slices");
    require(center_slice >= 0 && center_slice < vol.depth,
            "register_affine: center slice out of range");

    int stride = params.sample_stride;
    if (stride <= 0) stride = std::max(1, std::min(us.width, us.height) / 128);

    // parameter vector: q row-major then t; matrix entries preconditioned by 100
    std::array<double, 12> theta{};
    for (int i = 0; i < 9; ++i) theta[i] = params.initial.q[i];
    for (int i = 0; i < 3; ++i) theta[9 + i] = params.initial.t[i];
    std::array<double, 12> scale{};
    for (int i = 0; i < 9; ++i) scale[i] = 0.01;   // step in q = step / 100
    for (int i = 9; i < 12; ++i) scale[i] = 1.0;

    auto to_transform = [](const std::array<double, 12>& th) {
        AffineTransform3D T;
        for (int i = 0; i < 9; ++i) T.q[i] = th[i];
        for (int i = 0; i < 3; ++i) T.t[i] = th[9 + i];
        return T;
    };
    auto eval = [&](const std::array<double, 12>& th) {
        return detail::affine_nmi(vol, us, to_transform(th), center_slice, params.bins, stride);
    };

    AffineResult res;
    double best = eval(theta);
    res.nmi_initial = best;
    res.nmi_trace.push_back(best);

    double step = params.step0;
    for (int iter = 0; iter < params.max_iter; ++iter) {
        // preconditioned gradient
        std::array<double, 12> grad{};
        double gnorm = 0.0;
        for (int i = 0; i < 12; ++i) {
            auto plus = theta, minus = theta;
            plus[i] += params.fd_delta * scale[i];
            minus[i] -= params.fd_delta * scale[i];
            grad[i] = (eval(plus) - eval(minus)) / (2.0 * params.fd_delta);
            gnorm += grad[i] * grad[i];
        }
        gnorm = std::sqrt(gnorm);
        if (gnorm == 0.0) break;

        bool accepted = false;
        while (step >= params.min_step) {
            auto trial = theta;
            for (int i = 0; i < 12; ++i) trial[i] += step * scale[i] * grad[i] / gnorm;
            const AffineTransform3D Tt = to_transform(trial);
            if (Tt.det() > 0.0) {
                const double v = eval(trial);
                if (v > best) {
                    const double rel = (v - best) / std::max(std::abs(best), 1e-30);
                    theta = trial;
                    best = v;
                    res.nmi_trace.push_back(best);
                    accepted = true;
                    res.iterations = iter + 1;
                    step = std::min(step * 2.0, 1.0);
                    if (rel < params.rel_tol) iter = params.max_iter;  // converged
                    break;
                }
            }
            step *= params.step_shrink;
        }
        if (!accepted) break;  // step exhausted
    }

    res.transform = to_transform(theta);
    res.nmi_final = best;
    return res;
}

inline AffineTransform3D register_affine(const Volume3D& vol, const Image2D& us, int center_slice,
                                         const RigidSearchParams& params) {
    return register_affine_full(vol, us, center_slice, params).transform;
}

// Exhaustive integer-shift search maximizing NMI inside the mask; the result
// (dx, dy) aligns the moving image in the sense fixed(p) ~ moving(p + (dx, dy)).
// Ties break toward the smallest shift norm, then lexicographically.
inline std::pair<int, int> align_translation_2d(const Image2D& fixed, const Image2D& moving,
                                                const Mask2D& mask, int max_shift, int bins = 64) {
    require(fixed.same_dims(moving), "align_translation_2d: image dimensions must match");
    require(mask.width == fixed.width && mask.height == fixed.height,
            "align_translation_2d: mask dimensions must match");
    require(!mask.empty(), "align_translation_2d: empty mask");
    require(max_shift >= 0, "align_translation_2d: max_shift must be non-negative");

    const int w = fixed.width, h = fixed.height;
    double best_nmi = -1.0;
    int best_dx = 0, best_dy = 0;
    bool any = false;
    for (int dy = -max_shift; dy <= max_shift; ++dy) {
        for (int dx = -max_shift; dx <= max_shift; ++dx) {
            std::vector<double> joint(static_cast<size_t>(bins) * bins, 0.0);
            size_t count = 0;
            for (int y = 0; y < h; ++y) {
                const int sy = y + dy;
                if (sy < 0 || sy >= h) continue;
                for (int x = 0; x < w; ++x) {
                    if (!mask.at(x, y)) continue;
                    const int sx = x + dx;
                    if (sx < 0 || sx >= w) continue;
                    const int ba = intensity_bin(fixed.at(x, y), bins);
                    const int bb = intensity_bin(moving.at(sx, sy), bins);
                    joint[static_cast<size_t>(ba) * bins + bb] += 1.0;
                    ++count;
                }
            }
            if (count == 0) continue;
            double ha = 0.0, hb = 0.0, hab = 0.0;
            std::vector<double> ma(bins, 0.0), mb(bins, 0.0);
            const double inv = 1.0 / static_cast<double>(count);
            for (int i = 0; i < bins; ++i)
                for (int j = 0; j < bins; ++j) {
                    const double p = joint[static_cast<size_t>(i) * bins + j] * inv;
                    if (p > 0.0) hab -= p * std::log2(p);
                    ma[i] += p;
                    mb[j] += p;
                }
            if (hab <= 0.0) continue;  // degenerate at this shift
            for (int i = 0; i < bins; ++i) {
                if (ma[i] > 0.0) ha -= ma[i] * std::log2(ma[i]);
                if (mb[i] > 0.0) hb -= mb[i] * std::log2(mb[i]);
            }
            const double v = (ha + hb) / hab;
            any = true;
            const long n2_new = static_cast<long>(dx) * dx + static_cast<long>(dy) * dy;
            const long n2_old = static_cast<long>(best_dx) * best_dx +
                                static_cast<long>(best_dy) * best_dy;
            const bool better =
                v > best_nmi + 1e-12 ||
                (std::abs(v - best_nmi) <= 1e-12 &&
                 (n2_new < n2_old ||
                  (n2_new == n2_old &&
                   (dx < best_dx || (dx == best_dx && dy < best_dy)))));
            if (better) {
                best_nmi = v;
                best_dx = dx;
                best_dy = dy;
            }
        }
    }
    require(any, "align_translation_2d: degenerate NMI at every shift");
    return {best_dx, best_dy};
}

}  // namespace usreg
