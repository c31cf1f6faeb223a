// infometrics.hpp - entropy, mutual information, NMI and the per-pixel MI
// force field that drives the multimodal Demons iteration.
//
// Human-facing metrics (H, MI, NMI) use log base 2; the force uses natural
// log, matching the formula it implements.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "usreg/grid.hpp"
#include "usreg/image.hpp"
#include "usreg/parallel.hpp"

namespace usreg {

struct JointHistogram {
    int bins = 64;
    std::vector<double> joint;       // bins x bins, row index = image A bin
    std::vector<double> marginal_a;
    std::vector<double> marginal_b;
    size_t sample_count = 0;

    double joint_at(int a, int b) const { return joint[static_cast<size_t>(a) * bins + b]; }
};

// Uniform binning of [0, 1]; the last bin is closed.
inline int intensity_bin(double v, int bins) {
    const int b = static_cast<int>(v * bins);
    return std::clamp(b, 0, bins - 1);
}

inline JointHistogram joint_histogram(const Image2D& a, const Image2D& b, int bins,
                                      const Mask2D* mask = nullptr) {
    require(a.same_dims(b), "joint_histogram: image dimensions must match");
    require(bins >= 2, "joint_histogram: need at least 2 bins");
    if (mask)
        require(mask->width == a.width && mask->height == a.height,
                "joint_histogram: mask dimensions must match");

    JointHistogram h;
    h.bins = bins;
    h.joint.assign(static_cast<size_t>(bins) * bins, 0.0);
    h.marginal_a.assign(bins, 0.0);
    h.marginal_b.assign(bins, 0.0);
    for (size_t i = 0; i < a.data.size(); ++i) {
        if (mask && !mask->bits[i]) continue;
        const int ba = intensity_bin(a.data[i], bins);
        const int bb = intensity_bin(b.data[i], bins);
        h.joint[static_cast<size_t>(ba) * bins + bb] += 1.0;
        ++h.sample_count;
    }
    require(h.sample_count > 0, "joint_histogram: empty mask");
    const double inv = 1.0 / static_cast<double>(h.sample_count);
    for (auto& v : h.joint) v *= inv;
    for (int i = 0; i < bins; ++i)
        for (int j = 0; j < bins; ++j) {
            h.marginal_a[i] += h.joint_at(i, j);
            h.marginal_b[j] += h.joint_at(i, j);
        }
    return h;
}

// Shannon entropy in bits; 0 * log 0 = 0.
inline double entropy(const std::vector<double>& p) {
    double sum = 0.0, h = 0.0;
    for (double v : p) {
        require(v >= 0.0, "entropy: negative probability");
        sum += v;
        if (v > 0.0) h -= v * std::log2(v);
    }
    require(std::abs(sum - 1.0) <= 1e-9, "entropy: probabilities must sum to 1");
    return h;
}

inline double mutual_information(const JointHistogram& h) {
    double mi = 0.0;
    for (int i = 0; i < h.bins; ++i)
        for (int j = 0; j < h.bins; ++j) {
            const double pab = h.joint_at(i, j);
            if (pab <= 0.0) continue;
            mi += pab * std::log2(pab / (h.marginal_a[i] * h.marginal_b[j]));
        }
    return mi;
}

inline double nmi(const JointHistogram& h) {
    const double hab = entropy(h.joint);
    require(hab > 0.0, "nmi: degenerate input (both images constant)");
    return (entropy(h.marginal_a) + entropy(h.marginal_b)) / hab;
}

struct MIForceParams {
    int window_n = 9;       // odd window side
    int bins = 32;          // local histogram bins
    double epsilon = 1e-9;  // probability floor

    void validate() const {
        require(window_n >= 3 && window_n % 2 == 1, "MIForceParams: window_n must be odd >= 3");
        require(bins >= 2, "MIForceParams: bins >= 2");
        require(epsilon > 0.0, "MIForceParams: epsilon > 0");
    }
};

namespace detail {

// Joint probability of the center bin pair between window m (in binned A,
// centered at p) and the window in binned B centered at p + shift, plus the
// marginal of the B center bin inside that shifted window.
struct WindowProbe {
    double joint;
    double marginal;
};

inline WindowProbe window_probs(const std::vector<int>& bin_a, const std::vector<int>& bin_b,
                                int w, int px, int py, int sx, int sy, int half) {
    const int a0 = bin_a[static_cast<size_t>(py) * w + px];
    const int b0 = bin_b[static_cast<size_t>(py + sy) * w + (px + sx)];
    int joint = 0, marg = 0;
    for (int ky = -half; ky <= half; ++ky) {
        const int ya = py + ky;
        const int yb = py + sy + ky;
        const int* ra = bin_a.data() + static_cast<size_t>(ya) * w;
        const int* rb = bin_b.data() + static_cast<size_t>(yb) * w;
        for (int kx = -half; kx <= half; ++kx) {
            const bool bm = rb[px + sx + kx] == b0;
            marg += bm;
            joint += bm && (ra[px + kx] == a0);
        }
    }
    const double n2 = static_cast<double>((2 * half + 1) * (2 * half + 1));
    return {joint / n2, marg / n2};
}

}  // namespace detail

// Per-pixel MI force between target a and source b. The x component compares
// how well the window of a centered at the pixel matches the windows of b
// shifted one pixel left vs right (y: up vs down); the log-probability ratio
// is oriented so a positive component displaces b's sampling position toward
// the better-matching side under warp's p + field(p) convention. Components
// whose shifted windows leave the image are zero; the mask zeroes forces
// outside.
inline DeformationField2D mi_force_field(const Image2D& a, const Image2D& b,
                                         const MIForceParams& params,
                                         const Mask2D* mask = nullptr) {
    require(a.same_dims(b), "mi_force_field: image dimensions must match");
    params.validate();
    require(params.window_n <= a.width && params.window_n <= a.height,
            "mi_force_field: window larger than image");
    if (mask)
        require(mask->width == a.width && mask->height == a.height,
                "mi_force_field: mask dimensions must match");

    const int w = a.width, h = a.height;
    const int half = params.window_n / 2;
    const double inv_n2 = 1.0 / static_cast<double>(params.window_n * params.window_n);
    const double eps = params.epsilon;

    std::vector<int> bin_a(a.data.size()), bin_b(b.data.size());
    for (size_t i = 0; i < a.data.size(); ++i) {
        bin_a[i] = intensity_bin(a.data[i], params.bins);
        bin_b[i] = intensity_bin(b.data[i], params.bins);
    }

    DeformationField2D force(w, h);
    parallel_for(0, h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            if (mask && !mask->at(x, y)) continue;
            Vec2 f{0.0, 0.0};
            // x component: windows shifted left (r) and right (t)
            if (x - 1 - half >= 0 && x + 1 + half < w && y - half >= 0 && y + half < h) {
                const auto r = detail::window_probs(bin_a, bin_b, w, x, y, -1, 0, half);
                const auto t = detail::window_probs(bin_a, bin_b, w, x, y, +1, 0, half);
                f.x = inv_n2 * std::log((std::max(t.joint, eps) / std::max(t.marginal, eps)) /
                                        (std::max(r.joint, eps) / std::max(r.marginal, eps)));
            }
            // y component: windows shifted up and down
            if (y - 1 - half >= 0 && y + 1 + half < h && x - half >= 0 && x + half < w) {
                const auto u = detail::window_probs(bin_a, bin_b, w, x, y, 0, -1, half);
                const auto d = detail::window_probs(bin_a, bin_b, w, x, y, 0, +1, half);
                f.y = inv_n2 * std::log((std::max(d.joint, eps) / std::max(d.marginal, eps)) /
                                        (std::max(u.joint, eps) / std::max(u.marginal, eps)));
            }
            force.at(x, y) = f;
        }
    });
    return force;
}

}  // namespace usreg
