// life.hpp - radial-directional local intuitionistic fuzzy entropy edge
// extraction in sector polar coordinates, soft thresholding, and CT slice
// boundary enhancement.
#pragma once

#include <algorithm>
#include <cmath>

#include "usreg/grid.hpp"
#include "usreg/image.hpp"
#include "usreg/parallel.hpp"

namespace usreg {

// Intuitionistic fuzzy triple: membership, non-membership and hesitation.
struct FuzzyPixel {
    double mu = 0.0;
    double phi = 0.0;
    double pi = 0.0;
};

struct LifeParams {
    int lambda = 4;
    int neighborhood_n = 3;
    double soft_thresh = 1.5;      // applied to the signed neighborhood sum
    double enhancement_gain = 1.0;

    void validate() const {
        require(lambda >= 1, "LifeParams: lambda >= 1");
        require(neighborhood_n >= 3 && neighborhood_n % 2 == 1,
                "LifeParams: neighborhood_n must be odd >= 3");
        require(soft_thresh >= 0.0, "LifeParams: soft_thresh >= 0");
    }
};

namespace detail {
inline double ipow(double base, int exp) {
    double r = 1.0;
    while (exp > 0) {
        if (exp & 1) r *= base;
        base *= base;
        exp >>= 1;
    }
    return r;
}
}  // namespace detail

// |grad| / max|grad|; an all-zero field maps to all zeros.
inline Image2D normalize_gradient(const Image2D& grad) {
    Image2D out = grad;
    double mx = 0.0;
    for (double v : grad.data) {
        require(std::isfinite(v), "normalize_gradient: non-finite input");
        mx = std::max(mx, std::abs(v));
    }
    if (mx == 0.0) {
        std::fill(out.data.begin(), out.data.end(), 0.0);
        return out;
    }
    for (auto& v : out.data) v = std::abs(v) / mx;
    return out;
}

// mu = (1-g)^(lambda(lambda+1)), phi = 1 - (1-g)^lambda, pi = 1 - mu - phi
inline FuzzyPixel fuzzify(double g_norm, int lambda) {
    require(g_norm >= 0.0 && g_norm <= 1.0, "fuzzify: g_norm must be in [0, 1]");
    require(lambda >= 1, "fuzzify: lambda >= 1");
    FuzzyPixel f;
    const double base = 1.0 - g_norm;
    f.mu = detail::ipow(base, lambda * (lambda + 1));
    f.phi = 1.0 - detail::ipow(base, lambda);
    f.pi = 1.0 - f.mu - f.phi;
    return f;
}

inline double fuzzy_entropy_term(const FuzzyPixel& f) {
    // denominator > 0 always: mu + phi + pi = 1
    return (2.0 * f.mu * f.phi + f.pi * f.pi) / (f.mu * f.mu + f.phi * f.phi + f.pi * f.pi);
}

// Mean entropy term over an n x n block of fuzzified values.
inline double life_entropy(const std::vector<FuzzyPixel>& block) {
    require(!block.empty(), "life_entropy: empty neighborhood");
    double sum = 0.0;
    for (const auto& f : block) sum += fuzzy_entropy_term(f);
    return sum / static_cast<double>(block.size());
}

// Gradient projected onto the ray from the sector apex: with dx = x - x0 and
// dy = y - y0, sin(theta) = dx/rho and cos(theta) = dy/rho, so
// grad_r = gx * sin(theta) + gy * cos(theta). atan2 semantics keep the
// apex column and apex point total.
inline Image2D radial_gradient(const Image2D& img, const SectorGeometry& geom) {
    auto [gx, gy] = gradient_xy(img);
    Image2D out(img.width, img.height);
    parallel_for(0, img.height, [&](int y) {
        const double dy = y - geom.apex.y;
        for (int x = 0; x < img.width; ++x) {
            const double dx = x - geom.apex.x;
            const double rho = std::sqrt(dx * dx + dy * dy);
            if (rho == 0.0) {
                out.at(x, y) = gy.at(x, y);  // apex pixel: theta = 0 limit
                continue;
            }
            out.at(x, y) = (gx.at(x, y) * dx + gy.at(x, y) * dy) / rho;
        }
    });
    return out;
}

// e - sgn(e) * tau when |e| >= tau, else 0.
inline double soft_threshold(double e, double tau) {
    require(tau >= 0.0, "soft_threshold: tau >= 0");
    if (std::abs(e) < tau) return 0.0;
    const double sgn = e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0);
    return e - sgn * tau;
}

// Full edge extraction: radial gradient -> normalization -> fuzzification ->
// neighborhood entropy sum signed by the radial gradient -> soft threshold.
// The thresholded value is the n x n SUM of entropy terms, which is the scale
// on which the default threshold of 1.5 is meaningful for n = 3.
inline Image2D extract_edges(const Image2D& img, const SectorGeometry& geom,
                             const LifeParams& params) {
    params.validate();
    require(img.width >= 3 && img.height >= 3, "extract_edges: image must be at least 3x3");

    const Image2D grad_r = radial_gradient(img, geom);
    const Image2D gnorm = normalize_gradient(grad_r);

    const int w = img.width, h = img.height;
    std::vector<double> term(static_cast<size_t>(w) * h);
    parallel_for(0, h, [&](int y) {
        for (int x = 0; x < w; ++x)
            term[static_cast<size_t>(y) * w + x] =
                fuzzy_entropy_term(fuzzify(gnorm.at(x, y), params.lambda));
    });

    const int half = params.neighborhood_n / 2;
    Image2D out(w, h);
    parallel_for(0, h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            double sum = 0.0;
            for (int ky = -half; ky <= half; ++ky) {
                const int yy = std::clamp(y + ky, 0, h - 1);
                for (int kx = -half; kx <= half; ++kx) {
                    const int xx = std::clamp(x + kx, 0, w - 1);
                    sum += term[static_cast<size_t>(yy) * w + xx];
                }
            }
            const double gr = grad_r.at(x, y);
            const double signed_sum = gr > 0.0 ? sum : (gr < 0.0 ? -sum : 0.0);
            out.at(x, y) = soft_threshold(signed_sum, params.soft_thresh);
        }
    });
    return out;
}

// slice + gain * edges, clamped to [0, 1]
inline Image2D enhance_slice(const Image2D& slice, const Image2D& edges, double gain) {
    require(slice.same_dims(edges), "enhance_slice: dimension mismatch");
    Image2D out = slice;
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = std::clamp(out.data[i] + gain * edges.data[i], 0.0, 1.0);
    return out;
}

}  // namespace usreg
