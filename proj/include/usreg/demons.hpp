// demons.hpp - iterative non-rigid registration: per-pixel velocity (MI force
// or intensity optical-flow), Gaussian regularization, and an adaptive step
// that keeps every per-iteration displacement under one pixel.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "usreg/grid.hpp"
#include "usreg/image.hpp"
#include "usreg/infometrics.hpp"
#include "usreg/parallel.hpp"

namespace usreg {

enum class DemonsForce { mi, intensity };

struct DemonsParams {
    double sigma = 2.0;          // field regularization
    int max_iter = 200;
    double h = 1.0;              // stabilization constant of the intensity velocity
    DemonsForce force = DemonsForce::mi;
    MIForceParams mi_params{};
    double converge_tol = 1e-3;  // mean in-mask update magnitude, pixels
    double alpha_cap = 0.99;     // max per-iteration displacement, pixels

    void validate() const {
        require(sigma > 0.0, "DemonsParams: sigma > 0");
        require(max_iter >= 1, "DemonsParams: max_iter >= 1");
        require(alpha_cap > 0.0 && alpha_cap < 1.0, "DemonsParams: 0 < alpha_cap < 1");
        require(converge_tol > 0.0, "DemonsParams: converge_tol > 0");
        mi_params.validate();
    }
};

// v = (i_a - i_b) grad(i_b) / (|grad(i_b)|^2 + h (i_a - i_b)^2), zero where
// the denominator vanishes.
inline DeformationField2D intensity_velocity(const Image2D& a, const Image2D& b_warped,
                                             const DemonsParams& params) {
    require(a.same_dims(b_warped), "intensity_velocity: dimension mismatch");
    auto [gx, gy] = gradient_xy(b_warped);
    DeformationField2D v(a.width, a.height);
    parallel_for(0, a.height, [&](int y) {
        for (int x = 0; x < a.width; ++x) {
            const double diff = a.at(x, y) - b_warped.at(x, y);
            const double dx = gx.at(x, y), dy = gy.at(x, y);
            const double denom = dx * dx + dy * dy + params.h * diff * diff;
            if (denom < 1e-12) continue;
            v.at(x, y) = {diff * dx / denom, diff * dy / denom};
        }
    });
    return v;
}

// alpha = min(1, cap / max ||v||); a zero field gives alpha = 1.
inline double compute_alpha(const DeformationField2D& v, double cap) {
    double mx = 0.0;
    for (const auto& vec : v.vectors) mx = std::max(mx, norm(vec));
    if (mx == 0.0) return 1.0;
    return std::min(1.0, cap / mx);
}

struct DemonsResult {
    DeformationField2D field;
    int iterations = 0;
    bool converged = false;
    std::vector<double> max_increment_trace;  // max ||alpha * v_k|| per iteration
};

// Algorithm: warp moving by the current field, evaluate the velocity against
// the fixed image, Gaussian-regularize, scale by alpha and accumulate.
// Stops when the mean in-mask update magnitude drops under converge_tol.
inline DemonsResult demons_register_full(const Image2D& fixed, const Image2D& moving,
                                         const Mask2D* mask, const DemonsParams& params) {
    params.validate();
    require(fixed.same_dims(moving), "demons_register: dimension mismatch");
    if (mask)
        require(mask->width == fixed.width && mask->height == fixed.height,
                "demons_register: mask dimensions must match");
    if (params.force == DemonsForce::mi) {
        require(params.mi_params.window_n <= fixed.width &&
                    params.mi_params.window_n <= fixed.height,
                "demons_register: MI window larger than image");
        // constant fixed image makes every local distribution degenerate
        const auto [mn, mx] = std::minmax_element(fixed.data.begin(), fixed.data.end());
        require(*mx > *mn, "demons_register: constant fixed image with mi force");
    }

    const size_t n_in_mask = mask ? mask->count() : fixed.data.size();
    require(n_in_mask > 0, "demons_register: empty mask");

    DemonsResult res;
    res.field = DeformationField2D(fixed.width, fixed.height);

    for (int k = 0; k < params.max_iter; ++k) {
        const Image2D warped = warp(moving, res.field);
        DeformationField2D v = params.force == DemonsForce::mi
                                   ? mi_force_field(fixed, warped, params.mi_params, mask)
                                   : intensity_velocity(fixed, warped, params);
        if (mask) {
            for (size_t i = 0; i < v.vectors.size(); ++i)
                if (!mask->bits[i]) v.vectors[i] = {0.0, 0.0};
        }
        v = gaussian_blur(v, params.sigma);
        const double alpha = compute_alpha(v, params.alpha_cap);

        double mean_update = 0.0, max_update = 0.0;
        for (size_t i = 0; i < v.vectors.size(); ++i) {
            const Vec2 dv{alpha * v.vectors[i].x, alpha * v.vectors[i].y};
            res.field.vectors[i].x += dv.x;
            res.field.vectors[i].y += dv.y;
            const double m = norm(dv);
            max_update = std::max(max_update, m);
            if (!mask || mask->bits[i]) mean_update += m;
        }
        mean_update /= static_cast<double>(n_in_mask);
        res.max_increment_trace.push_back(max_update);
        res.iterations = k + 1;
        if (mean_update < params.converge_tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

inline DeformationField2D demons_register(const Image2D& fixed, const Image2D& moving,
                                          const Mask2D* mask, const DemonsParams& params) {
    return demons_register_full(fixed, moving, mask, params).field;
}

}  // namespace usreg
