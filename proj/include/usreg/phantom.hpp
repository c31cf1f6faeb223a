// phantom.hpp - synthetic CT-like / US-like image pairs with ground-truth
// deformations and landmarks. Everything is deterministic under a fixed seed.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "usreg/grid.hpp"
#include "usreg/image.hpp"
#include "usreg/io.hpp"
#include "usreg/life.hpp"

namespace usreg {

enum class DeformKind { none, sinusoidal, gaussian_bump };

struct DeformSpec {
    DeformKind kind = DeformKind::none;
    double amplitude = 0.0;   // pixels
    double wavelength = 64.0; // sinusoidal period, pixels
    Vec2 center{0.0, 0.0};    // gaussian bump center
    double sigma = 16.0;      // gaussian bump width
};

struct VesselSpec {
    Vec2 center;
    double radius;
    double intensity;
};

struct UsStyle {
    double speckle_sigma = 0.0;
    double boundary_gain = 0.0;
    bool shadow = false;
    double shadow_angle = 0.0;  // radians from the downward axis
    double shadow_width = 0.1;  // angular half width
};

struct PhantomSpec {
    int width = 256;
    int height = 256;
    uint64_t seed = 1;
    std::vector<VesselSpec> vessels;
    std::vector<Vec2> liver;  // polygon, image coordinates
    DeformSpec deform;
    UsStyle us_style;
    SectorGeometry geom;
};

// A reasonable default: liver blob in the middle of the sector, three vessels.
inline PhantomSpec default_phantom_spec(int w, int h, uint64_t seed = 1) {
    PhantomSpec s;
    s.width = w;
    s.height = h;
    s.seed = seed;
    const double cx = 0.5 * w, cy = 0.55 * h;
    const double rx = 0.32 * w, ry = 0.28 * h;
    for (int i = 0; i < 16; ++i) {
        const double a = 2.0 * 3.14159265358979323846 * i / 16.0;
        const double wobble = 1.0 + 0.12 * std::sin(3.0 * a + 0.7);
        s.liver.push_back({cx + rx * wobble * std::cos(a), cy + ry * wobble * std::sin(a)});
    }
    s.vessels.push_back({{cx - 0.12 * w, cy - 0.05 * h}, 0.035 * w, 0.12});
    s.vessels.push_back({{cx + 0.10 * w, cy + 0.08 * h}, 0.050 * w, 0.15});
    s.vessels.push_back({{cx + 0.02 * w, cy - 0.13 * h}, 0.028 * w, 0.10});
    s.geom.apex = {0.5 * w, -0.35 * h};
    s.geom.inner_radius = 0.40 * h;
    s.geom.outer_radius = 1.55 * h;
    s.geom.half_angle = 0.62;
    return s;
}

namespace detail {

inline bool point_in_polygon(const std::vector<Vec2>& poly, double x, double y) {
    bool inside = false;
    const size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const bool cross = (poly[i].y > y) != (poly[j].y > y);
        if (cross) {
            const double xi = poly[j].x + (y - poly[j].y) / (poly[i].y - poly[j].y) *
                                              (poly[i].x - poly[j].x);
            if (x < xi) inside = !inside;
        }
    }
    return inside;
}

}  // namespace detail

struct CtPhantom2D {
    Image2D image;
    Mask2D liver_mask;
    std::vector<Vec2> landmarks;  // all inside the liver mask
};

// Piecewise-smooth slice: background, brighter liver with gentle internal
// modulation (gives the mono-modal force something to hold on to), darker
// vessel disks. Landmarks sit on vessel centers and liver boundary points.
inline CtPhantom2D make_ct_phantom(const PhantomSpec& spec) {
    require(spec.liver.size() >= 3, "make_ct_phantom: degenerate liver polygon");
    const int w = spec.width, h = spec.height;
    Image2D img(w, h);
    Mask2D mask(w, h);
    const double pi2 = 2.0 * 3.14159265358979323846;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double v = 0.22 + 0.05 * std::sin(pi2 * x / (0.9 * w)) * std::cos(pi2 * y / (1.1 * h));
            const bool in_liver = detail::point_in_polygon(spec.liver, x, y);
            if (in_liver) {
                v = 0.58 + 0.08 * std::sin(pi2 * x / 19.0) * std::cos(pi2 * y / 23.0) +
                    0.05 * std::sin(pi2 * x / 44.0) * std::sin(pi2 * y / 52.0) +
                    0.03 * std::sin(pi2 * (x + y) / 97.0);
                mask.set(x, y, true);
            }
            for (const auto& ves : spec.vessels) {
                const double dx = x - ves.center.x, dy = y - ves.center.y;
                const double d = std::sqrt(dx * dx + dy * dy);
                if (d < ves.radius) {
                    // smooth rim so gradients stay bounded
                    const double t = std::clamp((ves.radius - d) / 2.0, 0.0, 1.0);
                    v = v * (1.0 - t) + ves.intensity * t;
                }
            }
            img.at(x, y) = v;
        }
    }
    img = gaussian_blur(img, 1.2);

    CtPhantom2D out;
    out.image = std::move(img);
    out.liver_mask = std::move(mask);
    for (const auto& ves : spec.vessels)
        if (out.liver_mask.at(static_cast<int>(ves.center.x), static_cast<int>(ves.center.y)))
            out.landmarks.push_back(ves.center);
    // boundary points: shrink polygon vertices toward the centroid until inside
    Vec2 cen{0.0, 0.0};
    for (const auto& p : spec.liver) { cen.x += p.x; cen.y += p.y; }
    cen.x /= static_cast<double>(spec.liver.size());
    cen.y /= static_cast<double>(spec.liver.size());
    for (size_t i = 0; i < spec.liver.size(); i += 2) {
        Vec2 p = spec.liver[i];
        for (int step = 0; step < 40; ++step) {
            const int xi = static_cast<int>(p.x), yi = static_cast<int>(p.y);
            if (xi >= 0 && yi >= 0 && xi < w && yi < h && out.liver_mask.at(xi, yi)) break;
            p.x += 0.08 * (cen.x - p.x);
            p.y += 0.08 * (cen.y - p.y);
        }
        out.landmarks.push_back(p);
    }
    return out;
}

struct CtPhantom3D {
    Volume3D volume;
    Mask2D liver_mask;            // of the center slice
    std::vector<Vec2> landmarks;  // in center-slice coordinates
};

// Stacks slowly varying slices: vessel radii and the background modulation
// drift with the slice index so the z axis is observable to the rigid stage.
inline CtPhantom3D make_ct_phantom_volume(const PhantomSpec& spec, int depth) {
    require(depth >= 1, "make_ct_phantom_volume: depth >= 1");
    const int center = depth / 2;
    CtPhantom3D out;
    out.volume = Volume3D(spec.width, spec.height, depth);
    for (int k = 0; k < depth; ++k) {
        PhantomSpec slice_spec = spec;
        const double dz = static_cast<double>(k - center);
        for (auto& ves : slice_spec.vessels) {
            ves.radius = std::max(1.5, ves.radius * (1.0 - 0.06 * std::abs(dz)));
            ves.center.x += 0.7 * dz;
            ves.center.y += 0.4 * dz;
        }
        CtPhantom2D p2 = make_ct_phantom(slice_spec);
        // gentle intensity drift along z
        for (auto& v : p2.image.data) v = std::clamp(v * (1.0 - 0.015 * std::abs(dz)), 0.0, 1.0);
        std::copy(p2.image.data.begin(), p2.image.data.end(),
                  out.volume.data.begin() +
                      static_cast<size_t>(k) * spec.width * spec.height);
        if (k == center) {
            out.liver_mask = std::move(p2.liver_mask);
            out.landmarks = std::move(p2.landmarks);
        }
    }
    return out;
}

// Ultrasound-like rendition of a CT slice: monotone nonlinear intensity
// remap, apex-facing boundary boost, zero-mean speckle, sector cut-out and
// optional shadow cone.
inline Image2D make_us_phantom(const Image2D& ct, const PhantomSpec& spec) {
    require(ct.width == spec.width && ct.height == spec.height,
            "make_us_phantom: dimensions must match spec");
    const int w = ct.width, h = ct.height;
    Image2D us(w, h);

    // monotone remap
    for (size_t i = 0; i < us.data.size(); ++i)
        us.data[i] = std::pow(std::clamp(ct.data[i], 0.0, 1.0), 0.65);

    if (spec.us_style.boundary_gain > 0.0) {
        Image2D grad_r = radial_gradient(gaussian_blur(ct, 1.0), spec.geom);
        double mx = 0.0;
        for (double v : grad_r.data) mx = std::max(mx, std::abs(v));
        if (mx > 0.0)
            for (size_t i = 0; i < us.data.size(); ++i)
                us.data[i] += spec.us_style.boundary_gain * std::abs(grad_r.data[i]) / mx;
    }

    if (spec.us_style.speckle_sigma > 0.0) {
        std::mt19937_64 rng(spec.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> noise(us.data.size());
        double mean = 0.0;
        for (size_t i = 0; i < noise.size(); ++i) {
            noise[i] = spec.us_style.speckle_sigma * us.data[i] * gauss(rng);
            mean += noise[i];
        }
        mean /= static_cast<double>(noise.size());
        for (size_t i = 0; i < us.data.size(); ++i) us.data[i] += noise[i] - mean;
    }

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!spec.geom.contains(x, y)) {
                us.at(x, y) = 0.0;
                continue;
            }
            if (spec.us_style.shadow) {
                const double ang = std::atan2(x - spec.geom.apex.x, y - spec.geom.apex.y);
                if (std::abs(ang - spec.us_style.shadow_angle) < spec.us_style.shadow_width)
                    us.at(x, y) *= 0.35;
            }
            us.at(x, y) = std::clamp(us.at(x, y), 0.0, 1.0);
        }
    }
    return us;
}

inline DeformationField2D ground_truth_field(const PhantomSpec& spec) {
    DeformationField2D f(spec.width, spec.height);
    const double pi2 = 2.0 * 3.14159265358979323846;
    switch (spec.deform.kind) {
        case DeformKind::none:
            break;
        case DeformKind::sinusoidal: {
            const double A = spec.deform.amplitude;
            const double L = spec.deform.wavelength;
            for (int y = 0; y < spec.height; ++y)
                for (int x = 0; x < spec.width; ++x) {
                    const double ax = pi2 * y / L, ay = pi2 * x / L;
                    f.at(x, y) = {A * std::sin(ax) * std::cos(ay),
                                  A * std::cos(ax) * std::sin(ay)};
                }
            break;
        }
        case DeformKind::gaussian_bump: {
            const double A = spec.deform.amplitude;
            const double s2 = 2.0 * spec.deform.sigma * spec.deform.sigma;
            for (int y = 0; y < spec.height; ++y)
                for (int x = 0; x < spec.width; ++x) {
                    const double dx = x - spec.deform.center.x;
                    const double dy = y - spec.deform.center.y;
                    const double g = std::exp(-(dx * dx + dy * dy) / s2);
                    f.at(x, y) = {A * g, 0.0};
                }
            break;
        }
    }
    return f;
}

// Applies the configured deformation and returns both the warped image and the
// exact field. Throws if the discrete Jacobian of (id + field) is not
// positive everywhere.
inline std::pair<Image2D, DeformationField2D> apply_ground_truth_warp(const Image2D& img,
                                                                      const PhantomSpec& spec) {
    require(img.width == spec.width && img.height == spec.height,
            "apply_ground_truth_warp: dimensions must match spec");
    DeformationField2D f = ground_truth_field(spec);
    for (int y = 1; y < f.height - 1; ++y)
        for (int x = 1; x < f.width - 1; ++x) {
            const double dfx_dx = 0.5 * (f.at(x + 1, y).x - f.at(x - 1, y).x);
            const double dfx_dy = 0.5 * (f.at(x, y + 1).x - f.at(x, y - 1).x);
            const double dfy_dx = 0.5 * (f.at(x + 1, y).y - f.at(x - 1, y).y);
            const double dfy_dy = 0.5 * (f.at(x, y + 1).y - f.at(x, y - 1).y);
            const double det = (1.0 + dfx_dx) * (1.0 + dfy_dy) - dfx_dy * dfy_dx;
            require(det > 0.0, "apply_ground_truth_warp: non-invertible warp");
        }
    return {warp(img, f), std::move(f)};
}

// Where does a feature at q in the unwarped image land in the warped image?
// Solves m + field(m) = q by fixed-point iteration (valid for smooth fields).
inline Vec2 landmark_through_warp(const Vec2& q, const DeformationField2D& field) {
    Vec2 m = q;
    for (int i = 0; i < 60; ++i) {
        const Vec2 fv = bilinear_sample(field, m.x, m.y);
        const Vec2 next{q.x - fv.x, q.y - fv.y};
        if (std::abs(next.x - m.x) + std::abs(next.y - m.y) < 1e-12) { m = next; break; }
        m = next;
    }
    return m;
}

}  // namespace usreg
