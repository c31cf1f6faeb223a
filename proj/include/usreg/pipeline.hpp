// pipeline.hpp - end-to-end orchestration: window -> denoise -> corresponding
// slice -> edge enhancement -> mask -> translation pre-alignment -> Demons ->
// field blending outside the mask -> resampling, plus evaluation metrics.
#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "usreg/demons.hpp"
#include "usreg/denoise.hpp"
#include "usreg/grid.hpp"
#include "usreg/image.hpp"
#include "usreg/infometrics.hpp"
#include "usreg/io.hpp"
#include "usreg/life.hpp"
#include "usreg/rigid.hpp"

namespace usreg {

enum class DenoiseMethod { gaussian, bm };

struct PipelineConfig {
    int half_window = 15;          // 2*half_window+1 slices around the center
    double window_center = 0.5;    // CT windowing; identity on data already in [0,1]
    double window_width = 1.0;
    DenoiseMethod denoise_method = DenoiseMethod::bm;
    DenoiseParams denoise{};
    double denoise_gaussian_sigma = 1.0;
    bool pre_denoised = false;     // skip volume denoising
    LifeParams life{};
    SectorGeometry geom{};
    DemonsParams demons{};
    RigidSearchParams rigid{};
    int translation_max_shift = 10;
    double outside_mask_sigma = 6.0;

    void validate() const {
        require(half_window >= 1, "PipelineConfig: half_window >= 1");
        require(window_width > 0.0, "PipelineConfig: window_width > 0");
        require(outside_mask_sigma >= 0.0, "PipelineConfig: outside_mask_sigma >= 0");
        require(translation_max_shift >= 0, "PipelineConfig: translation_max_shift >= 0");
        denoise.validate();
        life.validate();
        demons.validate();
        rigid.validate();
    }
};

struct RegistrationReport {
    double nmi_before = 0.0;
    double nmi_after = 0.0;
    double landmark_mean_before = 0.0;
    double landmark_max_before = 0.0;
    double landmark_mean_after = 0.0;
    double landmark_max_after = 0.0;
    bool has_landmarks = false;
    int demons_iterations = 0;
    bool demons_converged = false;
    std::pair<int, int> translation{0, 0};
    AffineTransform3D rigid_transform{};
    std::vector<std::pair<std::string, double>> wall_times;  // stage name, seconds
    std::vector<std::string> stages;                         // executed stage trace
};

struct PipelineResult {
    Image2D warped_us;
    DeformationField2D field;   // maps original US coordinates
    Image2D slice;              // enhanced corresponding CT slice
    RegistrationReport report;
};

// Inside-mask vectors unchanged; outside-mask vectors replaced by the
// Gaussian-blurred field computed from the full field.
inline DeformationField2D blend_field_outside_mask(const DeformationField2D& field,
                                                   const Mask2D& mask, double sigma) {
    require(field.width == mask.width && field.height == mask.height,
            "blend_field_outside_mask: dimension mismatch");
    if (sigma == 0.0) return field;
    const DeformationField2D blurred = gaussian_blur(field, sigma);
    DeformationField2D out = field;
    for (size_t i = 0; i < out.vectors.size(); ++i)
        if (!mask.bits[i]) out.vectors[i] = blurred.vectors[i];
    return out;
}

// error_i = ||(m_i + field(m_i)) - f_i|| with bilinear field interpolation
inline std::pair<double, double> landmark_error(const std::vector<Vec2>& points_fixed,
                                                const std::vector<Vec2>& points_moving,
                                                const DeformationField2D& field) {
    require(points_fixed.size() == points_moving.size(), "landmark_error: length mismatch");
    require(!points_fixed.empty(), "landmark_error: empty point lists");
    double sum = 0.0, mx = 0.0;
    for (size_t i = 0; i < points_fixed.size(); ++i) {
        const Vec2 m = points_moving[i];
        const Vec2 v = bilinear_sample(field, m.x, m.y);
        const double ex = m.x + v.x - points_fixed[i].x;
        const double ey = m.y + v.y - points_fixed[i].y;
        const double e = std::sqrt(ex * ex + ey * ey);
        sum += e;
        mx = std::max(mx, e);
    }
    return {sum / static_cast<double>(points_fixed.size()), mx};
}

namespace detail {

class StageTimer {
  public:
    StageTimer(RegistrationReport& report, std::string name)
        : report_(report), name_(std::move(name)),
          start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        const auto end = std::chrono::steady_clock::now();
        report_.wall_times.emplace_back(
            name_, std::chrono::duration<double>(end - start_).count());
        report_.stages.push_back(name_);
    }

  private:
    RegistrationReport& report_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
};

template <typename Fn>
auto run_stage(RegistrationReport& report, const std::string& name, Fn&& fn) {
    StageTimer timer(report, name);
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error("pipeline stage '" + name + "': " + e.what());
    }
}

}  // namespace detail

inline PipelineResult run_pipeline(const Volume3D& vol, const Image2D& us,
                                   const Mask2D& liver_mask, const PipelineConfig& cfg,
                                   const LandmarkPairs* landmarks = nullptr) {
    cfg.validate();
    require(vol.width == us.width && vol.height == us.height,
            "run_pipeline: US dimensions must match volume slices");
    require(liver_mask.width == us.width && liver_mask.height == us.height,
            "run_pipeline: mask dimensions must match");
    require(!liver_mask.empty(), "run_pipeline: empty liver mask");

    PipelineResult res;
    RegistrationReport& rep = res.report;

    // (1) CT windowing
    Volume3D windowed = detail::run_stage(rep, "window_level", [&] {
        return window_level(vol, cfg.window_center, cfg.window_width);
    });

    // (2) sub-volume around the roughly aligned center slice, denoised
    const int center = vol.depth / 2;
    const int lo = std::max(0, center - cfg.half_window);
    const int hi = std::min(vol.depth - 1, center + cfg.half_window);
    Volume3D subvol(vol.width, vol.height, hi - lo + 1);
    std::copy(windowed.data.begin() + static_cast<size_t>(lo) * vol.width * vol.height,
              windowed.data.begin() + static_cast<size_t>(hi + 1) * vol.width * vol.height,
              subvol.data.begin());
    const int center_sub = center - lo;
    windowed = Volume3D();  // large; drop the copy as soon as the sub-volume exists
    if (!cfg.pre_denoised) {
        subvol = detail::run_stage(rep, "denoise_volume", [&] {
            return cfg.denoise_method == DenoiseMethod::bm
                       ? denoise_bm_3d(subvol, cfg.denoise)
                       : [&] {
                             Volume3D v = subvol;
                             for (int k = 0; k < v.depth; ++k) {
                                 Image2D s = gaussian_blur(extract_slice(v, k),
                                                           cfg.denoise_gaussian_sigma);
                                 std::copy(s.data.begin(), s.data.end(),
                                           v.data.begin() +
                                               static_cast<size_t>(k) * v.width * v.height);
                             }
                             return v;
                         }();
        });
    } else {
        rep.stages.push_back("denoise_volume(skipped)");
    }

    // (3) denoise the US image
    const Image2D us_d = detail::run_stage(rep, "denoise_us", [&] {
        return cfg.denoise_method == DenoiseMethod::bm
                   ? denoise_bm_2d(us, cfg.denoise)
                   : denoise_gaussian(us, cfg.denoise_gaussian_sigma);
    });

    // (4) rigid registration and corresponding-slice extraction
    const Image2D slice = detail::run_stage(rep, "extract_corresponding_slice", [&] {
        rep.rigid_transform = register_affine(subvol, us_d, center_sub, cfg.rigid);
        return resample_volume_slice(subvol, rep.rigid_transform, center_sub);
    });

    // (5) edge extraction and enhancement
    const Image2D enhanced = detail::run_stage(rep, "enhance_edges", [&] {
        const Image2D edges = extract_edges(slice, cfg.geom, cfg.life);
        return enhance_slice(slice, edges, cfg.life.enhancement_gain);
    });

    // (6) mask both images
    const Image2D fixed_m = apply_mask(enhanced, liver_mask);
    const Image2D us_m = apply_mask(us_d, liver_mask);
    rep.stages.push_back("apply_mask");

    rep.nmi_before = nmi(joint_histogram(fixed_m, us_m, cfg.rigid.bins, &liver_mask));

    // (7) translation pre-alignment inside the mask. The un-enhanced slice is
    // the fixed side here: the added edge bands flatten and can even invert
    // the NMI-vs-shift landscape, while the plain slice peaks at the true
    // offset. The moving US stays uncut so shifted samples read real content
    // instead of the mask's zero border; the mask still gates which fixed
    // pixels contribute.
    const auto [dx, dy] = detail::run_stage(rep, "align_translation", [&] {
        return align_translation_2d(apply_mask(slice, liver_mask), us_d, liver_mask,
                                    cfg.translation_max_shift, cfg.rigid.bins);
    });
    rep.translation = {dx, dy};

    DeformationField2D shift(us.width, us.height);
    for (auto& v : shift.vectors) v = {static_cast<double>(dx), static_cast<double>(dy)};
    const Image2D us_translated = apply_mask(warp(us_d, shift), liver_mask);

    // (8) Demons non-rigid registration
    const DemonsResult dem = detail::run_stage(rep, "demons", [&] {
        return demons_register_full(fixed_m, us_translated, &liver_mask, cfg.demons);
    });
    rep.demons_iterations = dem.iterations;
    rep.demons_converged = dem.converged;

    // (9) compose the translation into the field, blend outside the mask
    res.field = detail::run_stage(rep, "compose_and_blend", [&] {
        DeformationField2D f = dem.field;
        for (auto& v : f.vectors) {
            v.x += dx;
            v.y += dy;
        }
        return blend_field_outside_mask(f, liver_mask, cfg.outside_mask_sigma);
    });

    // (10) resample the denoised US image
    res.warped_us = detail::run_stage(rep, "resample", [&] { return warp(us_d, res.field); });
    res.slice = enhanced;

    rep.nmi_after = nmi(joint_histogram(fixed_m, apply_mask(res.warped_us, liver_mask),
                                        cfg.rigid.bins, &liver_mask));

    if (landmarks && !landmarks->fixed.empty()) {
        rep.has_landmarks = true;
        // The field lives on the fixed grid: p + field(p) is the US coordinate
        // resampled at output pixel p, so the fixed-frame landmarks are the
        // evaluation points and their US mates are the targets.
        const DeformationField2D zero(us.width, us.height);
        std::tie(rep.landmark_mean_before, rep.landmark_max_before) =
            landmark_error(landmarks->moving, landmarks->fixed, zero);
        // The slice was resampled through the rigid transform, so a volume
        // landmark q sits at the in-plane solution p of T(p, center) = q
        // before the field applies. Solve the 2x2 in-plane system; if the
        // transform is in-plane degenerate, fall back to q itself.
        const AffineTransform3D& T = rep.rigid_transform;
        const double det2 = T.q[0] * T.q[4] - T.q[1] * T.q[3];
        std::vector<Vec2> fixed_in_slice = landmarks->fixed;
        if (std::abs(det2) > 1e-12) {
            const double kz = static_cast<double>(center_sub);
            for (Vec2& q : fixed_in_slice) {
                const double rx = q.x - (T.q[2] * kz + T.t[0]);
                const double ry = q.y - (T.q[5] * kz + T.t[1]);
                q = {(T.q[4] * rx - T.q[1] * ry) / det2,
                     (T.q[0] * ry - T.q[3] * rx) / det2};
            }
        }
        std::tie(rep.landmark_mean_after, rep.landmark_max_after) =
            landmark_error(landmarks->moving, fixed_in_slice, res.field);
    }
    return res;
}

}  // namespace usreg
