// config.hpp - line-oriented run configuration: "section.key = value" with
// '#' comments. Unknown keys and malformed or out-of-range values are
// rejected with the offending line number.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "usreg/phantom.hpp"
#include "usreg/pipeline.hpp"

namespace usreg {

struct RunConfig {
    uint64_t seed = 1;
    int threads = 1;
    PipelineConfig pipeline{};
    PhantomSpec phantom = default_phantom_spec(256, 256);
};

class ConfigError : public std::runtime_error {
  public:
    ConfigError(int line, const std::string& msg)
        : std::runtime_error("config line " + std::to_string(line) + ": " + msg), line_(line) {}
    int line() const { return line_; }

  private:
    int line_;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, int line) {
    size_t pos = 0;
    double d;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(line, "expected a number, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError(line, "trailing characters in number '" + v + "'");
    return d;
}

inline long long parse_int(const std::string& v, int line) {
    size_t pos = 0;
    long long i;
    try {
        i = std::stoll(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(line, "expected an integer, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError(line, "trailing characters in integer '" + v + "'");
    return i;
}

inline bool parse_bool(const std::string& v, int line) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ConfigError(line, "expected a boolean, got '" + v + "'");
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    using Setter = std::function<void(RunConfig&, const std::string&, int)>;
    static const std::map<std::string, Setter> keys = {
        {"global.seed", [](RunConfig& c, const std::string& v, int l) {
             c.seed = static_cast<uint64_t>(detail::parse_int(v, l));
             c.phantom.seed = c.seed;
         }},
        {"global.threads", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 1) throw ConfigError(l, "global.threads must be >= 1");
             c.threads = static_cast<int>(n);
         }},
        {"pipeline.half_window", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 1) throw ConfigError(l, "pipeline.half_window must be >= 1");
             c.pipeline.half_window = static_cast<int>(n);
         }},
        {"pipeline.window_center", [](RunConfig& c, const std::string& v, int l) {
             c.pipeline.window_center = detail::parse_double(v, l);
         }},
        {"pipeline.window_width", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d <= 0.0) throw ConfigError(l, "pipeline.window_width must be > 0");
             c.pipeline.window_width = d;
         }},
        {"pipeline.pre_denoised", [](RunConfig& c, const std::string& v, int l) {
             c.pipeline.pre_denoised = detail::parse_bool(v, l);
         }},
        {"pipeline.translation_max_shift", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 0) throw ConfigError(l, "pipeline.translation_max_shift must be >= 0");
             c.pipeline.translation_max_shift = static_cast<int>(n);
         }},
        {"pipeline.outside_mask_sigma", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d < 0.0) throw ConfigError(l, "pipeline.outside_mask_sigma must be >= 0");
             c.pipeline.outside_mask_sigma = d;
         }},
        {"denoise.method", [](RunConfig& c, const std::string& v, int l) {
             if (v == "gaussian") c.pipeline.denoise_method = DenoiseMethod::gaussian;
             else if (v == "bm") c.pipeline.denoise_method = DenoiseMethod::bm;
             else throw ConfigError(l, "denoise.method must be 'gaussian' or 'bm'");
         }},
        {"denoise.block_size", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 4 || (n & (n - 1)) != 0)
                 throw ConfigError(l, "denoise.block_size must be a power of two >= 4");
             c.pipeline.denoise.block_size = static_cast<int>(n);
         }},
        {"denoise.search_radius", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 0) throw ConfigError(l, "denoise.search_radius must be >= 0");
             c.pipeline.denoise.search_radius = static_cast<int>(n);
         }},
        {"denoise.max_group", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 1) throw ConfigError(l, "denoise.max_group must be >= 1");
             c.pipeline.denoise.max_group = static_cast<int>(n);
         }},
        {"denoise.match_threshold", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d < 0.0) throw ConfigError(l, "denoise.match_threshold must be >= 0");
             c.pipeline.denoise.match_threshold = d;
         }},
        {"denoise.hard_threshold", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d < 0.0) throw ConfigError(l, "denoise.hard_threshold must be >= 0");
             c.pipeline.denoise.hard_threshold = d;
         }},
        {"denoise.noise_sigma", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d < 0.0) throw ConfigError(l, "denoise.noise_sigma must be >= 0");
             c.pipeline.denoise.noise_sigma = d;
         }},
        {"denoise.gaussian_sigma", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d < 0.0) throw ConfigError(l, "denoise.gaussian_sigma must be >= 0");
             c.pipeline.denoise_gaussian_sigma = d;
         }},
        {"life.lambda", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 1) throw ConfigError(l, "life.lambda must be >= 1");
             c.pipeline.life.lambda = static_cast<int>(n);
         }},
        {"life.n", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 3 || n % 2 == 0) throw ConfigError(l, "life.n must be odd and >= 3");
             c.pipeline.life.neighborhood_n = static_cast<int>(n);
         }},
        {"life.threshold", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d < 0.0) throw ConfigError(l, "life.threshold must be >= 0");
             c.pipeline.life.soft_thresh = d;
         }},
        {"life.gain", [](RunConfig& c, const std::string& v, int l) {
             c.pipeline.life.enhancement_gain = detail::parse_double(v, l);
         }},
        {"geom.apex_x", [](RunConfig& c, const std::string& v, int l) {
             c.pipeline.geom.apex.x = detail::parse_double(v, l);
             c.phantom.geom.apex.x = c.pipeline.geom.apex.x;
         }},
        {"geom.apex_y", [](RunConfig& c, const std::string& v, int l) {
             c.pipeline.geom.apex.y = detail::parse_double(v, l);
             c.phantom.geom.apex.y = c.pipeline.geom.apex.y;
         }},
        {"geom.inner_radius", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d <= 0.0) throw ConfigError(l, "geom.inner_radius must be > 0");
             c.pipeline.geom.inner_radius = d;
             c.phantom.geom.inner_radius = d;
         }},
        {"geom.outer_radius", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d <= 0.0) throw ConfigError(l, "geom.outer_radius must be > 0");
             c.pipeline.geom.outer_radius = d;
             c.phantom.geom.outer_radius = d;
         }},
        {"geom.half_angle", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d <= 0.0 || d >= 1.5707963267948966)
                 throw ConfigError(l, "geom.half_angle must be in (0, pi/2)");
             c.pipeline.geom.half_angle = d;
             c.phantom.geom.half_angle = d;
         }},
        {"demons.sigma", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d <= 0.0) throw ConfigError(l, "demons.sigma must be > 0");
             c.pipeline.demons.sigma = d;
         }},
        {"demons.max_iter", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 1) throw ConfigError(l, "demons.max_iter must be >= 1");
             c.pipeline.demons.max_iter = static_cast<int>(n);
         }},
        {"demons.h", [](RunConfig& c, const std::string& v, int l) {
             c.pipeline.demons.h = detail::parse_double(v, l);
         }},
        {"demons.force", [](RunConfig& c, const std::string& v, int l) {
             if (v == "mi") c.pipeline.demons.force = DemonsForce::mi;
             else if (v == "intensity") c.pipeline.demons.force = DemonsForce::intensity;
             else throw ConfigError(l, "demons.force must be 'mi' or 'intensity'");
         }},
        {"demons.converge_tol", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d <= 0.0) throw ConfigError(l, "demons.converge_tol must be > 0");
             c.pipeline.demons.converge_tol = d;
         }},
        {"demons.alpha_cap", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d <= 0.0 || d >= 1.0) throw ConfigError(l, "demons.alpha_cap must be in (0, 1)");
             c.pipeline.demons.alpha_cap = d;
         }},
        {"mi.window_n", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 3 || n % 2 == 0) throw ConfigError(l, "mi.window_n must be odd and >= 3");
             c.pipeline.demons.mi_params.window_n = static_cast<int>(n);
         }},
        {"mi.bins", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 2) throw ConfigError(l, "mi.bins must be >= 2");
             c.pipeline.demons.mi_params.bins = static_cast<int>(n);
         }},
        {"mi.epsilon", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d <= 0.0) throw ConfigError(l, "mi.epsilon must be > 0");
             c.pipeline.demons.mi_params.epsilon = d;
         }},
        {"rigid.max_iter", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 1) throw ConfigError(l, "rigid.max_iter must be >= 1");
             c.pipeline.rigid.max_iter = static_cast<int>(n);
         }},
        {"rigid.step0", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d <= 0.0) throw ConfigError(l, "rigid.step0 must be > 0");
             c.pipeline.rigid.step0 = d;
         }},
        {"rigid.step_shrink", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d <= 0.0 || d >= 1.0) throw ConfigError(l, "rigid.step_shrink must be in (0, 1)");
             c.pipeline.rigid.step_shrink = d;
         }},
        {"rigid.min_step", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d <= 0.0) throw ConfigError(l, "rigid.min_step must be > 0");
             c.pipeline.rigid.min_step = d;
         }},
        {"rigid.bins", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 2) throw ConfigError(l, "rigid.bins must be >= 2");
             c.pipeline.rigid.bins = static_cast<int>(n);
         }},
        {"rigid.fd_delta", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d <= 0.0) throw ConfigError(l, "rigid.fd_delta must be > 0");
             c.pipeline.rigid.fd_delta = d;
         }},
        {"rigid.sample_stride", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 0) throw ConfigError(l, "rigid.sample_stride must be >= 0");
             c.pipeline.rigid.sample_stride = static_cast<int>(n);
         }},
        {"phantom.width", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 8) throw ConfigError(l, "phantom.width must be >= 8");
             c.phantom = default_phantom_spec(static_cast<int>(n), c.phantom.height,
                                              c.phantom.seed);
         }},
        {"phantom.height", [](RunConfig& c, const std::string& v, int l) {
             const long long n = detail::parse_int(v, l);
             if (n < 8) throw ConfigError(l, "phantom.height must be >= 8");
             c.phantom = default_phantom_spec(c.phantom.width, static_cast<int>(n),
                                              c.phantom.seed);
         }},
        {"phantom.deform", [](RunConfig& c, const std::string& v, int l) {
             if (v == "none") c.phantom.deform.kind = DeformKind::none;
             else if (v == "sinusoidal") c.phantom.deform.kind = DeformKind::sinusoidal;
             else if (v == "gaussian-bump") c.phantom.deform.kind = DeformKind::gaussian_bump;
             else throw ConfigError(l, "phantom.deform must be none|sinusoidal|gaussian-bump");
         }},
        {"phantom.amplitude", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d < 0.0) throw ConfigError(l, "phantom.amplitude must be >= 0");
             c.phantom.deform.amplitude = d;
         }},
        {"phantom.wavelength", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d <= 0.0) throw ConfigError(l, "phantom.wavelength must be > 0");
             c.phantom.deform.wavelength = d;
         }},
        {"phantom.bump_x", [](RunConfig& c, const std::string& v, int l) {
             c.phantom.deform.center.x = detail::parse_double(v, l);
         }},
        {"phantom.bump_y", [](RunConfig& c, const std::string& v, int l) {
             c.phantom.deform.center.y = detail::parse_double(v, l);
         }},
        {"phantom.bump_sigma", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d <= 0.0) throw ConfigError(l, "phantom.bump_sigma must be > 0");
             c.phantom.deform.sigma = d;
         }},
        {"phantom.speckle_sigma", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d < 0.0) throw ConfigError(l, "phantom.speckle_sigma must be >= 0");
             c.phantom.us_style.speckle_sigma = d;
         }},
        {"phantom.boundary_gain", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d < 0.0) throw ConfigError(l, "phantom.boundary_gain must be >= 0");
             c.phantom.us_style.boundary_gain = d;
         }},
        {"phantom.shadow", [](RunConfig& c, const std::string& v, int l) {
             c.phantom.us_style.shadow = detail::parse_bool(v, l);
         }},
        {"phantom.shadow_angle", [](RunConfig& c, const std::string& v, int l) {
             c.phantom.us_style.shadow_angle = detail::parse_double(v, l);
         }},
        {"phantom.shadow_width", [](RunConfig& c, const std::string& v, int l) {
             const double d = detail::parse_double(v, l);
             if (d <= 0.0) throw ConfigError(l, "phantom.shadow_width must be > 0");
             c.phantom.us_style.shadow_width = d;
         }},
    };

    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(lineno, "expected 'section.key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(lineno, "expected 'section.key = value'");
        const auto it = keys.find(key);
        if (it == keys.end()) throw ConfigError(lineno, "unknown key '" + key + "'");
        it->second(cfg, value, lineno);
    }
    cfg.pipeline.validate();
    return cfg;
}

}  // namespace usreg
