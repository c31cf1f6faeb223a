// usreg - command line front end: every pipeline stage as a subcommand.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "usreg/config.hpp"
#include "usreg/demons.hpp"
#include "usreg/denoise.hpp"
#include "usreg/grid.hpp"
#include "usreg/infometrics.hpp"
#include "usreg/io.hpp"
#include "usreg/life.hpp"
#include "usreg/phantom.hpp"
#include "usreg/pipeline.hpp"
#include "usreg/rigid.hpp"

namespace {

int g_log_level = 1;  // 0 quiet, 1 info, 2 debug

void log_info(const std::string& msg) {
    if (g_log_level >= 1) std::cerr << "[info] " << msg << "\n";
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

usreg::Image2D read_image(const std::string& path) {
    if (ends_with(path, ".pgm")) return usreg::read_pgm16(path);
    return usreg::read_f32img(path);
}

void write_image(const std::string& path, const usreg::Image2D& img) {
    if (ends_with(path, ".pgm")) usreg::write_pgm16(path, img);
    else usreg::write_f32img(path, img);
}

std::string read_text_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

usreg::RunConfig load_config(const std::string& path) {
    if (path.empty()) return usreg::RunConfig{};
    return usreg::parse_config(read_text_file(path));
}

void write_report(const std::string& path, const usreg::RegistrationReport& rep) {
    std::ofstream os(path);
    os << "nmi_before=" << rep.nmi_before << "\n";
    os << "nmi_after=" << rep.nmi_after << "\n";
    os << "translation_dx=" << rep.translation.first << "\n";
    os << "translation_dy=" << rep.translation.second << "\n";
    os << "demons_iterations=" << rep.demons_iterations << "\n";
    os << "demons_converged=" << (rep.demons_converged ? 1 : 0) << "\n";
    if (rep.has_landmarks) {
        os << "landmark_mean_before=" << rep.landmark_mean_before << "\n";
        os << "landmark_max_before=" << rep.landmark_max_before << "\n";
        os << "landmark_mean_after=" << rep.landmark_mean_after << "\n";
        os << "landmark_max_after=" << rep.landmark_max_after << "\n";
    }
    for (const auto& [stage, secs] : rep.wall_times)
        os << "time." << stage << "=" << secs << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D ultrasound to 3D CT deformable registration toolkit"};
    app.require_subcommand(1);

    int threads = 1;
    std::string log_level = "info";
    app.add_option("--threads", threads, "internal parallelism cap")->check(CLI::PositiveNumber);
    app.add_option("--log", log_level, "log level")
        ->check(CLI::IsMember({"quiet", "info", "debug"}));

    // denoise
    auto* cmd_denoise = app.add_subcommand("denoise", "denoise an image or volume");
    std::string dn_input, dn_output, dn_method = "bm2d";
    double dn_sigma = 0.05;
    int dn_block = 8, dn_search = 12;
    cmd_denoise->add_option("--input", dn_input)->required();
    cmd_denoise->add_option("--output", dn_output)->required();
    cmd_denoise->add_option("--method", dn_method)
        ->check(CLI::IsMember({"gaussian", "bm2d", "bm3d"}));
    cmd_denoise->add_option("--sigma", dn_sigma, "noise sigma (bm) or blur sigma (gaussian)");
    cmd_denoise->add_option("--block-size", dn_block);
    cmd_denoise->add_option("--search-radius", dn_search);

    // extract-slice
    auto* cmd_slice = app.add_subcommand("extract-slice", "rigidly register and extract the corresponding slice");
    std::string es_volume, es_us, es_out_slice, es_out_transform, es_config;
    int es_center = -1, es_half_window = 15;
    cmd_slice->add_option("--volume", es_volume)->required();
    cmd_slice->add_option("--us", es_us)->required();
    cmd_slice->add_option("--center", es_center, "center slice (default: depth/2)");
    cmd_slice->add_option("--half-window", es_half_window);
    cmd_slice->add_option("--out-slice", es_out_slice)->required();
    cmd_slice->add_option("--out-transform", es_out_transform);
    cmd_slice->add_option("--config", es_config);

    // enhance
    auto* cmd_enhance = app.add_subcommand("enhance", "LIFE edge extraction and slice enhancement");
    std::string en_slice, en_out_edges, en_out_enhanced;
    double en_apex_x = 0.0, en_apex_y = 0.0, en_threshold = 1.5, en_gain = 1.0;
    int en_lambda = 4, en_n = 3;
    cmd_enhance->add_option("--slice", en_slice)->required();
    cmd_enhance->add_option("--apex-x", en_apex_x)->required();
    cmd_enhance->add_option("--apex-y", en_apex_y)->required();
    cmd_enhance->add_option("--lambda", en_lambda);
    cmd_enhance->add_option("--n", en_n);
    cmd_enhance->add_option("--threshold", en_threshold);
    cmd_enhance->add_option("--gain", en_gain);
    cmd_enhance->add_option("--out-edges", en_out_edges);
    cmd_enhance->add_option("--out-enhanced", en_out_enhanced);

    // register
    auto* cmd_register = app.add_subcommand("register", "non-rigid Demons registration");
    std::string rg_fixed, rg_moving, rg_mask, rg_force = "mi", rg_out_field, rg_out_warped;
    double rg_sigma = 2.0;
    int rg_max_iter = 200;
    cmd_register->add_option("--fixed", rg_fixed)->required();
    cmd_register->add_option("--moving", rg_moving)->required();
    cmd_register->add_option("--mask", rg_mask);
    cmd_register->add_option("--force", rg_force)->check(CLI::IsMember({"mi", "intensity"}));
    cmd_register->add_option("--sigma", rg_sigma);
    cmd_register->add_option("--max-iter", rg_max_iter);
    cmd_register->add_option("--out-field", rg_out_field)->required();
    cmd_register->add_option("--out-warped", rg_out_warped);

    // pipeline
    auto* cmd_pipeline = app.add_subcommand("pipeline", "full registration workflow");
    std::string pl_volume, pl_us, pl_mask, pl_config, pl_landmarks, pl_out_dir;
    bool pl_pre_denoised = false;
    cmd_pipeline->add_option("--volume", pl_volume)->required();
    cmd_pipeline->add_option("--us", pl_us)->required();
    cmd_pipeline->add_option("--mask", pl_mask)->required();
    cmd_pipeline->add_option("--config", pl_config);
    cmd_pipeline->add_option("--landmarks", pl_landmarks);
    cmd_pipeline->add_option("--out-dir", pl_out_dir)->required();
    cmd_pipeline->add_flag("--pre-denoised", pl_pre_denoised, "skip volume denoising");

    // phantom
    auto* cmd_phantom = app.add_subcommand("phantom", "generate synthetic paired data");
    std::string ph_spec, ph_out_dir;
    int ph_depth = 1;
    cmd_phantom->add_option("--spec", ph_spec, "config file with phantom.* keys");
    cmd_phantom->add_option("--out-dir", ph_out_dir)->required();
    cmd_phantom->add_option("--depth", ph_depth, "emit a volume with this many slices");

    // evaluate
    auto* cmd_evaluate = app.add_subcommand("evaluate", "entropy / MI / NMI of an image pair");
    std::string ev_a, ev_b, ev_mask;
    int ev_bins = 64;
    cmd_evaluate->add_option("--a", ev_a)->required();
    cmd_evaluate->add_option("--b", ev_b)->required();
    cmd_evaluate->add_option("--bins", ev_bins);
    cmd_evaluate->add_option("--mask", ev_mask);

    CLI11_PARSE(app, argc, argv);

    g_log_level = log_level == "quiet" ? 0 : (log_level == "debug" ? 2 : 1);
    usreg::set_thread_cap(threads);

    try {
        if (*cmd_denoise) {
            if (dn_method == "bm3d") {
                const usreg::Volume3D vol = usreg::read_f32vol(dn_input);
                usreg::DenoiseParams p;
                p.block_size = dn_block;
                p.search_radius = dn_search;
                p.noise_sigma = dn_sigma;
                usreg::write_f32vol(dn_output, usreg::denoise_bm_3d(vol, p));
            } else {
                const usreg::Image2D img = read_image(dn_input);
                if (dn_method == "gaussian") {
                    write_image(dn_output, usreg::denoise_gaussian(img, dn_sigma));
                } else {
                    usreg::DenoiseParams p;
                    p.block_size = dn_block;
                    p.search_radius = dn_search;
                    p.noise_sigma = dn_sigma;
                    write_image(dn_output, usreg::denoise_bm_2d(img, p));
                }
            }
            log_info("denoised " + dn_input + " -> " + dn_output);
        } else if (*cmd_slice) {
            const usreg::Volume3D vol = usreg::read_f32vol(es_volume);
            const usreg::Image2D us = read_image(es_us);
            const usreg::RunConfig cfg = load_config(es_config);
            const int center = es_center >= 0 ? es_center : vol.depth / 2;
            const int lo = std::max(0, center - es_half_window);
            const int hi = std::min(vol.depth - 1, center + es_half_window);
            usreg::Volume3D sub(vol.width, vol.height, hi - lo + 1);
            std::copy(vol.data.begin() + static_cast<size_t>(lo) * vol.width * vol.height,
                      vol.data.begin() + static_cast<size_t>(hi + 1) * vol.width * vol.height,
                      sub.data.begin());
            const auto result =
                usreg::register_affine_full(sub, us, center - lo, cfg.pipeline.rigid);
            write_image(es_out_slice,
                        usreg::resample_volume_slice(sub, result.transform, center - lo));
            if (!es_out_transform.empty()) {
                std::ofstream os(es_out_transform);
                for (double q : result.transform.q) os << q << " ";
                for (double t : result.transform.t) os << t << " ";
                os << "\n";
            }
            log_info("NMI " + std::to_string(result.nmi_initial) + " -> " +
                     std::to_string(result.nmi_final));
        } else if (*cmd_enhance) {
            const usreg::Image2D slice = read_image(en_slice);
            usreg::SectorGeometry geom;
            geom.apex = {en_apex_x, en_apex_y};
            geom.inner_radius = 1.0;
            geom.outer_radius = 2.0 * (slice.width + slice.height);
            geom.half_angle = 1.2;
            usreg::LifeParams params;
            params.lambda = en_lambda;
            params.neighborhood_n = en_n;
            params.soft_thresh = en_threshold;
            params.enhancement_gain = en_gain;
            const usreg::Image2D edges = usreg::extract_edges(slice, geom, params);
            if (!en_out_edges.empty()) write_image(en_out_edges, edges);
            if (!en_out_enhanced.empty())
                write_image(en_out_enhanced, usreg::enhance_slice(slice, edges, en_gain));
        } else if (*cmd_register) {
            const usreg::Image2D fixed = read_image(rg_fixed);
            const usreg::Image2D moving = read_image(rg_moving);
            usreg::Mask2D mask;
            const bool has_mask = !rg_mask.empty();
            if (has_mask) mask = usreg::read_mask_pgm(rg_mask);
            usreg::DemonsParams params;
            params.force = rg_force == "mi" ? usreg::DemonsForce::mi
                                            : usreg::DemonsForce::intensity;
            params.sigma = rg_sigma;
            params.max_iter = rg_max_iter;
            const auto result = usreg::demons_register_full(fixed, moving,
                                                            has_mask ? &mask : nullptr, params);
            usreg::write_f32fld(rg_out_field, result.field);
            if (!rg_out_warped.empty())
                write_image(rg_out_warped, usreg::warp(moving, result.field));
            log_info("demons: " + std::to_string(result.iterations) + " iterations, " +
                     (result.converged ? "converged" : "max_iter reached"));
            if (!result.converged) return 2;
        } else if (*cmd_pipeline) {
            const usreg::Volume3D vol = usreg::read_f32vol(pl_volume);
            const usreg::Image2D us = read_image(pl_us);
            const usreg::Mask2D mask = usreg::read_mask_pgm(pl_mask);
            usreg::RunConfig cfg = load_config(pl_config);
            usreg::set_thread_cap(std::max(threads, cfg.threads));
            if (pl_pre_denoised) cfg.pipeline.pre_denoised = true;
            usreg::LandmarkPairs lm;
            if (!pl_landmarks.empty()) lm = usreg::read_landmarks_csv(pl_landmarks);
            const auto result = usreg::run_pipeline(vol, us, mask, cfg.pipeline,
                                                    pl_landmarks.empty() ? nullptr : &lm);
            std::filesystem::create_directories(pl_out_dir);
            const std::filesystem::path out(pl_out_dir);
            usreg::write_f32img((out / "warped_us.f32img").string(), result.warped_us);
            usreg::write_pgm16((out / "warped_us.pgm").string(), result.warped_us);
            usreg::write_f32fld((out / "field.f32fld").string(), result.field);
            usreg::write_f32img((out / "slice.f32img").string(), result.slice);
            usreg::write_pgm16((out / "slice.pgm").string(), result.slice);
            usreg::write_fused_ppm((out / "fused_before.ppm").string(), result.slice, us);
            usreg::write_fused_ppm((out / "fused_after.ppm").string(), result.slice,
                                   result.warped_us);
            write_report((out / "report.txt").string(), result.report);
            log_info("NMI " + std::to_string(result.report.nmi_before) + " -> " +
                     std::to_string(result.report.nmi_after));
            if (!result.report.demons_converged) return 2;
        } else if (*cmd_phantom) {
            usreg::RunConfig cfg = load_config(ph_spec);
            std::filesystem::create_directories(ph_out_dir);
            const std::filesystem::path out(ph_out_dir);
            const usreg::PhantomSpec& spec = cfg.phantom;
            const auto ct = usreg::make_ct_phantom(spec);
            const usreg::Image2D us_clean = usreg::make_us_phantom(ct.image, spec);
            const auto [us_warped, field] = usreg::apply_ground_truth_warp(us_clean, spec);
            usreg::write_f32img((out / "ct.f32img").string(), ct.image);
            usreg::write_pgm16((out / "ct.pgm").string(), ct.image);
            usreg::write_f32img((out / "us.f32img").string(), us_warped);
            usreg::write_pgm16((out / "us.pgm").string(), us_warped);
            usreg::write_mask_pgm((out / "mask.pgm").string(), ct.liver_mask);
            usreg::write_f32fld((out / "field.f32fld").string(), field);
            usreg::LandmarkPairs lm;
            for (const auto& q : ct.landmarks) {
                lm.fixed.push_back(q);
                lm.moving.push_back(usreg::landmark_through_warp(q, field));
            }
            usreg::write_landmarks_csv((out / "landmarks.csv").string(), lm);
            if (ph_depth > 1) {
                const auto ct3 = usreg::make_ct_phantom_volume(spec, ph_depth);
                usreg::write_f32vol((out / "ct_vol.f32vol").string(), ct3.volume);
            }
            log_info("phantom written to " + ph_out_dir);
        } else if (*cmd_evaluate) {
            const usreg::Image2D a = read_image(ev_a);
            const usreg::Image2D b = read_image(ev_b);
            usreg::Mask2D mask;
            const bool has_mask = !ev_mask.empty();
            if (has_mask) mask = usreg::read_mask_pgm(ev_mask);
            const auto h = usreg::joint_histogram(a, b, ev_bins, has_mask ? &mask : nullptr);
            std::cout << "H(A)=" << usreg::entropy(h.marginal_a) << "\n";
            std::cout << "H(B)=" << usreg::entropy(h.marginal_b) << "\n";
            std::cout << "H(A,B)=" << usreg::entropy(h.joint) << "\n";
            std::cout << "MI=" << usreg::mutual_information(h) << "\n";
            std::cout << "NMI=" << usreg::nmi(h) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
