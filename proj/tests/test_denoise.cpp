#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "usreg/denoise.hpp"

using namespace usreg;

namespace {

double mse(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

Image2D cartoon_image(int w, int h) {
    // piecewise-constant regions with a disc, the kind of content the
    // collaborative filter is good at
    Image2D img(w, h, 0.25);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (x > w / 2) img.at(x, y) = 0.7;
            const double dx = x - 0.3 * w, dy = y - 0.6 * h;
            if (dx * dx + dy * dy < 0.02 * w * h) img.at(x, y) = 0.9;
        }
    return img;
}

Image2D add_noise(const Image2D& img, double sigma, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    Image2D out = img;
    for (auto& v : out.data) v = std::clamp(v + gauss(rng), 0.0, 1.0);
    return out;
}

}  // namespace

TEST_CASE("dct_matrix is orthonormal") {
    for (int n : {4, 8}) {
        const auto m = detail::dct_matrix(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double dot = 0.0;
                for (int k = 0; k < n; ++k)
                    dot += m[static_cast<size_t>(i) * n + k] * m[static_cast<size_t>(j) * n + k];
                CHECK(dot == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-12));
            }
    }
}

TEST_CASE("haar transform round trip and energy preservation") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const int len = 8, bl = 3;
    std::vector<double> g(static_cast<size_t>(len) * bl);
    for (auto& v : g) v = uni(rng);
    const auto orig = g;

    detail::haar_forward(g, len, bl);
    double e_in = 0.0, e_tr = 0.0;
    for (double v : orig) e_in += v * v;
    for (double v : g) e_tr += v * v;
    CHECK(e_tr == Catch::Approx(e_in).margin(1e-12));

    detail::haar_inverse(g, len, bl);
    for (size_t i = 0; i < g.size(); ++i)
        CHECK(g[i] == Catch::Approx(orig[i]).margin(1e-12));
}

TEST_CASE("haar of a constant group concentrates in the first slot") {
    const int len = 4, bl = 2;
    std::vector<double> g(static_cast<size_t>(len) * bl, 1.0);
    detail::haar_forward(g, len, bl);
    CHECK(g[0] == Catch::Approx(2.0).margin(1e-12));  // sqrt(len)
    CHECK(g[1] == Catch::Approx(2.0).margin(1e-12));
    for (size_t i = 2; i < g.size(); ++i) CHECK(g[i] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("effective_threshold auto and explicit modes") {
    DenoiseParams p;
    p.noise_sigma = 0.1;
    CHECK(p.effective_threshold() == Catch::Approx(0.27));
    p.hard_threshold = 0.05;
    CHECK(p.effective_threshold() == Catch::Approx(0.05));
    p.hard_threshold = 0.0;
    CHECK(p.effective_threshold() == 0.0);
}

TEST_CASE("denoise parameter validation") {
    DenoiseParams p;
    p.block_size = 6;
    CHECK_THROWS(p.validate());
    p.block_size = 2;
    CHECK_THROWS(p.validate());
    p.block_size = 8;
    p.max_group = 0;
    CHECK_THROWS(p.validate());
    p.max_group = 16;
    p.match_threshold = -1.0;
    CHECK_THROWS(p.validate());
}

TEST_CASE("denoise_bm_2d rejects images smaller than one block") {
    DenoiseParams p;
    p.block_size = 8;
    Image2D img(7, 12);
    CHECK_THROWS(denoise_bm_2d(img, p));
}

TEST_CASE("denoise_bm_2d keeps a constant image constant") {
    Image2D img(24, 24, 0.5);
    DenoiseParams p;
    p.block_size = 8;
    p.search_radius = 4;
    const Image2D out = denoise_bm_2d(img, p);
    for (double v : out.data) CHECK(v == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("denoise_bm_2d reduces noise on piecewise content") {
    const int w = 48, h = 48;
    const Image2D clean = cartoon_image(w, h);
    const Image2D noisy = add_noise(clean, 0.1, 17);
    DenoiseParams p;
    p.block_size = 8;
    p.search_radius = 6;
    p.noise_sigma = 0.1;
    const Image2D out = denoise_bm_2d(noisy, p);
    const double before = mse(noisy.data, clean.data);
    const double after = mse(out.data, clean.data);
    CHECK(after < 0.5 * before);  // at least 3 dB
}

TEST_CASE("denoise_bm_2d is deterministic") {
    const Image2D noisy = add_noise(cartoon_image(32, 32), 0.08, 23);
    DenoiseParams p;
    p.block_size = 8;
    p.search_radius = 4;
    p.noise_sigma = 0.08;
    const Image2D a = denoise_bm_2d(noisy, p);
    const Image2D b = denoise_bm_2d(noisy, p);
    CHECK(a.data == b.data);
}

TEST_CASE("depth-1 volume denoising equals the 2D path") {
    const Image2D noisy = add_noise(cartoon_image(32, 32), 0.1, 29);
    DenoiseParams p;
    p.block_size = 8;
    p.search_radius = 4;
    p.noise_sigma = 0.1;
    const Image2D out2d = denoise_bm_2d(noisy, p);
    Volume3D vol(32, 32, 1);
    vol.data = noisy.data;
    const Volume3D out3d = denoise_bm_3d(vol, p);
    for (size_t i = 0; i < out2d.data.size(); ++i)
        CHECK(std::abs(out2d.data[i] - out3d.data[i]) <= 1e-9);
}

TEST_CASE("denoise_bm_3d reduces noise on a multi-slice volume") {
    const int w = 32, h = 32, d = 4;
    Volume3D clean(w, h, d);
    const Image2D plane = cartoon_image(w, h);
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < w * h; ++i)
            clean.data[static_cast<size_t>(k) * w * h + i] = plane.data[i];
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss(0.0, 0.1);
    Volume3D noisy = clean;
    for (auto& v : noisy.data) v = std::clamp(v + gauss(rng), 0.0, 1.0);
    DenoiseParams p;
    p.block_size = 8;
    p.search_radius = 4;
    p.noise_sigma = 0.1;
    const Volume3D out = denoise_bm_3d(noisy, p);
    CHECK(mse(out.data, clean.data) < 0.5 * mse(noisy.data, clean.data));
}

TEST_CASE("denoise_gaussian matches gaussian_blur") {
    const Image2D img = add_noise(cartoon_image(16, 16), 0.05, 37);
    const Image2D a = denoise_gaussian(img, 1.2);
    const Image2D b = gaussian_blur(img, 1.2);
    CHECK(a.data == b.data);
}
