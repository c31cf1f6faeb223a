#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "usreg/grid.hpp"

using namespace usreg;

namespace {

Image2D random_image(int w, int h, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Image2D img(w, h);
    for (auto& v : img.data) v = uni(rng);
    return img;
}

}  // namespace

TEST_CASE("bilinear_sample at integer coordinates returns the pixel") {
    Image2D img(8, 8);
    img.at(3, 5) = 0.73;
    CHECK(bilinear_sample(img, 3.0, 5.0) == 0.73);
}

TEST_CASE("bilinear_sample midpoint of two pixels") {
    Image2D img(4, 4, 0.0);
    img.at(1, 2) = 0.0;
    img.at(2, 2) = 10.0;
    CHECK(bilinear_sample(img, 1.5, 2.0) == Catch::Approx(5.0));
}

TEST_CASE("bilinear_sample 2x2 center") {
    Image2D img(2, 2);
    img.at(0, 0) = 0.0;
    img.at(1, 0) = 1.0;
    img.at(0, 1) = 2.0;
    img.at(1, 1) = 3.0;
    CHECK(bilinear_sample(img, 0.5, 0.5) == Catch::Approx(1.5));
}

TEST_CASE("bilinear_sample clamps outside the image") {
    Image2D img(3, 3, 0.5);
    img.at(0, 0) = 1.0;
    CHECK(bilinear_sample(img, -4.0, -4.0) == 1.0);
    CHECK(bilinear_sample(img, 10.0, 10.0) == 0.5);
}

TEST_CASE("bilinear_sample is exact on affine intensity functions") {
    Image2D img(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) img.at(x, y) = 0.3 + 1.7 * x - 0.4 * y;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.5, 14.5);
    for (int i = 0; i < 50; ++i) {
        const double x = uni(rng), y = uni(rng);
        CHECK(bilinear_sample(img, x, y) ==
              Catch::Approx(0.3 + 1.7 * x - 0.4 * y).margin(1e-10));
    }
}

TEST_CASE("warp with the zero field is the identity") {
    const Image2D img = random_image(13, 9, 1);
    DeformationField2D zero(13, 9);
    const Image2D out = warp(img, zero);
    for (size_t i = 0; i < img.data.size(); ++i) CHECK(out.data[i] == img.data[i]);
}

TEST_CASE("warp by a uniform (1, 0) field shifts a horizontal ramp") {
    const int w = 8, h = 4;
    Image2D img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.at(x, y) = x;
    DeformationField2D f(w, h);
    for (auto& v : f.vectors) v = {1.0, 0.0};
    const Image2D out = warp(img, f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            CHECK(out.at(x, y) == Catch::Approx(std::min(x + 1, w - 1)));
}

TEST_CASE("warp matches a per-pixel reference loop") {
    const Image2D img = random_image(16, 16, 2);
    DeformationField2D f(16, 16);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (auto& v : f.vectors) v = {uni(rng), uni(rng)};
    const Image2D out = warp(img, f);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            const Vec2& v = f.at(x, y);
            CHECK(out.at(x, y) == bilinear_sample(img, x + v.x, y + v.y));
        }
}

TEST_CASE("warp rejects dimension mismatch") {
    Image2D img(8, 8);
    DeformationField2D f(7, 8);
    CHECK_THROWS(warp(img, f));
}

TEST_CASE("gradient_xy of a constant image is zero") {
    Image2D img(6, 6, 0.4);
    auto [gx, gy] = gradient_xy(img);
    for (double v : gx.data) CHECK(v == 0.0);
    for (double v : gy.data) CHECK(v == 0.0);
}

TEST_CASE("gradient_xy of linear fields returns the coefficients") {
    const int w = 9, h = 7;
    Image2D img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.at(x, y) = 2.0 * x - 0.5 * y;
    auto [gx, gy] = gradient_xy(img);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            CHECK(gx.at(x, y) == Catch::Approx(2.0));
            CHECK(gy.at(x, y) == Catch::Approx(-0.5));
        }
}

TEST_CASE("gradient_xy matches an independent finite-difference loop") {
    const Image2D img = random_image(8, 8, 4);
    auto [gx, gy] = gradient_xy(img);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            double ex, ey;
            if (x == 0) ex = img.at(1, y) - img.at(0, y);
            else if (x == 7) ex = img.at(7, y) - img.at(6, y);
            else ex = (img.at(x + 1, y) - img.at(x - 1, y)) / 2.0;
            if (y == 0) ey = img.at(x, 1) - img.at(x, 0);
            else if (y == 7) ey = img.at(x, 7) - img.at(x, 6);
            else ey = (img.at(x, y + 1) - img.at(x, y - 1)) / 2.0;
            CHECK(gx.at(x, y) == Catch::Approx(ex).margin(1e-12));
            CHECK(gy.at(x, y) == Catch::Approx(ey).margin(1e-12));
        }
}

TEST_CASE("gradient_xy rejects images smaller than 3x3") {
    Image2D img(2, 3);
    CHECK_THROWS(gradient_xy(img));
}

TEST_CASE("extract_slice") {
    Volume3D vol(4, 3, 9);
    for (int k = 0; k < 9; ++k)
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 4; ++x) vol.at(x, y, k) = k;
    const Image2D s = extract_slice(vol, 7);
    for (double v : s.data) CHECK(v == 7.0);
    CHECK_THROWS(extract_slice(vol, 9));
    CHECK_THROWS(extract_slice(vol, -1));

    Volume3D single(5, 5, 1, 0.3);
    const Image2D s0 = extract_slice(single, 0);
    CHECK(s0.width == 5);
    for (double v : s0.data) CHECK(v == 0.3);
}

TEST_CASE("gaussian_blur sigma zero is the identity") {
    const Image2D img = random_image(10, 10, 5);
    const Image2D out = gaussian_blur(img, 0.0);
    CHECK(out.data == img.data);
}

TEST_CASE("gaussian_blur keeps constants unchanged") {
    Image2D img(12, 12, 0.7);
    const Image2D out = gaussian_blur(img, 2.5);
    for (double v : out.data) CHECK(v == Catch::Approx(0.7).margin(1e-12));
}

TEST_CASE("gaussian_blur of a unit impulse matches the normalized kernel") {
    Image2D img(33, 33, 0.0);
    img.at(16, 16) = 1.0;
    const double sigma = 2.0;
    const Image2D out = gaussian_blur(img, sigma);
    // direct evaluation of the separable normalized kernel at the center
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) sum += std::exp(-0.5 * i * i / (sigma * sigma));
    const double k0 = 1.0 / sum;  // center tap of the 1D kernel
    CHECK(out.at(16, 16) == Catch::Approx(k0 * k0).margin(1e-6));
}

TEST_CASE("gaussian_blur preserves the mean (reflective boundary)") {
    const Image2D img = random_image(17, 11, 6);
    const Image2D out = gaussian_blur(img, 1.7);
    double m_in = 0.0, m_out = 0.0;
    for (double v : img.data) m_in += v;
    for (double v : out.data) m_out += v;
    CHECK(m_out / img.data.size() == Catch::Approx(m_in / img.data.size()).margin(1e-9));
}

TEST_CASE("gaussian_blur rejects negative sigma") {
    Image2D img(4, 4);
    CHECK_THROWS(gaussian_blur(img, -0.1));
}

TEST_CASE("window_level maps the window linearly") {
    Image2D img(3, 1);
    img.at(0, 0) = 40.0;    // center -> 0.5
    img.at(1, 0) = -400.0;  // below -> 0
    img.at(2, 0) = 140.0;   // c=40, w=400 -> 0.75
    const Image2D out = window_level(img, 40.0, 400.0);
    CHECK(out.at(0, 0) == Catch::Approx(0.5));
    CHECK(out.at(1, 0) == 0.0);
    CHECK(out.at(2, 0) == Catch::Approx(0.75));
    CHECK_THROWS(window_level(img, 40.0, 0.0));
}

TEST_CASE("trilinear_sample is linear along z") {
    Volume3D vol(4, 4, 3);
    for (int k = 0; k < 3; ++k)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) vol.at(x, y, k) = 1.0 + 2.0 * k;
    CHECK(trilinear_sample(vol, 1.5, 2.5, 0.5) == Catch::Approx(2.0).margin(1e-12));
    CHECK(trilinear_sample(vol, 0.0, 0.0, 1.25) == Catch::Approx(3.5).margin(1e-12));
}
