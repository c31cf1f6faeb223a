#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "usreg/life.hpp"

using namespace usreg;

namespace {

SectorGeometry test_geom(double ax, double ay) {
    SectorGeometry g;
    g.apex = {ax, ay};
    g.inner_radius = 1.0;
    g.outer_radius = 1e4;
    g.half_angle = 0.7;
    return g;
}

// direct evaluation of the membership functions and the entropy term
double term_reference(double g, int lambda) {
    const double mu = std::pow(1.0 - g, static_cast<double>(lambda * (lambda + 1)));
    const double phi = 1.0 - std::pow(1.0 - g, static_cast<double>(lambda));
    const double pi = 1.0 - mu - phi;
    return (2.0 * mu * phi + pi * pi) / (mu * mu + phi * phi + pi * pi);
}

}  // namespace

TEST_CASE("normalize_gradient scales by the max magnitude") {
    Image2D g(3, 1);
    g.at(0, 0) = -4.0;
    g.at(1, 0) = 2.0;
    g.at(2, 0) = 0.0;
    const Image2D n = normalize_gradient(g);
    CHECK(n.at(0, 0) == Catch::Approx(1.0));
    CHECK(n.at(1, 0) == Catch::Approx(0.5));
    CHECK(n.at(2, 0) == 0.0);
}

TEST_CASE("normalize_gradient of an all-zero field is all zero") {
    Image2D g(4, 4, 0.0);
    const Image2D n = normalize_gradient(g);
    for (double v : n.data) CHECK(v == 0.0);
}

TEST_CASE("normalize_gradient rejects non-finite input") {
    Image2D g(2, 2, 0.0);
    g.at(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(normalize_gradient(g));
}

TEST_CASE("fuzzify matches the closed-form membership functions") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int lambda : {1, 2, 4, 6}) {
        for (int i = 0; i < 50; ++i) {
            const double g = uni(rng);
            const FuzzyPixel f = fuzzify(g, lambda);
            const double base = 1.0 - g;
            CHECK(f.mu ==
                  Catch::Approx(std::pow(base, lambda * (lambda + 1))).margin(1e-12));
            CHECK(f.phi == Catch::Approx(1.0 - std::pow(base, lambda)).margin(1e-12));
            CHECK(f.mu + f.phi + f.pi == Catch::Approx(1.0).margin(1e-12));
            CHECK(f.pi >= -1e-12);
        }
    }
    CHECK_THROWS(fuzzify(-0.1, 4));
    CHECK_THROWS(fuzzify(1.1, 4));
    CHECK_THROWS(fuzzify(0.5, 0));
}

TEST_CASE("entropy term vanishes at crisp pixels and matches the formula elsewhere") {
    CHECK(fuzzy_entropy_term(fuzzify(0.0, 4)) == Catch::Approx(0.0).margin(1e-12));
    CHECK(fuzzy_entropy_term(fuzzify(1.0, 4)) == Catch::Approx(0.0).margin(1e-12));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double g = uni(rng);
        CHECK(fuzzy_entropy_term(fuzzify(g, 4)) ==
              Catch::Approx(term_reference(g, 4)).margin(1e-12));
    }
}

TEST_CASE("life_entropy is the mean of the block terms") {
    std::vector<FuzzyPixel> block;
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double expect = 0.0;
    for (int i = 0; i < 9; ++i) {
        const double g = uni(rng);
        block.push_back(fuzzify(g, 4));
        expect += term_reference(g, 4);
    }
    expect /= 9.0;
    CHECK(life_entropy(block) == Catch::Approx(expect).margin(1e-12));
    CHECK_THROWS(life_entropy({}));
}

TEST_CASE("radial_gradient of a radial ramp is one") {
    const int w = 64, h = 64;
    const SectorGeometry geom = test_geom(32.0, -24.0);
    Image2D img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double dx = x - geom.apex.x, dy = y - geom.apex.y;
            img.at(x, y) = std::sqrt(dx * dx + dy * dy);
        }
    const Image2D gr = radial_gradient(img, geom);
    for (int y = 2; y < h - 2; ++y)
        for (int x = 2; x < w - 2; ++x)
            CHECK(std::abs(gr.at(x, y) - 1.0) <= 0.02);
}

TEST_CASE("radial_gradient suppresses purely tangential variation") {
    const int w = 64, h = 64;
    const SectorGeometry geom = test_geom(32.0, -24.0);
    Image2D img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = std::atan2(x - geom.apex.x, y - geom.apex.y);
    const Image2D gr = radial_gradient(img, geom);
    // the angle only varies tangentially, so the radial projection is FD noise
    for (int y = 2; y < h - 2; ++y)
        for (int x = 2; x < w - 2; ++x)
            CHECK(std::abs(gr.at(x, y)) <= 1e-3);
}

TEST_CASE("radial_gradient at the apex pixel falls back to the row gradient") {
    const SectorGeometry geom = test_geom(4.0, 4.0);
    Image2D img(9, 9);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 9; ++x) img.at(x, y) = 0.1 * y;
    const Image2D gr = radial_gradient(img, geom);
    CHECK(gr.at(4, 4) == Catch::Approx(0.1));
}

TEST_CASE("soft_threshold reference values at tau 1.5") {
    CHECK(soft_threshold(2.0, 1.5) == Catch::Approx(0.5));
    CHECK(soft_threshold(-2.0, 1.5) == Catch::Approx(-0.5));
    CHECK(soft_threshold(1.4, 1.5) == 0.0);
    CHECK(soft_threshold(-1.4, 1.5) == 0.0);
    CHECK(soft_threshold(1.5, 1.5) == Catch::Approx(0.0).margin(1e-15));
    CHECK(soft_threshold(0.0, 1.5) == 0.0);
    CHECK(soft_threshold(7.25, 1.5) == Catch::Approx(5.75));
    CHECK_THROWS(soft_threshold(1.0, -0.5));
}

TEST_CASE("extract_edges matches a from-scratch reference on a small image") {
    const int w = 12, h = 10;
    const SectorGeometry geom = test_geom(6.0, -8.0);
    LifeParams p;  // lambda 4, n 3, tau 1.5
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Image2D img(w, h);
    for (auto& v : img.data) v = uni(rng);

    const Image2D out = extract_edges(img, geom, p);

    // reference built directly from the definitions
    const Image2D gr = radial_gradient(img, geom);
    double mx = 0.0;
    for (double v : gr.data) mx = std::max(mx, std::abs(v));
    std::vector<double> term(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            term[static_cast<size_t>(y) * w + x] =
                term_reference(mx > 0.0 ? std::abs(gr.at(x, y)) / mx : 0.0, p.lambda);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double sum = 0.0;
            for (int ky = -1; ky <= 1; ++ky)
                for (int kx = -1; kx <= 1; ++kx) {
                    const int yy = std::clamp(y + ky, 0, h - 1);
                    const int xx = std::clamp(x + kx, 0, w - 1);
                    sum += term[static_cast<size_t>(yy) * w + xx];
                }
            const double g = gr.at(x, y);
            double e = g > 0.0 ? sum : (g < 0.0 ? -sum : 0.0);
            if (std::abs(e) < p.soft_thresh) e = 0.0;
            else e -= (e > 0.0 ? 1.0 : -1.0) * p.soft_thresh;
            CHECK(out.at(x, y) == Catch::Approx(e).margin(1e-12));
        }
}

TEST_CASE("extract_edges of a constant image is zero") {
    const SectorGeometry geom = test_geom(8.0, -8.0);
    Image2D img(16, 16, 0.4);
    const Image2D out = extract_edges(img, geom, LifeParams{});
    for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("extract_edges signs edges by the radial gradient direction") {
    // an outward-increasing step produces positive edges near the jump,
    // an outward-decreasing one negative
    const int w = 48, h = 48;
    const SectorGeometry geom = test_geom(24.0, -10.0);
    Image2D up(w, h), down(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double dx = x - geom.apex.x, dy = y - geom.apex.y;
            const double rho = std::sqrt(dx * dx + dy * dy);
            up.at(x, y) = rho > 35.0 ? 0.8 : 0.2;
            down.at(x, y) = rho > 35.0 ? 0.2 : 0.8;
        }
    // soften the step: a crisp jump normalizes to g in {0, 1}, whose entropy
    // terms are exactly zero; the operator responds to intermediate gradients
    up = gaussian_blur(up, 2.0);
    down = gaussian_blur(down, 2.0);
    LifeParams p;
    const Image2D e_up = extract_edges(up, geom, p);
    const Image2D e_down = extract_edges(down, geom, p);
    double mx_up = 0.0, mn_down = 0.0;
    for (double v : e_up.data) mx_up = std::max(mx_up, v);
    for (double v : e_down.data) mn_down = std::min(mn_down, v);
    CHECK(mx_up > 0.0);
    CHECK(mn_down < 0.0);
}

TEST_CASE("extract_edges parameter validation") {
    const SectorGeometry geom = test_geom(4.0, -4.0);
    Image2D img(8, 8, 0.5);
    LifeParams p;
    p.neighborhood_n = 4;
    CHECK_THROWS(extract_edges(img, geom, p));
    p.neighborhood_n = 3;
    p.lambda = 0;
    CHECK_THROWS(extract_edges(img, geom, p));
    Image2D tiny(2, 2);
    CHECK_THROWS(extract_edges(tiny, geom, LifeParams{}));
}

TEST_CASE("enhance_slice adds gained edges with clamping") {
    Image2D slice(3, 1);
    slice.at(0, 0) = 0.5;
    slice.at(1, 0) = 0.9;
    slice.at(2, 0) = 0.1;
    Image2D edges(3, 1);
    edges.at(0, 0) = 0.2;
    edges.at(1, 0) = 0.5;
    edges.at(2, 0) = -0.4;
    const Image2D out = enhance_slice(slice, edges, 1.0);
    CHECK(out.at(0, 0) == Catch::Approx(0.7));
    CHECK(out.at(1, 0) == 1.0);
    CHECK(out.at(2, 0) == 0.0);
    const Image2D half = enhance_slice(slice, edges, 0.5);
    CHECK(half.at(0, 0) == Catch::Approx(0.6));
    Image2D bad(2, 1);
    CHECK_THROWS(enhance_slice(slice, bad, 1.0));
}
