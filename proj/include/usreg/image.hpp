// image.hpp - basic grid containers shared by every stage.
//
// Coordinate convention used throughout: x is the column index, y is the
// row index. Image2D::at(x, y) reads data[y * width + x]. Volume slices are
// stored slice-major, so Volume3D::at(x, y, k) reads
// data[k * width * height + y * width + x].
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace usreg {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double norm(const Vec2& v) { return std::sqrt(v.x * v.x + v.y * v.y); }

struct Image2D {
    int width = 0;
    int height = 0;
    std::vector<double> data;   // row-major
    Vec2 spacing{1.0, 1.0};

    Image2D() = default;
    Image2D(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("Image2D: non-positive dimensions");
    }

    size_t size() const { return data.size(); }
    double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

    bool same_dims(const Image2D& o) const { return width == o.width && height == o.height; }
};

struct Volume3D {
    int width = 0;
    int height = 0;
    int depth = 0;
    std::vector<double> data;   // slice-major
    double spacing_x = 1.0, spacing_y = 1.0, spacing_z = 1.0;

    Volume3D() = default;
    Volume3D(int w, int h, int d, double fill = 0.0)
        : width(w), height(h), depth(d), data(static_cast<size_t>(w) * h * d, fill) {
        if (w <= 0 || h <= 0 || d <= 0) throw std::invalid_argument("Volume3D: non-positive dimensions");
    }

    double& at(int x, int y, int k) {
        return data[(static_cast<size_t>(k) * height + y) * width + x];
    }
    double at(int x, int y, int k) const {
        return data[(static_cast<size_t>(k) * height + y) * width + x];
    }
};

struct DeformationField2D {
    int width = 0;
    int height = 0;
    std::vector<Vec2> vectors;  // row-major, displacement in pixels

    DeformationField2D() = default;
    DeformationField2D(int w, int h)
        : width(w), height(h), vectors(static_cast<size_t>(w) * h) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("DeformationField2D: non-positive dimensions");
    }

    Vec2& at(int x, int y) { return vectors[static_cast<size_t>(y) * width + x]; }
    const Vec2& at(int x, int y) const { return vectors[static_cast<size_t>(y) * width + x]; }
};

struct Mask2D {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> bits;  // nonzero = inside region of interest

    Mask2D() = default;
    Mask2D(int w, int h, bool fill = false)
        : width(w), height(h), bits(static_cast<size_t>(w) * h, fill ? 1 : 0) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("Mask2D: non-positive dimensions");
    }

    bool at(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
    bool empty() const {
        for (auto b : bits) if (b) return false;
        return true;
    }
    size_t count() const {
        size_t n = 0;
        for (auto b : bits) if (b) ++n;
        return n;
    }
};

// Fan-shaped ultrasound field of view. The apex is the origin of the polar
// coordinates used by the radial gradient; it normally lies above the image.
struct SectorGeometry {
    Vec2 apex{0.0, 0.0};
    double inner_radius = 1.0;
    double outer_radius = 2.0;
    double half_angle = 0.5;    // radians, measured from the downward axis

    void validate() const {
        if (!(inner_radius > 0.0 && inner_radius < outer_radius))
            throw std::invalid_argument("SectorGeometry: need 0 < inner_radius < outer_radius");
        if (!(half_angle > 0.0 && half_angle < 1.5707963267948966))
            throw std::invalid_argument("SectorGeometry: need 0 < half_angle < pi/2");
    }

    bool contains(double x, double y) const {
        const double dx = x - apex.x;
        const double dy = y - apex.y;
        const double rho = std::sqrt(dx * dx + dy * dy);
        if (rho < inner_radius || rho > outer_radius) return false;
        return std::abs(std::atan2(dx, dy)) <= half_angle;
    }
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace usreg
