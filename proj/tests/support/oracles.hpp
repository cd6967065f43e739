#pragma once

// Independent reference computations used to check the library. These use
// plain floating-point math and explicit geometry, never the library's
// fixed-point sampling path.

#include "vtour/geometry.hpp"
#include "vtour/image.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace vtour::testing {

// Bilinear sampler over a physically padded copy of the image: column 0 is
// duplicated after column W-1 and the first/last rows are duplicated above and
// below, so no index arithmetic needs wrapping or clamping.
class PaddedSampler {
public:
    explicit PaddedSampler(const Raster& img)
        : w_(img.width()), h_(img.height()), ch_(img.channels()),
          data_(static_cast<std::size_t>((w_ + 1) * (h_ + 2) * ch_)) {
        for (std::int64_t j = -1; j <= h_; ++j) {
            const std::int64_t src_row = j < 0 ? 0 : (j >= h_ ? h_ - 1 : j);
            for (std::int64_t i = 0; i <= w_; ++i) {
                const std::int64_t src_col = i == w_ ? 0 : i;
                const Color c = img.at(src_col, src_row);
                double* p = cell(i, j);
                p[0] = c.r;
                p[1] = c.g;
                p[2] = c.b;
                if (ch_ == 4) p[3] = c.a;
            }
        }
    }

    // Continuous pixel position (u in [0, W), v in [0, H]).
    std::array<double, 4> sample(double u, double v) const {
        double x = u - 0.5;
        if (x < 0) x += static_cast<double>(w_);
        double y = v - 0.5;
        y = std::clamp(y, -1.0, static_cast<double>(h_));
        const auto i0 = static_cast<std::int64_t>(std::floor(x));
        const auto j0 = static_cast<std::int64_t>(std::floor(y));
        const double fx = x - static_cast<double>(i0);
        const double fy = y - static_cast<double>(j0);
        const std::int64_t j1 = std::min<std::int64_t>(j0 + 1, h_);
        std::array<double, 4> out{0, 0, 0, 255};
        for (int k = 0; k < ch_; ++k) {
            const double top = (1 - fx) * cell(i0, j0)[k] + fx * cell(i0 + 1, j0)[k];
            const double bottom = (1 - fx) * cell(i0, j1)[k] + fx * cell(i0 + 1, j1)[k];
            out[k] = (1 - fy) * top + fy * bottom;
        }
        return out;
    }

    std::array<double, 4> sample(const SphericalDirection& s) const {
        const double u = (s.yaw() + kPi) / kTwoPi * static_cast<double>(w_);
        const double v = (kHalfPi - s.pitch()) / kPi * static_cast<double>(h_);
        return sample(u >= static_cast<double>(w_) ? u - static_cast<double>(w_) : u, v);
    }

private:
    double* cell(std::int64_t i, std::int64_t j) { return &data_[static_cast<std::size_t>(((j + 1) * (w_ + 1) + i) * ch_)]; }
    const double* cell(std::int64_t i, std::int64_t j) const {
        return &data_[static_cast<std::size_t>(((j + 1) * (w_ + 1) + i) * ch_)];
    }

    std::int64_t w_, h_;
    int ch_;
    std::vector<double> data_;
};

// Stereographic inverse by ray intersection: the plane z = -1 touches the
// nadir and rays are cast from the zenith (0,0,1) through the plane point.
// Screen up maps to +x and screen right to +y; the plane point sits at
// 2 * r / zoom from the nadir, r in half-extent units.
inline SphericalDirection little_planet_direction(double dx, double dy_up, double zoom) {
    const double a = 2.0 * dy_up / zoom; // plane x
    const double b = 2.0 * dx / zoom;    // plane y
    const double t = 4.0 / (a * a + b * b + 4.0);
    const double x = t * a, y = t * b, z = 1.0 - 2.0 * t;
    return vec_to_sphere(UnitVector(x, y, z));
}

// World direction for a cube face pixel, built from explicit face bases
// rather than the renderer's rotation code.
struct FaceBasis {
    Vec3 forward, right, up;
};

inline FaceBasis face_basis(int face) {
    switch (face) {
    case 0: return {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};    // +X
    case 1: return {{-1, 0, 0}, {0, -1, 0}, {0, 0, 1}};  // -X
    case 2: return {{0, 1, 0}, {-1, 0, 0}, {0, 0, 1}};   // +Y
    case 3: return {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}};   // -Y
    case 4: return {{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}};   // +Z
    default: return {{0, 0, -1}, {0, 1, 0}, {1, 0, 0}};  // -Z
    }
}

// Which face a direction falls on and its continuous pixel position there.
inline std::tuple<int, double, double> locate_on_cube(const Vec3& d, std::int64_t face_size) {
    int best = 0;
    double best_dot = -2;
    for (int f = 0; f < 6; ++f) {
        const double dot = d.dot(face_basis(f).forward);
        if (dot > best_dot) {
            best_dot = dot;
            best = f;
        }
    }
    const FaceBasis b = face_basis(best);
    const double sx = d.dot(b.right) / best_dot; // in [-1, 1]
    const double sy = d.dot(b.up) / best_dot;
    const auto n = static_cast<double>(face_size);
    return {best, (sx + 1.0) * 0.5 * n, (1.0 - sy) * 0.5 * n};
}

} // namespace vtour::testing

#include "vtour/tour.hpp"

#include <functional>
#include <set>
#include <string>

namespace vtour::testing {

// Reachability by exhaustive enumeration of simple paths from the start scene.
inline std::set<std::string> reachable_by_path_enumeration(const Tour& t) {
    std::set<std::string> reached;
    std::vector<std::string> path;
    std::function<void(const std::string&)> walk = [&](const std::string& id) {
        const Scene* s = t.find_scene(id);
        if (!s || std::find(path.begin(), path.end(), id) != path.end()) return;
        reached.insert(id);
        path.push_back(id);
        for (const auto& h : s->hotspots)
            if (h.kind == HotspotKind::link) walk(h.payload);
        path.pop_back();
    };
    walk(t.start_scene);
    return reached;
}

} // namespace vtour::testing
