#pragma once

// Resampling from equirectangular sources.
//
// All samplers share one fixed-point sampling grid: a continuous pixel
// position is quantized to 1/kSubpixel of a pixel and interpolated with
// integer weights. Two renders that land on the same grid position produce
// the same bytes, which makes yaw shifts by whole columns and vertical
// mirroring exact symmetries of the renderer rather than approximate ones.

#include "vtour/geometry.hpp"
#include "vtour/image.hpp"
#include "vtour/parallel.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace vtour {

struct ViewParams {
    double yaw = 0.0;
    double pitch = 0.0;
    double fov = kHalfPi; ///< horizontal field of view, radians, strictly inside (0, pi)
    Dimensions out{1, 1};
};

struct RenderOptions {
    unsigned threads = 0; ///< 0 = hardware concurrency
};

struct LittlePlanetOptions {
    double zoom = 0.5; ///< radius (in output half-extents) at which the horizon lands
    Color background{0, 0, 0, 255};
    double horizon_epsilon = 1e-2; ///< directions above pi/2 - epsilon become background
    unsigned threads = 0;
};

enum class CubeFace { px, nx, py, ny, pz, nz };

inline constexpr std::array<CubeFace, 6> kCubeFaces{CubeFace::px, CubeFace::nx, CubeFace::py,
                                                     CubeFace::ny, CubeFace::pz, CubeFace::nz};

inline std::string_view to_string(CubeFace f) noexcept {
    constexpr std::array<std::string_view, 6> names{"px", "nx", "py", "ny", "pz", "nz"};
    return names[static_cast<int>(f)];
}

/// Camera orientation (yaw, pitch) whose 90-degree view is the given face.
inline SphericalDirection cube_face_orientation(CubeFace f) noexcept {
    switch (f) {
    case CubeFace::px: return {0.0, 0.0};
    case CubeFace::nx: return {-kPi, 0.0};
    case CubeFace::py: return {kHalfPi, 0.0};
    case CubeFace::ny: return {-kHalfPi, 0.0};
    case CubeFace::pz: return {0.0, kHalfPi};
    case CubeFace::nz: return {0.0, -kHalfPi};
    }
    return {};
}

using CubeMap = std::array<Raster, 6>;

namespace detail {

inline constexpr std::int64_t kSubpixel = 1024;

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Horizontal offset of a yaw from the image center, in fixed-point pixels.
inline std::int64_t yaw_offset_fixed(double yaw, std::int64_t width) noexcept {
    return std::llround(yaw / kTwoPi * static_cast<double>(width * kSubpixel));
}

// Vertical offset of a pitch above the equator, in fixed-point pixels.
// llround is odd-symmetric, so +pitch and -pitch land on mirrored rows.
inline std::int64_t pitch_offset_fixed(double pitch, std::int64_t height) noexcept {
    return std::llround(pitch / kPi * static_cast<double>(height * kSubpixel));
}

struct FixedPos {
    std::int64_t u; ///< [0, W*kSubpixel] modulo the seam
    std::int64_t v; ///< [0, H*kSubpixel] before pole clamping
};

inline FixedPos fixed_position(double yaw, double pitch, Dimensions d) noexcept {
    return {d.width * kSubpixel / 2 + yaw_offset_fixed(yaw, d.width),
            d.height * kSubpixel / 2 - pitch_offset_fixed(pitch, d.height)};
}

// Bilinear blend of the four pixel centers around a fixed-point position.
// Columns wrap across the seam; rows clamp at the poles.
inline void blend_fixed(const Raster& img, FixedPos pos, std::uint8_t* out) noexcept {
    constexpr std::int64_t S = kSubpixel;
    const std::int64_t w = img.width();
    const std::int64_t h = img.height();

    const std::int64_t x = pos.u - S / 2;
    const std::int64_t cx = floor_div(x, S);
    const std::int64_t fx = x - cx * S;
    std::int64_t c0 = cx % w;
    if (c0 < 0) c0 += w;
    const std::int64_t c1 = c0 + 1 == w ? 0 : c0 + 1;

    const std::int64_t y = pos.v - S / 2;
    const std::int64_t ry = floor_div(y, S);
    const std::int64_t fy = y - ry * S;
    const std::int64_t r0 = std::clamp<std::int64_t>(ry, 0, h - 1);
    const std::int64_t r1 = std::clamp<std::int64_t>(ry + 1, 0, h - 1);

    const int ch = img.channels();
    const std::uint8_t* p00 = img.row(r0) + c0 * ch;
    const std::uint8_t* p01 = img.row(r0) + c1 * ch;
    const std::uint8_t* p10 = img.row(r1) + c0 * ch;
    const std::uint8_t* p11 = img.row(r1) + c1 * ch;
    const std::int64_t wx0 = S - fx, wx1 = fx;
    const std::int64_t wy0 = S - fy, wy1 = fy;
    for (int k = 0; k < ch; ++k) {
        const std::int64_t top = wx0 * p00[k] + wx1 * p01[k];
        const std::int64_t bottom = wx0 * p10[k] + wx1 * p11[k];
        const std::int64_t acc = wy0 * top + wy1 * bottom;
        out[k] = static_cast<std::uint8_t>((acc + S * S / 2) / (S * S));
    }
}

inline void check_finite(double value, const char* what) {
    if (!std::isfinite(value)) throw ParameterError(std::string(what) + " must be finite");
}

} // namespace detail

/// Bilinear sample at a direction. Alpha is 255 for RGB sources.
inline Color sample_bilinear(const EquirectImage& img, const SphericalDirection& s) {
    std::array<std::uint8_t, 4> px{0, 0, 0, 255};
    detail::blend_fixed(img.raster, detail::fixed_position(s.yaw(), s.pitch(), img.dims()),
                        px.data());
    return {px[0], px[1], px[2], px[3]};
}

inline void check_view(const ViewParams& view) {
    detail::check_finite(view.yaw, "view yaw");
    detail::check_finite(view.pitch, "view pitch");
    if (!std::isfinite(view.fov) || view.fov <= 0.0 || view.fov >= kPi) {
        throw ParameterError("field of view must lie strictly inside (0, pi) radians");
    }
}

/// Gnomonic (pinhole) render. The camera looks along rotate_view(+x, yaw, pitch);
/// screen right is the direction of increasing yaw, screen up is increasing pitch.
inline Raster render_perspective(const EquirectImage& img, const ViewParams& view,
                                 const RenderOptions& opts = {}) {
    check_view(view);
    const std::int64_t ow = view.out.width;
    const std::int64_t oh = view.out.height;
    Raster out(view.out, img.raster.channels());

    const double half_w = std::tan(view.fov / 2.0);
    const double half_h = half_w * static_cast<double>(oh) / static_cast<double>(ow);
    // sin/cos of |pitch| with the sign reapplied keeps +p and -p exact mirrors.
    const double abs_pitch = std::abs(view.pitch);
    const double sp = std::copysign(std::sin(abs_pitch), view.pitch);
    const double cp = std::cos(abs_pitch);
    const Dimensions src = img.dims();
    const auto w_ticks = src.width * detail::kSubpixel;
    // Reducing only far-out yaws keeps small multiples of a column exact.
    const double yaw = std::abs(view.yaw) > 4.0 * kPi ? std::fmod(view.yaw, kTwoPi) : view.yaw;
    const std::int64_t yaw_fixed = detail::yaw_offset_fixed(yaw, src.width) % w_ticks;

    detail::parallel_rows(oh, opts.threads, [&](std::int64_t j) {
        const double ty = half_h * (static_cast<double>(oh - 2 * j - 1) / static_cast<double>(oh));
        std::uint8_t* dst = out.row(j);
        for (std::int64_t i = 0; i < ow; ++i) {
            const double tx = half_w * (static_cast<double>(2 * i + 1 - ow) / static_cast<double>(ow));
            // Camera ray (1, tx, ty) pitched about the lateral axis; yaw is applied
            // below as a whole fixed-point column offset.
            const double x = cp - ty * sp;
            const double y = tx;
            const double z = sp + ty * cp;
            const double horizontal = std::hypot(x, y);
            const double yaw0 = horizontal == 0.0 ? 0.0 : std::atan2(y, x);
            const double pitch0 = std::atan2(z, horizontal);
            detail::FixedPos pos = detail::fixed_position(yaw0, pitch0, src);
            pos.u = (pos.u + yaw_fixed) % w_ticks;
            detail::blend_fixed(img.raster, pos, dst + i * out.channels());
        }
    });
    return out;
}

/// Stereographic "small world": the nadir sits at the output center and the
/// horizon at radius zoom (in units of half the smaller output extent).
inline Raster render_little_planet(const EquirectImage& img, Dimensions out_dims,
                                   const LittlePlanetOptions& opts = {}) {
    if (!std::isfinite(opts.zoom) || opts.zoom <= 0.0) {
        throw ParameterError("little-planet zoom must be positive");
    }
    Raster out(out_dims, img.raster.channels());
    const double radius = static_cast<double>(std::min(out_dims.width, out_dims.height)) / 2.0;
    const double max_pitch = kHalfPi - opts.horizon_epsilon;
    const std::int64_t ow = out_dims.width;
    const std::int64_t oh = out_dims.height;

    detail::parallel_rows(oh, opts.threads, [&](std::int64_t j) {
        const double dy = static_cast<double>(oh - 2 * j - 1) / 2.0 / radius;
        std::uint8_t* dst = out.row(j);
        for (std::int64_t i = 0; i < ow; ++i) {
            const double dx = static_cast<double>(2 * i + 1 - ow) / 2.0 / radius;
            const double r = std::hypot(dx, dy);
            const double pitch = -kHalfPi + 2.0 * std::atan(r / opts.zoom);
            std::uint8_t* px = dst + i * out.channels();
            if (pitch > max_pitch) {
                const Color& bg = opts.background;
                px[0] = bg.r;
                px[1] = bg.g;
                px[2] = bg.b;
                if (out.channels() == 4) px[3] = bg.a;
                continue;
            }
            // Screen up is forward (+x), screen right is +y.
            const double yaw = r == 0.0 ? 0.0 : std::atan2(dx, dy);
            detail::blend_fixed(img.raster, detail::fixed_position(yaw, pitch, img.dims()), px);
        }
    });
    return out;
}

inline Raster render_cube_face(const EquirectImage& img, CubeFace face, std::int64_t face_size,
                               const RenderOptions& opts = {}) {
    const SphericalDirection o = cube_face_orientation(face);
    return render_perspective(img, ViewParams{o.yaw(), o.pitch(), kHalfPi, {face_size, face_size}},
                              opts);
}

/// Six square faces in kCubeFaces order (+X, -X, +Y, -Y, +Z, -Z).
inline CubeMap equirect_to_cubemap(const EquirectImage& img, std::int64_t face_size,
                                   const RenderOptions& opts = {}) {
    if (face_size < 1) throw ParameterError("cube face size must be at least 1");
    CubeMap faces;
    for (std::size_t k = 0; k < kCubeFaces.size(); ++k) {
        faces[k] = render_cube_face(img, kCubeFaces[k], face_size, opts);
    }
    return faces;
}

} // namespace vtour
