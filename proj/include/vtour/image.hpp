#pragma once

#include "vtour/geometry.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vtour {

enum class ImageFormat { png, jpeg };

inline std::string to_string(ImageFormat f) { return f == ImageFormat::png ? "png" : "jpeg"; }
inline std::string file_extension(ImageFormat f) { return f == ImageFormat::png ? "png" : "jpg"; }

// What the media layer learned about a panorama file before any resampling.
struct ProjectionMetadata {
    std::optional<std::string> projection_type;
    std::uint64_t byte_size = 0;
    Dimensions dims;
    ImageFormat format = ImageFormat::png;

    bool operator==(const ProjectionMetadata&) const = default;
};

struct Color {
    std::uint8_t r = 0, g = 0, b = 0, a = 255;
    bool operator==(const Color&) const = default;
};

// Row-major 8-bit RGB or RGBA pixels.
class Raster {
public:
    Raster() = default;
    Raster(Dimensions dims, int channels) : dims_(dims), channels_(channels) {
        check_channels(channels);
        pixels_.assign(static_cast<std::size_t>(dims.area()) * channels, 0);
    }
    Raster(Dimensions dims, int channels, std::vector<std::uint8_t> pixels)
        : dims_(dims), channels_(channels), pixels_(std::move(pixels)) {
        check_channels(channels);
        if (pixels_.size() != static_cast<std::size_t>(dims.area()) * channels) {
            throw ParameterError("pixel buffer length does not match dimensions");
        }
    }

    static Raster filled(Dimensions dims, int channels, Color c) {
        Raster r(dims, channels);
        for (std::int64_t y = 0; y < dims.height; ++y)
            for (std::int64_t x = 0; x < dims.width; ++x) r.set(x, y, c);
        return r;
    }

    const Dimensions& dims() const noexcept { return dims_; }
    std::int64_t width() const noexcept { return dims_.width; }
    std::int64_t height() const noexcept { return dims_.height; }
    int channels() const noexcept { return channels_; }

    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::span<std::uint8_t> pixels() noexcept { return pixels_; }

    std::uint8_t* row(std::int64_t y) noexcept {
        return pixels_.data() + static_cast<std::size_t>(y * dims_.width) * channels_;
    }
    const std::uint8_t* row(std::int64_t y) const noexcept {
        return pixels_.data() + static_cast<std::size_t>(y * dims_.width) * channels_;
    }

    Color at(std::int64_t x, std::int64_t y) const noexcept {
        const std::uint8_t* p = row(y) + x * channels_;
        return {p[0], p[1], p[2], channels_ == 4 ? p[3] : std::uint8_t{255}};
    }

    void set(std::int64_t x, std::int64_t y, Color c) noexcept {
        std::uint8_t* p = row(y) + x * channels_;
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
        if (channels_ == 4) p[3] = c.a;
    }

    bool operator==(const Raster&) const = default;

private:
    static void check_channels(int channels) {
        if (channels != 3 && channels != 4) {
            throw ParameterError("raster channels must be 3 or 4, got " + std::to_string(channels));
        }
    }

    Dimensions dims_{1, 1};
    int channels_ = 3;
    std::vector<std::uint8_t> pixels_ = std::vector<std::uint8_t>(3, 0);
};

// A decoded 2:1 panorama (the ratio is checked by media validation, not here).
struct EquirectImage {
    Raster raster;
    std::optional<ProjectionMetadata> metadata;

    const Dimensions& dims() const noexcept { return raster.dims(); }
};

} // namespace vtour
