#pragma once

// A small, fully synthetic demo tour: three workshop areas (introduction,
// intermediate, advanced) chained by link hotspots, with picture, text and
// externally streamed video hotspots. Everything is generated
// deterministically so tests and demos can rebuild it byte-for-byte.

#include "vtour/codec.hpp"
#include "vtour/fileio.hpp"
#include "vtour/media.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <string_view>

namespace vtour::sample {

inline constexpr std::string_view kWorkshopManifest = R"({
  "id": "machinery-workshop",
  "title": "Machinery Workshop",
  "start_scene": "intro",
  "scenes": [
    {
      "id": "intro",
      "title": "Introduction area: basic tools",
      "panorama": "panoramas/intro.jpg",
      "initial_view": {"yaw_deg": 0.0, "pitch_deg": 0.0, "fov_deg": 90.0},
      "hotspots": [
        {"id": "to-medium", "kind": "link", "yaw_deg": 90.0, "pitch_deg": -5.0,
         "title": "Go to the intermediate area", "payload": "medium"},
        {"id": "bench-vise", "kind": "picture", "yaw_deg": -40.0, "pitch_deg": -20.0,
         "title": "Bench vise", "payload": "pictures/bench-vise.jpg"},
        {"id": "safety", "kind": "text", "yaw_deg": 10.0, "pitch_deg": 5.0,
         "title": "Safety rules", "payload": "Wear safety glasses and keep sleeves rolled up near rotating machines."}
      ]
    },
    {
      "id": "medium",
      "title": "Intermediate area: lathes and drills",
      "panorama": "panoramas/medium.jpg",
      "initial_view": {"yaw_deg": 45.0, "pitch_deg": -10.0, "fov_deg": 80.0},
      "hotspots": [
        {"id": "to-advance", "kind": "link", "yaw_deg": 120.0, "pitch_deg": 0.0,
         "title": "Go to the advanced area", "payload": "advance"},
        {"id": "to-intro", "kind": "link", "yaw_deg": -90.0, "pitch_deg": 0.0,
         "title": "Back to the introduction area", "payload": "intro"},
        {"id": "lathe-video", "kind": "video", "yaw_deg": 30.0, "pitch_deg": -15.0,
         "title": "Lathe operation", "payload": "https://www.youtube.com/embed/lathe-operation-demo"}
      ]
    },
    {
      "id": "advance",
      "title": "Advanced area: CNC machines",
      "panorama": "panoramas/advance.jpg",
      "initial_view": {"yaw_deg": -30.0, "pitch_deg": 0.0, "fov_deg": 100.0},
      "hotspots": [
        {"id": "to-medium", "kind": "link", "yaw_deg": 180.0, "pitch_deg": 0.0,
         "title": "Back to the intermediate area", "payload": "medium"},
        {"id": "cnc-panel", "kind": "picture", "yaw_deg": 15.0, "pitch_deg": -10.0,
         "title": "CNC control panel", "payload": "pictures/cnc-panel.jpg"},
        {"id": "cnc-video", "kind": "video", "yaw_deg": -60.0, "pitch_deg": 5.0,
         "title": "CNC milling", "payload": "https://www.youtube.com/embed/cnc-milling-demo"}
      ]
    }
  ]
}
)";

struct Options {
    std::int64_t panorama_width = 1024; ///< height is half of this
    int jpeg_quality = 85;
};

// A stylized room: checkered floor, walls with vertical machine-colored
// stripes, and a bright ceiling. `tint` varies the palette per scene.
inline Raster workshop_panorama(std::int64_t width, int tint) {
    const Dimensions d(width, width / 2);
    Raster r(d, 3);
    for (std::int64_t j = 0; j < d.height; ++j) {
        for (std::int64_t i = 0; i < d.width; ++i) {
            const auto s = pixel_to_sphere({i + 0.5, j + 0.5}, d);
            const double yaw = s.yaw(), pitch = s.pitch();
            Color c;
            if (pitch < -0.35) {
                // Floor: project onto the plane z = -1 and checker it.
                const double t = -1.0 / std::tan(pitch);
                const double fx = t * std::cos(yaw), fy = t * std::sin(yaw);
                const bool dark = (static_cast<long>(std::floor(fx * 2)) + static_cast<long>(std::floor(fy * 2))) & 1;
                c = dark ? Color{70, 70, 80} : Color{150, 150, 160};
            } else if (pitch > 0.9) {
                const auto v = static_cast<std::uint8_t>(200 + 40 * std::sin(pitch));
                c = {v, v, static_cast<std::uint8_t>(v - 10)};
            } else {
                const int stripe = static_cast<int>(std::floor((yaw + kPi) / (kPi / 8)));
                const double shade = 0.75 + 0.25 * std::cos(pitch * 3);
                const int base = (stripe * 37 + tint * 71) % 160;
                c = {static_cast<std::uint8_t>((60 + base) * shade),
                     static_cast<std::uint8_t>((90 + (base * 3) % 120) * shade),
                     static_cast<std::uint8_t>((50 + (tint * 40) % 150) * shade)};
            }
            r.set(i, j, c);
        }
    }
    return r;
}

inline Raster detail_picture(int tint) {
    const Dimensions d(320, 240);
    Raster r(d, 3);
    for (std::int64_t j = 0; j < d.height; ++j)
        for (std::int64_t i = 0; i < d.width; ++i)
            r.set(i, j, {static_cast<std::uint8_t>((i + tint * 50) % 256), static_cast<std::uint8_t>(j % 256),
                         static_cast<std::uint8_t>(((i / 40 + j / 40) % 2) * 180)});
    return r;
}

/// Writes manifest.json and media/ for the workshop tour into `dir`.
inline void write_workshop(const std::filesystem::path& dir, const Options& opts = {}) {
    write_file(dir / "manifest.json", kWorkshopManifest);
    const std::filesystem::path media = dir / "media";
    int tint = 0;
    for (const char* name : {"intro", "medium", "advance"}) {
        const Bytes jpg = codec::encode_jpeg(workshop_panorama(opts.panorama_width, tint++), opts.jpeg_quality);
        write_file(media / "panoramas" / (std::string(name) + ".jpg"), inject_xmp_projection(jpg, kEquirectangular));
    }
    write_file(media / "pictures" / "bench-vise.jpg", codec::encode_jpeg(detail_picture(1), opts.jpeg_quality));
    write_file(media / "pictures" / "cnc-panel.jpg", codec::encode_jpeg(detail_picture(2), opts.jpeg_quality));
}

} // namespace vtour::sample
