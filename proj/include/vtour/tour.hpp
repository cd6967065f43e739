#pragma once

// The tour scenario: scenes linked into a storyboard, each carrying hotspots.
//
// Manifest format (JSON):
//
//   { "id", "title", "start_scene", "scenes": [
//       { "id", "title", "panorama",
//         "initial_view": { "yaw_deg", "pitch_deg", "fov_deg" },
//         "hotspots": [ { "id", "kind", "yaw_deg", "pitch_deg", "title", "payload" } ] } ] }
//
// Angles are authored in degrees and kept in degrees in the model so that
// serialization reproduces the file exactly; radians are derived on demand.
// Unknown fields are ignored and reported as parse warnings.

#include "vtour/findings.hpp"
#include "vtour/geometry.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vtour {

enum class HotspotKind { picture, video, text, link };

inline std::string_view to_string(HotspotKind k) noexcept {
    switch (k) {
    case HotspotKind::picture: return "picture";
    case HotspotKind::video: return "video";
    case HotspotKind::text: return "text";
    case HotspotKind::link: return "link";
    }
    return "?";
}

inline std::optional<HotspotKind> parse_hotspot_kind(std::string_view s) noexcept {
    if (s == "picture") return HotspotKind::picture;
    if (s == "video") return HotspotKind::video;
    if (s == "text") return HotspotKind::text;
    if (s == "link") return HotspotKind::link;
    return std::nullopt;
}

struct InitialView {
    double yaw_deg = 0.0;
    double pitch_deg = 0.0;
    double fov_deg = 90.0;

    bool operator==(const InitialView&) const = default;
};

struct Hotspot {
    std::string id;
    HotspotKind kind = HotspotKind::text;
    double yaw_deg = 0.0;
    double pitch_deg = 0.0;
    std::string title;
    /// picture: media reference; video: external URL; text: inline text; link: target scene id
    std::string payload;

    SphericalDirection direction() const { return {deg_to_rad(yaw_deg), deg_to_rad(pitch_deg)}; }
    bool operator==(const Hotspot&) const = default;
};

struct Scene {
    std::string id;
    std::string title;
    std::string panorama; ///< media reference, relative to the media directory
    InitialView initial_view;
    std::vector<Hotspot> hotspots;

    bool operator==(const Scene&) const = default;
};

struct Tour {
    std::string id;
    std::string title;
    std::string start_scene;
    std::vector<Scene> scenes;

    const Scene* find_scene(std::string_view id) const {
        for (const auto& s : scenes)
            if (s.id == id) return &s;
        return nullptr;
    }
    bool operator==(const Tour&) const = default;
};

class ManifestError : public Error {
public:
    enum class Kind { syntax, semantic };

    ManifestError(Kind kind, std::string path, const std::string& message, std::size_t line = 0,
                  std::size_t column = 0)
        : Error(describe(kind, path, message, line, column)), kind_(kind), path_(std::move(path)), line_(line),
          column_(column) {}

    Kind kind() const noexcept { return kind_; }
    const std::string& path() const noexcept { return path_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string describe(Kind kind, const std::string& path, const std::string& message, std::size_t line,
                                std::size_t column) {
        if (kind == Kind::syntax) {
            return "manifest syntax error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                   ": " + message;
        }
        return "manifest error at " + (path.empty() ? std::string("<root>") : path) + ": " + message;
    }

    Kind kind_;
    std::string path_;
    std::size_t line_;
    std::size_t column_;
};

/// Identifiers become URL segments and directory names.
inline bool is_valid_identifier(std::string_view s) noexcept {
    if (s.empty() || s.size() > 128) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    });
}

/// Relative forward-slash path that cannot escape its root.
inline bool is_valid_media_reference(std::string_view s) noexcept {
    if (s.empty() || s.front() == '/' || s.find('\\') != std::string_view::npos || s.find(':') != std::string_view::npos) {
        return false;
    }
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto slash = s.find('/', start);
        const auto seg = s.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start);
        if (seg.empty() || seg == "." || seg == "..") return false;
        if (slash == std::string_view::npos) break;
        start = slash + 1;
    }
    return true;
}

inline bool is_external_url(std::string_view s) noexcept {
    return (s.starts_with("https://") && s.size() > 8) || (s.starts_with("http://") && s.size() > 7);
}

namespace detail {

using json = nlohmann::json;

class ManifestReader {
public:
    explicit ManifestReader(std::vector<std::string>* warnings) : warnings_(warnings) {}

    Tour read(const json& root) {
        require_object(root, "");
        check_fields(root, "", {"id", "title", "start_scene", "scenes"});
        Tour t;
        t.id = identifier(root, "", "id");
        t.title = optional_string(root, "", "title");
        t.start_scene = identifier(root, "", "start_scene");
        const json& scenes = member(root, "", "scenes");
        if (!scenes.is_array()) fail("scenes", "expected an array");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < scenes.size(); ++i) {
            const std::string path = "scenes[" + std::to_string(i) + "]";
            Scene s = read_scene(scenes[i], path);
            if (!seen.insert(s.id).second) fail(path + ".id", "duplicate scene id \"" + s.id + "\"");
            t.scenes.push_back(std::move(s));
        }
        if (!t.find_scene(t.start_scene)) {
            fail("start_scene", "start scene \"" + t.start_scene + "\" is not one of the tour's scenes");
        }
        return t;
    }

private:
    [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
        throw ManifestError(ManifestError::Kind::semantic, path, msg);
    }

    static std::string join(const std::string& base, std::string_view key) {
        return base.empty() ? std::string(key) : base + "." + std::string(key);
    }

    static void require_object(const json& j, const std::string& path) {
        if (!j.is_object()) fail(path, "expected an object");
    }

    void check_fields(const json& j, const std::string& path, std::initializer_list<std::string_view> known) {
        for (const auto& [key, value] : j.items()) {
            if (std::find(known.begin(), known.end(), key) == known.end() && warnings_) {
                warnings_->push_back("ignoring unknown field " + join(path, key));
            }
        }
    }

    static const json& member(const json& j, const std::string& path, std::string_view key) {
        const auto it = j.find(key);
        if (it == j.end()) fail(join(path, key), "required field is missing");
        return *it;
    }

    static std::string string_field(const json& j, const std::string& path, std::string_view key) {
        const json& v = member(j, path, key);
        if (!v.is_string()) fail(join(path, key), "expected a string");
        return v.get<std::string>();
    }

    static std::string optional_string(const json& j, const std::string& path, std::string_view key) {
        const auto it = j.find(key);
        if (it == j.end()) return {};
        if (!it->is_string()) fail(join(path, key), "expected a string");
        return it->get<std::string>();
    }

    static std::string identifier(const json& j, const std::string& path, std::string_view key) {
        std::string s = string_field(j, path, key);
        if (!is_valid_identifier(s)) {
            fail(join(path, key), "\"" + s + "\" is not a valid identifier (letters, digits, '_' and '-')");
        }
        return s;
    }

    static double angle(const json& j, const std::string& path, std::string_view key, double lo, double hi,
                        bool open_interval, std::optional<double> fallback = std::nullopt) {
        const auto it = j.find(key);
        if (it == j.end()) {
            if (fallback) return *fallback;
            fail(join(path, key), "required field is missing");
        }
        if (!it->is_number()) fail(join(path, key), "expected a number");
        const double v = it->get<double>();
        const bool inside = open_interval ? (v > lo && v < hi) : (v >= lo && v <= hi);
        if (!std::isfinite(v) || !inside) {
            fail(join(path, key), "angle " + it->dump() + " outside " + (open_interval ? "(" : "[") +
                                      json(lo).dump() + ", " + json(hi).dump() + (open_interval ? ")" : "]"));
        }
        return v;
    }

    Scene read_scene(const json& j, const std::string& path) {
        require_object(j, path);
        check_fields(j, path, {"id", "title", "panorama", "initial_view", "hotspots"});
        Scene s;
        s.id = identifier(j, path, "id");
        s.title = optional_string(j, path, "title");
        s.panorama = string_field(j, path, "panorama");
        if (!is_valid_media_reference(s.panorama)) {
            fail(path + ".panorama", "\"" + s.panorama + "\" is not a relative media reference");
        }
        if (const auto it = j.find("initial_view"); it != j.end()) {
            const std::string vp = path + ".initial_view";
            require_object(*it, vp);
            check_fields(*it, vp, {"yaw_deg", "pitch_deg", "fov_deg"});
            const InitialView defaults;
            s.initial_view.yaw_deg = angle(*it, vp, "yaw_deg", -180, 180, false, defaults.yaw_deg);
            s.initial_view.pitch_deg = angle(*it, vp, "pitch_deg", -90, 90, false, defaults.pitch_deg);
            s.initial_view.fov_deg = angle(*it, vp, "fov_deg", 0, 180, true, defaults.fov_deg);
        }
        if (const auto it = j.find("hotspots"); it != j.end()) {
            if (!it->is_array()) fail(path + ".hotspots", "expected an array");
            std::set<std::string> seen;
            for (std::size_t k = 0; k < it->size(); ++k) {
                const std::string hp = path + ".hotspots[" + std::to_string(k) + "]";
                Hotspot h = read_hotspot((*it)[k], hp);
                if (!seen.insert(h.id).second) fail(hp + ".id", "duplicate hotspot id \"" + h.id + "\"");
                s.hotspots.push_back(std::move(h));
            }
        }
        return s;
    }

    Hotspot read_hotspot(const json& j, const std::string& path) {
        require_object(j, path);
        check_fields(j, path, {"id", "kind", "yaw_deg", "pitch_deg", "title", "payload"});
        Hotspot h;
        h.id = identifier(j, path, "id");
        const std::string kind = string_field(j, path, "kind");
        const auto parsed = parse_hotspot_kind(kind);
        if (!parsed) fail(path + ".kind", "unknown hotspot kind \"" + kind + "\" (picture, video, text, link)");
        h.kind = *parsed;
        h.yaw_deg = angle(j, path, "yaw_deg", -180, 180, false);
        h.pitch_deg = angle(j, path, "pitch_deg", -90, 90, false);
        h.title = optional_string(j, path, "title");
        h.payload = string_field(j, path, "payload");
        const std::string pp = path + ".payload";
        switch (h.kind) {
        case HotspotKind::picture:
            if (!is_valid_media_reference(h.payload)) fail(pp, "picture payload must be a relative media reference");
            break;
        case HotspotKind::video:
            if (!is_external_url(h.payload)) fail(pp, "video payload must be an http(s) URL");
            break;
        case HotspotKind::link:
            if (!is_valid_identifier(h.payload)) fail(pp, "link payload must be a scene identifier");
            break;
        case HotspotKind::text:
            if (h.payload.empty()) fail(pp, "text payload must not be empty");
            break;
        }
        return h;
    }

    std::vector<std::string>* warnings_;
};

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace detail

/// Parses and structurally validates a manifest. Unknown fields are appended to
/// `warnings` when given. Throws ManifestError.
inline Tour parse_manifest(std::string_view text, std::vector<std::string>* warnings = nullptr) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        const auto [line, col] = detail::line_column(text, byte);
        std::string msg = e.what();
        if (const auto p = msg.find("] "); p != std::string::npos) msg = msg.substr(p + 2);
        throw ManifestError(ManifestError::Kind::syntax, "", msg, line, col);
    }
    return detail::ManifestReader(warnings).read(root);
}

inline nlohmann::ordered_json manifest_to_json(const Tour& t) {
    using oj = nlohmann::ordered_json;
    oj root;
    root["id"] = t.id;
    root["title"] = t.title;
    root["start_scene"] = t.start_scene;
    root["scenes"] = oj::array();
    for (const auto& s : t.scenes) {
        oj js;
        js["id"] = s.id;
        js["title"] = s.title;
        js["panorama"] = s.panorama;
        js["initial_view"] = oj{{"yaw_deg", s.initial_view.yaw_deg},
                                {"pitch_deg", s.initial_view.pitch_deg},
                                {"fov_deg", s.initial_view.fov_deg}};
        js["hotspots"] = oj::array();
        for (const auto& h : s.hotspots) {
            oj jh;
            jh["id"] = h.id;
            jh["kind"] = std::string(to_string(h.kind));
            jh["yaw_deg"] = h.yaw_deg;
            jh["pitch_deg"] = h.pitch_deg;
            jh["title"] = h.title;
            jh["payload"] = h.payload;
            js["hotspots"].push_back(std::move(jh));
        }
        root["scenes"].push_back(std::move(js));
    }
    return root;
}

/// Canonical text: fixed field order, scenes and hotspots in model order, trailing newline.
inline std::string serialize_manifest(const Tour& t) { return manifest_to_json(t).dump(2) + "\n"; }

struct TourValidationOptions {
    double overlap_threshold_deg = 2.0;
};

/// Ids of scenes reachable from the start scene by following link hotspots.
inline std::set<std::string> reachable_scenes(const Tour& t) {
    std::set<std::string> seen;
    if (!t.find_scene(t.start_scene)) return seen;
    std::deque<std::string> queue{t.start_scene};
    seen.insert(t.start_scene);
    while (!queue.empty()) {
        const Scene* s = t.find_scene(queue.front());
        queue.pop_front();
        for (const auto& h : s->hotspots) {
            if (h.kind == HotspotKind::link && t.find_scene(h.payload) && seen.insert(h.payload).second) {
                queue.push_back(h.payload);
            }
        }
    }
    return seen;
}

/// Graph and media checks over a parsed tour. Locations are id-based
/// ("scenes/<id>/hotspots/<id>/payload") so findings do not depend on scene order.
inline ValidationReport validate_tour(const Tour& t, const std::set<std::string>& available_media,
                                      const TourValidationOptions& opts = {}) {
    std::vector<Finding> findings;
    for (const auto& s : t.scenes) {
        const std::string sp = "scenes/" + s.id;
        if (!available_media.contains(s.panorama)) {
            findings.push_back({std::string(codes::missing_media), Severity::error, sp + "/panorama",
                                "panorama \"" + s.panorama + "\" not found in media"});
        }
        for (const auto& h : s.hotspots) {
            const std::string hp = sp + "/hotspots/" + h.id;
            if (h.kind == HotspotKind::link && !t.find_scene(h.payload)) {
                findings.push_back({std::string(codes::dangling_link), Severity::error, hp + "/payload",
                                    "link target scene \"" + h.payload + "\" does not exist"});
            }
            if (h.kind == HotspotKind::picture && !available_media.contains(h.payload)) {
                findings.push_back({std::string(codes::missing_media), Severity::error, hp + "/payload",
                                    "picture \"" + h.payload + "\" not found in media"});
            }
        }
        for (std::size_t a = 0; a < s.hotspots.size(); ++a) {
            for (std::size_t b = a + 1; b < s.hotspots.size(); ++b) {
                const double sep = rad_to_deg(angular_distance(sphere_to_vec(s.hotspots[a].direction()),
                                                               sphere_to_vec(s.hotspots[b].direction())));
                if (sep <= opts.overlap_threshold_deg) {
                    const auto& [first, second] = std::minmax(s.hotspots[a].id, s.hotspots[b].id);
                    findings.push_back({std::string(codes::overlap), Severity::warning, sp + "/hotspots/" + first,
                                        "hotspots \"" + first + "\" and \"" + second + "\" are " +
                                            std::to_string(sep) + " degrees apart"});
                }
            }
        }
    }
    const auto reached = reachable_scenes(t);
    for (const auto& s : t.scenes) {
        if (!reached.contains(s.id)) {
            findings.push_back({std::string(codes::unreachable), Severity::warning, "scenes/" + s.id,
                                "scene is not reachable from start scene \"" + t.start_scene + "\""});
        }
    }
    std::sort(findings.begin(), findings.end());
    return ValidationReport::from(std::move(findings));
}

} // namespace vtour
