#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace vtour {

enum class Severity { error, warning };

inline std::string_view to_string(Severity s) noexcept { return s == Severity::error ? "error" : "warning"; }

// Stable finding codes. Media rules first, then tour-graph rules.
namespace codes {
inline constexpr std::string_view aspect = "ASPECT";
inline constexpr std::string_view xmp = "XMP";
inline constexpr std::string_view resolution = "RESOLUTION";
inline constexpr std::string_view filesize = "FILESIZE";
inline constexpr std::string_view dangling_link = "DANGLING_LINK";
inline constexpr std::string_view missing_media = "MISSING_MEDIA";
inline constexpr std::string_view unreachable = "UNREACHABLE";
inline constexpr std::string_view overlap = "OVERLAP";
} // namespace codes

struct Finding {
    std::string code;
    Severity severity = Severity::error;
    std::string path; ///< location inside a manifest or file; empty when not applicable
    std::string message;

    bool operator==(const Finding&) const = default;
    auto operator<=>(const Finding&) const = default;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Finding> findings;

    static ValidationReport from(std::vector<Finding> findings) {
        ValidationReport r;
        r.ok = std::none_of(findings.begin(), findings.end(),
                            [](const Finding& f) { return f.severity == Severity::error; });
        r.findings = std::move(findings);
        return r;
    }

    bool has(std::string_view code) const {
        return std::any_of(findings.begin(), findings.end(), [&](const Finding& f) { return f.code == code; });
    }
};

inline nlohmann::ordered_json to_json(const Finding& f) {
    nlohmann::ordered_json j;
    j["code"] = f.code;
    j["severity"] = std::string(to_string(f.severity));
    j["path"] = f.path;
    j["message"] = f.message;
    return j;
}

inline nlohmann::ordered_json to_json(const ValidationReport& r) {
    nlohmann::ordered_json j;
    j["ok"] = r.ok;
    j["findings"] = nlohmann::ordered_json::array();
    for (const auto& f : r.findings) j["findings"].push_back(to_json(f));
    return j;
}

inline std::string format_finding(const Finding& f) {
    std::string s = std::string(to_string(f.severity)) + " " + f.code;
    if (!f.path.empty()) s += " [" + f.path + "]";
    return s + ": " + f.message;
}

} // namespace vtour
