#pragma once

// Load-time simulation over a bundle inventory.
//
// Each asset costs one round trip plus its bytes over the link, and is
// assigned in list order to whichever connection frees up first (lowest
// index on ties). Processing starts when the transfer ends and does not
// occupy the connection. The eager list is: documents, viewer scripts,
// viewer styles, the start scene's panorama, then previews. Everything else
// (pictures, other panoramas, cube faces) is lazy: scheduled afterwards and
// never part of the critical path.

#include "vtour/bundle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace vtour {

struct NetworkModel {
    double bandwidth_bps = 8e6;
    double rtt_ms = 50.0;
    unsigned connections = 6;

    void check() const {
        if (!(bandwidth_bps > 0) || !std::isfinite(bandwidth_bps)) throw ParameterError("bandwidth must be positive");
        if (!(rtt_ms > 0) || !std::isfinite(rtt_ms)) throw ParameterError("rtt must be positive");
        if (connections == 0) throw ParameterError("connection count must be positive");
    }
    bool operator==(const NetworkModel&) const = default;
};

struct ClientModel {
    double script_bytes_per_s = 2e6;  ///< documents, scripts and styles
    double image_bytes_per_s = 20e6;  ///< panoramas, previews, cube faces, pictures

    void check() const {
        if (!(script_bytes_per_s > 0) || !std::isfinite(script_bytes_per_s) || !(image_bytes_per_s > 0) ||
            !std::isfinite(image_bytes_per_s)) {
            throw ParameterError("client processing rates must be positive");
        }
    }
    double rate(AssetCategory c) const {
        switch (c) {
        case AssetCategory::document:
        case AssetCategory::viewer_script:
        case AssetCategory::viewer_style: return script_bytes_per_s;
        default: return image_bytes_per_s;
        }
    }
    bool operator==(const ClientModel&) const = default;
};

struct LoadPolicy {
    std::string start_scene; ///< scene whose panorama is eager; empty means none

    static LoadPolicy for_tour(const Tour& t) { return {t.start_scene}; }
};

struct TimelineRow {
    std::string path;
    AssetCategory category = AssetCategory::document;
    std::uint64_t bytes = 0;
    bool lazy = false;
    unsigned connection = 0;
    double start_ms = 0;
    double latency_ms = 0;   ///< the round trip
    double transfer_ms = 0;  ///< bytes on the wire
    double processing_ms = 0;
    double end_ms = 0;       ///< start + latency + transfer + processing

    bool operator==(const TimelineRow&) const = default;
};

struct CategoryTime {
    std::uint64_t assets = 0;
    std::uint64_t bytes = 0;
    double latency_ms = 0;
    double transfer_ms = 0;
    double processing_ms = 0;

    bool operator==(const CategoryTime&) const = default;
};

struct LoadReport {
    NetworkModel network;
    ClientModel client;
    std::array<CategoryTime, kAssetCategories.size()> categories{};
    double critical_path_ms = 0;
    std::vector<TimelineRow> timeline; ///< in scheduling order

    const CategoryTime& category(AssetCategory c) const { return categories[static_cast<std::size_t>(c)]; }
    bool operator==(const LoadReport&) const = default;
};

/// Splits inventory rows into (eager in fetch order, lazy in path order).
inline std::pair<std::vector<InventoryRow>, std::vector<InventoryRow>> load_order(const ByteInventory& inv,
                                                                                  const LoadPolicy& policy) {
    const std::string start_prefix = "scenes/" + policy.start_scene + "/";
    auto rank = [&](const InventoryRow& r) -> int {
        switch (r.category) {
        case AssetCategory::document: return 0;
        case AssetCategory::viewer_script: return 1;
        case AssetCategory::viewer_style: return 2;
        case AssetCategory::panorama:
            return !policy.start_scene.empty() && r.path.starts_with(start_prefix) ? 3 : -1;
        case AssetCategory::preview: return 4;
        default: return -1;
        }
    };
    std::vector<InventoryRow> eager, lazy;
    for (const auto& r : inv.rows) (rank(r) < 0 ? lazy : eager).push_back(r);
    std::stable_sort(eager.begin(), eager.end(), [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
    return {std::move(eager), std::move(lazy)};
}

inline LoadReport simulate_load(const ByteInventory& inv, const NetworkModel& net, const ClientModel& client,
                                const LoadPolicy& policy) {
    net.check();
    client.check();
    LoadReport report;
    report.network = net;
    report.client = client;

    auto [eager, lazy] = load_order(inv, policy);
    std::vector<double> free_at(net.connections, 0.0);
    auto schedule = [&](const InventoryRow& r, bool is_lazy) {
        const auto conn = static_cast<unsigned>(std::min_element(free_at.begin(), free_at.end()) - free_at.begin());
        TimelineRow t;
        t.path = r.path;
        t.category = r.category;
        t.bytes = r.bytes;
        t.lazy = is_lazy;
        t.connection = conn;
        t.start_ms = free_at[conn];
        t.latency_ms = net.rtt_ms;
        t.transfer_ms = static_cast<double>(r.bytes) * 8000.0 / net.bandwidth_bps;
        t.processing_ms = static_cast<double>(r.bytes) * 1000.0 / client.rate(r.category);
        const double transfer_end = t.start_ms + (t.latency_ms + t.transfer_ms);
        free_at[conn] = transfer_end;
        t.end_ms = transfer_end + t.processing_ms;

        CategoryTime& c = report.categories[static_cast<std::size_t>(r.category)];
        ++c.assets;
        c.bytes += r.bytes;
        c.latency_ms += t.latency_ms;
        c.transfer_ms += t.transfer_ms;
        c.processing_ms += t.processing_ms;
        if (!is_lazy) report.critical_path_ms = std::max(report.critical_path_ms, t.end_ms);
        report.timeline.push_back(std::move(t));
    };
    for (const auto& r : eager) schedule(r, false);
    for (const auto& r : lazy) schedule(r, true);
    return report;
}

inline nlohmann::ordered_json to_json(const LoadReport& r) {
    nlohmann::ordered_json j;
    j["network"] = {{"bandwidth_bps", r.network.bandwidth_bps},
                    {"rtt_ms", r.network.rtt_ms},
                    {"connections", r.network.connections}};
    j["client"] = {{"script_bytes_per_s", r.client.script_bytes_per_s},
                   {"image_bytes_per_s", r.client.image_bytes_per_s}};
    j["critical_path_ms"] = r.critical_path_ms;
    auto& cats = j["categories"] = nlohmann::ordered_json::object();
    for (auto c : kAssetCategories) {
        const auto& x = r.category(c);
        cats[std::string(to_string(c))] = {{"assets", x.assets},
                                           {"bytes", x.bytes},
                                           {"latency_ms", x.latency_ms},
                                           {"transfer_ms", x.transfer_ms},
                                           {"processing_ms", x.processing_ms}};
    }
    auto& rows = j["timeline"] = nlohmann::ordered_json::array();
    for (const auto& t : r.timeline) {
        rows.push_back({{"path", t.path},
                        {"category", std::string(to_string(t.category))},
                        {"bytes", t.bytes},
                        {"lazy", t.lazy},
                        {"connection", t.connection},
                        {"start_ms", t.start_ms},
                        {"latency_ms", t.latency_ms},
                        {"transfer_ms", t.transfer_ms},
                        {"processing_ms", t.processing_ms},
                        {"end_ms", t.end_ms}});
    }
    return j;
}

inline LoadReport load_report_from_json(const nlohmann::json& j) {
    try {
        LoadReport r;
        r.network = {j.at("network").at("bandwidth_bps"), j.at("network").at("rtt_ms"),
                     j.at("network").at("connections")};
        r.client = {j.at("client").at("script_bytes_per_s"), j.at("client").at("image_bytes_per_s")};
        r.critical_path_ms = j.at("critical_path_ms");
        for (auto c : kAssetCategories) {
            const auto& x = j.at("categories").at(std::string(to_string(c)));
            r.categories[static_cast<std::size_t>(c)] = {x.at("assets"), x.at("bytes"), x.at("latency_ms"),
                                                         x.at("transfer_ms"), x.at("processing_ms")};
        }
        for (const auto& t : j.at("timeline")) {
            const auto cat = parse_asset_category(t.at("category").get<std::string>());
            if (!cat) throw ParameterError("unknown category in report: " + t.at("category").dump());
            r.timeline.push_back({t.at("path"), *cat, t.at("bytes"), t.at("lazy"), t.at("connection"),
                                  t.at("start_ms"), t.at("latency_ms"), t.at("transfer_ms"), t.at("processing_ms"),
                                  t.at("end_ms")});
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("malformed load report: ") + e.what());
    }
}

enum class ReportFormat { text, json };

inline ReportFormat parse_report_format(std::string_view s) {
    if (s == "text") return ReportFormat::text;
    if (s == "json") return ReportFormat::json;
    throw ParameterError("unknown report format \"" + std::string(s) + "\" (expected text or json)");
}

namespace detail {

inline std::string format_row(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

} // namespace detail

/// Category table followed by the timeline. Categories always appear in the same order.
inline std::string render_report(const LoadReport& r, ReportFormat format) {
    if (format == ReportFormat::json) return to_json(r).dump(2) + "\n";
    std::string out;
    out += detail::format_row("%-14s %6s %12s %12s %12s %14s\n", "category", "assets", "bytes", "latency_ms",
                              "transfer_ms", "processing_ms");
    for (auto c : kAssetCategories) {
        const auto& x = r.category(c);
        if (x.assets == 0) continue;
        out += detail::format_row("%-14s %6llu %12llu %12.3f %12.3f %14.3f\n", std::string(to_string(c)).c_str(),
                                  static_cast<unsigned long long>(x.assets), static_cast<unsigned long long>(x.bytes),
                                  x.latency_ms, x.transfer_ms, x.processing_ms);
    }
    if (r.timeline.empty()) return out;
    out += detail::format_row("\ncritical path: %.3f ms (%.0f bit/s, rtt %.3f ms, %u connections)\n",
                              r.critical_path_ms, r.network.bandwidth_bps, r.network.rtt_ms, r.network.connections);
    out += detail::format_row("\n%10s %10s %4s  %s\n", "start_ms", "end_ms", "conn", "asset");
    for (const auto& t : r.timeline) {
        out += detail::format_row("%10.3f %10.3f %4u  %s%s\n", t.start_ms, t.end_ms, t.connection, t.path.c_str(),
                                  t.lazy ? " (lazy)" : "");
    }
    return out;
}

inline std::string render_report(const LoadReport& r, std::string_view format) {
    return render_report(r, parse_report_format(format));
}

} // namespace vtour
