#pragma once

// Tour bundles: a manifest plus media compiled into a self-contained directory
// that the server can expose read-only.
//
//   manifest.resolved           canonical manifest text
//   inventory                   byte inventory (JSON)
//   scenes/<id>/pano.<ext>      panorama bytes, copied verbatim
//   scenes/<id>/preview.png     little-planet preview
//   scenes/<id>/cube_<face>.png optional cubemap faces
//   media/<ref>                 picture hotspot payloads
//   viewer/...                  client assets
//   digest                      SHA-256 over every other file, plus created_at

#include "vtour/builtin_viewer.hpp"
#include "vtour/codec.hpp"
#include "vtour/fileio.hpp"
#include "vtour/findings.hpp"
#include "vtour/media.hpp"
#include "vtour/projection.hpp"
#include "vtour/tour.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace vtour {

enum class AssetCategory { document, panorama, preview, cubemap, picture, viewer_script, viewer_style };

inline constexpr std::array<AssetCategory, 7> kAssetCategories{
    AssetCategory::document, AssetCategory::panorama,      AssetCategory::preview,     AssetCategory::cubemap,
    AssetCategory::picture,  AssetCategory::viewer_script, AssetCategory::viewer_style};

inline std::string_view to_string(AssetCategory c) noexcept {
    constexpr std::array<std::string_view, 7> names{"document", "panorama",      "preview",     "cubemap",
                                                    "picture",  "viewer_script", "viewer_style"};
    return names[static_cast<std::size_t>(c)];
}

inline std::optional<AssetCategory> parse_asset_category(std::string_view s) noexcept {
    for (auto c : kAssetCategories)
        if (to_string(c) == s) return c;
    return std::nullopt;
}

// A bundle whose files disagree with its inventory or digest.
class IntegrityError : public Error {
public:
    using Error::Error;
};

// Compilation stopped because validation produced errors; the report lists every finding.
class CompileFailed : public Error {
public:
    explicit CompileFailed(ValidationReport report)
        : Error(summary(report)), report_(std::move(report)) {}
    const ValidationReport& report() const noexcept { return report_; }

private:
    static std::string summary(const ValidationReport& r) {
        std::size_t errors = 0;
        for (const auto& f : r.findings) errors += f.severity == Severity::error;
        std::string s = "compile aborted with " + std::to_string(errors) + " error finding(s)";
        for (const auto& f : r.findings) s += "\n  " + format_finding(f);
        return s;
    }
    ValidationReport report_;
};

struct InventoryRow {
    std::string path; ///< bundle-relative, '/' separated
    AssetCategory category = AssetCategory::document;
    std::uint64_t bytes = 0;

    bool operator==(const InventoryRow&) const = default;
};

struct ByteInventory {
    std::vector<InventoryRow> rows; ///< sorted by path
    std::array<std::uint64_t, kAssetCategories.size()> category_bytes{};
    std::uint64_t total = 0;

    static ByteInventory from_rows(std::vector<InventoryRow> rows) {
        ByteInventory inv;
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
        for (const auto& r : rows) {
            inv.category_bytes[static_cast<std::size_t>(r.category)] += r.bytes;
            inv.total += r.bytes;
        }
        inv.rows = std::move(rows);
        return inv;
    }

    std::uint64_t bytes(AssetCategory c) const { return category_bytes[static_cast<std::size_t>(c)]; }

    bool operator==(const ByteInventory&) const = default;
};

inline nlohmann::ordered_json to_json(const ByteInventory& inv) {
    nlohmann::ordered_json j;
    j["total_bytes"] = inv.total;
    auto& cats = j["categories"] = nlohmann::ordered_json::object();
    for (auto c : kAssetCategories) cats[std::string(to_string(c))] = inv.bytes(c);
    auto& rows = j["assets"] = nlohmann::ordered_json::array();
    for (const auto& r : inv.rows) {
        rows.push_back({{"path", r.path}, {"category", std::string(to_string(r.category))}, {"bytes", r.bytes}});
    }
    return j;
}

/// Parses an inventory document and checks that its totals are consistent with its rows.
inline ByteInventory inventory_from_json(const nlohmann::json& j) {
    try {
        std::vector<InventoryRow> rows;
        for (const auto& r : j.at("assets")) {
            const auto cat = parse_asset_category(r.at("category").get<std::string>());
            if (!cat) throw IntegrityError("inventory: unknown category " + r.at("category").dump());
            rows.push_back({r.at("path").get<std::string>(), *cat, r.at("bytes").get<std::uint64_t>()});
        }
        ByteInventory inv = ByteInventory::from_rows(std::move(rows));
        if (j.at("total_bytes").get<std::uint64_t>() != inv.total) throw IntegrityError("inventory: total mismatch");
        for (auto c : kAssetCategories) {
            if (j.at("categories").at(std::string(to_string(c))).get<std::uint64_t>() != inv.bytes(c)) {
                throw IntegrityError("inventory: " + std::string(to_string(c)) + " total mismatch");
            }
        }
        return inv;
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(std::string("inventory: ") + e.what());
    }
}

struct AssetEntry {
    std::string path;
    std::uint64_t byte_size = 0;
    AssetCategory category = AssetCategory::document;

    bool operator==(const AssetEntry&) const = default;
};

struct SceneAssets {
    std::string panorama;
    std::string preview;
    std::map<CubeFace, std::string> cube_faces; ///< empty unless compiled with cubemaps
};

struct TourBundle {
    std::filesystem::path root;
    Tour tour;
    std::string manifest_text;                        ///< exact bytes of manifest.resolved
    std::map<std::string, AssetEntry> asset_table;    ///< keyed by bundle path
    std::map<std::string, std::string> media_paths;   ///< manifest media reference -> bundle path
    std::map<std::string, SceneAssets> scenes;        ///< keyed by scene id
    std::string created_at;
    std::string content_digest;

    std::filesystem::path file(std::string_view bundle_path) const { return root / std::filesystem::path(bundle_path); }
};

namespace bundle_files {
inline constexpr std::string_view manifest = "manifest.resolved";
inline constexpr std::string_view inventory = "inventory";
inline constexpr std::string_view digest = "digest";
} // namespace bundle_files

struct CompileOptions {
    bool cubemaps = false;
    std::int64_t cube_face_size = 0;     ///< 0: a quarter of the panorama width, capped at 2048
    bool force = false;                  ///< downgrade XMP findings to warnings
    MediaLimits limits;
    std::int64_t preview_size = 512;
    std::optional<std::filesystem::path> viewer_dir; ///< replaces the built-in client
    std::optional<std::string> created_at;           ///< defaults to the current UTC time
    unsigned threads = 0;
};

namespace detail {

namespace fs = std::filesystem;

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 unavailable");
    }
    void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
    void update(std::string_view s) { update(s.data(), s.size()); }
    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), md, &len);
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        for (unsigned i = 0; i < len; ++i) {
            out += digits[md[i] >> 4];
            out += digits[md[i] & 15];
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

struct BundleFile {
    std::string path;
    std::uint64_t bytes;
};

// Every regular file under root except `digest`, sorted by bundle path.
inline std::vector<BundleFile> list_files(const fs::path& root) {
    std::vector<BundleFile> files;
    std::error_code ec;
    for (fs::recursive_directory_iterator it(root, ec), end; !ec && it != end; it.increment(ec)) {
        if (!it->is_regular_file()) continue;
        std::string rel = it->path().lexically_relative(root).generic_string();
        if (rel == bundle_files::digest) continue;
        files.push_back({std::move(rel), it->file_size()});
    }
    if (ec) throw IoError("cannot list " + root.string() + ": " + ec.message());
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return files;
}

// Hash of (path, NUL, decimal size, NUL, content) for every file except `digest`, in path order.
inline std::string content_digest(const fs::path& root) {
    Sha256 h;
    for (const auto& f : list_files(root)) {
        h.update(f.path);
        h.update("\0", 1);
        h.update(std::to_string(f.bytes));
        h.update("\0", 1);
        const Bytes data = read_file(root / f.path);
        if (data.size() != f.bytes) throw IntegrityError(f.path + " changed while hashing");
        h.update(data.data(), data.size());
    }
    return h.hex();
}

inline std::optional<AssetCategory> categorize(std::string_view path) {
    auto ends_with = [&](std::string_view s) { return path.ends_with(s); };
    if (path == bundle_files::manifest) return AssetCategory::document;
    if (path.starts_with("media/")) return AssetCategory::picture;
    if (path.starts_with("viewer/")) {
        if (ends_with(".html") || ends_with(".htm")) return AssetCategory::document;
        if (ends_with(".css")) return AssetCategory::viewer_style;
        return AssetCategory::viewer_script;
    }
    if (path.starts_with("scenes/")) {
        const auto slash = path.find('/', 7);
        if (slash == std::string_view::npos || path.find('/', slash + 1) != std::string_view::npos) return std::nullopt;
        const std::string_view name = path.substr(slash + 1);
        if (name.starts_with("pano.")) return AssetCategory::panorama;
        if (name == "preview.png") return AssetCategory::preview;
        for (auto f : kCubeFaces)
            if (name == "cube_" + std::string(to_string(f)) + ".png") return AssetCategory::cubemap;
    }
    return std::nullopt;
}

inline ByteInventory scan_inventory(const fs::path& root) {
    std::vector<InventoryRow> rows;
    for (auto& f : list_files(root)) {
        if (f.path == bundle_files::inventory) continue;
        const auto cat = categorize(f.path);
        if (!cat) throw IntegrityError("unexpected file in bundle: " + f.path);
        rows.push_back({std::move(f.path), *cat, f.bytes});
    }
    return ByteInventory::from_rows(std::move(rows));
}

inline bool looks_like_bundle(const fs::path& dir) {
    return fs::is_regular_file(dir / bundle_files::digest) && fs::is_regular_file(dir / bundle_files::manifest);
}

inline void copy_tree_files(const fs::path& from, const fs::path& to) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(from))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) write_file(to / f.lexically_relative(from), read_file(f));
}

} // namespace detail

struct BundleOpenOptions {
    bool verify = true; ///< recompute the digest and compare the inventory with the files on disk
};

/// Recomputes the content digest of a bundle directory (created_at is not part of it).
inline std::string compute_bundle_digest(const std::filesystem::path& root) { return detail::content_digest(root); }

inline TourBundle open_bundle(const std::filesystem::path& root, const BundleOpenOptions& opts = {}) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw IoError("bundle directory not found: " + root.string());
    TourBundle b;
    b.root = root;
    nlohmann::json digest;
    try {
        digest = nlohmann::json::parse(read_text_file(root / bundle_files::digest));
        b.content_digest = digest.at("content_digest").get<std::string>();
        b.created_at = digest.at("created_at").get<std::string>();
        if (digest.at("algorithm") != "sha256") throw IntegrityError("unsupported digest algorithm");
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError("bundle digest file is malformed: " + std::string(e.what()));
    }
    ByteInventory inv;
    try {
        inv = inventory_from_json(nlohmann::json::parse(read_text_file(root / bundle_files::inventory)));
    } catch (const nlohmann::json::parse_error& e) {
        throw IntegrityError("bundle inventory is malformed: " + std::string(e.what()));
    }
    if (opts.verify) {
        if (detail::scan_inventory(root) != inv) throw IntegrityError("bundle files do not match the inventory");
        if (detail::content_digest(root) != b.content_digest) throw IntegrityError("bundle content digest mismatch");
    }
    // Parsed only after verification so a tampered manifest reports as an integrity failure.
    b.manifest_text = read_text_file(root / bundle_files::manifest);
    try {
        b.tour = parse_manifest(b.manifest_text);
    } catch (const ManifestError& e) {
        throw IntegrityError("bundle manifest is invalid: " + std::string(e.what()));
    }
    for (const auto& r : inv.rows) b.asset_table[r.path] = {r.path, r.bytes, r.category};

    for (const auto& s : b.tour.scenes) {
        SceneAssets a;
        const std::string prefix = "scenes/" + s.id + "/";
        for (auto it = b.asset_table.lower_bound(prefix); it != b.asset_table.end() && it->first.starts_with(prefix);
             ++it) {
            const std::string name = it->first.substr(prefix.size());
            if (it->second.category == AssetCategory::panorama) a.panorama = it->first;
            if (it->second.category == AssetCategory::preview) a.preview = it->first;
            if (it->second.category == AssetCategory::cubemap) {
                for (auto f : kCubeFaces)
                    if (name == "cube_" + std::string(to_string(f)) + ".png") a.cube_faces[f] = it->first;
            }
        }
        if (a.panorama.empty() || a.preview.empty()) throw IntegrityError("bundle lacks assets for scene " + s.id);
        b.media_paths[s.panorama] = a.panorama;
        for (const auto& h : s.hotspots) {
            if (h.kind != HotspotKind::picture) continue;
            const std::string path = "media/" + h.payload;
            if (!b.asset_table.contains(path)) throw IntegrityError("bundle lacks picture " + h.payload);
            b.media_paths[h.payload] = path;
        }
        b.scenes[s.id] = std::move(a);
    }
    return b;
}

/// Byte accounting from the files currently on disk, for the assets the bundle lists.
inline ByteInventory inventory(const TourBundle& b) {
    std::vector<InventoryRow> rows;
    for (const auto& [path, entry] : b.asset_table) {
        std::error_code ec;
        const auto size = std::filesystem::file_size(b.file(path), ec);
        if (ec) throw IntegrityError("bundle asset missing: " + path);
        rows.push_back({path, entry.category, size});
    }
    return ByteInventory::from_rows(std::move(rows));
}

struct SourceValidationOptions {
    MediaLimits limits;
    bool force = false; ///< downgrade XMP findings to warnings
};

namespace detail {

struct Sources {
    Tour tour;
    ValidationReport report;
    std::map<std::string, std::pair<Bytes, DecodedPanorama>> panoramas; ///< by media reference
};

inline Sources load_sources(const std::filesystem::path& manifest_path, const std::filesystem::path& media_dir,
                            const SourceValidationOptions& opts, std::vector<std::string>* warnings) {
    namespace fs = std::filesystem;
    opts.limits.check();
    if (!fs::is_directory(media_dir)) throw IoError("media directory not found: " + media_dir.string());
    Sources src;
    src.tour = parse_manifest(read_text_file(manifest_path), warnings);

    std::set<std::string> present;
    auto note_media = [&](const std::string& ref) {
        if (fs::is_regular_file(media_dir / ref)) present.insert(ref);
    };
    for (const auto& s : src.tour.scenes) {
        note_media(s.panorama);
        for (const auto& h : s.hotspots)
            if (h.kind == HotspotKind::picture) note_media(h.payload);
    }

    std::vector<Finding> findings = validate_tour(src.tour, present).findings;
    for (const auto& s : src.tour.scenes) {
        if (!present.contains(s.panorama)) continue;
        auto it = src.panoramas.find(s.panorama);
        if (it == src.panoramas.end()) {
            Bytes bytes = read_file(media_dir / s.panorama);
            DecodedPanorama decoded;
            try {
                decoded = decode_image(bytes);
            } catch (const DecodeError& e) {
                throw DecodeError(s.panorama + ": " + e.what(), e.offset());
            }
            it = src.panoramas.emplace(s.panorama, std::make_pair(std::move(bytes), std::move(decoded))).first;
        }
        for (Finding f : validate_panorama(it->second.second.metadata, opts.limits).findings) {
            f.path = "scenes/" + s.id + "/panorama";
            f.message = s.panorama + ": " + f.message;
            if (opts.force && f.code == codes::xmp) f.severity = Severity::warning;
            findings.push_back(std::move(f));
        }
    }
    std::sort(findings.begin(), findings.end());
    src.report = ValidationReport::from(std::move(findings));
    return src;
}

} // namespace detail

/// Tour graph and media checks over source files, as compile runs them.
/// Manifest warnings (unknown fields) go to `warnings` when given.
inline ValidationReport validate_sources(const std::filesystem::path& manifest_path,
                                         const std::filesystem::path& media_dir,
                                         const SourceValidationOptions& opts = {},
                                         std::vector<std::string>* warnings = nullptr) {
    return detail::load_sources(manifest_path, media_dir, opts, warnings).report;
}

/// Validates media and tour, then writes a fresh bundle into out_dir. out_dir must
/// be absent, empty, or a previously compiled bundle (which is replaced). The full
/// validation report (warnings included) is stored in `report` when given.
inline TourBundle compile(const std::filesystem::path& manifest_path, const std::filesystem::path& media_dir,
                          const std::filesystem::path& out_dir, const CompileOptions& opts = {},
                          ValidationReport* report = nullptr) {
    namespace fs = std::filesystem;
    if (opts.preview_size < 1) throw ParameterError("preview size must be positive");
    if (fs::exists(out_dir) && !(fs::is_directory(out_dir) && (fs::is_empty(out_dir) || detail::looks_like_bundle(out_dir)))) {
        throw IoError("output directory exists and is not a bundle: " + out_dir.string());
    }

    detail::Sources src = detail::load_sources(manifest_path, media_dir, {opts.limits, opts.force}, nullptr);
    if (report) *report = src.report;
    if (!src.report.ok) throw CompileFailed(std::move(src.report));
    const Tour& tour = src.tour;
    const auto& panoramas = src.panoramas;

    fs::path staging = out_dir;
    staging += ".partial";
    fs::remove_all(staging);
    fs::create_directories(staging);

    write_file(staging / bundle_files::manifest, serialize_manifest(tour));
    for (const auto& s : tour.scenes) {
        const auto& [bytes, decoded] = panoramas.at(s.panorama);
        const fs::path dir = staging / "scenes" / s.id;
        write_file(dir / ("pano." + file_extension(decoded.metadata.format)), bytes);
        LittlePlanetOptions lp;
        lp.threads = opts.threads;
        write_file(dir / "preview.png",
                   codec::encode_png(render_little_planet(decoded.image, {opts.preview_size, opts.preview_size}, lp)));
        if (opts.cubemaps) {
            const std::int64_t face = opts.cube_face_size > 0
                                          ? opts.cube_face_size
                                          : std::clamp<std::int64_t>(decoded.metadata.dims.width / 4, 1, 2048);
            const CubeMap cube = equirect_to_cubemap(decoded.image, face, {opts.threads});
            for (std::size_t k = 0; k < kCubeFaces.size(); ++k) {
                write_file(dir / ("cube_" + std::string(to_string(kCubeFaces[k])) + ".png"), codec::encode_png(cube[k]));
            }
        }
        for (const auto& h : s.hotspots) {
            if (h.kind != HotspotKind::picture) continue;
            const fs::path dst = staging / "media" / h.payload;
            if (!fs::exists(dst)) write_file(dst, read_file(media_dir / h.payload));
        }
    }

    if (opts.viewer_dir) {
        if (!fs::is_directory(*opts.viewer_dir)) throw IoError("viewer directory not found: " + opts.viewer_dir->string());
        detail::copy_tree_files(*opts.viewer_dir, staging / "viewer");
    } else {
        for (const auto& [name, text] : builtin_viewer::kFiles) write_file(staging / "viewer" / name, text);
    }

    write_file(staging / bundle_files::inventory, to_json(detail::scan_inventory(staging)).dump(2) + "\n");
    nlohmann::ordered_json digest;
    digest["algorithm"] = "sha256";
    digest["content_digest"] = detail::content_digest(staging);
    digest["created_at"] = opts.created_at.value_or(detail::utc_timestamp());
    write_file(staging / bundle_files::digest, digest.dump(2) + "\n");

    if (fs::exists(out_dir)) fs::remove_all(out_dir);
    fs::rename(staging, out_dir);
    return open_bundle(out_dir);
}

} // namespace vtour
