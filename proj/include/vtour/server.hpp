#pragma once

// Read-only HTTP service over a compiled bundle.
//
//   GET /api/tour                          manifest.resolved, verbatim
//   GET /api/scene/{id}/pano               panorama bytes (single byte ranges honored)
//   GET /api/scene/{id}/preview            little-planet PNG
//   GET /api/scene/{id}/cubemap/{face}     cube face PNG, 404 when not compiled
//   GET /api/scene/{id}/view?yaw_deg&pitch_deg&fov_deg&w&h   perspective PNG
//   GET /api/media/{ref}                   picture payloads
//   GET /api/metrics                       per-endpoint counters
//   GET / and /viewer/*                    client assets
//
// Errors carry a JSON body {"code": ..., "message": ...}.

#include "vtour/bundle.hpp"
#include "vtour/codec.hpp"
#include "vtour/projection.hpp"

#include <httplib.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace vtour {

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080; ///< 0 picks a free port
    std::filesystem::path bundle_path;
    int cache_seconds = 3600;
    unsigned max_concurrent_renders = 2;
    unsigned worker_threads = 8;
    unsigned render_threads = 1; ///< threads used inside a single render
};

struct BindAddress {
    std::string host;
    int port = 0;
};

/// Parses "host:port", "[v6]:port" or ":port" (which binds to 127.0.0.1).
inline BindAddress parse_bind_address(std::string_view s) {
    const auto colon = s.rfind(':');
    if (colon == std::string_view::npos) throw ParameterError("bind address must look like host:port");
    std::string host(s.substr(0, colon));
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
    if (host.empty()) host = "127.0.0.1";
    const std::string_view port_text = s.substr(colon + 1);
    int port = -1;
    const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
        throw ParameterError("invalid port in bind address: " + std::string(s));
    }
    return {host, port};
}

enum class Endpoint { tour, pano, preview, cubemap, view, media, metrics, viewer, unmatched };

inline constexpr std::array<Endpoint, 9> kEndpoints{Endpoint::tour,    Endpoint::pano,   Endpoint::preview,
                                                    Endpoint::cubemap, Endpoint::view,   Endpoint::media,
                                                    Endpoint::metrics, Endpoint::viewer, Endpoint::unmatched};

inline std::string_view to_string(Endpoint e) noexcept {
    constexpr std::array<std::string_view, 9> names{
        "/api/tour",       "/api/scene/{id}/pano", "/api/scene/{id}/preview", "/api/scene/{id}/cubemap/{face}",
        "/api/scene/{id}/view", "/api/media/{ref}", "/api/metrics", "/viewer/*", "unmatched"};
    return names[static_cast<std::size_t>(e)];
}

struct EndpointMetrics {
    std::uint64_t count = 0;
    std::uint64_t bytes_sent = 0; ///< response body bytes
    double p50_ms = 0, p95_ms = 0, max_ms = 0;
};

struct RequestMetrics {
    std::array<EndpointMetrics, kEndpoints.size()> endpoints{};

    const EndpointMetrics& at(Endpoint e) const { return endpoints[static_cast<std::size_t>(e)]; }
};

inline nlohmann::ordered_json to_json(const RequestMetrics& m) {
    nlohmann::ordered_json j;
    auto& eps = j["endpoints"] = nlohmann::ordered_json::object();
    for (auto e : kEndpoints) {
        const auto& x = m.at(e);
        eps[std::string(to_string(e))] = {{"count", x.count},
                                          {"bytes_sent", x.bytes_sent},
                                          {"latency_ms", {{"p50", x.p50_ms}, {"p95", x.p95_ms}, {"max", x.max_ms}}}};
    }
    return j;
}

namespace detail {

class MetricsRegistry {
public:
    void record(Endpoint e, std::uint64_t bytes, double ms) {
        Slot& s = slots_[static_cast<std::size_t>(e)];
        std::lock_guard lock(s.mutex);
        s.count.fetch_add(1, std::memory_order_relaxed);
        s.bytes.fetch_add(bytes, std::memory_order_relaxed);
        s.latencies.push_back(ms);
    }

    RequestMetrics snapshot() const {
        RequestMetrics m;
        for (std::size_t k = 0; k < slots_.size(); ++k) {
            const Slot& s = slots_[k];
            std::vector<double> lat;
            {
                std::lock_guard lock(s.mutex);
                m.endpoints[k].count = s.count.load(std::memory_order_relaxed);
                m.endpoints[k].bytes_sent = s.bytes.load(std::memory_order_relaxed);
                lat = s.latencies;
            }
            if (lat.empty()) continue;
            std::sort(lat.begin(), lat.end());
            // Nearest-rank quantiles.
            auto rank = [&](double q) {
                const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(lat.size())));
                return lat[std::clamp<std::size_t>(idx, 1, lat.size()) - 1];
            };
            m.endpoints[k].p50_ms = rank(0.50);
            m.endpoints[k].p95_ms = rank(0.95);
            m.endpoints[k].max_ms = lat.back();
        }
        return m;
    }

private:
    struct Slot {
        std::atomic<std::uint64_t> count{0};
        std::atomic<std::uint64_t> bytes{0};
        mutable std::mutex mutex;
        std::vector<double> latencies;
    };
    std::array<Slot, kEndpoints.size()> slots_;
};

struct HttpError {
    int status;
    std::string code;
    std::string message;
};

inline std::string error_body(std::string_view code, std::string_view message) {
    nlohmann::ordered_json j;
    j["code"] = code;
    j["message"] = message;
    return j.dump();
}

inline std::string content_type_for(std::string_view path) {
    auto ends = [&](std::string_view s) { return path.ends_with(s); };
    if (ends(".png")) return "image/png";
    if (ends(".jpg") || ends(".jpeg")) return "image/jpeg";
    if (ends(".html") || ends(".htm")) return "text/html; charset=utf-8";
    if (ends(".js")) return "text/javascript; charset=utf-8";
    if (ends(".css")) return "text/css; charset=utf-8";
    if (ends(".json") || ends(".resolved")) return "application/json";
    if (ends(".svg")) return "image/svg+xml";
    return "application/octet-stream";
}

inline double query_double(const httplib::Request& req, const char* name, double fallback) {
    if (!req.has_param(name)) return fallback;
    const std::string v = req.get_param_value(name);
    double out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw HttpError{400, "invalid_parameter", std::string(name) + " must be a finite number"};
    }
    return out;
}

inline std::int64_t query_int(const httplib::Request& req, const char* name, std::int64_t fallback) {
    if (!req.has_param(name)) return fallback;
    const std::string v = req.get_param_value(name);
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
        throw HttpError{400, "invalid_parameter", std::string(name) + " must be an integer"};
    }
    return out;
}

} // namespace detail

inline constexpr double kMaxViewFovDeg = 170.0;
inline constexpr std::int64_t kMaxViewExtent = 2048;

/// Reads the /view query (degrees) into render parameters, enforcing the endpoint's caps.
/// Missing parameters default to yaw 0, pitch 0, fov 90, 640x480.
inline ViewParams parse_view_query(const httplib::Request& req) {
    const double yaw = detail::query_double(req, "yaw_deg", 0.0);
    const double pitch = detail::query_double(req, "pitch_deg", 0.0);
    const double fov = detail::query_double(req, "fov_deg", 90.0);
    const std::int64_t w = detail::query_int(req, "w", 640);
    const std::int64_t h = detail::query_int(req, "h", 480);
    if (pitch < -90.0 || pitch > 90.0) throw detail::HttpError{400, "invalid_parameter", "pitch_deg must lie in [-90, 90]"};
    if (!(fov > 0.0) || fov > kMaxViewFovDeg) {
        throw detail::HttpError{400, "invalid_parameter", "fov_deg must lie in (0, 170]"};
    }
    if (w < 1 || h < 1 || w > kMaxViewExtent || h > kMaxViewExtent) {
        throw detail::HttpError{400, "invalid_parameter", "w and h must lie in [1, 2048]"};
    }
    return {deg_to_rad(yaw), deg_to_rad(pitch), deg_to_rad(fov), {w, h}};
}

class TourServer {
public:
    explicit TourServer(ServerConfig config)
        : config_(std::move(config)),
          bundle_(open_bundle(config_.bundle_path)),
          render_slots_(std::clamp<std::ptrdiff_t>(config_.max_concurrent_renders, 1, 1024)) {
        if (config_.port < 0 || config_.port > 65535) throw ParameterError("port must lie in [0, 65535]");
        if (config_.max_concurrent_renders == 0) throw ParameterError("max concurrent renders must be positive");
        if (config_.worker_threads == 0) throw ParameterError("worker thread count must be positive");
        for (const auto& s : bundle_.tour.scenes) panoramas_.try_emplace(s.id);
        routes();
    }

    ~TourServer() { stop(); }
    TourServer(const TourServer&) = delete;
    TourServer& operator=(const TourServer&) = delete;

    /// Binds the listening socket; returns the bound port.
    int bind() {
        if (port_ > 0) return port_;
        if (config_.port == 0) {
            port_ = http_.bind_to_any_port(config_.host);
        } else if (http_.bind_to_port(config_.host, config_.port)) {
            port_ = config_.port;
        }
        if (port_ <= 0) {
            port_ = 0;
            throw IoError("cannot bind " + config_.host + ":" + std::to_string(config_.port));
        }
        return port_;
    }

    /// Serves until stop() is called from another thread.
    void run() {
        bind();
        http_.listen_after_bind();
    }

    /// Serves on a background thread; returns once accepting connections.
    void start() {
        bind();
        thread_ = std::thread([this] { http_.listen_after_bind(); });
        http_.wait_until_ready();
    }

    void stop() {
        http_.stop();
        if (thread_.joinable()) thread_.join();
    }

    int port() const noexcept { return port_; }
    const std::string& host() const noexcept { return config_.host; }
    const TourBundle& bundle() const noexcept { return bundle_; }
    RequestMetrics metrics_snapshot() const { return metrics_.snapshot(); }

private:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&, const httplib::Ranges&)>;

    struct PanoramaSlot {
        std::once_flag once;
        std::shared_ptr<const EquirectImage> image;
    };

    void routes() {
        http_.new_task_queue = [n = config_.worker_threads] { return new httplib::ThreadPool(n); };
        http_.set_keep_alive_timeout(2);
        // Address reuse for quick restarts, but no port sharing: a second server must fail to bind.
        http_.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
        });

        get(R"(/api/tour)", Endpoint::tour, [this](const auto&, auto& res, const auto&) {
            send(res, bundle_.manifest_text, "application/json");
        });
        get(R"(/api/scene/([^/]+)/pano)", Endpoint::pano, [this](const auto& req, auto& res, const auto& ranges) {
            const auto& path = scene(req.matches[1]).panorama;
            send_ranged(ranges, res, read_text_file(bundle_.file(path)), detail::content_type_for(path));
        });
        get(R"(/api/scene/([^/]+)/preview)", Endpoint::preview, [this](const auto& req, auto& res, const auto&) {
            send_file(res, scene(req.matches[1]).preview);
        });
        get(R"(/api/scene/([^/]+)/cubemap/([^/]+))", Endpoint::cubemap, [this](const auto& req, auto& res, const auto&) {
            const SceneAssets& s = scene(req.matches[1]);
            for (auto f : kCubeFaces) {
                if (to_string(f) != req.matches[2].str()) continue;
                const auto it = s.cube_faces.find(f);
                if (it == s.cube_faces.end()) throw detail::HttpError{404, "not_found", "cubemap faces were not compiled"};
                send_file(res, it->second);
                return;
            }
            throw detail::HttpError{404, "not_found", "unknown cube face " + req.matches[2].str()};
        });
        get(R"(/api/scene/([^/]+)/view)", Endpoint::view, [this](const auto& req, auto& res, const auto&) {
            const std::string id = req.matches[1];
            scene(id);
            const ViewParams view = parse_view_query(req);
            const auto img = panorama(id);
            Raster out;
            {
                render_slots_.acquire();
                struct Release {
                    std::counting_semaphore<1024>& s;
                    ~Release() { s.release(); }
                } release{render_slots_};
                out = render_perspective(*img, view, {config_.render_threads});
            }
            const Bytes png = codec::encode_png(out);
            send(res, std::string(as_chars(png)), "image/png");
        });
        get(R"(/api/media/(.+))", Endpoint::media, [this](const auto& req, auto& res, const auto&) {
            const auto it = bundle_.asset_table.find("media/" + req.matches[1].str());
            if (it == bundle_.asset_table.end() || it->second.category != AssetCategory::picture) {
                throw detail::HttpError{404, "not_found", "no such media " + req.matches[1].str()};
            }
            send_file(res, it->first);
        });
        get(R"(/api/metrics)", Endpoint::metrics, [this](const auto&, auto& res, const auto&) {
            res.set_content(to_json(metrics_.snapshot()).dump(2), "application/json");
            res.set_header("Cache-Control", "no-store");
            res.status = 200;
        });
        get(R"(/)", Endpoint::viewer, [this](const auto&, auto& res, const auto&) { send_viewer(res, "index.html"); });
        get(R"(/viewer/(.+))", Endpoint::viewer, [this](const auto& req, auto& res, const auto&) {
            send_viewer(res, req.matches[1].str());
        });

        // Requests no route matched. Routed errors already carry a JSON body.
        http_.set_error_handler([this](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
            const bool not_found = res.status == 404;
            res.set_content(detail::error_body(not_found ? "not_found" : "http_error",
                                               not_found ? "no such resource" : httplib::status_message(res.status)),
                            "application/json");
            metrics_.record(Endpoint::unmatched, res.body.size(), 0.0);
            return httplib::Server::HandlerResponse::Handled;
        });
    }

    // Registers a GET route wrapped with error mapping and metrics.
    void get(const std::string& pattern, Endpoint endpoint, Handler handler) {
        http_.Get(pattern, [this, endpoint, handler = std::move(handler)](const httplib::Request& req,
                                                                          httplib::Response& res) {
            const auto t0 = std::chrono::steady_clock::now();
            // Range handling happens in send_ranged; keep the transport from re-slicing bodies.
            const httplib::Ranges ranges = std::move(const_cast<httplib::Request&>(req).ranges);
            const_cast<httplib::Request&>(req).ranges.clear();
            try {
                handler(req, res, ranges);
            } catch (const detail::HttpError& e) {
                fail(res, e.status, e.code, e.message);
            } catch (const IntegrityError& e) {
                fail(res, 500, "integrity", e.what());
            } catch (const IoError& e) {
                fail(res, 500, "io", e.what());
            } catch (const std::exception& e) {
                fail(res, 500, "internal", e.what());
            }
            const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            metrics_.record(endpoint, res.body.size(), ms);
        });
    }

    static void fail(httplib::Response& res, int status, std::string_view code, std::string_view message) {
        res.status = status;
        res.set_content(detail::error_body(code, message), "application/json");
    }

    const SceneAssets& scene(const std::string& id) const {
        const auto it = bundle_.scenes.find(id);
        if (it == bundle_.scenes.end()) throw detail::HttpError{404, "not_found", "no such scene " + id};
        return it->second;
    }

    std::shared_ptr<const EquirectImage> panorama(const std::string& id) {
        PanoramaSlot& slot = panoramas_.at(id);
        std::call_once(slot.once, [&] {
            slot.image = std::make_shared<const EquirectImage>(
                EquirectImage{decode_raster(read_file(bundle_.file(scene(id).panorama))), std::nullopt});
        });
        return slot.image;
    }

    void send(httplib::Response& res, std::string body, const std::string& type) {
        res.set_header("Cache-Control", "public, max-age=" + std::to_string(config_.cache_seconds));
        res.set_content(std::move(body), type);
        res.status = 200;
    }

    void send_file(httplib::Response& res, const std::string& bundle_path) {
        send(res, read_text_file(bundle_.file(bundle_path)), detail::content_type_for(bundle_path));
    }

    void send_viewer(httplib::Response& res, const std::string& rel) {
        const std::string path = "viewer/" + rel;
        if (!bundle_.asset_table.contains(path)) throw detail::HttpError{404, "not_found", "no such viewer asset " + rel};
        send_file(res, path);
    }

    // A single satisfiable range yields 206; several ranges are answered with the full body.
    void send_ranged(const httplib::Ranges& ranges, httplib::Response& res, std::string body, const std::string& type) {
        res.set_header("Accept-Ranges", "bytes");
        if (ranges.size() != 1) {
            send(res, std::move(body), type);
            return;
        }
        const auto size = static_cast<std::int64_t>(body.size());
        std::int64_t first = ranges[0].first, last = ranges[0].second;
        if (first < 0) {
            first = std::max<std::int64_t>(0, size - last);
            last = size - 1;
        } else if (last < 0 || last >= size) {
            last = size - 1;
        }
        if (first >= size || first > last) {
            res.set_header("Content-Range", "bytes */" + std::to_string(size));
            throw detail::HttpError{416, "range_not_satisfiable", "requested range lies outside the asset"};
        }
        send(res, body.substr(static_cast<std::size_t>(first), static_cast<std::size_t>(last - first + 1)), type);
        res.status = 206;
        res.set_header("Content-Range",
                       "bytes " + std::to_string(first) + "-" + std::to_string(last) + "/" + std::to_string(size));
    }

    ServerConfig config_;
    TourBundle bundle_;
    httplib::Server http_;
    std::thread thread_;
    int port_ = 0;
    detail::MetricsRegistry metrics_;
    std::counting_semaphore<1024> render_slots_;
    std::map<std::string, PanoramaSlot> panoramas_;
};

} // namespace vtour
