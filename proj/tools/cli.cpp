#include "cli.hpp"

#include "vtour/bundle.hpp"
#include "vtour/profiler.hpp"
#include "vtour/sample.hpp"
#include "vtour/server.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <pthread.h>

namespace vtour::cli {
namespace {

namespace fs = std::filesystem;

struct Config {
    MediaLimits limits;
    std::optional<std::string> bind;
    int cache_seconds = 3600;
    unsigned max_concurrent_renders = 2;
    unsigned worker_threads = 8;
};

void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> known, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ParameterError("config: unknown key " + where + key);
        }
    }
}

Config load_config(const std::string& path) {
    Config c;
    if (path.empty()) return c;
    try {
        const auto j = nlohmann::json::parse(read_text_file(path));
        reject_unknown(j, {"limits", "server"}, "");
        if (j.contains("limits")) {
            const auto& l = j["limits"];
            reject_unknown(l, {"max_width", "max_height", "max_bytes"}, "limits.");
            c.limits.max_width = l.value("max_width", c.limits.max_width);
            c.limits.max_height = l.value("max_height", c.limits.max_height);
            c.limits.max_bytes = l.value("max_bytes", c.limits.max_bytes);
        }
        if (j.contains("server")) {
            const auto& s = j["server"];
            reject_unknown(s, {"bind", "cache_seconds", "max_concurrent_renders", "worker_threads"}, "server.");
            if (s.contains("bind")) c.bind = s["bind"].get<std::string>();
            c.cache_seconds = s.value("cache_seconds", c.cache_seconds);
            c.max_concurrent_renders = s.value("max_concurrent_renders", c.max_concurrent_renders);
            c.worker_threads = s.value("worker_threads", c.worker_threads);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError("config " + path + ": " + e.what());
    }
    c.limits.check();
    return c;
}

Dimensions parse_size(const std::string& s) {
    const auto x = s.find('x');
    try {
        std::size_t used_w = 0, used_h = 0;
        if (x == std::string::npos) throw std::invalid_argument("no x");
        const long long w = std::stoll(s.substr(0, x), &used_w);
        const long long h = std::stoll(s.substr(x + 1), &used_h);
        if (used_w != x || used_h != s.size() - x - 1 || w < 1 || h < 1 || w > 16384 || h > 16384) {
            throw std::invalid_argument("range");
        }
        return {w, h};
    } catch (const std::logic_error&) {
        throw ParameterError("size must look like WxH with both sides in [1, 16384], got \"" + s + "\"");
    }
}

// Accepts plain bits per second or a k/M/G suffix ("8M").
double parse_bandwidth(const std::string& s) {
    if (s.empty()) throw ParameterError("bandwidth must not be empty");
    double scale = 1;
    std::string digits = s;
    switch (s.back()) {
    case 'k': case 'K': scale = 1e3; digits.pop_back(); break;
    case 'm': case 'M': scale = 1e6; digits.pop_back(); break;
    case 'g': case 'G': scale = 1e9; digits.pop_back(); break;
    default: break;
    }
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(digits, &used);
    } catch (const std::logic_error&) {
        used = 0;
    }
    if (used == 0 || used != digits.size() || !(v > 0) || !std::isfinite(v)) {
        throw ParameterError("bandwidth must be a positive number of bits per second, got \"" + s + "\"");
    }
    return v * scale;
}

void print_report(std::ostream& out, const ValidationReport& report, bool json) {
    if (json) {
        out << to_json(report).dump(2) << "\n";
        return;
    }
    for (const auto& f : report.findings) out << format_finding(f) << "\n";
}

int cmd_validate(std::ostream& out, std::ostream& err, const Config& cfg, const std::string& manifest,
                 const std::string& media, bool force, bool json) {
    std::vector<std::string> warnings;
    const auto report = validate_sources(manifest, media, {cfg.limits, force}, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    print_report(out, report, json);
    return report.ok ? kOk : kFindings;
}

int cmd_compile(std::ostream& out, std::ostream&, const Config& cfg, const std::string& manifest,
                const std::string& media, const std::string& out_dir, CompileOptions opts, bool json) {
    opts.limits = cfg.limits;
    ValidationReport report;
    try {
        const TourBundle b = compile(manifest, media, out_dir, opts, &report);
        const ByteInventory inv = inventory(b);
        if (json) {
            nlohmann::ordered_json j;
            j["bundle"] = fs::absolute(b.root).string();
            j["content_digest"] = b.content_digest;
            j["created_at"] = b.created_at;
            j["findings"] = to_json(report)["findings"];
            j["inventory"] = to_json(inv);
            out << j.dump(2) << "\n";
        } else {
            print_report(out, report, false);
            out << "compiled " << b.tour.scenes.size() << " scene(s) into " << b.root.string() << "\n"
                << "content digest " << b.content_digest << "\n"
                << "total " << inv.total << " bytes\n";
        }
        return kOk;
    } catch (const CompileFailed& e) {
        print_report(out, e.report(), json);
        return kFindings;
    }
}

int cmd_render(std::ostream& out, const std::string& pano, double yaw, double pitch, double fov,
               const std::string& size, const std::string& out_png, bool little_planet, double zoom) {
    const Dimensions dims = parse_size(size);
    const EquirectImage img{decode_raster(read_file(pano)), std::nullopt};
    Raster r;
    if (little_planet) {
        LittlePlanetOptions o;
        o.zoom = zoom;
        r = render_little_planet(img, dims, o);
    } else {
        r = render_perspective(img, {deg_to_rad(yaw), deg_to_rad(pitch), deg_to_rad(fov), dims});
    }
    write_file(out_png, codec::encode_png(r));
    out << "wrote " << out_png << " (" << dims.width << "x" << dims.height << ")\n";
    return kOk;
}

int cmd_serve(std::ostream& out, const Config& cfg, const std::string& bundle, std::string bind,
              int cache_seconds, unsigned renders, unsigned workers) {
    if (bind.empty()) {
        if (const char* env = std::getenv("VTOUR_BIND"); env && *env) bind = env;
    }
    if (bind.empty()) bind = cfg.bind.value_or("127.0.0.1:8080");
    const BindAddress addr = parse_bind_address(bind);

    // Block the shutdown signals before any server thread exists, then wait for one.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    sigset_t previous;
    pthread_sigmask(SIG_BLOCK, &signals, &previous);
    struct Restore {
        sigset_t mask;
        ~Restore() { pthread_sigmask(SIG_SETMASK, &mask, nullptr); }
    } restore{previous};

    TourServer server(ServerConfig{.host = addr.host,
                                   .port = addr.port,
                                   .bundle_path = bundle,
                                   .cache_seconds = cache_seconds,
                                   .max_concurrent_renders = renders,
                                   .worker_threads = workers});
    server.start();
    out << "serving " << bundle << " on http://" << addr.host << ":" << server.port() << "/ (Ctrl-C to stop)"
        << std::endl;
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
    out << "stopped" << std::endl;
    return kOk;
}

int cmd_profile(std::ostream& out, const std::string& bundle, const std::string& bandwidth, double rtt,
                unsigned connections, double script_rate, double image_rate, const std::string& format) {
    const ReportFormat fmt = parse_report_format(format);
    const NetworkModel net{parse_bandwidth(bandwidth), rtt, connections};
    const TourBundle b = open_bundle(bundle);
    out << render_report(simulate_load(inventory(b), net, {script_rate, image_rate}, LoadPolicy::for_tour(b.tour)), fmt);
    return kOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"vtour: 360-degree virtual tour engine"};
    app.name("vtour");
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with media limits and server defaults")->check(CLI::ExistingFile);

    std::string manifest, media, out_dir, format = "text", pano, out_png, bundle, bind, bandwidth = "8M", viewer;
    bool force = false, cubemaps = false, little_planet = false;
    double yaw = 0, pitch = 0, fov = 90, zoom = 0.5, rtt = 50, script_rate = 2e6, image_rate = 20e6;
    std::string size = "1024x768";
    std::int64_t face_size = 0;
    int cache_seconds = -1;
    unsigned renders = 0, workers = 0, connections = 6, sample_width = 1024;

    auto* validate = app.add_subcommand("validate", "Check a manifest and its media; prints findings");
    validate->add_option("manifest", manifest, "Tour manifest (JSON)")->required()->check(CLI::ExistingFile);
    validate->add_option("--media", media, "Media directory")->required()->check(CLI::ExistingDirectory);
    validate->add_flag("--force", force, "Report missing XMP projection tags as warnings");
    validate->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

    auto* comp = app.add_subcommand("compile", "Validate and build a servable bundle");
    comp->add_option("manifest", manifest, "Tour manifest (JSON)")->required()->check(CLI::ExistingFile);
    comp->add_option("--media", media, "Media directory")->required()->check(CLI::ExistingDirectory);
    comp->add_option("--out", out_dir, "Bundle output directory")->required();
    comp->add_flag("--cubemaps", cubemaps, "Also write six cube faces per scene");
    comp->add_option("--face-size", face_size, "Cube face edge in pixels (default: panorama width / 4)")
        ->check(CLI::Range(1, 4096));
    comp->add_flag("--force", force, "Downgrade missing XMP projection tags to warnings");
    comp->add_option("--viewer", viewer, "Client asset directory to ship instead of the built-in viewer")
        ->check(CLI::ExistingDirectory);
    comp->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

    auto* render = app.add_subcommand("render", "Render a perspective view or little planet to PNG");
    render->add_option("pano", pano, "Equirectangular panorama (JPEG or PNG)")->required()->check(CLI::ExistingFile);
    render->add_option("--yaw", yaw, "View yaw in degrees");
    render->add_option("--pitch", pitch, "View pitch in degrees")->check(CLI::Range(-90.0, 90.0));
    render->add_option("--fov", fov, "Horizontal field of view in degrees, inside (0, 180)");
    render->add_option("--size", size, "Output size WxH");
    render->add_option("--out", out_png, "Output PNG")->required();
    render->add_flag("--little-planet", little_planet, "Stereographic little-planet projection instead");
    render->add_option("--zoom", zoom, "Little-planet horizon radius as a fraction of the half extent");

    auto* serve = app.add_subcommand("serve", "Serve a bundle over HTTP until interrupted");
    serve->add_option("bundle", bundle, "Bundle directory")->required();
    serve->add_option("--bind", bind, "Address to listen on, host:port (env VTOUR_BIND)");
    serve->add_option("--cache-seconds", cache_seconds, "Cache-Control max-age for static responses")
        ->check(CLI::Range(0, 31536000));
    serve->add_option("--max-renders", renders, "Concurrent /view renders")->check(CLI::Range(1, 1024));
    serve->add_option("--threads", workers, "HTTP worker threads")->check(CLI::Range(1, 1024));

    auto* profile = app.add_subcommand("profile", "Simulate page load over a bundle's byte inventory");
    profile->add_option("bundle", bundle, "Bundle directory")->required();
    profile->add_option("--bandwidth", bandwidth, "Link bandwidth in bit/s, k/M/G suffixes allowed");
    profile->add_option("--rtt", rtt, "Round trip in milliseconds")->check(CLI::PositiveNumber);
    profile->add_option("--connections", connections, "Parallel connections")->check(CLI::Range(1, 1024));
    profile->add_option("--script-rate", script_rate, "Document/script/style processing, bytes/s")
        ->check(CLI::PositiveNumber);
    profile->add_option("--image-rate", image_rate, "Image decode rate, bytes/s")->check(CLI::PositiveNumber);
    profile->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

    auto* sample = app.add_subcommand("sample", "Write the three-scene workshop sample (manifest + media)");
    sample->add_option("dir", out_dir, "Destination directory")->required();
    sample->add_option("--width", sample_width, "Panorama width in pixels (height is half)")
        ->check(CLI::Range(64u, 8192u));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        const Config cfg = load_config(config_path);
        const bool json = format == "json";
        if (*validate) return cmd_validate(out, err, cfg, manifest, media, force, json);
        if (*comp) {
            CompileOptions opts;
            opts.cubemaps = cubemaps;
            opts.cube_face_size = face_size;
            opts.force = force;
            if (!viewer.empty()) opts.viewer_dir = viewer;
            return cmd_compile(out, err, cfg, manifest, media, out_dir, opts, json);
        }
        if (*render) return cmd_render(out, pano, yaw, pitch, fov, size, out_png, little_planet, zoom);
        if (*serve) {
            return cmd_serve(out, cfg, bundle, bind, cache_seconds >= 0 ? cache_seconds : cfg.cache_seconds,
                             renders ? renders : cfg.max_concurrent_renders, workers ? workers : cfg.worker_threads);
        }
        if (*profile) return cmd_profile(out, bundle, bandwidth, rtt, connections, script_rate, image_rate, format);
        if (*sample) {
            sample::write_workshop(out_dir, {.panorama_width = sample_width});
            out << "wrote sample tour to " << out_dir << "\n";
            return kOk;
        }
    } catch (const ManifestError& e) {
        err << "error: " << e.what() << "\n";
        return kFindings;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}

} // namespace vtour::cli
