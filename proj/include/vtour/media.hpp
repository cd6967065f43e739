#pragma once

// Panorama intake: decode, XMP projection tag, and the panorama rules
// (2:1 aspect, ProjectionType=equirectangular, resolution and size limits).

#include "vtour/codec.hpp"
#include "vtour/findings.hpp"
#include "vtour/image.hpp"

#include <zlib.h>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vtour {

struct MediaLimits {
    std::int64_t max_width = 8192;
    std::int64_t max_height = 4096;
    std::uint64_t max_bytes = 32ull * 1024 * 1024;

    void check() const {
        if (max_width <= 0 || max_height <= 0 || max_bytes == 0) {
            throw ParameterError("media limits must be positive");
        }
    }
};

inline constexpr std::string_view kEquirectangular = "equirectangular";

namespace xmp {

inline constexpr std::string_view kPacketBegin = "<?xpacket begin";
inline constexpr std::string_view kPacketEnd = "<?xpacket end";
inline constexpr std::string_view kPngKeyword = "XML:com.adobe.xmp";
inline constexpr std::string_view kJpegNamespace{"http://ns.adobe.com/xap/1.0/\0", 29};
inline constexpr std::string_view kJpegExtendedNamespace{"http://ns.adobe.com/xmp/extension/\0", 35};

struct Scan {
    std::optional<std::string> projection_type;
    std::optional<std::string> note; ///< warning-level parse note, e.g. unterminated packet
    std::size_t packets = 0;
};

inline std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '&') {
            static constexpr std::pair<std::string_view, char> table[] = {
                {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
            bool matched = false;
            for (const auto& [entity, ch] : table) {
                if (s.substr(i, entity.size()) == entity) {
                    out += ch;
                    i += entity.size() - 1;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
        }
        out += s[i];
    }
    return out;
}

inline std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

// First ProjectionType value inside one packet, attribute or element form.
inline std::optional<std::string> find_projection_type(std::string_view packet) {
    constexpr std::string_view name = "ProjectionType";
    for (std::size_t pos = packet.find(name); pos != std::string_view::npos;
         pos = packet.find(name, pos + 1)) {
        if (pos == 0) continue;
        const char before = packet[pos - 1];
        if (before != ':' && before != '<' && !is_space(before)) continue;
        std::size_t p = pos + name.size();
        while (p < packet.size() && is_space(packet[p])) ++p;
        if (p >= packet.size()) break;

        if (packet[p] == '=') {
            ++p;
            while (p < packet.size() && is_space(packet[p])) ++p;
            if (p >= packet.size() || (packet[p] != '"' && packet[p] != '\'')) continue;
            const char quote = packet[p];
            const auto close = packet.find(quote, p + 1);
            if (close == std::string_view::npos) continue;
            return decode_entities(packet.substr(p + 1, close - p - 1));
        }
        if (packet[p] == '>') {
            // Opening tag only: walk back to '<' and reject "</...".
            const auto lt = packet.rfind('<', pos);
            if (lt == std::string_view::npos || (lt + 1 < packet.size() && packet[lt + 1] == '/')) continue;
            const auto end = packet.find('<', p + 1);
            if (end == std::string_view::npos) continue;
            return decode_entities(trim(packet.substr(p + 1, end - p - 1)));
        }
    }
    return std::nullopt;
}

inline Scan scan(ByteView bytes) {
    Scan result;
    const std::string_view text = as_chars(bytes);
    std::size_t pos = 0;
    while ((pos = text.find(kPacketBegin, pos)) != std::string_view::npos) {
        const auto end = text.find(kPacketEnd, pos + kPacketBegin.size());
        if (end == std::string_view::npos) {
            if (!result.note) result.note = "XMP packet at byte offset " + std::to_string(pos) + " has no end marker";
            break;
        }
        ++result.packets;
        if (!result.projection_type) {
            result.projection_type = find_projection_type(text.substr(pos, end - pos));
        }
        pos = end + kPacketEnd.size();
    }
    return result;
}

inline std::string make_packet(std::string_view projection_type) {
    std::string p;
    p += "<?xpacket begin=\"\xEF\xBB\xBF\" id=\"W5M0MpCehiHzreSzNTczkc9d\"?>\n";
    p += "<x:xmpmeta xmlns:x=\"adobe:ns:meta/\">\n";
    p += " <rdf:RDF xmlns:rdf=\"http://www.w3.org/1999/02/22-rdf-syntax-ns#\">\n";
    p += "  <rdf:Description rdf:about=\"\"\n";
    p += "    xmlns:GPano=\"http://ns.google.com/photos/1.0/panorama/\"\n";
    p += "    GPano:ProjectionType=\"" + escape(projection_type) + "\"/>\n";
    p += " </rdf:RDF>\n";
    p += "</x:xmpmeta>\n";
    p += "<?xpacket end=\"w\"?>";
    return p;
}

inline bool starts_with(ByteView b, std::size_t offset, std::string_view prefix) {
    return offset + prefix.size() <= b.size() && as_chars(b.subspan(offset, prefix.size())) == prefix;
}

inline Bytes inject_png(ByteView in, std::string_view packet) {
    const auto chunks = codec::walk_png(in);
    Bytes chunk_data;
    chunk_data.insert(chunk_data.end(), kPngKeyword.begin(), kPngKeyword.end());
    // keyword NUL, compression flag, compression method, empty language, empty translated keyword
    for (int i = 0; i < 5; ++i) chunk_data.push_back(0);
    chunk_data.insert(chunk_data.end(), packet.begin(), packet.end());

    Bytes out(in.begin(), in.begin() + 8);
    for (const auto& c : chunks) {
        const bool is_xmp = c.type == "iTXt" && starts_with(in, c.data_offset(), kPngKeyword) &&
                            c.length > kPngKeyword.size() && in[c.data_offset() + kPngKeyword.size()] == 0;
        if (is_xmp) continue;
        out.insert(out.end(), in.begin() + c.offset, in.begin() + c.end());
        if (c.type == "IHDR") {
            codec::put_be32(out, static_cast<std::uint32_t>(chunk_data.size()));
            const std::size_t type_at = out.size();
            out.insert(out.end(), {'i', 'T', 'X', 't'});
            out.insert(out.end(), chunk_data.begin(), chunk_data.end());
            const auto crc = crc32(0L, out.data() + type_at, static_cast<uInt>(out.size() - type_at));
            codec::put_be32(out, static_cast<std::uint32_t>(crc));
        }
    }
    const std::size_t tail = chunks.back().end();
    out.insert(out.end(), in.begin() + tail, in.end());
    return out;
}

inline Bytes inject_jpeg(ByteView in, std::string_view packet) {
    const auto segs = codec::walk_jpeg(in);
    const std::size_t payload = kJpegNamespace.size() + packet.size();
    if (payload + 2 > 0xFFFF) throw ParameterError("XMP packet too large for a JPEG APP1 segment");

    Bytes app1{0xFF, 0xE1, static_cast<std::uint8_t>((payload + 2) >> 8),
               static_cast<std::uint8_t>((payload + 2) & 0xFF)};
    app1.insert(app1.end(), kJpegNamespace.begin(), kJpegNamespace.end());
    app1.insert(app1.end(), packet.begin(), packet.end());

    Bytes out;
    bool inserted = false;
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const auto& s = segs[k];
        const std::size_t body = s.offset + 4;
        const bool is_xmp = s.marker == 0xE1 &&
                            (starts_with(in, body, kJpegNamespace) || starts_with(in, body, kJpegExtendedNamespace));
        if (is_xmp) continue;
        // Keep SOI and a leading JFIF/EXIF APPn run in front of the new segment.
        if (!inserted && s.marker != 0xD8 && !(k == 1 && (s.marker == 0xE0 || s.marker == 0xE1))) {
            out.insert(out.end(), app1.begin(), app1.end());
            inserted = true;
        }
        out.insert(out.end(), in.begin() + s.offset, in.begin() + s.end());
    }
    out.insert(out.end(), in.begin() + segs.back().end(), in.end());
    return out;
}

} // namespace xmp

/// ProjectionType from the first XMP packet, or nullopt when there is no
/// packet, no such property, or the packet is unterminated.
inline std::optional<std::string> read_xmp_projection(ByteView bytes) {
    return xmp::scan(bytes).projection_type;
}

/// Returns a copy of the image stream carrying exactly one XMP packet with the
/// given ProjectionType. Existing XMP segments are replaced; pixel data is copied
/// through untouched.
inline Bytes inject_xmp_projection(ByteView bytes, std::string_view value) {
    ImageFormat format;
    decode_raster(bytes, &format);
    const std::string packet = xmp::make_packet(value);
    return format == ImageFormat::png ? xmp::inject_png(bytes, packet) : xmp::inject_jpeg(bytes, packet);
}

struct DecodedPanorama {
    EquirectImage image;
    ProjectionMetadata metadata;
    std::vector<std::string> notes;
};

inline DecodedPanorama decode_image(ByteView bytes) {
    ImageFormat format;
    Raster raster = decode_raster(bytes, &format);
    const xmp::Scan tag = xmp::scan(bytes);

    DecodedPanorama out;
    out.metadata.projection_type = tag.projection_type;
    out.metadata.byte_size = bytes.size();
    out.metadata.dims = raster.dims();
    out.metadata.format = format;
    if (tag.note) out.notes.push_back(*tag.note);
    out.image.raster = std::move(raster);
    out.image.metadata = out.metadata;
    return out;
}

inline ValidationReport validate_panorama(const ProjectionMetadata& meta, const MediaLimits& limits = {}) {
    std::vector<Finding> findings;
    const auto w = meta.dims.width;
    const auto h = meta.dims.height;
    const auto dims = std::to_string(w) + "x" + std::to_string(h);
    if (w != 2 * h) {
        findings.push_back({std::string(codes::aspect), Severity::error, "",
                            "panorama " + dims + " is not 2:1 (width must equal twice the height)"});
    }
    if (meta.projection_type != kEquirectangular) {
        findings.push_back({std::string(codes::xmp), Severity::error, "",
                            meta.projection_type
                                ? "XMP ProjectionType is \"" + *meta.projection_type + "\", expected \"equirectangular\""
                                : "XMP ProjectionType tag is missing"});
    }
    if (w > limits.max_width || h > limits.max_height) {
        findings.push_back({std::string(codes::resolution), Severity::error, "",
                            "panorama " + dims + " exceeds the maximum " + std::to_string(limits.max_width) + "x" +
                                std::to_string(limits.max_height)});
    }
    if (meta.byte_size > limits.max_bytes) {
        findings.push_back({std::string(codes::filesize), Severity::error, "",
                            "file is " + std::to_string(meta.byte_size) + " bytes, maximum is " +
                                std::to_string(limits.max_bytes)});
    }
    return ValidationReport::from(std::move(findings));
}

} // namespace vtour
