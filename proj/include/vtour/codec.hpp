#pragma once

// PNG and JPEG byte streams: container walking, decode and encode.
//
// Decoding is strict. A structural walk over the container runs first so a
// truncated or malformed stream is reported with the byte offset where it
// breaks, instead of whatever the codec library happens to say.

#include "vtour/error.hpp"
#include "vtour/fileio.hpp"
#include "vtour/image.hpp"

#include <png.h>
// jpeglib.h needs size_t and FILE declared first.
#include <cstdio>
#include <jpeglib.h>

#include <csetjmp>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

namespace vtour {

class DecodeError : public Error {
public:
    DecodeError(const std::string& what, std::uint64_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

namespace codec {

inline constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

inline std::optional<ImageFormat> sniff_format(ByteView bytes) noexcept {
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) return ImageFormat::png;
    if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
        return ImageFormat::jpeg;
    }
    return std::nullopt;
}

inline ImageFormat detect_format(ByteView bytes) {
    if (bytes.empty()) throw DecodeError("empty image stream", 0);
    if (auto f = sniff_format(bytes)) return *f;
    throw DecodeError("unrecognized image format (expected PNG or JPEG signature)", 0);
}

inline std::uint32_t read_be32(const std::uint8_t* p) noexcept {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

inline void put_be32(Bytes& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

struct PngChunk {
    std::size_t offset = 0; ///< start of the length field
    std::uint32_t length = 0;
    std::string type;

    std::size_t data_offset() const noexcept { return offset + 8; }
    std::size_t end() const noexcept { return offset + 12 + length; }
};

/// Walks every chunk up to and including IEND.
inline std::vector<PngChunk> walk_png(ByteView b) {
    if (b.size() < 8 || std::memcmp(b.data(), kPngSignature, 8) != 0) {
        throw DecodeError("missing PNG signature", 0);
    }
    std::vector<PngChunk> chunks;
    std::size_t pos = 8;
    while (true) {
        if (pos + 8 > b.size()) throw DecodeError("truncated PNG chunk header", pos);
        PngChunk c;
        c.offset = pos;
        c.length = read_be32(b.data() + pos);
        c.type.assign(reinterpret_cast<const char*>(b.data() + pos + 4), 4);
        if (c.length > 0x7FFFFFFFu || c.end() > b.size()) {
            throw DecodeError("truncated PNG chunk '" + c.type + "'", pos);
        }
        chunks.push_back(c);
        pos = c.end();
        if (c.type == "IEND") break;
    }
    if (chunks.front().type != "IHDR") throw DecodeError("PNG stream does not start with IHDR", 8);
    return chunks;
}

struct JpegSegment {
    std::size_t offset = 0; ///< offset of the 0xFF marker byte
    std::uint8_t marker = 0;
    std::size_t length = 0; ///< total bytes including marker and (if any) length field

    std::size_t end() const noexcept { return offset + length; }
};

inline bool jpeg_marker_has_length(std::uint8_t m) noexcept {
    return !(m == 0xD8 || m == 0xD9 || m == 0x01 || (m >= 0xD0 && m <= 0xD7));
}

/// Walks marker segments from SOI to EOI. Entropy-coded scan data is folded
/// into the SOS segment that precedes it.
inline std::vector<JpegSegment> walk_jpeg(ByteView b) {
    if (b.size() < 2 || b[0] != 0xFF || b[1] != 0xD8) throw DecodeError("missing JPEG SOI marker", 0);
    std::vector<JpegSegment> segs{{0, 0xD8, 2}};
    std::size_t pos = 2;
    while (true) {
        if (pos >= b.size()) throw DecodeError("truncated JPEG stream (no EOI marker)", pos);
        if (b[pos] != 0xFF) throw DecodeError("expected JPEG marker", pos);
        std::size_t p = pos;
        while (p < b.size() && b[p] == 0xFF) ++p; // fill bytes
        if (p >= b.size()) throw DecodeError("truncated JPEG marker", pos);
        const std::uint8_t m = b[p];
        JpegSegment s{pos, m, p + 1 - pos};
        if (jpeg_marker_has_length(m)) {
            if (p + 3 > b.size()) throw DecodeError("truncated JPEG segment length", pos);
            const std::size_t len = (std::size_t{b[p + 1]} << 8) | b[p + 2];
            if (len < 2) throw DecodeError("invalid JPEG segment length", pos);
            s.length = p + 1 + len - pos;
            if (s.end() > b.size()) throw DecodeError("truncated JPEG segment", pos);
        }
        if (m == 0xDA) {
            // Scan data runs until a marker that is neither a stuffed zero nor a restart.
            std::size_t q = s.end();
            while (true) {
                if (q + 1 >= b.size()) throw DecodeError("truncated JPEG scan data", s.end());
                if (b[q] == 0xFF && b[q + 1] != 0x00 && !(b[q + 1] >= 0xD0 && b[q + 1] <= 0xD7) &&
                    b[q + 1] != 0xFF) {
                    break;
                }
                ++q;
            }
            s.length = q - pos;
        }
        segs.push_back(s);
        pos = s.end();
        if (m == 0xD9) break;
    }
    return segs;
}

// ---- PNG ------------------------------------------------------------------

inline Raster decode_png(ByteView bytes) {
    walk_png(bytes);
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw DecodeError("PNG decode failed: " + msg, 0);
    }
    const int channels = (image.format & PNG_FORMAT_FLAG_ALPHA) ? 4 : 3;
    image.format = channels == 4 ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
    const Dimensions dims(image.width, image.height);
    if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw DecodeError("PNG decode failed: " + msg, 0);
    }
    return Raster(dims, channels, std::move(pixels));
}

inline Bytes encode_png(const Raster& raster) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(raster.width());
    image.height = static_cast<png_uint_32>(raster.height());
    image.format = raster.channels() == 4 ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, raster.pixels().data(), 0, nullptr)) {
        throw Error(std::string("PNG encode failed: ") + image.message);
    }
    Bytes out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, raster.pixels().data(), 0, nullptr)) {
        throw Error(std::string("PNG encode failed: ") + image.message);
    }
    out.resize(size);
    return out;
}

// ---- JPEG -----------------------------------------------------------------

namespace detail {

struct JpegErrorManager {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

extern "C" inline void vtour_jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

// Corrupt-data warnings abort decoding instead of producing a patched-up image.
extern "C" inline void vtour_jpeg_emit_message(j_common_ptr cinfo, int level) {
    if (level < 0) vtour_jpeg_error_exit(cinfo);
}

// No objects with destructors live in this frame; longjmp only unwinds C state.
inline bool jpeg_decode_raw(const std::uint8_t* data, std::size_t size, std::vector<std::uint8_t>& pixels,
                            unsigned& width, unsigned& height, JpegErrorManager& err) {
    jpeg_decompress_struct cinfo;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = vtour_jpeg_error_exit;
    err.pub.emit_message = vtour_jpeg_emit_message;
    err.message[0] = '\0';
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
    jpeg_read_header(&cinfo, TRUE);
    if (cinfo.jpeg_color_space == JCS_CMYK || cinfo.jpeg_color_space == JCS_YCCK) {
        std::strcpy(err.message, "CMYK JPEG is not supported");
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    width = cinfo.output_width;
    height = cinfo.output_height;
    pixels.resize(std::size_t{width} * height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = pixels.data() + std::size_t{cinfo.output_scanline} * width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

inline bool jpeg_encode_raw(const std::uint8_t* rgb, unsigned width, unsigned height, int quality,
                            unsigned char*& out, unsigned long& out_size, JpegErrorManager& err) {
    jpeg_compress_struct cinfo;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = vtour_jpeg_error_exit;
    err.message[0] = '\0';
    if (setjmp(err.jump)) {
        jpeg_destroy_compress(&cinfo);
        return false;
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &out, &out_size);
    cinfo.image_width = width;
    cinfo.image_height = height;
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = const_cast<std::uint8_t*>(rgb) + std::size_t{cinfo.next_scanline} * width * 3;
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    return true;
}

} // namespace detail

inline Raster decode_jpeg(ByteView bytes) {
    walk_jpeg(bytes);
    std::vector<std::uint8_t> pixels;
    unsigned width = 0, height = 0;
    detail::JpegErrorManager err;
    if (!detail::jpeg_decode_raw(bytes.data(), bytes.size(), pixels, width, height, err)) {
        throw DecodeError(std::string("JPEG decode failed: ") + err.message, 0);
    }
    return Raster(Dimensions(width, height), 3, std::move(pixels));
}

/// Alpha, if present, is dropped.
inline Bytes encode_jpeg(const Raster& raster, int quality = 92) {
    std::vector<std::uint8_t> rgb;
    const std::uint8_t* src = raster.pixels().data();
    if (raster.channels() == 4) {
        rgb.reserve(static_cast<std::size_t>(raster.dims().area()) * 3);
        for (std::size_t i = 0; i < raster.pixels().size(); i += 4) {
            rgb.insert(rgb.end(), src + i, src + i + 3);
        }
        src = rgb.data();
    }
    unsigned char* out = nullptr;
    unsigned long out_size = 0;
    detail::JpegErrorManager err;
    const bool ok = detail::jpeg_encode_raw(src, static_cast<unsigned>(raster.width()),
                                            static_cast<unsigned>(raster.height()), quality, out,
                                            out_size, err);
    Bytes result;
    if (ok) result.assign(out, out + out_size);
    std::free(out);
    if (!ok) throw Error(std::string("JPEG encode failed: ") + err.message);
    return result;
}

} // namespace codec

inline Raster decode_raster(ByteView bytes, ImageFormat* format_out = nullptr) {
    const ImageFormat f = codec::detect_format(bytes);
    if (format_out) *format_out = f;
    return f == ImageFormat::png ? codec::decode_png(bytes) : codec::decode_jpeg(bytes);
}

inline Bytes encode_raster(const Raster& raster, ImageFormat format) {
    return format == ImageFormat::png ? codec::encode_png(raster) : codec::encode_jpeg(raster);
}

} // namespace vtour
