#include "faceqa/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "faceqa/error.hpp"

namespace faceqa::image {

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool has_png_signature(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0;
}

bool has_ppm_signature(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6';
}

LumaImage decode_png(std::span<const std::uint8_t> bytes) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
        std::string msg = png.message;
        png_image_free(&png);
        throw Error(ErrorCode::CorruptImage, "png header: " + msg);
    }
    if (png.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&png);
        throw Error(ErrorCode::UnsupportedFormat, "16-bit PNG is not supported");
    }
    if (static_cast<std::uint64_t>(png.width) * png.height > kMaxPixels) {
        png_image_free(&png);
        throw Error(ErrorCode::UnsupportedFormat, "image exceeds the pixel limit");
    }
    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    const bool alpha = (png.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    if (color) {
        png.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
    } else {
        png.format = alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY;
    }
    const int channels = PNG_IMAGE_SAMPLE_CHANNELS(png.format);
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw Error(ErrorCode::CorruptImage, "png data: " + msg);
    }
    const int w = static_cast<int>(png.width);
    const int h = static_cast<int>(png.height);
    std::vector<std::uint8_t> luma(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < luma.size(); ++i) {
        const std::uint8_t* px = buffer.data() + i * channels;
        luma[i] = color ? rgb_to_luma(px[0], px[1], px[2]) : px[0];
    }
    return LumaImage(w, h, std::move(luma));
}

// Reads one whitespace-delimited header token, skipping '#' comments.
bool next_ppm_token(std::span<const std::uint8_t> bytes, std::size_t& pos, std::string& out) {
    out.clear();
    while (pos < bytes.size()) {
        const char c = static_cast<char>(bytes[pos]);
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
        out.push_back(static_cast<char>(bytes[pos++]));
    }
    return !out.empty();
}

int parse_ppm_int(const std::string& token) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || value <= 0) {
        throw Error(ErrorCode::CorruptImage, "ppm header: bad integer '" + token + "'");
    }
    return value;
}

LumaImage decode_ppm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 2;
    std::string tok;
    int fields[3];
    for (int& f : fields) {
        if (!next_ppm_token(bytes, pos, tok)) {
            throw Error(ErrorCode::CorruptImage, "ppm header truncated");
        }
        f = parse_ppm_int(tok);
    }
    const auto [w, h, maxval] = fields;
    if (maxval > 255) {
        throw Error(ErrorCode::UnsupportedFormat, "16-bit PPM is not supported");
    }
    if (static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(h) > kMaxPixels) {
        throw Error(ErrorCode::UnsupportedFormat, "image exceeds the pixel limit");
    }
    // Exactly one whitespace byte separates the header from the raster.
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
        throw Error(ErrorCode::CorruptImage, "ppm header truncated");
    }
    ++pos;
    const std::size_t count = static_cast<std::size_t>(w) * h;
    if (bytes.size() - pos < count * 3) {
        throw Error(ErrorCode::CorruptImage, "ppm raster truncated");
    }
    std::vector<std::uint8_t> luma(count);
    const std::uint8_t* px = bytes.data() + pos;
    for (std::size_t i = 0; i < count; ++i, px += 3) {
        std::uint8_t rgb[3];
        for (int c = 0; c < 3; ++c) {
            if (px[c] > maxval) {
                throw Error(ErrorCode::CorruptImage, "ppm sample exceeds maxval");
            }
            rgb[c] = maxval == 255 ? px[c]
                                   : static_cast<std::uint8_t>((px[c] * 255 + maxval / 2) / maxval);
        }
        luma[i] = rgb_to_luma(rgb[0], rgb[1], rgb[2]);
    }
    return LumaImage(w, h, std::move(luma));
}

std::vector<std::uint8_t> write_png(png_image& png, const void* pixels) {
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&png, nullptr, &size, 0, pixels, 0, nullptr)) {
        throw Error(ErrorCode::CorruptImage, std::string("png encode: ") + png.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&png, out.data(), &size, 0, pixels, 0, nullptr)) {
        throw Error(ErrorCode::CorruptImage, std::string("png encode: ") + png.message);
    }
    out.resize(size);
    return out;
}

}  // namespace

LumaImage::LumaImage(int width, int height, std::vector<std::uint8_t> luma)
    : width_(width), height_(height), luma_(std::move(luma)) {
    if (width < 1 || height < 1 ||
        luma_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(ErrorCode::CorruptImage, "luma buffer does not match image dimensions");
    }
}

LumaImage::LumaImage(int width, int height, std::uint8_t fill)
    : LumaImage(width, height,
                std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                              static_cast<std::size_t>(std::max(height, 0)),
                                          fill)) {}

void FaceAnnotation::validate(const LumaImage& img) const {
    const Rect& r = face_region;
    if (r.width < kMinFaceSide || r.height < kMinFaceSide) {
        throw Error(ErrorCode::InvalidAnnotation, "face region smaller than 8x8");
    }
    if (r.left < 0 || r.top < 0 || r.right() > img.width() || r.bottom() > img.height()) {
        throw Error(ErrorCode::InvalidAnnotation, "face region exceeds image bounds");
    }
}

FaceAnnotation default_annotation(int width, int height) {
    const int w = width / 2;
    const int h = height * 5 / 8;
    return FaceAnnotation{Rect{(width - w) / 2, (height - h) / 2, w, h}};
}

std::uint8_t rgb_to_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    // Exact: numerator is 1000x the real-valued luma; +500 rounds half up.
    return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

LumaImage decode_image(std::span<const std::uint8_t> bytes) {
    if (has_png_signature(bytes)) return decode_png(bytes);
    if (has_ppm_signature(bytes)) return decode_ppm(bytes);
    throw Error(ErrorCode::UnsupportedFormat, "expected PNG or binary PPM (P6)");
}

std::vector<std::uint8_t> encode_png(const LumaImage& img) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width());
    png.height = static_cast<png_uint_32>(img.height());
    png.format = PNG_FORMAT_GRAY;
    return write_png(png, img.pixels().data());
}

std::vector<std::uint8_t> encode_png_rgb(int width, int height, std::span<const std::uint8_t> rgb) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
        throw Error(ErrorCode::CorruptImage, "rgb buffer does not match image dimensions");
    }
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(width);
    png.height = static_cast<png_uint_32>(height);
    png.format = PNG_FORMAT_RGB;
    return write_png(png, rgb.data());
}

std::vector<std::uint8_t> encode_ppm(int width, int height, std::span<const std::uint8_t> rgb) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
        throw Error(ErrorCode::CorruptImage, "rgb buffer does not match image dimensions");
    }
    const std::string header =
        "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), rgb.begin(), rgb.end());
    return out;
}

FaceAnnotation parse_facebox(std::string_view text) {
    // Strict form: four non-negative integers separated by single spaces,
    // newline-terminated. A missing final newline is tolerated.
    if (!text.empty() && text.back() == '\n') text.remove_suffix(1);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    int values[4];
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
        if (i > 0) {
            if (pos >= text.size() || text[pos] != ' ') {
                throw Error(ErrorCode::InvalidAnnotation, "facebox: expected 'left top width height'");
            }
            ++pos;
        }
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), values[i]);
        if (ec != std::errc{} || values[i] < 0) {
            throw Error(ErrorCode::InvalidAnnotation, "facebox: bad integer");
        }
        pos = static_cast<std::size_t>(ptr - text.data());
    }
    if (pos != text.size()) {
        throw Error(ErrorCode::InvalidAnnotation, "facebox: trailing characters");
    }
    return FaceAnnotation{Rect{values[0], values[1], values[2], values[3]}};
}

std::string format_facebox(const FaceAnnotation& ann) {
    const Rect& r = ann.face_region;
    std::ostringstream os;
    os << r.left << ' ' << r.top << ' ' << r.width << ' ' << r.height << '\n';
    return os.str();
}

std::string facebox_path_for(const std::string& image_path) {
    std::filesystem::path p(image_path);
    p.replace_extension(".facebox");
    return p.string();
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

LoadedImage load_image_with_annotation(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    LoadedImage out;
    out.image = decode_image(bytes);
    const std::string sidecar = facebox_path_for(path);
    if (std::filesystem::exists(sidecar)) {
        const auto text = read_file_bytes(sidecar);
        out.annotation = parse_facebox(std::string_view(reinterpret_cast<const char*>(text.data()), text.size()));
    } else {
        out.annotation = default_annotation(out.image.width(), out.image.height());
        out.default_region = true;
    }
    out.annotation.validate(out.image);
    return out;
}

}  // namespace faceqa::image
