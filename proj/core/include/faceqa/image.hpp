/// @file image.hpp
/// @brief Luminance images, face-region annotations and image codecs.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace faceqa::image {

/// 8-bit single-channel image, row-major.
class LumaImage {
public:
    LumaImage() = default;
    /// Throws Error(CorruptImage) if luma.size() != width * height or a side is 0.
    LumaImage(int width, int height, std::vector<std::uint8_t> luma);
    /// Filled with a constant value.
    LumaImage(int width, int height, std::uint8_t fill);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return luma_.size(); }

    std::uint8_t at(int x, int y) const { return luma_[static_cast<std::size_t>(y) * width_ + x]; }
    std::uint8_t& at(int x, int y) { return luma_[static_cast<std::size_t>(y) * width_ + x]; }

    std::span<const std::uint8_t> pixels() const noexcept { return luma_; }

    bool operator==(const LumaImage&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> luma_;
};

struct Rect {
    int left = 0;
    int top = 0;
    int width = 0;
    int height = 0;

    int right() const noexcept { return left + width; }    // exclusive
    int bottom() const noexcept { return top + height; }   // exclusive
    bool contains(int x, int y) const noexcept {
        return x >= left && x < right() && y >= top && y < bottom();
    }
    bool operator==(const Rect&) const = default;
};

inline constexpr int kMinFaceSide = 8;
/// Larger images are rejected with UnsupportedFormat before allocation.
inline constexpr std::uint64_t kMaxPixels = std::uint64_t{1} << 26;

struct FaceAnnotation {
    Rect face_region;

    /// Throws Error(InvalidAnnotation) unless the rectangle lies inside the
    /// image and both sides are at least kMinFaceSide.
    void validate(const LumaImage& img) const;

    bool operator==(const FaceAnnotation&) const = default;
};

/// Centered rectangle covering the middle 50% of the width and 62.5% of the
/// height. Used when no sidecar annotation accompanies an image.
FaceAnnotation default_annotation(int width, int height);

/// Decodes 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette) or binary PPM
/// (P6) to luminance. Alpha is ignored; 16-bit PNG is rejected. Color
/// pixels become round(0.299R + 0.587G + 0.114B).
/// Throws Error(UnsupportedFormat) or Error(CorruptImage).
LumaImage decode_image(std::span<const std::uint8_t> bytes);

/// Integer-exact rounding of 0.299R + 0.587G + 0.114B.
std::uint8_t rgb_to_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

/// 8-bit grayscale PNG.
std::vector<std::uint8_t> encode_png(const LumaImage& img);
/// 8-bit RGB PNG from interleaved rgb (size = 3 * width * height).
std::vector<std::uint8_t> encode_png_rgb(int width, int height, std::span<const std::uint8_t> rgb);
/// Binary P6 PPM from interleaved rgb.
std::vector<std::uint8_t> encode_ppm(int width, int height, std::span<const std::uint8_t> rgb);

/// Parses the ".facebox" sidecar: "left top width height\n".
/// Throws Error(InvalidAnnotation) on malformed content.
FaceAnnotation parse_facebox(std::string_view text);
std::string format_facebox(const FaceAnnotation& ann);

/// Sidecar path for an image path: "dir/X.png" -> "dir/X.facebox".
std::string facebox_path_for(const std::string& image_path);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);

struct LoadedImage {
    LumaImage image;
    FaceAnnotation annotation;
    bool default_region = false;
};

/// Decodes an image file and applies its sidecar annotation when present,
/// otherwise the default centered region.
LoadedImage load_image_with_annotation(const std::string& path);

}  // namespace faceqa::image
