#include "faceqa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "faceqa/error.hpp"

namespace faceqa::synthetic {

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) return 0;
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % bound;
}

double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

SyntheticFace make_face(std::uint64_t seed, int width, int height) {
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) {
        return lo + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
    };

    const int face_w = pick(width / 3, width * 3 / 5);
    const int face_h = pick(height / 2, height * 3 / 4);
    const int left = pick(2, width - face_w - 2);
    const int top = pick(2, height - face_h - 2);
    image::Rect face{left, top, face_w, face_h};

    const int bg_base = pick(40, 220);
    const int bg_gradient = pick(0, 90);
    const int skin = pick(70, 200);
    const int lighting = pick(-70, 70);     // left-to-right brightness swing
    const int texture = pick(0, 40);        // per-pixel noise amplitude
    const int patch_kind = pick(0, 3);      // 0: blown out, 1: crushed, 2-3: none

    image::LumaImage img(width, height, std::uint8_t{0});
    const double cx = left + face_w / 2.0;
    const double cy = top + face_h / 2.0;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double v = bg_base + bg_gradient * (static_cast<double>(y) / height - 0.5);
            const double dx = (x + 0.5 - cx) / (face_w / 2.0);
            const double dy = (y + 0.5 - cy) / (face_h / 2.0);
            if (dx * dx + dy * dy <= 1.0) {
                v = skin + lighting * dx;
                if (texture > 0) v += static_cast<double>(pick(-texture, texture));
            }
            img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    }
    if (patch_kind < 2) {
        const int pw = pick(face_w / 6, face_w / 3);
        const int ph = pick(face_h / 6, face_h / 3);
        const int px = pick(left, left + face_w - pw);
        const int py = pick(top, top + face_h - ph);
        const std::uint8_t value = patch_kind == 0 ? 252 : 3;
        for (int y = py; y < py + ph; ++y) {
            for (int x = px; x < px + pw; ++x) img.at(x, y) = value;
        }
    }
    return {std::move(img), image::FaceAnnotation{face}};
}

std::vector<std::string> write_face_set(const std::string& dir, int count, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    for (int i = 0; i < count; ++i) {
        const auto face = make_face(seed * 1000003ULL + static_cast<std::uint64_t>(i));
        char name[32];
        std::snprintf(name, sizeof name, "face_%03d.png", i);
        const std::string path = (std::filesystem::path(dir) / name).string();
        const auto png = image::encode_png(face.image);
        std::ofstream(path, std::ios::binary)
            .write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
        std::ofstream(image::facebox_path_for(path)) << image::format_facebox(face.annotation);
        paths.push_back(path);
    }
    return paths;
}

}  // namespace faceqa::synthetic
