/// @file synthetic.hpp
/// @brief Seeded generator of face-like test images for demos and evaluation runs.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "faceqa/image.hpp"

namespace faceqa::synthetic {

/// Portable bounded draw from a fully specified engine. Standard
/// distributions are implementation-defined, so datasets built on them
/// would not be byte-identical across toolchains.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);
double uniform_unit(std::mt19937_64& rng);

struct SyntheticFace {
    image::LumaImage image;
    image::FaceAnnotation annotation;
};

/// Background, elliptical face with a lighting gradient, texture noise and
/// an occasional blown-out or crushed patch. All parameters derive from seed.
SyntheticFace make_face(std::uint64_t seed, int width = 96, int height = 120);

/// Writes `count` images as "face_NNN.png" plus ".facebox" sidecars.
/// Returns the written image paths.
std::vector<std::string> write_face_set(const std::string& dir, int count, std::uint64_t seed);

}  // namespace faceqa::synthetic
