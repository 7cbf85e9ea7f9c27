/// @file embedding.hpp
/// @brief Deterministic feature-hashing text embedder and cosine distance.
///
/// Tokenization and hashing are a bit-exact contract:
///   1. ASCII letters are lowercased; every other byte is kept as is.
///   2. Tokens are maximal runs of ASCII alphanumerics and non-ASCII bytes
///      (so UTF-8 words stay whole); everything else separates tokens.
///   3. h = FNV-1a 64 over the token bytes; bucket = h mod 256;
///      sign = +1 if bit 63 of h is clear, else -1.
///   4. Signs are summed per bucket and the vector is L2-normalised.
/// Text without tokens embeds to the zero vector.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace faceqa::embedding {

inline constexpr std::size_t kDims = 256;

struct EmbeddingVector {
    std::vector<double> values;   // kDims entries for embedder output

    std::size_t dims() const noexcept { return values.size(); }
    bool is_zero() const noexcept;
    double norm() const noexcept;

    bool operator==(const EmbeddingVector&) const = default;
};

EmbeddingVector zero_vector(std::size_t dims = kDims);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

std::vector<std::string> tokenize(std::string_view text);

EmbeddingVector embed_text(std::string_view text);

double dot(const EmbeddingVector& a, const EmbeddingVector& b);

/// 1 - a.b / (|a||b|), clamped to [0, 2]. Throws Error(ZeroVector) if either
/// side is zero and Error(DimensionMismatch) if the sizes differ.
double cosine_distance(const EmbeddingVector& a, const EmbeddingVector& b);

/// Convenience: cosine distance between the embeddings of two strings.
double text_distance(std::string_view a, std::string_view b);

}  // namespace faceqa::embedding
