#include "faceqa/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "faceqa/error.hpp"

namespace faceqa::embedding {

namespace {

bool is_token_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

unsigned char ascii_lower(unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<unsigned char>(c - 'A' + 'a') : c;
}

}  // namespace

bool EmbeddingVector::is_zero() const noexcept {
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

double EmbeddingVector::norm() const noexcept {
    double ss = 0.0;
    for (double v : values) ss += v * v;
    return std::sqrt(ss);
}

EmbeddingVector zero_vector(std::size_t dims) { return {std::vector<double>(dims, 0.0)}; }

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_token_byte(c)) {
            current.push_back(static_cast<char>(ascii_lower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

EmbeddingVector embed_text(std::string_view text) {
    EmbeddingVector v = zero_vector();
    for (const auto& token : tokenize(text)) {
        const std::uint64_t h = fnv1a64(token);
        v.values[h % kDims] += (h >> 63) == 0 ? 1.0 : -1.0;
    }
    const double n = v.norm();
    if (n == 0.0) return v;   // no tokens, or every bucket cancelled out
    for (double& x : v.values) x /= n;
    return v;
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dims() != b.dims()) {
        throw Error(ErrorCode::DimensionMismatch, "embedding dimensions differ");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
    return s;
}

double cosine_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
    const double d = dot(a, b);
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        throw Error(ErrorCode::ZeroVector, "cosine distance is undefined for the zero vector");
    }
    return std::clamp(1.0 - d / (na * nb), 0.0, 2.0);
}

double text_distance(std::string_view a, std::string_view b) {
    return cosine_distance(embed_text(a), embed_text(b));
}

}  // namespace faceqa::embedding
