/// @file vector_index.hpp
/// @brief Exact in-memory similarity index over chunk embeddings.

#pragma once

#include <iosfwd>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "faceqa/corpus.hpp"
#include "faceqa/embedding.hpp"

namespace faceqa::index {

struct ScoredChunk {
    corpus::Chunk chunk;
    double similarity = 0.0;   // 1 - cosine distance to the query
};

struct IndexEntry {
    corpus::Chunk chunk;
    embedding::EmbeddingVector vector;
};

/// Exhaustive cosine search. Concurrent searches are allowed; an upsert
/// batch is applied atomically with respect to readers.
class VectorIndex {
public:
    explicit VectorIndex(std::size_t dims = embedding::kDims) : dims_(dims) {}

    VectorIndex(const VectorIndex&) = delete;
    VectorIndex& operator=(const VectorIndex&) = delete;

    /// Inserts or replaces entries by chunk_id; returns the number of entries
    /// processed. Zero vectors are stored but never returned by search.
    /// Throws Error(DimensionMismatch); on error nothing is applied.
    std::size_t upsert(std::vector<IndexEntry> entries);

    /// At most k results by similarity descending, ties by chunk_id
    /// ascending. An empty index yields an empty list.
    /// Throws Error(ZeroVector), Error(DimensionMismatch), or
    /// Error(ValidationError) when k < 1.
    std::vector<ScoredChunk> search(const embedding::EmbeddingVector& query, int k) const;

    std::size_t size() const;
    std::size_t dims() const noexcept { return dims_; }
    /// Copy of every entry in insertion order.
    std::vector<IndexEntry> entries() const;

    /// Snapshot format: a header line "FQAIDX 1 <dims> <count>", then one
    /// newline-terminated record per entry holding eight space-separated
    /// fields, each written as "<byte length>:<bytes>":
    ///   chunk_id doc_id char_start char_end page paragraph vector text
    /// Integers are decimal; vector is base64 of little-endian float32
    /// components. Loaded non-zero vectors are re-normalised.
    void save(std::ostream& out) const;
    void save(const std::string& path) const;
    /// Replaces the index contents. Throws Error(ParseError).
    void load(std::istream& in);
    void load(const std::string& path);

private:
    struct Stored {
        IndexEntry entry;
        double norm = 0.0;
    };

    std::size_t dims_;
    mutable std::shared_mutex mutex_;
    std::vector<Stored> stored_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Ranking order used by search: similarity descending, chunk_id ascending.
bool ranks_before(const ScoredChunk& a, const ScoredChunk& b) noexcept;

}  // namespace faceqa::index
