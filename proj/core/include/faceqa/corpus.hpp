/// @file corpus.hpp
/// @brief Knowledge-source documents and provenance-tagged chunking.
///
/// All offsets (page_map, char_start, char_end, chunk sizes) count Unicode
/// code points of the UTF-8 document text, not bytes.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace faceqa::corpus {

struct PageMark {
    std::size_t offset = 0;
    int page = 1;
    bool operator==(const PageMark&) const = default;
};

struct Document {
    std::string doc_id;
    std::string title;
    std::string text;
    std::vector<PageMark> page_map;   // strictly increasing offsets, first offset 0

    /// Number of code points in text.
    std::size_t length() const;
    /// Page containing code-point offset `offset`.
    int page_at(std::size_t offset) const;
};

struct Chunk {
    std::string chunk_id;   // "<doc_id>#<k>"
    std::string doc_id;
    std::string text;
    std::size_t char_start = 0;
    std::size_t char_end = 0;
    int page = 1;
    int paragraph = 1;

    bool operator==(const Chunk&) const = default;
};

struct DocumentMetadata {
    std::string title;
    std::optional<std::vector<PageMark>> page_map;
};

struct ChunkParams {
    std::size_t max_chars = 800;
    std::size_t overlap = 160;
};

bool is_valid_utf8(std::string_view text) noexcept;

/// Byte offset of every code point boundary in `text`, plus text.size() at
/// the end (so the result has length() + 1 entries). Assumes valid UTF-8.
std::vector<std::size_t> code_point_offsets(std::string_view text);

/// Builds a Document. Throws Error(InvalidEncoding) for invalid UTF-8 and
/// Error(ParseError) for a malformed page map.
Document load_document(std::string doc_id, std::string text, DocumentMetadata metadata = {});

/// 1-based index of the blank-line-separated block in effect at `offset`:
/// the count of blocks starting at or before it, at least 1. A block starts
/// at the first non-whitespace code point of the text and at each
/// non-whitespace code point preceded, since the previous non-whitespace one,
/// by two or more newlines.
int paragraph_at(const Document& doc, std::size_t offset);

/// Fixed-stride chunking: windows start at 0, s, 2s, ... with
/// s = max_chars - overlap and span min(max_chars, remaining) characters.
/// A window ending at or before the previous window's end is dropped.
/// Throws Error(InvalidChunkParams) unless max_chars > 0 and overlap < max_chars.
std::vector<Chunk> chunk_document(const Document& doc, const ChunkParams& params = {});

/// Parses a corpus file: optional front-matter block delimited by "---"
/// lines with "title: ..." and "pages: off1:p1,off2:p2,..." entries,
/// followed by the body. Offsets in "pages" are relative to the body.
/// Throws Error(ParseError) on malformed front matter.
Document parse_corpus_file(std::string doc_id, std::string_view content);

/// Reads every .txt/.md file under `dir` (recursively, sorted by relative
/// path). doc_id is the path relative to `dir` with '/' separators.
std::vector<Document> load_corpus_dir(const std::string& dir);

/// Registry enforcing doc_id uniqueness. Many readers, one writer.
class Corpus {
public:
    /// Throws Error(DuplicateDocId).
    void add(Document doc);
    bool contains(const std::string& doc_id) const;
    std::optional<Document> find(const std::string& doc_id) const;
    std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, Document> docs_;
};

}  // namespace faceqa::corpus
