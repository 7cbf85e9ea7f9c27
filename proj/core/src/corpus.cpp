#include "faceqa/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>

#include "faceqa/error.hpp"

namespace faceqa::corpus {

namespace {

bool is_ascii_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Code-point indices at which a paragraph block starts.
std::vector<std::size_t> block_starts(std::string_view text) {
    std::vector<std::size_t> starts;
    bool seen_content = false;
    int newlines = 0;
    std::size_t cp = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto c = static_cast<unsigned char>(text[i]);
        if ((c & 0xC0) == 0x80) continue;   // continuation byte
        if (c == '\n') {
            ++newlines;
        } else if (!is_ascii_space(c)) {
            if (!seen_content || newlines >= 2) starts.push_back(cp);
            seen_content = true;
            newlines = 0;
        }
        ++cp;
    }
    return starts;
}

int paragraph_from_starts(const std::vector<std::size_t>& starts, std::size_t offset) {
    const auto count = std::upper_bound(starts.begin(), starts.end(), offset) - starts.begin();
    return std::max<int>(1, static_cast<int>(count));
}

void validate_page_map(const std::vector<PageMark>& marks) {
    if (marks.empty() || marks.front().offset != 0) {
        throw Error(ErrorCode::ParseError, "page map must start at offset 0");
    }
    for (std::size_t i = 0; i < marks.size(); ++i) {
        if (marks[i].page < 1) throw Error(ErrorCode::ParseError, "page numbers must be positive");
        if (i > 0 && marks[i].offset <= marks[i - 1].offset) {
            throw Error(ErrorCode::ParseError, "page map offsets must be strictly increasing");
        }
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_ascii_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && is_ascii_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_number(std::string_view s) {
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::ParseError, "front matter: bad number '" + std::string(s) + "'");
    }
    return value;
}

std::vector<PageMark> parse_pages(std::string_view list) {
    std::vector<PageMark> marks;
    while (!list.empty()) {
        const auto comma = list.find(',');
        const auto item = trim(list.substr(0, comma));
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) {
            throw Error(ErrorCode::ParseError, "front matter: pages entries are 'offset:page'");
        }
        marks.push_back({parse_number<std::size_t>(trim(item.substr(0, colon))),
                         parse_number<int>(trim(item.substr(colon + 1)))});
        if (comma == std::string_view::npos) break;
        list.remove_prefix(comma + 1);
    }
    return marks;
}

// Returns the line starting at `pos` without its terminator and advances pos
// past the terminator.
std::string_view next_line(std::string_view text, std::size_t& pos) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

}  // namespace

bool is_valid_utf8(std::string_view text) noexcept {
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (c < 0x80) { ++i; continue; }
        if ((c & 0xE0) == 0xC0) { len = 2; cp = c & 0x1F; }
        else if ((c & 0xF0) == 0xE0) { len = 3; cp = c & 0x0F; }
        else if ((c & 0xF8) == 0xF0) { len = 4; cp = c & 0x07; }
        else return false;
        if (i + len > text.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            const auto cc = static_cast<unsigned char>(text[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // Overlong forms, surrogates, out of range.
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
            cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            return false;
        }
        i += len;
    }
    return true;
}

std::vector<std::size_t> code_point_offsets(std::string_view text) {
    std::vector<std::size_t> offsets;
    offsets.reserve(text.size() + 1);
    for (std::size_t i = 0; i < text.size(); ++i) {
        if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) offsets.push_back(i);
    }
    offsets.push_back(text.size());
    return offsets;
}

std::size_t Document::length() const {
    return static_cast<std::size_t>(std::count_if(text.begin(), text.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

int Document::page_at(std::size_t offset) const {
    if (page_map.empty()) return 1;
    auto it = std::upper_bound(page_map.begin(), page_map.end(), offset,
                               [](std::size_t off, const PageMark& m) { return off < m.offset; });
    return it == page_map.begin() ? page_map.front().page : std::prev(it)->page;
}

Document load_document(std::string doc_id, std::string text, DocumentMetadata metadata) {
    if (!is_valid_utf8(text)) {
        throw Error(ErrorCode::InvalidEncoding, "document '" + doc_id + "' is not valid UTF-8");
    }
    Document doc;
    doc.doc_id = std::move(doc_id);
    doc.title = metadata.title.empty() ? doc.doc_id : std::move(metadata.title);
    doc.text = std::move(text);
    doc.page_map = metadata.page_map.value_or(std::vector<PageMark>{{0, 1}});
    validate_page_map(doc.page_map);
    return doc;
}

int paragraph_at(const Document& doc, std::size_t offset) {
    return paragraph_from_starts(block_starts(doc.text), offset);
}

std::vector<Chunk> chunk_document(const Document& doc, const ChunkParams& params) {
    if (params.max_chars == 0 || params.overlap >= params.max_chars) {
        throw Error(ErrorCode::InvalidChunkParams,
                    "chunking needs max_chars > 0 and overlap < max_chars");
    }
    const auto offsets = code_point_offsets(doc.text);
    const std::size_t len = offsets.size() - 1;
    const std::size_t stride = params.max_chars - params.overlap;
    const auto starts = block_starts(doc.text);

    std::vector<Chunk> chunks;
    std::size_t prev_end = 0;
    for (std::size_t start = 0; start < len; start += stride) {
        const std::size_t end = std::min(start + params.max_chars, len);
        if (!chunks.empty() && end <= prev_end) continue;
        Chunk c;
        c.chunk_id = doc.doc_id + "#" + std::to_string(chunks.size());
        c.doc_id = doc.doc_id;
        c.char_start = start;
        c.char_end = end;
        c.text = doc.text.substr(offsets[start], offsets[end] - offsets[start]);
        c.page = doc.page_at(start);
        c.paragraph = paragraph_from_starts(starts, start);
        chunks.push_back(std::move(c));
        prev_end = end;
    }
    return chunks;
}

Document parse_corpus_file(std::string doc_id, std::string_view content) {
    DocumentMetadata meta;
    std::string_view body = content;
    std::size_t pos = 0;
    if (next_line(content, pos) == "---") {
        bool closed = false;
        while (pos < content.size()) {
            const auto line = next_line(content, pos);
            if (line == "---") {
                closed = true;
                break;
            }
            const auto t = trim(line);
            if (t.empty()) continue;
            const auto colon = t.find(':');
            if (colon == std::string_view::npos) {
                throw Error(ErrorCode::ParseError, "front matter: expected 'key: value'");
            }
            const auto key = trim(t.substr(0, colon));
            const auto value = trim(t.substr(colon + 1));
            if (key == "title") {
                meta.title = std::string(value);
            } else if (key == "pages") {
                meta.page_map = parse_pages(value);
            }
        }
        if (!closed) throw Error(ErrorCode::ParseError, "front matter: missing closing '---'");
        body = content.substr(pos);
    }
    return load_document(std::move(doc_id), std::string(body), std::move(meta));
}

std::vector<Document> load_corpus_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error(ErrorCode::NotFound, "corpus directory not found: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension();
        if (ext == ".txt" || ext == ".md") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Document> docs;
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
        docs.push_back(parse_corpus_file(fs::relative(path, dir).generic_string(), content));
    }
    return docs;
}

void Corpus::add(Document doc) {
    std::unique_lock lock(mutex_);
    if (docs_.contains(doc.doc_id)) {
        throw Error(ErrorCode::DuplicateDocId, "document '" + doc.doc_id + "' already ingested");
    }
    auto id = doc.doc_id;
    docs_.emplace(std::move(id), std::move(doc));
}

bool Corpus::contains(const std::string& doc_id) const {
    std::shared_lock lock(mutex_);
    return docs_.contains(doc_id);
}

std::optional<Document> Corpus::find(const std::string& doc_id) const {
    std::shared_lock lock(mutex_);
    auto it = docs_.find(doc_id);
    if (it == docs_.end()) return std::nullopt;
    return it->second;
}

std::size_t Corpus::size() const {
    std::shared_lock lock(mutex_);
    return docs_.size();
}

}  // namespace faceqa::corpus
