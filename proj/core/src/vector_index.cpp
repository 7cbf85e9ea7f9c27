#include "faceqa/vector_index.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>

#include "faceqa/base64.hpp"
#include "faceqa/error.hpp"

namespace faceqa::index {

namespace {

double similarity(const embedding::EmbeddingVector& q, double q_norm,
                  const embedding::EmbeddingVector& v, double v_norm) {
    const double d = embedding::dot(q, v);
    return 1.0 - std::clamp(1.0 - d / (q_norm * v_norm), 0.0, 2.0);
}

void write_field(std::ostream& out, std::string_view value) {
    out << value.size() << ':' << value;
}

std::string encode_vector(const embedding::EmbeddingVector& v) {
    std::vector<std::uint8_t> bytes(v.values.size() * 4);
    for (std::size_t i = 0; i < v.values.size(); ++i) {
        auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v.values[i]));
        for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
    return base64::encode(bytes);
}

embedding::EmbeddingVector decode_vector(std::string_view text, std::size_t dims) {
    const auto bytes = base64::decode(text);
    if (bytes.size() != dims * 4) {
        throw Error(ErrorCode::ParseError, "snapshot: vector has wrong dimension");
    }
    embedding::EmbeddingVector v = embedding::zero_vector(dims);
    for (std::size_t i = 0; i < dims; ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[i * 4 + b]) << (8 * b);
        v.values[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
    const double n = v.norm();
    if (n > 0.0) {
        for (double& x : v.values) x /= n;
    }
    return v;
}

std::string read_field(std::istream& in) {
    std::size_t len = 0;
    char c = 0;
    bool any = false;
    while (in.get(c) && c >= '0' && c <= '9') {
        len = len * 10 + static_cast<std::size_t>(c - '0');
        any = true;
    }
    if (!any || c != ':') throw Error(ErrorCode::ParseError, "snapshot: malformed field length");
    std::string value(len, '\0');
    if (len > 0 && !in.read(value.data(), static_cast<std::streamsize>(len))) {
        throw Error(ErrorCode::ParseError, "snapshot: truncated field");
    }
    return value;
}

template <typename T>
T to_number(const std::string& s) {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::ParseError, "snapshot: bad integer '" + s + "'");
    }
    return v;
}

void expect_char(std::istream& in, char expected) {
    char c = 0;
    if (!in.get(c) || c != expected) {
        throw Error(ErrorCode::ParseError, "snapshot: malformed record separator");
    }
}

}  // namespace

bool ranks_before(const ScoredChunk& a, const ScoredChunk& b) noexcept {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.chunk.chunk_id < b.chunk.chunk_id;
}

std::size_t VectorIndex::upsert(std::vector<IndexEntry> entries) {
    for (const auto& e : entries) {
        if (e.vector.dims() != dims_) {
            throw Error(ErrorCode::DimensionMismatch,
                        "vector for '" + e.chunk.chunk_id + "' has " + std::to_string(e.vector.dims()) +
                            " dimensions, index expects " + std::to_string(dims_));
        }
    }
    std::vector<Stored> prepared;
    prepared.reserve(entries.size());
    for (auto& e : entries) {
        const double n = e.vector.norm();
        prepared.push_back({std::move(e), n});
    }
    std::unique_lock lock(mutex_);
    for (auto& s : prepared) {
        auto it = by_id_.find(s.entry.chunk.chunk_id);
        if (it != by_id_.end()) {
            stored_[it->second] = std::move(s);
        } else {
            by_id_.emplace(s.entry.chunk.chunk_id, stored_.size());
            stored_.push_back(std::move(s));
        }
    }
    return prepared.size();
}

std::vector<ScoredChunk> VectorIndex::search(const embedding::EmbeddingVector& query, int k) const {
    if (k < 1) throw Error(ErrorCode::ValidationError, "search needs k >= 1");
    if (query.dims() != dims_) throw Error(ErrorCode::DimensionMismatch, "query dimension mismatch");
    const double q_norm = query.norm();
    if (q_norm == 0.0) throw Error(ErrorCode::ZeroVector, "query embeds to the zero vector");

    std::shared_lock lock(mutex_);
    struct Candidate {
        double sim;
        const Stored* stored;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(stored_.size());
    for (const auto& s : stored_) {
        if (s.norm == 0.0) continue;
        candidates.push_back({similarity(query, q_norm, s.entry.vector, s.norm), &s});
    }
    const auto order = [](const Candidate& a, const Candidate& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        return a.stored->entry.chunk.chunk_id < b.stored->entry.chunk.chunk_id;
    };
    const std::size_t n = std::min(candidates.size(), static_cast<std::size_t>(k));
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n),
                      candidates.end(), order);
    std::vector<ScoredChunk> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({candidates[i].stored->entry.chunk, candidates[i].sim});
    }
    return out;
}

std::size_t VectorIndex::size() const {
    std::shared_lock lock(mutex_);
    return stored_.size();
}

std::vector<IndexEntry> VectorIndex::entries() const {
    std::shared_lock lock(mutex_);
    std::vector<IndexEntry> out;
    out.reserve(stored_.size());
    for (const auto& s : stored_) out.push_back(s.entry);
    return out;
}

void VectorIndex::save(std::ostream& out) const {
    std::shared_lock lock(mutex_);
    out << "FQAIDX 1 " << dims_ << ' ' << stored_.size() << '\n';
    for (const auto& s : stored_) {
        const auto& c = s.entry.chunk;
        write_field(out, c.chunk_id);
        out << ' ';
        write_field(out, c.doc_id);
        for (auto value : {c.char_start, c.char_end, static_cast<std::size_t>(c.page),
                           static_cast<std::size_t>(c.paragraph)}) {
            out << ' ';
            write_field(out, std::to_string(value));
        }
        out << ' ';
        write_field(out, encode_vector(s.entry.vector));
        out << ' ';
        write_field(out, c.text);
        out << '\n';
    }
}

void VectorIndex::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::NotFound, "cannot write snapshot " + path);
    save(out);
}

void VectorIndex::load(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw Error(ErrorCode::ParseError, "snapshot: missing header");
    std::istringstream hs(header);
    std::string magic;
    int version = 0;
    std::size_t dims = 0;
    std::size_t count = 0;
    if (!(hs >> magic >> version >> dims >> count) || magic != "FQAIDX" || version != 1) {
        throw Error(ErrorCode::ParseError, "snapshot: bad header '" + header + "'");
    }
    if (dims != dims_) throw Error(ErrorCode::DimensionMismatch, "snapshot dimension differs from index");

    std::vector<IndexEntry> entries;
    entries.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        IndexEntry e;
        e.chunk.chunk_id = read_field(in);
        expect_char(in, ' ');
        e.chunk.doc_id = read_field(in);
        expect_char(in, ' ');
        e.chunk.char_start = to_number<std::size_t>(read_field(in));
        expect_char(in, ' ');
        e.chunk.char_end = to_number<std::size_t>(read_field(in));
        expect_char(in, ' ');
        e.chunk.page = to_number<int>(read_field(in));
        expect_char(in, ' ');
        e.chunk.paragraph = to_number<int>(read_field(in));
        expect_char(in, ' ');
        e.vector = decode_vector(read_field(in), dims);
        expect_char(in, ' ');
        e.chunk.text = read_field(in);
        expect_char(in, '\n');
        entries.push_back(std::move(e));
    }
    std::vector<Stored> stored;
    std::unordered_map<std::string, std::size_t> by_id;
    for (auto& e : entries) {
        const double n = e.vector.norm();
        auto it = by_id.find(e.chunk.chunk_id);
        if (it != by_id.end()) {
            stored[it->second] = {std::move(e), n};
        } else {
            by_id.emplace(e.chunk.chunk_id, stored.size());
            stored.push_back({std::move(e), n});
        }
    }
    std::unique_lock lock(mutex_);
    stored_ = std::move(stored);
    by_id_ = std::move(by_id);
}

void VectorIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "snapshot not found: " + path);
    load(in);
}

}  // namespace faceqa::index
