#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <sstream>
#include <thread>

#include "faceqa/error.hpp"
#include "faceqa/vector_index.hpp"
#include "test_util.hpp"

using namespace faceqa;
using namespace faceqa::index;
using embedding::EmbeddingVector;

namespace {

corpus::Chunk chunk(const std::string& id, const std::string& text = "t") {
    corpus::Chunk c;
    c.chunk_id = id;
    c.doc_id = "doc.md";
    c.text = text;
    c.char_start = 0;
    c.char_end = text.size();
    return c;
}

IndexEntry entry(const std::string& id, const std::string& text) {
    return {chunk(id, text), embedding::embed_text(text)};
}

EmbeddingVector random_unit(std::mt19937_64& rng) {
    EmbeddingVector v{std::vector<double>(embedding::kDims)};
    double n = 0;
    for (auto& x : v.values) {
        x = static_cast<double>(static_cast<std::int64_t>(rng() % 2001) - 1000);
        n += x * x;
    }
    n = std::sqrt(n);
    for (auto& x : v.values) x /= n;
    return v;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::NotFound;
}

}  // namespace

TEST(Upsert, CountsAndReplaces) {
    VectorIndex idx;
    EXPECT_EQ(idx.upsert({entry("a", "face"), entry("b", "image"), entry("c", "quality")}), 3u);
    EXPECT_EQ(idx.size(), 3u);
    idx.upsert({entry("b", "replaced text")});
    EXPECT_EQ(idx.size(), 3u);
    const auto hits = idx.search(embedding::embed_text("replaced text"), 1);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].chunk.chunk_id, "b");
    EXPECT_EQ(hits[0].chunk.text, "replaced text");
}

TEST(Upsert, WrongDimensionRejectsWholeBatch) {
    VectorIndex idx;
    std::vector<IndexEntry> batch{entry("a", "face"), {chunk("bad"), EmbeddingVector{{1.0, 0.0}}}};
    EXPECT_EQ(code_of([&] { idx.upsert(batch); }), ErrorCode::DimensionMismatch);
    EXPECT_EQ(idx.size(), 0u);
}

TEST(Search, SelfRetrieval) {
    VectorIndex idx;
    idx.upsert({entry("a", "over-exposure means saturated pixels"), entry("b", "background uniformity"),
                entry("c", "sharpness of edges")});
    const auto hits = idx.search(embedding::embed_text("background uniformity"), 3);
    ASSERT_FALSE(hits.empty());
    EXPECT_EQ(hits[0].chunk.chunk_id, "b");
    EXPECT_NEAR(hits[0].similarity, 1.0, 1e-9);
}

TEST(Search, KLargerThanIndexReturnsNonZeroEntries) {
    VectorIndex idx;
    idx.upsert({entry("a", "face"), entry("b", "image"), {chunk("z"), embedding::zero_vector()}});
    EXPECT_EQ(idx.size(), 3u);
    const auto hits = idx.search(embedding::embed_text("face image"), 10);
    EXPECT_EQ(hits.size(), 2u);
    for (const auto& h : hits) EXPECT_NE(h.chunk.chunk_id, "z");
}

TEST(Search, TiesBrokenByChunkId) {
    VectorIndex idx;
    idx.upsert({entry("m", "same words"), entry("b", "same words"), entry("x", "same words")});
    const auto hits = idx.search(embedding::embed_text("same words"), 3);
    ASSERT_EQ(hits.size(), 3u);
    EXPECT_EQ(hits[0].chunk.chunk_id, "b");
    EXPECT_EQ(hits[1].chunk.chunk_id, "m");
    EXPECT_EQ(hits[2].chunk.chunk_id, "x");
}

TEST(Search, ErrorsAndEmptyIndex) {
    VectorIndex idx;
    EXPECT_TRUE(idx.search(embedding::embed_text("face"), 4).empty());
    EXPECT_EQ(code_of([&] { idx.search(embedding::zero_vector(), 4); }), ErrorCode::ZeroVector);
    EXPECT_EQ(code_of([&] { idx.search(embedding::embed_text("face"), 0); }), ErrorCode::ValidationError);
    EXPECT_EQ(code_of([&] { idx.search(EmbeddingVector{{1.0}}, 1); }), ErrorCode::DimensionMismatch);
}

TEST(SearchProperties, MatchesLinearScan) {
    std::mt19937_64 rng(31);
    for (int round = 0; round < 20; ++round) {
        VectorIndex idx;
        std::vector<oracle::Item> items;
        std::vector<IndexEntry> batch;
        const int n = 1 + static_cast<int>(rng() % 300);
        for (int i = 0; i < n; ++i) {
            const std::string id = "c" + std::to_string(rng() % 1000);
            // duplicate vectors exercise the tie-break
            auto v = (i > 0 && rng() % 10 == 0) ? batch.back().vector : random_unit(rng);
            if (rng() % 50 == 0) v = embedding::zero_vector();
            batch.push_back({chunk(id), v});
        }
        idx.upsert(batch);
        for (const auto& e : idx.entries()) items.push_back({e.chunk.chunk_id, e.vector.values});
        EXPECT_LE(idx.size(), static_cast<std::size_t>(n));
        for (int q = 0; q < 20; ++q) {
            const auto query = random_unit(rng);
            const int k = 1 + static_cast<int>(rng() % 20);
            const auto hits = idx.search(query, k);
            std::vector<std::string> ids;
            for (std::size_t i = 0; i < hits.size(); ++i) {
                ids.push_back(hits[i].chunk.chunk_id);
                if (i > 0) EXPECT_GE(hits[i - 1].similarity, hits[i].similarity);
                EXPECT_GE(hits[i].similarity, -1.0);
                EXPECT_LE(hits[i].similarity, 1.0);
            }
            EXPECT_EQ(ids, oracle::linear_scan(items, query.values, k));
        }
    }
}

TEST(SearchProperties, UpsertedVectorComesFirst) {
    std::mt19937_64 rng(4);
    VectorIndex idx;
    for (int i = 0; i < 100; ++i) {
        const auto v = random_unit(rng);
        idx.upsert({{chunk("id" + std::to_string(i)), v}});
        EXPECT_EQ(idx.search(v, 1).at(0).chunk.chunk_id, "id" + std::to_string(i));
    }
}

TEST(Snapshot, RoundTrip) {
    VectorIndex idx;
    auto c = chunk("doc with space#0", "text with\nnewline and 4:colon and ünïcode");
    c.doc_id = "doc with space";
    c.char_start = 3;
    c.char_end = 44;
    c.page = 2;
    c.paragraph = 5;
    idx.upsert({{c, embedding::embed_text(c.text)}, entry("b", "other"), {chunk("z", ""), embedding::zero_vector()}});
    std::stringstream ss;
    idx.save(ss);
    EXPECT_EQ(ss.str().rfind("FQAIDX 1 256 3\n", 0), 0u);

    VectorIndex loaded;
    loaded.load(ss);
    ASSERT_EQ(loaded.size(), 3u);
    const auto entries = loaded.entries();
    EXPECT_EQ(entries[0].chunk, c);
    EXPECT_TRUE(entries[2].vector.is_zero());
    const auto hits = loaded.search(embedding::embed_text(c.text), 1);
    EXPECT_EQ(hits.at(0).chunk.chunk_id, c.chunk_id);
    EXPECT_NEAR(hits[0].similarity, 1.0, 1e-6);
    EXPECT_NEAR(entries[0].vector.norm(), 1.0, 1e-12);
}

TEST(Snapshot, FileRoundTripAndMalformedInput) {
    testutil::TempDir dir;
    VectorIndex idx;
    idx.upsert({entry("a", "face"), entry("b", "image")});
    idx.save(dir.file("snap.idx"));
    VectorIndex loaded;
    loaded.load(dir.file("snap.idx"));
    EXPECT_EQ(loaded.size(), 2u);

    for (const std::string bad : {"", "NOTIDX 1 256 0\n", "FQAIDX 2 256 0\n", "FQAIDX 1 256 1\n",
                                  "FQAIDX 1 256 1\n1:a 1:d 1:0 1:1 1:1 1:1 4:AAAA 1:t\n",
                                  "FQAIDX 1 256 1\n1:a 1:d 1:x 1:1 1:1 1:1 0: 1:t\n"}) {
        std::stringstream ss(bad);
        VectorIndex target;
        target.upsert({entry("keep", "keep")});
        EXPECT_EQ(code_of([&] { target.load(ss); }), ErrorCode::ParseError) << bad;
        EXPECT_EQ(target.size(), 1u) << "failed load must leave the index unchanged";
    }
    std::stringstream other_dims("FQAIDX 1 128 0\n");
    EXPECT_EQ(code_of([&] { loaded.load(other_dims); }), ErrorCode::DimensionMismatch);
}

TEST(Concurrency, ReadersSeeWholeBatches) {
    VectorIndex idx;
    std::vector<IndexEntry> first;
    std::vector<IndexEntry> second;
    for (int i = 0; i < 50; ++i) {
        first.push_back(entry("a" + std::to_string(i), "alpha " + std::to_string(i)));
        second.push_back(entry("b" + std::to_string(i), "alpha " + std::to_string(i)));
    }
    idx.upsert(first);
    std::atomic<bool> stop{false};
    std::atomic<int> bad{0};
    std::thread reader([&] {
        const auto q = embedding::embed_text("alpha");
        while (!stop) {
            const auto n = idx.search(q, 1000).size();
            if (n != 50 && n != 100) ++bad;
        }
    });
    idx.upsert(second);
    stop = true;
    reader.join();
    EXPECT_EQ(bad.load(), 0);
    EXPECT_EQ(idx.size(), 100u);
}
