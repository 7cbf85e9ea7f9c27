#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>

#include "faceqa/corpus.hpp"
#include "faceqa/error.hpp"
#include "test_util.hpp"

using namespace faceqa;
using namespace faceqa::corpus;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::NotFound;
}

std::string random_text(std::mt19937_64& rng, std::size_t len) {
    static const std::vector<std::string> alphabet = {"a", "b", "c", "x", " ", " ", "\n", "\n", ".", "é", "ß", "中"};
    std::string out;
    for (std::size_t i = 0; i < len; ++i) out += alphabet[rng() % alphabet.size()];
    return out;
}

}  // namespace

TEST(LoadDocument, DefaultsToSinglePage) {
    const auto doc = load_document("policy.md", "Hello");
    EXPECT_EQ(doc.doc_id, "policy.md");
    EXPECT_EQ(doc.title, "policy.md");
    ASSERT_EQ(doc.page_map.size(), 1u);
    EXPECT_EQ(doc.page_map[0], (PageMark{0, 1}));
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(doc.page_at(i), 1);
}

TEST(LoadDocument, PageMapIntervalLookup) {
    DocumentMetadata meta{"Policy", std::vector<PageMark>{{0, 1}, {100, 2}}};
    const auto doc = load_document("p", std::string(200, 'x'), meta);
    EXPECT_EQ(doc.page_at(99), 1);
    EXPECT_EQ(doc.page_at(100), 2);
    EXPECT_EQ(doc.page_at(150), 2);
}

TEST(LoadDocument, InvalidPageMapsRejected) {
    for (const auto& marks : std::vector<std::vector<PageMark>>{{}, {{5, 1}}, {{0, 1}, {0, 2}}, {{0, 1}, {9, 0}}}) {
        DocumentMetadata meta{"", marks};
        EXPECT_EQ(code_of([&] { load_document("p", "text", meta); }), ErrorCode::ParseError);
    }
}

TEST(LoadDocument, InvalidUtf8Rejected) {
    EXPECT_EQ(code_of([] { load_document("bad", std::string("ab\xff", 3)); }), ErrorCode::InvalidEncoding);
    EXPECT_EQ(code_of([] { load_document("bad", std::string("\xc3", 1)); }), ErrorCode::InvalidEncoding);
    EXPECT_EQ(code_of([] { load_document("bad", std::string("\xed\xa0\x80", 3)); }), ErrorCode::InvalidEncoding);
    EXPECT_EQ(code_of([] { load_document("bad", std::string("\xc0\xaf", 2)); }), ErrorCode::InvalidEncoding);
}

TEST(CorpusRegistry, DuplicateDocId) {
    Corpus c;
    c.add(load_document("a.md", "one"));
    EXPECT_EQ(code_of([&] { c.add(load_document("a.md", "two")); }), ErrorCode::DuplicateDocId);
    EXPECT_EQ(c.size(), 1u);
    EXPECT_EQ(c.find("a.md")->text, "one");
}

TEST(ChunkDocument, StrideArithmetic) {
    const auto doc = load_document("d", std::string(250, 'q'));
    const auto chunks = chunk_document(doc, {100, 20});
    ASSERT_EQ(chunks.size(), 3u);
    EXPECT_EQ(chunks[0].char_start, 0u);
    EXPECT_EQ(chunks[0].char_end, 100u);
    EXPECT_EQ(chunks[1].char_start, 80u);
    EXPECT_EQ(chunks[1].char_end, 180u);
    EXPECT_EQ(chunks[2].char_start, 160u);
    EXPECT_EQ(chunks[2].char_end, 250u);
    EXPECT_EQ(chunks[2].chunk_id, "d#2");
}

TEST(ChunkDocument, ShortDocumentSingleChunk) {
    const auto doc = load_document("d", std::string(50, 'q'));
    const auto chunks = chunk_document(doc, {100, 20});
    ASSERT_EQ(chunks.size(), 1u);
    EXPECT_EQ(chunks[0].char_end, 50u);
    EXPECT_TRUE(chunk_document(load_document("e", ""), {100, 20}).empty());
}

TEST(ChunkDocument, InvalidParams) {
    const auto doc = load_document("d", "text");
    EXPECT_EQ(code_of([&] { chunk_document(doc, {100, 100}); }), ErrorCode::InvalidChunkParams);
    EXPECT_EQ(code_of([&] { chunk_document(doc, {0, 0}); }), ErrorCode::InvalidChunkParams);
}

TEST(ChunkDocument, OffsetsCountCodePoints) {
    const auto doc = load_document("u", "ééééé");   // 5 code points, 10 bytes
    EXPECT_EQ(doc.length(), 5u);
    const auto chunks = chunk_document(doc, {2, 0});
    ASSERT_EQ(chunks.size(), 3u);
    EXPECT_EQ(chunks[0].text, "éé");
    EXPECT_EQ(chunks[2].text, "é");
    EXPECT_EQ(chunks[2].char_end, 5u);
}

TEST(ChunkDocument, ParagraphsAndPages) {
    const std::string text = "First block.\n\nSecond block\nstill second.\n\n\nThird block.";
    DocumentMetadata meta{"", std::vector<PageMark>{{0, 1}, {14, 7}}};
    const auto doc = load_document("p", text, meta);
    EXPECT_EQ(paragraph_at(doc, 0), 1);
    EXPECT_EQ(paragraph_at(doc, 13), 1);
    EXPECT_EQ(paragraph_at(doc, 14), 2);
    EXPECT_EQ(paragraph_at(doc, 30), 2);
    EXPECT_EQ(paragraph_at(doc, text.size() - 1), 3);
    const auto chunks = chunk_document(doc, {14, 0});
    EXPECT_EQ(chunks[1].page, 7);
    EXPECT_EQ(chunks[1].paragraph, 2);
}

TEST(ChunkProperties, ReconstructionProvenanceAndUniqueness) {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 300; ++i) {
        const std::size_t len = rng() % 3000;
        const std::string text = random_text(rng, len);
        const std::size_t max_chars = 1 + rng() % 400;
        const std::size_t overlap = rng() % max_chars;
        std::vector<PageMark> marks{{0, 1}};
        for (std::size_t off = 1 + rng() % 500; off < len; off += 1 + rng() % 500)
            marks.push_back({off, marks.back().page + 1});
        const auto doc = load_document("doc" + std::to_string(i), text, {"", marks});
        const auto chunks = chunk_document(doc, {max_chars, overlap});

        std::string rebuilt;
        std::set<std::pair<std::size_t, std::size_t>> spans;
        const auto cps = oracle::code_points(text);
        std::vector<std::pair<std::size_t, int>> oracle_marks;
        for (const auto& m : marks) oracle_marks.emplace_back(m.offset, m.page);
        for (std::size_t k = 0; k < chunks.size(); ++k) {
            const auto& c = chunks[k];
            ASSERT_LT(c.char_start, c.char_end);
            ASSERT_LE(c.char_end, cps.size());
            std::string expected;
            for (std::size_t j = c.char_start; j < c.char_end; ++j) expected += cps[j];
            ASSERT_EQ(c.text, expected);
            EXPECT_TRUE(spans.insert({c.char_start, c.char_end}).second);
            EXPECT_EQ(c.paragraph, oracle::paragraph_at(text, c.char_start));
            EXPECT_EQ(c.page, oracle::page_at(oracle_marks, c.char_start));
            if (k == 0) {
                rebuilt = c.text;
            } else {
                for (std::size_t j = c.char_start + overlap; j < c.char_end; ++j) rebuilt += cps[j];
            }
        }
        EXPECT_EQ(rebuilt, text) << "len " << len;
        if (len > 0) EXPECT_EQ(chunks.back().char_end, cps.size());
    }
}

TEST(CorpusFile, FrontMatter) {
    const auto doc = parse_corpus_file("g.md", "---\ntitle: Guide\npages: 0:1, 6:2\n---\nHello world\n");
    EXPECT_EQ(doc.title, "Guide");
    EXPECT_EQ(doc.text, "Hello world\n");
    EXPECT_EQ(doc.page_at(7), 2);
    const auto plain = parse_corpus_file("p.txt", "no front matter");
    EXPECT_EQ(plain.text, "no front matter");
    EXPECT_EQ(code_of([] { parse_corpus_file("x", "---\ntitle: open\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_corpus_file("x", "---\npages: a:b\n---\n"); }), ErrorCode::ParseError);
}

TEST(CorpusDir, LoadsRecursivelySorted) {
    testutil::TempDir dir;
    std::filesystem::create_directories(dir.path() / "sub");
    std::ofstream(dir.file("b.md")) << "bee";
    std::ofstream(dir.file("a.txt")) << "ay";
    std::ofstream(dir.file("sub/c.md")) << "---\ntitle: Sea\n---\nsea";
    std::ofstream(dir.file("ignored.json")) << "{}";
    const auto docs = load_corpus_dir(dir.str());
    ASSERT_EQ(docs.size(), 3u);
    EXPECT_EQ(docs[0].doc_id, "a.txt");
    EXPECT_EQ(docs[1].doc_id, "b.md");
    EXPECT_EQ(docs[2].doc_id, "sub/c.md");
    EXPECT_EQ(docs[2].title, "Sea");
    EXPECT_EQ(code_of([&] { load_corpus_dir(dir.file("nope")); }), ErrorCode::NotFound);
}

TEST(CorpusDir, ShippedCorpusParses) {
    const auto docs = load_corpus_dir(testutil::data_dir() + "/corpus");
    EXPECT_GE(docs.size(), 5u);
    for (const auto& d : docs) {
        EXPECT_FALSE(d.title.empty());
        EXPECT_FALSE(chunk_document(d).empty());
    }
}
