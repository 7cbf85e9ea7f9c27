#include "faceqa/json_io.hpp"

#include <nlohmann/json.hpp>

namespace faceqa::quality {

void to_json(nlohmann::json& j, const QualityComponent& c) {
    j = {{"measure", measure_key(c.measure)},
         {"name", measure_name(c.measure)},
         {"raw", c.raw},
         {"quality", c.quality}};
}

void to_json(nlohmann::json& j, const QualityReport& r) {
    j = {{"image_id", r.image_id}, {"components", r.components}};
    j["unified"] = r.unified ? nlohmann::json(*r.unified) : nlohmann::json(nullptr);
}

}  // namespace faceqa::quality

namespace faceqa::corpus {

void to_json(nlohmann::json& j, const Chunk& c) {
    j = {{"chunk_id", c.chunk_id}, {"doc_id", c.doc_id},   {"text", c.text},
         {"char_start", c.char_start}, {"char_end", c.char_end}, {"page", c.page},
         {"paragraph", c.paragraph}};
}

}  // namespace faceqa::corpus

namespace faceqa::index {

void to_json(nlohmann::json& j, const ScoredChunk& s) {
    j = s.chunk;
    j["similarity"] = s.similarity;
}

}  // namespace faceqa::index

namespace faceqa::llm {

void to_json(nlohmann::json& j, const ChatTurn& t) {
    j = {{"role", to_string(t.role)}, {"text", t.text}, {"timestamp_ms", t.timestamp_ms}};
    j["image_id"] = t.image_id ? nlohmann::json(*t.image_id) : nlohmann::json(nullptr);
}

void to_json(nlohmann::json& j, const ContextBlock& b) {
    j = {{"chunk_id", b.chunk_id}, {"doc_id", b.doc_id}, {"page", b.page},
         {"paragraph", b.paragraph}, {"text", b.text}};
}

void to_json(nlohmann::json& j, const ToolResult& r) {
    j = {{"measure", quality::measure_key(r.measure)},
         {"name", quality::measure_name(r.measure)},
         {"quality", r.quality},
         {"raw", r.raw}};
}

void to_json(nlohmann::json& j, const GenerationRequest& r) {
    j = {{"system_instructions", r.system_instructions},
         {"context_blocks", r.context_blocks},
         {"tool_results", r.tool_results},
         {"history", r.history},
         {"user_query", r.user_query}};
}

}  // namespace faceqa::llm

namespace faceqa::agent {

void to_json(nlohmann::json& j, const Citation& c) {
    j = {{"chunk_id", c.chunk_id}, {"doc_id", c.doc_id}, {"page", c.page},
         {"paragraph", c.paragraph}, {"text", c.text}};
}

void to_json(nlohmann::json& j, const Answer& a) {
    j = {{"text", a.text},
         {"citations", a.citations},
         {"tool_results", a.tool_results},
         {"retrieved", a.retrieved},
         {"cycles", a.cycles}};
}

}  // namespace faceqa::agent
