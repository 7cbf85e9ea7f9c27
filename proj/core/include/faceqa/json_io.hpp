/// @file json_io.hpp
/// @brief JSON encodings shared by the HTTP service, the LLM wire format and
/// evaluation logs.

#pragma once

#include <nlohmann/json_fwd.hpp>

#include "faceqa/agent.hpp"
#include "faceqa/corpus.hpp"
#include "faceqa/llm.hpp"
#include "faceqa/quality.hpp"
#include "faceqa/vector_index.hpp"

namespace faceqa::quality {
/// {"measure": key, "name": display name, "raw": r, "quality": q}
void to_json(nlohmann::json& j, const QualityComponent& c);
/// {"image_id", "components": [...], "unified": component or null}
void to_json(nlohmann::json& j, const QualityReport& r);
}  // namespace faceqa::quality

namespace faceqa::corpus {
void to_json(nlohmann::json& j, const Chunk& c);
}  // namespace faceqa::corpus

namespace faceqa::index {
void to_json(nlohmann::json& j, const ScoredChunk& s);
}  // namespace faceqa::index

namespace faceqa::llm {
void to_json(nlohmann::json& j, const ChatTurn& t);
void to_json(nlohmann::json& j, const ContextBlock& b);
void to_json(nlohmann::json& j, const ToolResult& r);
void to_json(nlohmann::json& j, const GenerationRequest& r);
}  // namespace faceqa::llm

namespace faceqa::agent {
void to_json(nlohmann::json& j, const Citation& c);
/// {"text", "citations", "tool_results", "retrieved", "cycles"}
void to_json(nlohmann::json& j, const Answer& a);
}  // namespace faceqa::agent
