/// @file agent.hpp
/// @brief The question-answering agent: planning, tool/retrieval execution,
/// working memory and cited answer generation.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faceqa/image.hpp"
#include "faceqa/llm.hpp"
#include "faceqa/quality.hpp"
#include "faceqa/vector_index.hpp"

namespace faceqa::agent {

/// Version-tagged instructions sent with every generation request.
extern const std::string_view kSystemInstructions;

/// Turns of history presented to the generator.
inline constexpr std::size_t kMemoryWindow = 20;
inline constexpr int kDefaultTopK = 4;
inline constexpr int kMaxCycles = 2;

struct AttachedImage {
    image::LumaImage image;
    image::FaceAnnotation annotation;
    bool default_region = false;
};

struct ChatSession {
    std::string session_id;
    std::vector<llm::ChatTurn> turns;
    std::map<std::string, AttachedImage> attached_images;
    std::optional<std::string> current_image;   // most recent attachment

    /// Stores the image under a fresh id ("img-<n>") and makes it current.
    std::string attach(AttachedImage img);
};

/// The last kMemoryWindow turns, oldest first.
std::vector<llm::ChatTurn> memory_window(const ChatSession& session);

struct ToolCall {
    quality::MeasureId measure = quality::MeasureId::DynamicRange;
    std::string image_id;
    bool operator==(const ToolCall&) const = default;
};

struct Plan {
    std::vector<ToolCall> tool_calls;
    std::vector<std::string> retrieval_queries;
    int cycle = 1;
};

struct Evidence {
    std::vector<quality::QualityComponent> tool_results;   // plan order
    std::vector<index::ScoredChunk> retrieved;             // ranked, unique chunk ids
};

struct Citation {
    std::string chunk_id;
    std::string doc_id;
    int page = 1;
    int paragraph = 1;
    std::string text;
};

struct Answer {
    std::string text;
    std::vector<Citation> citations;
    std::vector<quality::QualityComponent> tool_results;
    std::vector<index::ScoredChunk> retrieved;   // the context the answer was generated from
    int cycles = 1;
};

struct Synonym {
    quality::MeasureId measure;
    std::string_view phrase;
};

/// Phrase table used to route queries to measures (lowercase phrases).
std::span<const Synonym> synonym_table() noexcept;

/// Measures named in the query, in order of first mention. Matching is
/// case-insensitive on word boundaries, longest phrase first; a phrase inside
/// an already matched longer phrase is ignored.
std::vector<quality::MeasureId> match_measures(std::string_view query);

/// True when the query asks for an explanation or definition rather than
/// (only) for values of the attached image.
bool is_definitional(std::string_view query);

/// Rule-based router. Each measure hit becomes a tool call on the current
/// image; definitional queries, and queries without hits, become a retrieval
/// query. Throws Error(NoImageAttached) when a non-definitional query names
/// measures but the session holds no image, Error(ValidationError) on an
/// empty query.
Plan plan(std::string_view query, const ChatSession& session);

/// Runs tool calls through quality::assess and each retrieval query through
/// the index (top-k), merging results by chunk id.
Evidence execute_plan(const Plan& plan, const ChatSession& session,
                      const index::VectorIndex& index, int k = kDefaultTopK);

/// Union of two evidence sets: tool results concatenated, retrieved chunks
/// deduplicated (highest similarity kept) and re-ranked.
Evidence merge_evidence(Evidence a, const Evidence& b);

Answer generate_answer(std::string_view query, const ChatSession& session, const Evidence& evidence,
                       const llm::Generator& generator);

struct ImageUpload {
    std::vector<std::uint8_t> bytes;
    std::optional<image::FaceAnnotation> annotation;   // default region when absent
};

struct AgentConfig {
    int top_k = kDefaultTopK;
    bool retrieval_enabled = true;
};

/// Stateless over sessions: callers serialise turns per session.
class Agent {
public:
    Agent(const index::VectorIndex& index, const llm::Generator& generator, AgentConfig config = {});

    /// Attaches the upload (if any), runs up to two plan/execute cycles,
    /// generates the answer and appends the user and assistant turns. On
    /// error the session is left without new turns.
    Answer handle_turn(ChatSession& session, std::string_view user_text,
                       const std::optional<ImageUpload>& upload = std::nullopt) const;

    const AgentConfig& config() const noexcept { return config_; }

private:
    const index::VectorIndex& index_;
    const llm::Generator& generator_;
    AgentConfig config_;
};

}  // namespace faceqa::agent
