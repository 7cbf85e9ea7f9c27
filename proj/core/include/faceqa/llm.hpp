/// @file llm.hpp
/// @brief Text generation behind one contract: a deterministic scripted
/// backend and a remote HTTP backend.

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "faceqa/quality.hpp"

namespace faceqa::llm {

enum class Role { User, Assistant };

std::string_view to_string(Role role) noexcept;

struct ChatTurn {
    Role role = Role::User;
    std::string text;
    std::optional<std::string> image_id;
    std::int64_t timestamp_ms = 0;   // milliseconds since the Unix epoch
};

/// A retrieved passage with the provenance needed to cite it.
struct ContextBlock {
    std::string chunk_id;
    std::string doc_id;
    int page = 1;
    int paragraph = 1;
    std::string text;
};

struct ToolResult {
    quality::MeasureId measure = quality::MeasureId::DynamicRange;
    int quality = 0;
    double raw = 0.0;
};

struct GenerationRequest {
    std::string system_instructions;
    std::vector<ContextBlock> context_blocks;   // rank order, unique chunk ids
    std::vector<ToolResult> tool_results;
    std::vector<ChatTurn> history;              // oldest first
    std::string user_query;
};

struct GenerationResponse {
    std::string text;
    std::vector<std::string> cited_chunk_ids;   // order of first appearance, unique
};

inline constexpr std::string_view kRefusal = "I could not find supporting information.";

/// "[src:<chunk_id>]"
std::string citation_marker(std::string_view chunk_id);

/// Removes markers that cite ids outside `req.context_blocks` (logging each)
/// and collects the remaining cited ids.
GenerationResponse filter_citations(std::string text, const GenerationRequest& req);

/// Whitespace-collapsed text up to and including the first '.', '!' or '?'
/// that is followed by whitespace or ends the text; the whole collapsed text
/// when there is no terminator.
std::string first_sentence(std::string_view text);

class Generator {
public:
    virtual ~Generator() = default;

    /// Runs the backend, then strips citations of unknown chunks.
    /// Throws Error(ValidationError) on an empty query, and
    /// Error(BackendUnavailable) / Error(BackendTimeout) from remote backends.
    GenerationResponse complete(const GenerationRequest& req) const;

protected:
    virtual std::string generate(const GenerationRequest& req) const = 0;
};

/// Deterministic templating backend used by tests and evaluation runs.
class ScriptedGenerator final : public Generator {
protected:
    std::string generate(const GenerationRequest& req) const override;
};

GenerationResponse scripted_complete(const GenerationRequest& req);

struct RemoteConfig {
    std::string url;        // http://host[:port]/path
    std::string api_key;    // sent as "Authorization: Bearer <key>" when non-empty
    std::chrono::milliseconds timeout{30000};

    /// Reads FACEQA_LLM_URL and FACEQA_LLM_KEY; nullopt when the URL is unset.
    static std::optional<RemoteConfig> from_env();
};

/// One JSON POST per request (see docs/llm_wire_format.md); no retries.
class RemoteGenerator final : public Generator {
public:
    explicit RemoteGenerator(RemoteConfig config);

protected:
    std::string generate(const GenerationRequest& req) const override;

private:
    RemoteConfig config_;
};

/// Remote backend when FACEQA_LLM_URL is set, scripted otherwise.
std::unique_ptr<Generator> make_generator_from_env();

}  // namespace faceqa::llm
