/// @file service.hpp
/// @brief HTTP front door: sessions, chat turns, ingestion, assessment and
/// evaluation runs, plus the error mapping shared with the CLI.

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "faceqa/agent.hpp"
#include "faceqa/corpus.hpp"
#include "faceqa/error.hpp"
#include "faceqa/eval.hpp"
#include "faceqa/llm.hpp"
#include "faceqa/vector_index.hpp"

namespace httplib {
class Server;
}

namespace faceqa::service {

struct ApiError {
    int status = 500;
    std::string code;      // wire code
    std::string message;
    nlohmann::json detail; // null when absent

    nlohmann::json to_json() const;
};

/// Total over ErrorCode. Image decoding failures surface as BadImage with
/// the underlying cause in `detail`.
ApiError map_error(const Error& e);
ApiError map_error(ErrorCode code, const std::string& message);

struct IngestCounts {
    std::size_t documents = 0;
    std::size_t chunks = 0;
};

/// Chunks, embeds and upserts `docs`. Every doc_id is checked against the
/// registry (and the batch) before anything is added. Throws
/// Error(DuplicateDocId).
IngestCounts ingest_documents(corpus::Corpus& registry, index::VectorIndex& index,
                              std::vector<corpus::Document> docs,
                              const corpus::ChunkParams& params = {});

/// Quality report payload with a "metadata" object recording the face
/// region used and whether it is the default one.
nlohmann::json assess_payload(const std::vector<std::uint8_t>& image_bytes,
                              const std::optional<image::FaceAnnotation>& annotation,
                              const std::vector<std::string>& measure_keys,
                              std::string image_id = {});

/// Reads "l,t,w,h" or "l t w h". Throws Error(InvalidAnnotation).
image::FaceAnnotation parse_facebox_arg(std::string_view text);

struct ServiceConfig {
    std::optional<std::string> snapshot_path;   // FACEQA_SNAPSHOT
    std::string data_dir = "data";              // root for eval dataset references
    std::string cors_origin = "*";
    agent::AgentConfig agent_config{};
};

/// Owns the corpus registry, the index, the generator and all sessions.
class Service {
public:
    Service(ServiceConfig config, std::unique_ptr<llm::Generator> generator);

    std::string create_session();
    std::size_t session_count() const;

    /// Throws Error(SessionNotFound), Error(Busy) while another turn of the
    /// same session is in flight, and whatever the agent raises.
    agent::Answer post_message(const std::string& session_id, const std::string& text,
                               const std::optional<agent::ImageUpload>& upload);

    IngestCounts ingest(std::vector<corpus::Document> docs);

    /// Runs the dataset `dataset_ref` (relative to data_dir) with the scripted
    /// generator. When `type1_image_dir` is set, a type 1 set of `type1_n`
    /// samples seeded by `seed` is generated from it and prepended.
    eval::MetricsReport run_eval(const std::string& dataset_ref, std::uint64_t seed,
                                 const std::optional<std::string>& type1_image_dir = std::nullopt,
                                 int type1_n = 0);

    const index::VectorIndex& index() const noexcept { return index_; }
    const ServiceConfig& config() const noexcept { return config_; }

    /// Registers every route on `server`.
    void mount(httplib::Server& server);

private:
    struct SessionSlot {
        std::mutex turn_mutex;
        agent::ChatSession session;
    };

    std::string resolve_data_path(const std::string& ref) const;
    void save_snapshot() const;

    ServiceConfig config_;
    std::unique_ptr<llm::Generator> generator_;
    corpus::Corpus registry_;
    index::VectorIndex index_;
    std::mutex ingest_mutex_;
    mutable std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<SessionSlot>> sessions_;
};

}  // namespace faceqa::service
