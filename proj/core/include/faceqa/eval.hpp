/// @file eval.hpp
/// @brief Evaluation datasets, agent runs and the TSA / ACD / QCD / ARD metrics.
///
/// Type 1 samples ask for quality values of an image and score tool
/// selection (TSA). Type 2 samples ask about concepts and score answer and
/// context distances (ARD, ACD, QCD). Distances are cosine distances between
/// embeddings from the shared embedder.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faceqa/agent.hpp"
#include "faceqa/llm.hpp"
#include "faceqa/quality.hpp"
#include "faceqa/vector_index.hpp"

namespace faceqa::eval {

enum class SampleKind { Type1, Type2 };

struct EvalSample {
    SampleKind kind = SampleKind::Type2;
    std::optional<std::string> image;                 // type 1 only, relative to the image root
    std::string question;
    std::string answer;                               // ground truth
    std::vector<quality::MeasureId> expected_tools;   // type 1 only

    bool operator==(const EvalSample&) const = default;
};

enum class TemplateSet {
    Canonical,    // measure display names in fixed question forms
    Paraphrase,   // reordered clauses and alternative measure wordings
};

/// Seeded sampling of (image, 1-3 measures) pairs over the decodable images
/// in `image_dir` (sorted by file name). Ground-truth values come from
/// quality::assess with each image's sidecar annotation or the default
/// region. Throws Error(NoImages).
std::vector<EvalSample> generate_type1_dataset(const std::string& image_dir, int n, std::uint64_t seed,
                                               TemplateSet templates = TemplateSet::Canonical);

/// Question for a measure list in the canonical template,
/// e.g. "what are the sharpness and dynamic range quality values of this image?".
std::string canonical_question(std::span<const quality::MeasureId> measures);
/// Ground-truth sentence, e.g. "The sharpness measure has the value of 63,
/// and dynamic range has the value of 40."
std::string reference_answer(std::span<const quality::MeasureId> measures, std::span<const int> values);

/// JSON Lines: one object per sample with kind, image, question, answer and
/// expected_tools. Type 2 records omit image and expected_tools.
std::string to_jsonl(std::span<const EvalSample> samples);
/// Throws Error(ParseError) on malformed lines or kind/field mismatches.
std::vector<EvalSample> parse_jsonl(std::string_view text);
std::vector<EvalSample> load_dataset(const std::string& path);
/// Like load_dataset, but every record must be type 2.
std::vector<EvalSample> load_type2_dataset(const std::string& path);
void save_dataset(const std::string& path, std::span<const EvalSample> samples);

struct TurnLog {
    std::size_t sample_index = 0;
    SampleKind kind = SampleKind::Type2;
    std::string question;
    std::string reference_answer;
    std::vector<quality::MeasureId> expected_tools;
    std::vector<quality::MeasureId> selected_tools;
    std::string answer_text;
    std::string context_text;                  // retrieved chunk texts, rank order, '\n'-joined
    std::vector<std::string> retrieved_ids;
    std::vector<std::string> cited_ids;
};

struct DistanceMetrics {
    double acd = 0.0;
    double qcd = 0.0;
    double ard = 0.0;
};

struct MetricsReport {
    std::string method = "faceqa";
    std::optional<double> tsa;
    std::optional<double> acd;
    std::optional<double> qcd;
    std::optional<double> ard;
    std::size_t type1_samples = 0;
    std::size_t type2_samples = 0;
    std::size_t expected_tool_calls = 0;
    std::size_t matched_tool_calls = 0;
};

/// Expected (sample, tool) pairs found among that sample's selected tools,
/// over all expected tool calls of the type 1 logs. Extra selections are
/// ignored. Throws Error(EmptyEvaluation) when no tool call is expected.
double compute_tsa(std::span<const TurnLog> logs);

/// Means over type 2 logs; an empty context counts as distance 2 for ACD
/// and QCD. Throws Error(EmptyEvaluation) without type 2 logs.
DistanceMetrics compute_distance_metrics(std::span<const TurnLog> logs);

/// Citations that do not reference a chunk retrieved in the same turn.
std::size_t count_citation_violations(std::span<const TurnLog> logs);

std::string context_text(std::span<const index::ScoredChunk> retrieved);

struct EvalEnvironment {
    const index::VectorIndex* index = nullptr;
    const llm::Generator* generator = nullptr;
    agent::AgentConfig agent_config{};
    std::string image_root;   // resolves EvalSample::image
    int threads = 1;
    std::string method = "faceqa";
};

struct EvalRun {
    std::vector<TurnLog> logs;   // dataset order
    MetricsReport report;
};

/// Runs every sample as a fresh single-turn session and computes the
/// applicable metrics. Throws Error(EmptyEvaluation) for an empty dataset.
EvalRun run_evaluation(std::span<const EvalSample> dataset, const EvalEnvironment& env);

/// Assembles a report from logs (what run_evaluation does after the runs).
MetricsReport summarize(std::span<const TurnLog> logs, std::string method = "faceqa");

/// Deterministic JSON serialization (sorted keys, null for N/A metrics).
std::string report_json(const MetricsReport& report);
/// Aligned plain-text table with one row per report and "-" for N/A cells.
std::string report_table(std::span<const MetricsReport> reports);

}  // namespace faceqa::eval
