#include "faceqa/agent.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <set>
#include <unordered_map>

#include "faceqa/embedding.hpp"
#include "faceqa/error.hpp"

namespace faceqa::agent {

const std::string_view kSystemInstructions =
    "faceqa-instructions v1\n"
    "You are an assistant for face image quality assessment at a document issuing authority. "
    "Answer only from the quality measure results and context passages provided. "
    "Report measure values exactly as given; quality values are integers from 0 to 100 where "
    "higher is better. Cite every passage you use with its marker [src:<chunk_id>] and name its "
    "document, page and paragraph. If the provided material does not answer the question, say "
    "that you could not find supporting information.";

namespace {

using quality::MeasureId;

constexpr std::array kSynonyms = {
    Synonym{MeasureId::DynamicRange, "dynamic range"},
    Synonym{MeasureId::DynamicRange, "dynamic-range"},
    Synonym{MeasureId::OverExposure, "over-exposure"},
    Synonym{MeasureId::OverExposure, "overexposure"},
    Synonym{MeasureId::OverExposure, "over exposure"},
    Synonym{MeasureId::OverExposure, "over-exposed"},
    Synonym{MeasureId::OverExposure, "overexposed"},
    Synonym{MeasureId::OverExposure, "over exposed"},
    Synonym{MeasureId::UnderExposure, "under-exposure"},
    Synonym{MeasureId::UnderExposure, "underexposure"},
    Synonym{MeasureId::UnderExposure, "under exposure"},
    Synonym{MeasureId::UnderExposure, "under-exposed"},
    Synonym{MeasureId::UnderExposure, "underexposed"},
    Synonym{MeasureId::UnderExposure, "under exposed"},
    Synonym{MeasureId::IlluminationUniformity, "illumination uniformity"},
    Synonym{MeasureId::IlluminationUniformity, "lighting uniformity"},
    Synonym{MeasureId::IlluminationUniformity, "uniformity of illumination"},
    Synonym{MeasureId::IlluminationUniformity, "uniformity of the illumination"},
    Synonym{MeasureId::IlluminationUniformity, "uniform illumination"},
    Synonym{MeasureId::IlluminationUniformity, "uniform lighting"},
    Synonym{MeasureId::IlluminationUniformity, "even lighting"},
    Synonym{MeasureId::BackgroundUniformity, "background uniformity"},
    Synonym{MeasureId::BackgroundUniformity, "uniformity of the background"},
    Synonym{MeasureId::BackgroundUniformity, "uniform background"},
    Synonym{MeasureId::Sharpness, "sharpness"},
    Synonym{MeasureId::Sharpness, "blurriness"},
    Synonym{MeasureId::Sharpness, "blurry"},
    Synonym{MeasureId::Sharpness, "blur"},
    Synonym{MeasureId::UnifiedQualityScore, "unified quality score"},
    Synonym{MeasureId::UnifiedQualityScore, "unified quality"},
    Synonym{MeasureId::UnifiedQualityScore, "unified score"},
    Synonym{MeasureId::UnifiedQualityScore, "overall quality"},
    Synonym{MeasureId::UnifiedQualityScore, "quality score"},
    Synonym{MeasureId::ExpressionNeutrality, "expression neutrality"},
    Synonym{MeasureId::ExpressionNeutrality, "neutral expression"},
    Synonym{MeasureId::HeadPose, "head pose"},
    Synonym{MeasureId::HeadPose, "pose"},
    Synonym{MeasureId::MouthClosed, "mouth closed"},
    Synonym{MeasureId::MouthClosed, "closed mouth"},
    Synonym{MeasureId::FaceOcclusion, "face occlusion"},
    Synonym{MeasureId::FaceOcclusion, "occlusion"},
};

// Cues that always mark a request for explanation.
constexpr std::array<std::string_view, 21> kStrongCues = {
    "mean", "means", "meaning", "meant", "define", "defined", "definition", "explain",
    "describe", "what does", "what is a", "what is an", "why", "how is", "how are",
    "how does", "requirement", "requirements", "according to", "standard", "tell me about",
};

// Interrogatives that mark a question unless it is about the image's values.
constexpr std::array<std::string_view, 13> kWeakCues = {
    "what", "which", "how", "when", "where", "who", "is", "are", "does", "do", "can", "should", "whats",
};

constexpr std::array<std::string_view, 19> kValueCues = {
    "value", "values", "this image", "the image", "this photo", "the photo", "this picture",
    "the picture", "my image", "my photo", "attached", "here", "score of", "compute",
    "calculate", "measure the", "assess", "rate", "check",
};

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           static_cast<unsigned char>(c) >= 0x80;
}

// Start offsets of `phrase` in `hay` that sit on word boundaries.
std::vector<std::size_t> find_phrase(std::string_view hay, std::string_view phrase) {
    std::vector<std::size_t> hits;
    for (auto pos = hay.find(phrase); pos != std::string_view::npos; pos = hay.find(phrase, pos + 1)) {
        const bool left_ok = pos == 0 || !is_word_char(hay[pos - 1]);
        const std::size_t end = pos + phrase.size();
        const bool right_ok = end == hay.size() || !is_word_char(hay[end]);
        if (left_ok && right_ok) hits.push_back(pos);
    }
    return hits;
}

template <std::size_t N>
bool has_any(std::string_view hay, const std::array<std::string_view, N>& cues) {
    return std::any_of(cues.begin(), cues.end(),
                       [&](std::string_view cue) { return !find_phrase(hay, cue).empty(); });
}

std::int64_t now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

std::string ChatSession::attach(AttachedImage img) {
    std::string id = "img-" + std::to_string(attached_images.size() + 1);
    attached_images.insert_or_assign(id, std::move(img));
    current_image = id;
    return id;
}

std::vector<llm::ChatTurn> memory_window(const ChatSession& session) {
    const std::size_t n = std::min(session.turns.size(), kMemoryWindow);
    return {session.turns.end() - static_cast<std::ptrdiff_t>(n), session.turns.end()};
}

std::span<const Synonym> synonym_table() noexcept { return kSynonyms; }

std::vector<MeasureId> match_measures(std::string_view query) {
    const std::string q = ascii_lower(query);
    struct Span {
        std::size_t start;
        std::size_t end;
        MeasureId measure;
    };
    std::vector<Span> spans;
    for (const auto& syn : kSynonyms) {
        for (auto pos : find_phrase(q, syn.phrase)) spans.push_back({pos, pos + syn.phrase.size(), syn.measure});
    }
    std::stable_sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
        if (a.end - a.start != b.end - b.start) return a.end - a.start > b.end - b.start;
        return a.start < b.start;
    });
    std::vector<Span> accepted;
    for (const auto& s : spans) {
        const bool overlaps = std::any_of(accepted.begin(), accepted.end(), [&](const Span& a) {
            return s.start < a.end && a.start < s.end;
        });
        if (!overlaps) accepted.push_back(s);
    }
    std::sort(accepted.begin(), accepted.end(), [](const Span& a, const Span& b) { return a.start < b.start; });
    std::vector<MeasureId> out;
    for (const auto& s : accepted) {
        if (std::find(out.begin(), out.end(), s.measure) == out.end()) out.push_back(s.measure);
    }
    return out;
}

bool is_definitional(std::string_view query) {
    const std::string q = ascii_lower(query);
    if (has_any(q, kStrongCues)) return true;
    std::string_view trimmed = q;
    while (!trimmed.empty() && (trimmed.back() == ' ' || trimmed.back() == '\n')) trimmed.remove_suffix(1);
    const bool interrogative = has_any(q, kWeakCues) || (!trimmed.empty() && trimmed.back() == '?');
    return interrogative && !has_any(q, kValueCues);
}

Plan plan(std::string_view query, const ChatSession& session) {
    if (query.empty()) throw Error(ErrorCode::ValidationError, "query must not be empty");
    Plan p;
    const auto measures = match_measures(query);
    const bool definitional = is_definitional(query);
    if (!measures.empty()) {
        if (session.current_image) {
            for (MeasureId m : measures) p.tool_calls.push_back({m, *session.current_image});
        } else if (!definitional) {
            throw Error(ErrorCode::NoImageAttached,
                        "the question asks for quality values but no image is attached");
        }
    }
    if (definitional || p.tool_calls.empty()) p.retrieval_queries.emplace_back(query);
    return p;
}

Evidence execute_plan(const Plan& plan, const ChatSession& session, const index::VectorIndex& index, int k) {
    Evidence ev;
    for (const auto& call : plan.tool_calls) {
        auto it = session.attached_images.find(call.image_id);
        if (it == session.attached_images.end()) {
            throw Error(ErrorCode::NoImageAttached, "tool call references unknown image " + call.image_id);
        }
        const MeasureId ids[] = {call.measure};
        const auto report = quality::assess(it->second.image, it->second.annotation, ids, call.image_id);
        ev.tool_results.push_back(call.measure == MeasureId::UnifiedQualityScore ? *report.unified
                                                                                : report.components.front());
    }
    Evidence retrieved;
    for (const auto& q : plan.retrieval_queries) {
        const auto vec = embedding::embed_text(q);
        if (vec.is_zero()) continue;   // nothing searchable in the query
        Evidence one;
        one.retrieved = index.search(vec, k);
        retrieved = merge_evidence(std::move(retrieved), one);
    }
    ev.retrieved = std::move(retrieved.retrieved);
    return ev;
}

Evidence merge_evidence(Evidence a, const Evidence& b) {
    a.tool_results.insert(a.tool_results.end(), b.tool_results.begin(), b.tool_results.end());
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < a.retrieved.size(); ++i) pos.emplace(a.retrieved[i].chunk.chunk_id, i);
    for (const auto& sc : b.retrieved) {
        auto it = pos.find(sc.chunk.chunk_id);
        if (it == pos.end()) {
            pos.emplace(sc.chunk.chunk_id, a.retrieved.size());
            a.retrieved.push_back(sc);
        } else if (sc.similarity > a.retrieved[it->second].similarity) {
            a.retrieved[it->second].similarity = sc.similarity;
        }
    }
    std::sort(a.retrieved.begin(), a.retrieved.end(), index::ranks_before);
    return a;
}

Answer generate_answer(std::string_view query, const ChatSession& session, const Evidence& evidence,
                       const llm::Generator& generator) {
    llm::GenerationRequest req;
    req.system_instructions = std::string(kSystemInstructions);
    for (const auto& sc : evidence.retrieved) {
        req.context_blocks.push_back(
            {sc.chunk.chunk_id, sc.chunk.doc_id, sc.chunk.page, sc.chunk.paragraph, sc.chunk.text});
    }
    for (const auto& t : evidence.tool_results) req.tool_results.push_back({t.measure, t.quality, t.raw});
    req.history = memory_window(session);
    req.user_query = std::string(query);

    const auto resp = generator.complete(req);

    Answer answer;
    answer.text = resp.text;
    answer.tool_results = evidence.tool_results;
    answer.retrieved = evidence.retrieved;
    for (const auto& id : resp.cited_chunk_ids) {
        auto it = std::find_if(evidence.retrieved.begin(), evidence.retrieved.end(),
                               [&](const index::ScoredChunk& sc) { return sc.chunk.chunk_id == id; });
        if (it == evidence.retrieved.end()) continue;   // filtered upstream; kept for safety of the invariant
        answer.citations.push_back(
            {it->chunk.chunk_id, it->chunk.doc_id, it->chunk.page, it->chunk.paragraph, it->chunk.text});
    }
    return answer;
}

Agent::Agent(const index::VectorIndex& index, const llm::Generator& generator, AgentConfig config)
    : index_(index), generator_(generator), config_(config) {
    if (config_.top_k < 1) throw Error(ErrorCode::ValidationError, "top_k must be >= 1");
}

Answer Agent::handle_turn(ChatSession& session, std::string_view user_text,
                          const std::optional<ImageUpload>& upload) const {
    if (user_text.empty()) throw Error(ErrorCode::ValidationError, "message text must not be empty");
    ChatSession working = session;

    std::optional<std::string> image_id;
    if (upload) {
        AttachedImage att;
        att.image = image::decode_image(upload->bytes);
        if (upload->annotation) {
            att.annotation = *upload->annotation;
        } else {
            att.annotation = image::default_annotation(att.image.width(), att.image.height());
            att.default_region = true;
        }
        att.annotation.validate(att.image);
        image_id = working.attach(std::move(att));
    }

    Plan first = plan(user_text, working);
    if (!config_.retrieval_enabled) first.retrieval_queries.clear();
    Evidence evidence = execute_plan(first, working, index_, config_.top_k);
    int cycles = 1;

    if (!evidence.tool_results.empty() && is_definitional(user_text) && config_.retrieval_enabled) {
        Plan second;
        second.cycle = 2;
        std::set<MeasureId> asked;
        for (const auto& call : first.tool_calls) {
            if (asked.insert(call.measure).second) {
                second.retrieval_queries.push_back(std::string(quality::measure_name(call.measure)) + " definition");
            }
        }
        evidence = merge_evidence(std::move(evidence), execute_plan(second, working, index_, config_.top_k));
        cycles = 2;
    }

    Answer answer = generate_answer(user_text, working, evidence, generator_);
    answer.cycles = cycles;

    const auto ts = now_ms();
    working.turns.push_back({llm::Role::User, std::string(user_text), image_id, ts});
    working.turns.push_back({llm::Role::Assistant, answer.text, std::nullopt, ts});
    session = std::move(working);
    return answer;
}

}  // namespace faceqa::agent
