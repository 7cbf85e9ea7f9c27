#include "faceqa/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "faceqa/embedding.hpp"
#include "faceqa/error.hpp"
#include "faceqa/synthetic.hpp"

namespace faceqa::eval {

namespace {

using quality::MeasureId;
using json = nlohmann::json;

struct ParaphraseNames {
    MeasureId measure;
    std::vector<std::string_view> names;
};

// Alternative wordings; a few are deliberately absent from the router's
// synonym table so tool selection is imperfect on this set.
const std::vector<ParaphraseNames>& paraphrase_names() {
    static const std::vector<ParaphraseNames> table = {
        {MeasureId::DynamicRange, {"dynamic range", "dynamic-range", "tonal range", "dynamic range"}},
        {MeasureId::OverExposure, {"overexposure", "over exposure", "over-exposure"}},
        {MeasureId::UnderExposure, {"underexposure", "under exposure", "under-exposure"}},
        {MeasureId::IlluminationUniformity,
         {"lighting uniformity", "uniformity of illumination", "illumination uniformity", "even lighting"}},
        {MeasureId::BackgroundUniformity,
         {"uniformity of the background", "background uniformity", "uniform background"}},
        {MeasureId::Sharpness, {"sharpness", "blurriness", "focus", "blur"}},
        {MeasureId::UnifiedQualityScore, {"overall quality", "unified quality score", "quality score"}},
    };
    return table;
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0) out += i + 1 == names.size() ? " and " : ", ";
        out += names[i];
    }
    return out;
}

std::string paraphrase_question(const std::vector<std::string>& names, std::mt19937_64& rng) {
    const std::string list = join_names(names);
    const bool single = names.size() == 1;
    switch (synthetic::uniform_below(rng, 3)) {
        case 0:
            return single ? "for this image, what is the " + list + " quality value?"
                          : "for this image, what are the " + list + " quality values?";
        case 1:
            return "give me the " + list + (single ? " value" : " values") + " of this photo";
        default:
            return single ? "how does this image score on " + list + "?"
                          : "please assess " + list + " for the attached image";
    }
}

std::string kind_name(SampleKind k) { return k == SampleKind::Type1 ? "type1" : "type2"; }

EvalSample sample_from_json(const json& j) {
    EvalSample s;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "type1") {
        s.kind = SampleKind::Type1;
    } else if (kind == "type2") {
        s.kind = SampleKind::Type2;
    } else {
        throw Error(ErrorCode::ParseError, "unknown sample kind '" + kind + "'");
    }
    s.question = j.at("question").get<std::string>();
    s.answer = j.at("answer").get<std::string>();
    if (auto it = j.find("image"); it != j.end() && !it->is_null()) s.image = it->get<std::string>();
    if (auto it = j.find("expected_tools"); it != j.end() && !it->is_null()) {
        for (const auto& t : *it) s.expected_tools.push_back(quality::parse_measure(t.get<std::string>()));
    }
    if (s.kind == SampleKind::Type1 && (!s.image || s.image->empty() || s.expected_tools.empty())) {
        throw Error(ErrorCode::ParseError, "type1 sample needs image and expected_tools");
    }
    if (s.kind == SampleKind::Type2 && (s.image || !s.expected_tools.empty())) {
        throw Error(ErrorCode::ParseError, "type2 sample must not carry image or expected_tools");
    }
    return s;
}

json sample_to_json(const EvalSample& s) {
    json j;
    j["kind"] = kind_name(s.kind);
    j["question"] = s.question;
    j["answer"] = s.answer;
    if (s.kind == SampleKind::Type1) {
        j["image"] = s.image.value_or("");
        json tools = json::array();
        for (auto m : s.expected_tools) tools.push_back(std::string(quality::measure_key(m)));
        j["expected_tools"] = std::move(tools);
    }
    return j;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "dataset not found: " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TurnLog run_sample(std::size_t i, const EvalSample& sample, const EvalEnvironment& env) {
    agent::Agent agent(*env.index, *env.generator, env.agent_config);
    agent::ChatSession session;
    session.session_id = "eval-" + std::to_string(i);

    std::optional<agent::ImageUpload> upload;
    if (sample.kind == SampleKind::Type1) {
        const std::string path = (std::filesystem::path(env.image_root) / *sample.image).string();
        agent::ImageUpload up;
        up.bytes = image::read_file_bytes(path);
        const std::string sidecar = image::facebox_path_for(path);
        if (std::filesystem::exists(sidecar)) {
            const auto text = image::read_file_bytes(sidecar);
            up.annotation = image::parse_facebox(std::string(text.begin(), text.end()));
        }
        upload = std::move(up);
    }
    const auto answer = agent.handle_turn(session, sample.question, upload);

    TurnLog log;
    log.sample_index = i;
    log.kind = sample.kind;
    log.question = sample.question;
    log.reference_answer = sample.answer;
    log.expected_tools = sample.expected_tools;
    for (const auto& t : answer.tool_results) log.selected_tools.push_back(t.measure);
    log.answer_text = answer.text;
    log.context_text = context_text(answer.retrieved);
    for (const auto& sc : answer.retrieved) log.retrieved_ids.push_back(sc.chunk.chunk_id);
    for (const auto& c : answer.citations) log.cited_ids.push_back(c.chunk_id);
    return log;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string cell(const std::optional<double>& v, int precision) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
    return buf;
}

}  // namespace

std::string canonical_question(std::span<const MeasureId> measures) {
    std::vector<std::string> names;
    for (auto m : measures) names.emplace_back(quality::measure_name(m));
    if (names.size() == 1) return "what is the " + names[0] + " quality value of this image?";
    return "what are the " + join_names(names) + " quality values of this image?";
}

std::string reference_answer(std::span<const MeasureId> measures, std::span<const int> values) {
    std::string out;
    for (std::size_t i = 0; i < measures.size(); ++i) {
        const std::string name(quality::measure_name(measures[i]));
        const std::string value = std::to_string(values[i]);
        if (i == 0) {
            out = "The " + name + " measure has the value of " + value;
            continue;
        }
        out += i + 1 == measures.size() ? ", and " : ", ";
        out += name + " has the value of " + value;
    }
    return out + ".";
}

std::vector<EvalSample> generate_type1_dataset(const std::string& image_dir, int n, std::uint64_t seed,
                                               TemplateSet templates) {
    namespace fs = std::filesystem;
    std::vector<std::string> names;
    if (fs::is_directory(image_dir)) {
        for (const auto& entry : fs::directory_iterator(image_dir)) {
            const auto ext = entry.path().extension();
            if (entry.is_regular_file() && (ext == ".png" || ext == ".ppm")) {
                names.push_back(entry.path().filename().string());
            }
        }
    }
    std::sort(names.begin(), names.end());

    struct Valued {
        std::string name;
        std::map<MeasureId, int> quality;
    };
    std::vector<Valued> images;
    for (const auto& name : names) {
        image::LoadedImage loaded;
        try {
            loaded = image::load_image_with_annotation((fs::path(image_dir) / name).string());
        } catch (const Error& e) {
            if (e.code() == ErrorCode::UnsupportedFormat || e.code() == ErrorCode::CorruptImage) continue;
            throw;
        }
        const auto report = quality::assess(loaded.image, loaded.annotation, quality::shipped_measures(), name);
        Valued v{name, {}};
        for (auto m : quality::shipped_measures()) v.quality[m] = report.find(m)->quality;
        images.push_back(std::move(v));
    }
    if (images.empty()) throw Error(ErrorCode::NoImages, "no decodable images in " + image_dir);

    std::mt19937_64 rng(seed);
    const auto shipped = quality::shipped_measures();
    std::vector<EvalSample> out;
    out.reserve(static_cast<std::size_t>(std::max(n, 0)));
    for (int i = 0; i < n; ++i) {
        const auto& img = images[synthetic::uniform_below(rng, images.size())];
        const std::size_t count = 1 + synthetic::uniform_below(rng, 3);
        std::vector<MeasureId> pool(shipped.begin(), shipped.end());
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t j = k + synthetic::uniform_below(rng, pool.size() - k);
            std::swap(pool[k], pool[j]);
        }
        pool.resize(count);

        EvalSample s;
        s.kind = SampleKind::Type1;
        s.image = img.name;
        s.expected_tools = pool;
        std::vector<int> values;
        for (auto m : pool) values.push_back(img.quality.at(m));
        s.answer = reference_answer(pool, values);
        if (templates == TemplateSet::Canonical) {
            s.question = canonical_question(pool);
        } else {
            std::vector<std::string> phrased;
            for (auto m : pool) {
                const auto& table = paraphrase_names();
                const auto it = std::find_if(table.begin(), table.end(),
                                             [&](const ParaphraseNames& p) { return p.measure == m; });
                phrased.emplace_back(it->names[synthetic::uniform_below(rng, it->names.size())]);
            }
            s.question = paraphrase_question(phrased, rng);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::string to_jsonl(std::span<const EvalSample> samples) {
    std::string out;
    for (const auto& s : samples) {
        out += sample_to_json(s).dump();
        out += '\n';
    }
    return out;
}

std::vector<EvalSample> parse_jsonl(std::string_view text) {
    std::vector<EvalSample> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            out.push_back(sample_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<EvalSample> load_dataset(const std::string& path) { return parse_jsonl(read_text(path)); }

std::vector<EvalSample> load_type2_dataset(const std::string& path) {
    auto samples = load_dataset(path);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].kind != SampleKind::Type2) {
            throw Error(ErrorCode::ParseError, "record " + std::to_string(i + 1) + " is not a type2 sample");
        }
    }
    return samples;
}

void save_dataset(const std::string& path, std::span<const EvalSample> samples) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::NotFound, "cannot write dataset " + path);
    out << to_jsonl(samples);
}

double compute_tsa(std::span<const TurnLog> logs) {
    std::size_t expected = 0;
    std::size_t matched = 0;
    for (const auto& log : logs) {
        if (log.kind != SampleKind::Type1) continue;
        for (auto m : log.expected_tools) {
            ++expected;
            if (std::find(log.selected_tools.begin(), log.selected_tools.end(), m) != log.selected_tools.end()) {
                ++matched;
            }
        }
    }
    if (expected == 0) throw Error(ErrorCode::EmptyEvaluation, "no expected tool calls to score");
    return static_cast<double>(matched) / static_cast<double>(expected);
}

DistanceMetrics compute_distance_metrics(std::span<const TurnLog> logs) {
    double acd = 0.0;
    double qcd = 0.0;
    double ard = 0.0;
    std::size_t n = 0;
    for (const auto& log : logs) {
        if (log.kind != SampleKind::Type2) continue;
        const auto answer = embedding::embed_text(log.answer_text);
        ard += embedding::cosine_distance(answer, embedding::embed_text(log.reference_answer));
        const auto context = embedding::embed_text(log.context_text);
        if (context.is_zero()) {
            acd += 2.0;
            qcd += 2.0;
        } else {
            acd += embedding::cosine_distance(answer, context);
            qcd += embedding::cosine_distance(embedding::embed_text(log.question), context);
        }
        ++n;
    }
    if (n == 0) throw Error(ErrorCode::EmptyEvaluation, "no type2 samples to score");
    const double count = static_cast<double>(n);
    return {acd / count, qcd / count, ard / count};
}

std::size_t count_citation_violations(std::span<const TurnLog> logs) {
    std::size_t violations = 0;
    for (const auto& log : logs) {
        for (const auto& id : log.cited_ids) {
            if (std::find(log.retrieved_ids.begin(), log.retrieved_ids.end(), id) == log.retrieved_ids.end()) {
                ++violations;
            }
        }
    }
    return violations;
}

std::string context_text(std::span<const index::ScoredChunk> retrieved) {
    std::string out;
    for (std::size_t i = 0; i < retrieved.size(); ++i) {
        if (i > 0) out += '\n';
        out += retrieved[i].chunk.text;
    }
    return out;
}

MetricsReport summarize(std::span<const TurnLog> logs, std::string method) {
    MetricsReport r;
    r.method = std::move(method);
    for (const auto& log : logs) {
        if (log.kind == SampleKind::Type1) {
            ++r.type1_samples;
            for (auto m : log.expected_tools) {
                ++r.expected_tool_calls;
                if (std::find(log.selected_tools.begin(), log.selected_tools.end(), m) != log.selected_tools.end()) {
                    ++r.matched_tool_calls;
                }
            }
        } else {
            ++r.type2_samples;
        }
    }
    if (r.expected_tool_calls > 0) r.tsa = compute_tsa(logs);
    if (r.type2_samples > 0) {
        const auto d = compute_distance_metrics(logs);
        r.acd = d.acd;
        r.qcd = d.qcd;
        r.ard = d.ard;
    }
    return r;
}

EvalRun run_evaluation(std::span<const EvalSample> dataset, const EvalEnvironment& env) {
    if (dataset.empty()) throw Error(ErrorCode::EmptyEvaluation, "dataset is empty");
    if (env.index == nullptr || env.generator == nullptr) {
        throw Error(ErrorCode::ValidationError, "evaluation needs an index and a generator");
    }
    EvalRun run;
    run.logs.resize(dataset.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < dataset.size(); i = next++) {
            try {
                run.logs[i] = run_sample(i, dataset[i], env);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = dataset.size();
            }
        }
    };
    const int threads = std::clamp(env.threads, 1, 64);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    run.report = summarize(run.logs, env.method);
    return run;
}

std::string report_json(const MetricsReport& report) {
    json j;
    j["method"] = report.method;
    j["tsa"] = optional_number(report.tsa);
    j["acd"] = optional_number(report.acd);
    j["qcd"] = optional_number(report.qcd);
    j["ard"] = optional_number(report.ard);
    j["counts"] = {{"type1", report.type1_samples}, {"type2", report.type2_samples}};
    j["tool_calls"] = {{"expected", report.expected_tool_calls}, {"matched", report.matched_tool_calls}};
    return j.dump(2);
}

std::string report_table(std::span<const MetricsReport> reports) {
    std::size_t method_width = 6;
    for (const auto& r : reports) method_width = std::max(method_width, r.method.size());
    std::ostringstream os;
    auto row = [&](std::string_view method, const std::string& tsa, const std::string& acd,
                   const std::string& qcd, const std::string& ard) {
        os << method << std::string(method_width - method.size(), ' ');
        for (const auto* v : {&tsa, &acd, &qcd, &ard}) {
            os << " | " << *v << std::string(6 - std::min<std::size_t>(6, v->size()), ' ');
        }
        os << '\n';
    };
    row("Method", "TSA", "ACD", "QCD", "ARD");
    os << std::string(method_width, '-');
    for (int i = 0; i < 4; ++i) os << "-+-------";
    os << '\n';
    for (const auto& r : reports) {
        row(r.method, cell(r.tsa, 3), cell(r.acd, 3), cell(r.qcd, 3), cell(r.ard, 3));
    }
    return os.str();
}

}  // namespace faceqa::eval
