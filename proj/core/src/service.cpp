#include "faceqa/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>

#include "faceqa/base64.hpp"
#include "faceqa/embedding.hpp"
#include "faceqa/json_io.hpp"

namespace faceqa::service {

namespace {

using json = nlohmann::json;

std::string random_session_id() {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                  static_cast<unsigned long long>(rng()));
    return buf;
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

void send_error(httplib::Response& res, const ApiError& err) { send_json(res, err.status, err.to_json()); }

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        send_error(res, map_error(e));
    } catch (const json::exception& e) {
        send_error(res, map_error(ErrorCode::ParseError, std::string("malformed JSON body: ") + e.what()));
    } catch (const std::exception& e) {
        spdlog::error("unhandled failure: {}", e.what());
        send_error(res, ApiError{500, "Internal", e.what(), nullptr});
    }
}

image::FaceAnnotation facebox_from_json(const json& j) {
    if (j.is_string()) return parse_facebox_arg(j.get<std::string>());
    if (!j.is_array() || j.size() != 4) {
        throw Error(ErrorCode::InvalidAnnotation, "facebox must be [left, top, width, height]");
    }
    image::FaceAnnotation ann;
    ann.face_region = {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
    return ann;
}

std::vector<std::uint8_t> decode_image_field(const std::string& text) {
    try {
        return base64::decode(text);
    } catch (const Error& e) {
        throw Error(ErrorCode::BadImage, std::string("image is not valid base64: ") + e.what());
    }
}

std::vector<std::uint8_t> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

/// Fields common to the message and assess routes, from JSON or multipart.
struct UploadFields {
    std::optional<std::string> text;
    std::optional<std::vector<std::uint8_t>> image;
    std::optional<image::FaceAnnotation> facebox;
    std::optional<std::vector<std::string>> measures;
};

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        auto part = s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
        while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
        if (!part.empty()) out.emplace_back(part);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

UploadFields read_upload(const httplib::Request& req) {
    UploadFields f;
    if (req.is_multipart_form_data()) {
        if (req.has_file("text")) f.text = req.get_file_value("text").content;
        if (req.has_file("image")) f.image = to_bytes(req.get_file_value("image").content);
        if (req.has_file("facebox")) f.facebox = parse_facebox_arg(req.get_file_value("facebox").content);
        if (req.has_file("measures")) f.measures = split_list(req.get_file_value("measures").content);
        return f;
    }
    const json body = json::parse(req.body.empty() ? std::string("{}") : req.body);
    if (!body.is_object()) throw Error(ErrorCode::ParseError, "request body must be a JSON object");
    if (auto it = body.find("text"); it != body.end()) f.text = it->get<std::string>();
    if (auto it = body.find("image"); it != body.end() && !it->is_null()) {
        f.image = decode_image_field(it->get<std::string>());
    }
    if (auto it = body.find("facebox"); it != body.end() && !it->is_null()) f.facebox = facebox_from_json(*it);
    if (auto it = body.find("measures"); it != body.end() && !it->is_null()) {
        f.measures = it->get<std::vector<std::string>>();
    }
    return f;
}

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnsupportedFormat:
        case ErrorCode::CorruptImage:
        case ErrorCode::BadImage:
        case ErrorCode::ParseError:
            return 400;
        case ErrorCode::SessionNotFound:
        case ErrorCode::NotFound:
            return 404;
        case ErrorCode::DuplicateDocId:
        case ErrorCode::Busy:
            return 409;
        case ErrorCode::InvalidAnnotation:
        case ErrorCode::NoBackground:
        case ErrorCode::EmptyComponents:
        case ErrorCode::UnknownMeasure:
        case ErrorCode::MeasureUnavailable:
        case ErrorCode::InvalidEncoding:
        case ErrorCode::InvalidChunkParams:
        case ErrorCode::ZeroVector:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::NoImageAttached:
        case ErrorCode::NoImages:
        case ErrorCode::EmptyEvaluation:
        case ErrorCode::ValidationError:
            return 422;
        case ErrorCode::BackendUnavailable:
            return 502;
        case ErrorCode::BackendTimeout:
            return 504;
    }
    return 500;
}

}  // namespace

json ApiError::to_json() const {
    json j = {{"code", code}, {"message", message}};
    j["detail"] = detail;
    return j;
}

ApiError map_error(ErrorCode code, const std::string& message) {
    ApiError err;
    err.status = status_for(code);
    err.message = message;
    if (code == ErrorCode::UnsupportedFormat || code == ErrorCode::CorruptImage) {
        err.code = "BadImage";
        err.detail = {{"cause", to_string(code)}};
    } else {
        err.code = std::string(to_string(code));
    }
    return err;
}

ApiError map_error(const Error& e) { return map_error(e.code(), e.what()); }

IngestCounts ingest_documents(corpus::Corpus& registry, index::VectorIndex& index,
                              std::vector<corpus::Document> docs, const corpus::ChunkParams& params) {
    std::set<std::string> batch_ids;
    for (const auto& d : docs) {
        if (registry.contains(d.doc_id) || !batch_ids.insert(d.doc_id).second) {
            throw Error(ErrorCode::DuplicateDocId, "document '" + d.doc_id + "' is already ingested");
        }
    }
    std::vector<index::IndexEntry> entries;
    for (const auto& d : docs) {
        for (auto& c : corpus::chunk_document(d, params)) {
            auto vec = embedding::embed_text(c.text);
            entries.push_back({std::move(c), std::move(vec)});
        }
    }
    IngestCounts counts{docs.size(), entries.size()};
    index.upsert(std::move(entries));
    for (auto& d : docs) registry.add(std::move(d));
    return counts;
}

image::FaceAnnotation parse_facebox_arg(std::string_view text) {
    std::vector<int> values;
    std::size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && (text[pos] == ',' || text[pos] == ' ' || text[pos] == '\n')) ++pos;
        if (pos == text.size()) break;
        int v = 0;
        const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), v);
        if (ec != std::errc{}) {
            throw Error(ErrorCode::InvalidAnnotation, "facebox must hold four integers: " + std::string(text));
        }
        values.push_back(v);
        pos = static_cast<std::size_t>(ptr - text.data());
    }
    if (values.size() != 4) {
        throw Error(ErrorCode::InvalidAnnotation, "facebox must hold four integers: " + std::string(text));
    }
    image::FaceAnnotation ann;
    ann.face_region = {values[0], values[1], values[2], values[3]};
    return ann;
}

json assess_payload(const std::vector<std::uint8_t>& image_bytes,
                    const std::optional<image::FaceAnnotation>& annotation,
                    const std::vector<std::string>& measure_keys, std::string image_id) {
    const auto img = image::decode_image(image_bytes);
    const auto ann = annotation.value_or(image::default_annotation(img.width(), img.height()));
    ann.validate(img);
    std::vector<std::string> keys = measure_keys;
    if (keys.empty()) {
        for (auto m : quality::shipped_measures()) keys.emplace_back(quality::measure_key(m));
    }
    json j = quality::assess(img, ann, std::span<const std::string>(keys), std::move(image_id));
    const auto& r = ann.face_region;
    j["metadata"] = {{"default_region", !annotation.has_value()},
                     {"face_region", {r.left, r.top, r.width, r.height}},
                     {"width", img.width()},
                     {"height", img.height()}};
    return j;
}

Service::Service(ServiceConfig config, std::unique_ptr<llm::Generator> generator)
    : config_(std::move(config)), generator_(std::move(generator)) {
    if (!generator_) generator_ = std::make_unique<llm::ScriptedGenerator>();
    if (config_.snapshot_path && std::filesystem::exists(*config_.snapshot_path)) {
        index_.load(*config_.snapshot_path);
        spdlog::info("loaded {} index entries from {}", index_.size(), *config_.snapshot_path);
    }
}

std::string Service::create_session() {
    std::lock_guard lock(sessions_mutex_);
    std::string id;
    do {
        id = random_session_id();
    } while (sessions_.contains(id));
    auto slot = std::make_shared<SessionSlot>();
    slot->session.session_id = id;
    sessions_.emplace(id, std::move(slot));
    return id;
}

std::size_t Service::session_count() const {
    std::lock_guard lock(sessions_mutex_);
    return sessions_.size();
}

agent::Answer Service::post_message(const std::string& session_id, const std::string& text,
                                    const std::optional<agent::ImageUpload>& upload) {
    std::shared_ptr<SessionSlot> slot;
    {
        std::lock_guard lock(sessions_mutex_);
        auto it = sessions_.find(session_id);
        if (it == sessions_.end()) throw Error(ErrorCode::SessionNotFound, "no session '" + session_id + "'");
        slot = it->second;
    }
    std::unique_lock turn(slot->turn_mutex, std::try_to_lock);
    if (!turn.owns_lock()) throw Error(ErrorCode::Busy, "session '" + session_id + "' is handling a message");
    if (text.empty()) throw Error(ErrorCode::ValidationError, "message text must not be empty");
    const agent::Agent agent(index_, *generator_, config_.agent_config);
    return agent.handle_turn(slot->session, text, upload);
}

IngestCounts Service::ingest(std::vector<corpus::Document> docs) {
    std::lock_guard lock(ingest_mutex_);
    const auto counts = ingest_documents(registry_, index_, std::move(docs));
    save_snapshot();
    return counts;
}

void Service::save_snapshot() const {
    if (!config_.snapshot_path) return;
    const std::string tmp = *config_.snapshot_path + ".tmp";
    index_.save(tmp);
    std::filesystem::rename(tmp, *config_.snapshot_path);
}

std::string Service::resolve_data_path(const std::string& ref) const {
    const std::filesystem::path rel(ref);
    if (ref.empty() || rel.is_absolute() ||
        std::any_of(rel.begin(), rel.end(), [](const auto& part) { return part == ".."; })) {
        throw Error(ErrorCode::ValidationError, "dataset reference must be a relative path inside the data directory");
    }
    const auto full = std::filesystem::path(config_.data_dir) / rel;
    if (!std::filesystem::exists(full)) throw Error(ErrorCode::NotFound, "not found: " + ref);
    return full.string();
}

eval::MetricsReport Service::run_eval(const std::string& dataset_ref, std::uint64_t seed,
                                      const std::optional<std::string>& type1_image_dir, int type1_n) {
    std::vector<eval::EvalSample> samples;
    std::string image_root;
    if (type1_image_dir) {
        image_root = resolve_data_path(*type1_image_dir);
        samples = eval::generate_type1_dataset(image_root, type1_n, seed);
    }
    if (!dataset_ref.empty()) {
        auto loaded = eval::load_dataset(resolve_data_path(dataset_ref));
        samples.insert(samples.end(), loaded.begin(), loaded.end());
    }
    const llm::ScriptedGenerator scripted;
    eval::EvalEnvironment env;
    env.index = &index_;
    env.generator = &scripted;
    env.agent_config = config_.agent_config;
    env.image_root = image_root;
    return eval::run_evaluation(samples, env).report;
}

void Service::mount(httplib::Server& server) {
    server.set_payload_max_length(64u << 20);
    server.set_default_headers({{"Access-Control-Allow-Origin", config_.cors_origin},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"status", "ok"}, {"index_size", index_.size()}, {"sessions", session_count()}});
    });

    server.Post("/sessions", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 201, {{"session_id", create_session()}}); });
    });

    server.Post(R"(/sessions/([^/]+)/messages)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string session_id = req.matches[1];
            auto fields = read_upload(req);
            std::optional<agent::ImageUpload> upload;
            if (fields.image) upload = agent::ImageUpload{std::move(*fields.image), fields.facebox};
            const auto answer = post_message(session_id, fields.text.value_or(""), upload);
            json body = answer;
            body["session_id"] = session_id;
            send_json(res, 200, body);
        });
    });

    server.Post("/corpus/documents", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = json::parse(req.body);
            std::vector<corpus::Document> docs;
            for (const auto& d : body.at("documents")) {
                docs.push_back(corpus::parse_corpus_file(d.at("name").get<std::string>(),
                                                         d.at("content").get<std::string>()));
            }
            const auto counts = ingest(std::move(docs));
            send_json(res, 200, {{"documents", counts.documents}, {"chunks", counts.chunks}});
        });
    });

    server.Post("/assess", [](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto fields = read_upload(req);
            if (!fields.image) throw Error(ErrorCode::BadImage, "an image is required");
            send_json(res, 200, assess_payload(*fields.image, fields.facebox, fields.measures.value_or(std::vector<std::string>{})));
        });
    });

    server.Post("/eval/run", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = json::parse(req.body.empty() ? std::string("{}") : req.body);
            const auto dataset = body.value("dataset", std::string{});
            const auto seed = body.value("seed", std::uint64_t{0});
            std::optional<std::string> image_dir;
            int n = 0;
            if (auto it = body.find("generate_type1"); it != body.end() && !it->is_null()) {
                image_dir = it->at("image_dir").get<std::string>();
                n = it->value("n", 0);
            }
            if (dataset.empty() && !image_dir) {
                throw Error(ErrorCode::ValidationError, "either dataset or generate_type1 is required");
            }
            const auto report = run_eval(dataset, seed, image_dir, n);
            json out = json::parse(eval::report_json(report));
            out["table"] = eval::report_table(std::span(&report, 1));
            send_json(res, 200, out);
        });
    });
}

}  // namespace faceqa::service
