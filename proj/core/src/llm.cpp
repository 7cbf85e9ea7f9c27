#include "faceqa/llm.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cctype>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <set>

#include "faceqa/error.hpp"
#include "faceqa/json_io.hpp"

namespace faceqa::llm {

namespace {

constexpr std::string_view kMarkerOpen = "[src:";

std::string render_tools(const std::vector<ToolResult>& tools) {
    std::string out;
    for (std::size_t i = 0; i < tools.size(); ++i) {
        if (i > 0) out += " and ";
        out += i == 0 ? "The " : "the ";
        out += quality::measure_name(tools[i].measure);
        out += " measure has the value of ";
        out += std::to_string(tools[i].quality);
    }
    out += '.';
    return out;
}

std::string render_context(const ContextBlock& top) {
    return first_sentence(top.text) + " Source: " + top.doc_id + ", page " +
           std::to_string(top.page) + ", paragraph " + std::to_string(top.paragraph) + ". " +
           citation_marker(top.chunk_id);
}

struct ParsedUrl {
    std::string scheme_host_port;
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::BackendUnavailable, "LLM url must be absolute: " + url);
    }
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http") {
        throw Error(ErrorCode::BackendUnavailable, "unsupported LLM url scheme '" + scheme + "'");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string_view to_string(Role role) noexcept {
    return role == Role::User ? "user" : "assistant";
}

std::string citation_marker(std::string_view chunk_id) {
    return std::string(kMarkerOpen) + std::string(chunk_id) + "]";
}

GenerationResponse filter_citations(std::string text, const GenerationRequest& req) {
    std::set<std::string, std::less<>> allowed;
    for (const auto& b : req.context_blocks) allowed.insert(b.chunk_id);

    GenerationResponse resp;
    std::set<std::string, std::less<>> seen;
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto open = text.find(kMarkerOpen, pos);
        const auto close = open == std::string::npos ? open : text.find(']', open);
        if (open == std::string::npos || close == std::string::npos) {
            out.append(text, pos, std::string::npos);
            break;
        }
        out.append(text, pos, open - pos);
        const std::string id = text.substr(open + kMarkerOpen.size(), close - open - kMarkerOpen.size());
        if (allowed.contains(id)) {
            out.append(text, open, close - open + 1);
            if (seen.insert(id).second) resp.cited_chunk_ids.push_back(id);
        } else {
            spdlog::warn("dropping citation of unknown chunk '{}'", id);
            if (!out.empty() && out.back() == ' ') out.pop_back();
        }
        pos = close + 1;
    }
    resp.text = std::move(out);
    return resp;
}

std::string first_sentence(std::string_view text) {
    std::string collapsed;
    collapsed.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !collapsed.empty();
            continue;
        }
        if (pending_space) collapsed += ' ';
        pending_space = false;
        collapsed += c;
    }
    for (std::size_t i = 0; i < collapsed.size(); ++i) {
        const char c = collapsed[i];
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == collapsed.size() || collapsed[i + 1] == ' ')) {
            return collapsed.substr(0, i + 1);
        }
    }
    return collapsed;
}

GenerationResponse Generator::complete(const GenerationRequest& req) const {
    if (req.user_query.empty()) {
        throw Error(ErrorCode::ValidationError, "user query must not be empty");
    }
    return filter_citations(generate(req), req);
}

std::string ScriptedGenerator::generate(const GenerationRequest& req) const {
    if (req.tool_results.empty() && req.context_blocks.empty()) return std::string(kRefusal);
    std::string out;
    if (!req.tool_results.empty()) out = render_tools(req.tool_results);
    if (!req.context_blocks.empty()) {
        if (!out.empty()) out += ' ';
        out += render_context(req.context_blocks.front());
    }
    return out;
}

GenerationResponse scripted_complete(const GenerationRequest& req) {
    return ScriptedGenerator{}.complete(req);
}

std::optional<RemoteConfig> RemoteConfig::from_env() {
    const char* url = std::getenv("FACEQA_LLM_URL");
    if (url == nullptr || *url == '\0') return std::nullopt;
    RemoteConfig cfg;
    cfg.url = url;
    if (const char* key = std::getenv("FACEQA_LLM_KEY")) cfg.api_key = key;
    return cfg;
}

RemoteGenerator::RemoteGenerator(RemoteConfig config) : config_(std::move(config)) {}

std::string RemoteGenerator::generate(const GenerationRequest& req) const {
    const ParsedUrl url = parse_url(config_.url);
    httplib::Client client(url.scheme_host_port);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    const nlohmann::json body = req;
    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(url.path, headers, body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace), "application/json");
    if (!res) {
        const auto err = res.error();
        const bool timed_out =
            err == httplib::Error::ConnectionTimeout ||
            (err == httplib::Error::Read && std::chrono::steady_clock::now() - started >= config_.timeout);
        throw Error(timed_out ? ErrorCode::BackendTimeout : ErrorCode::BackendUnavailable,
                    "LLM backend request failed: " + httplib::to_string(err));
    }
    if (res->status != 200) {
        throw Error(ErrorCode::BackendUnavailable,
                    "LLM backend returned HTTP " + std::to_string(res->status));
    }
    try {
        const auto reply = nlohmann::json::parse(res->body);
        return reply.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BackendUnavailable, std::string("malformed LLM backend reply: ") + e.what());
    }
}

std::unique_ptr<Generator> make_generator_from_env() {
    if (auto cfg = RemoteConfig::from_env()) return std::make_unique<RemoteGenerator>(std::move(*cfg));
    return std::make_unique<ScriptedGenerator>();
}

}  // namespace faceqa::llm
