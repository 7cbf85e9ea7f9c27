// Command-line front end: serve, ingest, assess, eval, make-images.
#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "faceqa/json_io.hpp"
#include "faceqa/service.hpp"
#include "faceqa/synthetic.hpp"

namespace fo = faceqa;
using nlohmann::json;

namespace {

void print(const json& j) { std::cout << j.dump(2, ' ', false, json::error_handler_t::replace) << '\n'; }

std::optional<std::string> snapshot_from(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("FACEQA_SNAPSHOT"); env != nullptr && *env != '\0') return std::string(env);
    return std::nullopt;
}

void load_index(fo::index::VectorIndex& index, const std::optional<std::string>& snapshot) {
    if (snapshot && std::filesystem::exists(*snapshot)) index.load(*snapshot);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"faceqa: face image quality assistant"};
    app.require_subcommand(1);

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string serve_corpus;
    std::string serve_snapshot;
    std::string data_dir = "data";
    serve->add_option("--port", port, "Listen port")->capture_default_str();
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--corpus", serve_corpus, "Corpus directory ingested at startup");
    serve->add_option("--snapshot", serve_snapshot, "Index snapshot path (overrides FACEQA_SNAPSHOT)");
    serve->add_option("--data-dir", data_dir, "Root for evaluation dataset references")->capture_default_str();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Chunk, embed and index a corpus directory");
    std::string ingest_dir;
    std::string ingest_snapshot;
    ingest->add_option("dir", ingest_dir, "Corpus directory")->required();
    ingest->add_option("--snapshot", ingest_snapshot, "Index snapshot to update");

    // assess
    auto* assess = app.add_subcommand("assess", "Quality report for one image");
    std::string image_path;
    std::vector<std::string> measures;
    std::string facebox;
    assess->add_option("image", image_path, "PNG or PPM image")->required();
    assess->add_option("--measures", measures, "Measure keys")->delimiter(',');
    assess->add_option("--facebox", facebox, "Face region as l,t,w,h");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Run an evaluation and print the metrics report");
    std::string dataset;
    std::string type1_dir;
    int n = 200;
    std::uint64_t seed = 0;
    bool paraphrase = false;
    bool baseline = false;
    int threads = 1;
    std::string eval_corpus;
    std::string eval_snapshot;
    std::string save_generated;
    eval_cmd->add_option("--dataset", dataset, "JSON Lines dataset");
    eval_cmd->add_option("--generate-type1", type1_dir, "Generate type 1 samples from this image directory");
    eval_cmd->add_option("--n", n, "Generated sample count")->capture_default_str();
    eval_cmd->add_option("--seed", seed, "Generation seed")->capture_default_str();
    eval_cmd->add_flag("--paraphrase", paraphrase, "Use paraphrased question templates");
    eval_cmd->add_flag("--baseline", baseline, "Also run with retrieval disabled");
    eval_cmd->add_option("--threads", threads, "Worker threads")->capture_default_str();
    eval_cmd->add_option("--corpus", eval_corpus, "Corpus directory to index");
    eval_cmd->add_option("--snapshot", eval_snapshot, "Index snapshot to load");
    eval_cmd->add_option("--save-generated", save_generated, "Write the generated type 1 samples here");

    // make-images
    auto* make_images = app.add_subcommand("make-images", "Write synthetic face images with facebox sidecars");
    std::string out_dir;
    int count = 12;
    std::uint64_t image_seed = 1;
    make_images->add_option("dir", out_dir, "Output directory")->required();
    make_images->add_option("--count", count)->capture_default_str();
    make_images->add_option("--seed", image_seed)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve) {
            fo::service::ServiceConfig cfg;
            cfg.snapshot_path = snapshot_from(serve_snapshot);
            cfg.data_dir = data_dir;
            fo::service::Service svc(cfg, fo::llm::make_generator_from_env());
            if (!serve_corpus.empty()) {
                auto docs = fo::corpus::load_corpus_dir(serve_corpus);
                const auto counts = svc.ingest(std::move(docs));
                spdlog::info("ingested {} documents, {} chunks", counts.documents, counts.chunks);
            }
            httplib::Server server;
            svc.mount(server);
            spdlog::info("listening on {}:{}", host, port);
            if (!server.listen(host, port)) {
                spdlog::error("cannot bind {}:{}", host, port);
                return 1;
            }
        } else if (*ingest) {
            fo::corpus::Corpus registry;
            fo::index::VectorIndex index;
            const auto snapshot = snapshot_from(ingest_snapshot);
            load_index(index, snapshot);
            const auto counts =
                fo::service::ingest_documents(registry, index, fo::corpus::load_corpus_dir(ingest_dir));
            if (snapshot) index.save(*snapshot);
            print({{"documents", counts.documents}, {"chunks", counts.chunks}, {"index_size", index.size()}});
        } else if (*assess) {
            std::optional<fo::image::FaceAnnotation> ann;
            if (!facebox.empty()) {
                ann = fo::service::parse_facebox_arg(facebox);
            } else if (const auto sidecar = fo::image::facebox_path_for(image_path);
                       std::filesystem::exists(sidecar)) {
                const auto text = fo::image::read_file_bytes(sidecar);
                ann = fo::image::parse_facebox(std::string(text.begin(), text.end()));
            }
            print(fo::service::assess_payload(fo::image::read_file_bytes(image_path), ann, measures,
                                              std::filesystem::path(image_path).filename().string()));
        } else if (*eval_cmd) {
            std::vector<fo::eval::EvalSample> samples;
            if (!type1_dir.empty()) {
                samples = fo::eval::generate_type1_dataset(
                    type1_dir, n, seed,
                    paraphrase ? fo::eval::TemplateSet::Paraphrase : fo::eval::TemplateSet::Canonical);
                if (!save_generated.empty()) fo::eval::save_dataset(save_generated, samples);
            }
            if (!dataset.empty()) {
                auto loaded = fo::eval::load_dataset(dataset);
                samples.insert(samples.end(), loaded.begin(), loaded.end());
            }
            fo::index::VectorIndex index;
            load_index(index, snapshot_from(eval_snapshot));
            if (!eval_corpus.empty()) {
                fo::corpus::Corpus registry;
                fo::service::ingest_documents(registry, index, fo::corpus::load_corpus_dir(eval_corpus));
            }
            const fo::llm::ScriptedGenerator scripted;
            fo::eval::EvalEnvironment env;
            env.index = &index;
            env.generator = &scripted;
            env.image_root = type1_dir;
            env.threads = threads;
            std::vector<fo::eval::MetricsReport> reports{fo::eval::run_evaluation(samples, env).report};
            if (baseline) {
                env.agent_config.retrieval_enabled = false;
                env.method = "no-retrieval";
                reports.push_back(fo::eval::run_evaluation(samples, env).report);
            }
            json out = json::parse(fo::eval::report_json(reports.front()));
            if (baseline) out["baseline"] = json::parse(fo::eval::report_json(reports.back()));
            out["table"] = fo::eval::report_table(reports);
            print(out);
        } else if (*make_images) {
            for (const auto& path : fo::synthetic::write_face_set(out_dir, count, image_seed)) {
                std::cout << path << '\n';
            }
        }
    } catch (const fo::Error& e) {
        std::cerr << fo::service::map_error(e).to_json().dump(2) << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
