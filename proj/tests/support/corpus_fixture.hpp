#pragma once

#include "faceqa/corpus.hpp"
#include "faceqa/service.hpp"
#include "faceqa/vector_index.hpp"
#include "test_util.hpp"

namespace testutil {

/// Index over the shipped reference corpus, built once per process.
inline const faceqa::index::VectorIndex& shipped_index() {
    static faceqa::index::VectorIndex idx;
    static const bool built = [] {
        faceqa::corpus::Corpus registry;
        faceqa::service::ingest_documents(registry, idx,
                                              faceqa::corpus::load_corpus_dir(data_dir() + "/corpus"));
        return true;
    }();
    (void)built;
    return idx;
}

}  // namespace testutil
