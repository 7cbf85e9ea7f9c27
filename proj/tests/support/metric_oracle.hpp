#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <vector>

#include "faceqa/eval.hpp"
#include "oracles.hpp"

namespace oracle {

struct Metrics {
    std::optional<double> tsa, acd, qcd, ard;
};

/// Brute-force recomputation of the four metrics straight from turn logs.
inline Metrics recompute(const std::vector<faceqa::eval::TurnLog>& logs) {
    using faceqa::eval::SampleKind;
    Metrics m;
    long expected = 0, hit = 0;
    std::vector<double> acd, qcd, ard;
    for (const auto& log : logs) {
        if (log.kind == SampleKind::Type1) {
            std::set<faceqa::quality::MeasureId> selected(log.selected_tools.begin(), log.selected_tools.end());
            for (auto t : log.expected_tools) {
                ++expected;
                hit += selected.count(t) ? 1 : 0;
            }
            continue;
        }
        const auto a = embed(log.answer_text);
        const auto c = embed(log.context_text);
        ard.push_back(cosine_distance(a, embed(log.reference_answer)));
        acd.push_back(all_zero(c) ? 2.0 : cosine_distance(a, c));
        qcd.push_back(all_zero(c) ? 2.0 : cosine_distance(embed(log.question), c));
    }
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    if (expected > 0) m.tsa = static_cast<double>(hit) / static_cast<double>(expected);
    if (!ard.empty()) {
        m.acd = mean(acd);
        m.qcd = mean(qcd);
        m.ard = mean(ard);
    }
    return m;
}

inline bool close(const std::optional<double>& a, const std::optional<double>& b, double tol) {
    if (a.has_value() != b.has_value()) return false;
    return !a || std::abs(*a - *b) <= tol;
}

}  // namespace oracle
