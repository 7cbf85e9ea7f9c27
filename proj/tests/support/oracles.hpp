// Independent reference computations used as test oracles. Nothing here
// calls into the library under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

inline long long round_half_away(double v) {
    // floor/ceil form, deliberately not std::round
    return v >= 0 ? static_cast<long long>(std::floor(v + 0.5)) : static_cast<long long>(std::ceil(v - 0.5));
}

inline int quality_of(double v) {
    return static_cast<int>(std::clamp<long long>(round_half_away(v), 0, 100));
}

struct Gray {
    int w = 0;
    int h = 0;
    std::vector<int> px;
    int at(int x, int y) const { return px[static_cast<std::size_t>(y) * w + x]; }
};

struct Box {
    int l, t, w, h;
    bool inside(int x, int y) const { return x >= l && x < l + w && y >= t && y < t + h; }
};

inline double entropy_bits(const Gray& g, Box b) {
    std::map<int, int> counts;
    for (int y = b.t; y < b.t + b.h; ++y)
        for (int x = b.l; x < b.l + b.w; ++x) counts[g.at(x, y)]++;
    const double n = static_cast<double>(b.w) * b.h;
    double h = 0;
    for (auto& [v, c] : counts) {
        const double p = c / n;
        h -= p * std::log2(p);
    }
    return h == 0.0 ? 0.0 : h;
}

inline double proportion(const Gray& g, Box b, bool over) {
    int hits = 0;
    for (int y = b.t; y < b.t + b.h; ++y)
        for (int x = b.l; x < b.l + b.w; ++x) {
            const int v = g.at(x, y);
            if (over ? v >= 247 : v <= 8) ++hits;
        }
    return static_cast<double>(hits) / (static_cast<double>(b.w) * b.h);
}

inline double halves_intersection(const Gray& g, Box b) {
    const int left_w = (b.w + 1) / 2;
    std::vector<double> hl(64, 0), hr(64, 0);
    double nl = 0, nr = 0;
    for (int y = b.t; y < b.t + b.h; ++y)
        for (int x = b.l; x < b.l + b.w; ++x) {
            if (x - b.l < left_w) {
                hl[g.at(x, y) / 4] += 1;
                nl += 1;
            } else {
                hr[g.at(x, y) / 4] += 1;
                nr += 1;
            }
        }
    double s = 0;
    for (int i = 0; i < 64; ++i) s += std::min(hl[i] / nl, hr[i] / nr);
    return s;
}

inline double background_sigma(const Gray& g, Box b) {
    std::vector<double> vals;
    for (int y = 0; y < g.h; ++y)
        for (int x = 0; x < g.w; ++x)
            if (!b.inside(x, y)) vals.push_back(g.at(x, y));
    double mean = 0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0;
    for (double v : vals) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(vals.size()));
}

inline double laplacian_variance(const Gray& g, Box b) {
    std::vector<double> lap;
    for (int y = b.t + 1; y < b.t + b.h - 1; ++y)
        for (int x = b.l + 1; x < b.l + b.w - 1; ++x)
            lap.push_back(4.0 * g.at(x, y) - g.at(x - 1, y) - g.at(x + 1, y) - g.at(x, y - 1) - g.at(x, y + 1));
    double mean = 0;
    for (double v : lap) mean += v;
    mean /= static_cast<double>(lap.size());
    double var = 0;
    for (double v : lap) var += (v - mean) * (v - mean);
    return var / static_cast<double>(lap.size());
}

inline double sharpness_quality_real(double variance) { return 100.0 / (1.0 + std::exp(-(variance - 500.0) / 150.0)); }

// ---- text embedding ----

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::vector<std::string> words(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        const bool keep = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
        if (keep) {
            cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c + 32) : static_cast<char>(c));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline std::vector<double> embed(std::string_view text) {
    std::vector<double> v(256, 0.0);
    for (const auto& w : words(text)) {
        const auto h = fnv1a(w);
        v[h % 256] += (h >> 63) ? -1.0 : 1.0;
    }
    double n = 0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n > 0)
        for (double& x : v) x /= n;
    return v;
}

inline double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::clamp(1.0 - d / (std::sqrt(na) * std::sqrt(nb)), 0.0, 2.0);
}

inline bool all_zero(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

// ---- retrieval ----

struct Item {
    std::string id;
    std::vector<double> vec;
};

/// Full scan plus full sort; similarity evaluated the same way a reader of
/// the ranking contract would (dot over the product of norms).
inline std::vector<std::string> linear_scan(const std::vector<Item>& items, const std::vector<double>& q, int k) {
    double qn = 0;
    for (double x : q) qn += x * x;
    qn = std::sqrt(qn);
    std::vector<std::pair<double, std::string>> scored;
    for (const auto& it : items) {
        double vn = 0, d = 0;
        for (double x : it.vec) vn += x * x;
        vn = std::sqrt(vn);
        if (vn == 0) continue;
        for (std::size_t i = 0; i < q.size(); ++i) d += q[i] * it.vec[i];
        scored.emplace_back(1.0 - std::clamp(1.0 - d / (qn * vn), 0.0, 2.0), it.id);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < scored.size() && static_cast<int>(i) < k; ++i) out.push_back(scored[i].second);
    return out;
}

// ---- documents ----

/// Code points of a UTF-8 string as separate byte strings.
inline std::vector<std::string> code_points(std::string_view s) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < s.size();) {
        const unsigned char c = s[i];
        const std::size_t len = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
        out.emplace_back(s.substr(i, len));
        i += len;
    }
    return out;
}

inline bool is_ws(const std::string& cp) { return cp == " " || cp == "\t" || cp == "\n" || cp == "\r"; }

/// Blocks started at or before `offset`: a block starts at a non-whitespace
/// code point that is the first non-whitespace one, or that follows a run of
/// whitespace containing at least two newlines.
inline int paragraph_at(std::string_view text, std::size_t offset) {
    const auto cps = code_points(text);
    int blocks = 0;
    bool seen_text = false;
    int newlines = 0;
    for (std::size_t i = 0; i < cps.size() && i <= offset; ++i) {
        if (is_ws(cps[i])) {
            if (cps[i] == "\n") ++newlines;
            continue;
        }
        if (!seen_text || newlines >= 2) ++blocks;
        seen_text = true;
        newlines = 0;
    }
    return std::max(blocks, 1);
}

inline int page_at(const std::vector<std::pair<std::size_t, int>>& marks, std::size_t offset) {
    int page = 1;
    for (const auto& [off, p] : marks)
        if (off <= offset) page = p;
    return page;
}

}  // namespace oracle
