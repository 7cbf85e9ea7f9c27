#include "faceqa/quality.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "faceqa/error.hpp"

namespace faceqa::quality {

namespace {

struct MeasureInfo {
    MeasureId id;
    std::string_view key;
    std::string_view name;
    bool available;
};

constexpr std::array kRegistry = {
    MeasureInfo{MeasureId::DynamicRange, "dynamic_range", "dynamic range", true},
    MeasureInfo{MeasureId::OverExposure, "over_exposure", "over-exposure", true},
    MeasureInfo{MeasureId::UnderExposure, "under_exposure", "under-exposure", true},
    MeasureInfo{MeasureId::IlluminationUniformity, "illumination_uniformity",
                "illumination uniformity", true},
    MeasureInfo{MeasureId::BackgroundUniformity, "background_uniformity",
                "background uniformity", true},
    MeasureInfo{MeasureId::Sharpness, "sharpness", "sharpness", true},
    MeasureInfo{MeasureId::UnifiedQualityScore, "unified_quality_score",
                "unified quality score", true},
    MeasureInfo{MeasureId::ExpressionNeutrality, "expression_neutrality",
                "expression neutrality", false},
    MeasureInfo{MeasureId::HeadPose, "head_pose", "head pose", false},
    MeasureInfo{MeasureId::MouthClosed, "mouth_closed", "mouth closed", false},
    MeasureInfo{MeasureId::FaceOcclusion, "face_occlusion", "face occlusion", false},
};

constexpr std::array kAll = {
    MeasureId::DynamicRange,         MeasureId::OverExposure,
    MeasureId::UnderExposure,        MeasureId::IlluminationUniformity,
    MeasureId::BackgroundUniformity, MeasureId::Sharpness,
    MeasureId::UnifiedQualityScore,  MeasureId::ExpressionNeutrality,
    MeasureId::HeadPose,             MeasureId::MouthClosed,
    MeasureId::FaceOcclusion,
};

const MeasureInfo& info(MeasureId id) {
    for (const auto& m : kRegistry) {
        if (m.id == id) return m;
    }
    throw Error(ErrorCode::UnknownMeasure, "unregistered measure id");
}

template <typename Fn>
void for_each_face_pixel(const LumaImage& img, const image::Rect& r, Fn&& fn) {
    for (int y = r.top; y < r.bottom(); ++y) {
        for (int x = r.left; x < r.right(); ++x) fn(img.at(x, y));
    }
}

QualityComponent exposure(MeasureId id, const LumaImage& img, const FaceAnnotation& ann,
                          auto&& is_extreme) {
    ann.validate(img);
    std::size_t hits = 0;
    std::size_t total = 0;
    for_each_face_pixel(img, ann.face_region, [&](std::uint8_t v) {
        hits += is_extreme(v) ? 1 : 0;
        ++total;
    });
    const double p = static_cast<double>(hits) / static_cast<double>(total);
    return {id, p, round_quality(100.0 * (1.0 - p))};
}

std::vector<double> normalized_histogram(const LumaImage& img, int x0, int x1, int y0, int y1,
                                         int bins) {
    std::vector<double> hist(bins, 0.0);
    const int width = 256 / bins;
    std::size_t n = 0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            hist[img.at(x, y) / width] += 1.0;
            ++n;
        }
    }
    for (double& h : hist) h /= static_cast<double>(n);
    return hist;
}

}  // namespace

std::span<const MeasureId> all_measures() noexcept { return kAll; }
std::span<const MeasureId> component_measures() noexcept { return std::span(kAll).first(6); }
std::span<const MeasureId> shipped_measures() noexcept { return std::span(kAll).first(7); }

bool is_available(MeasureId id) noexcept { return info(id).available; }
std::string_view measure_key(MeasureId id) noexcept { return info(id).key; }
std::string_view measure_name(MeasureId id) noexcept { return info(id).name; }

MeasureId parse_measure(std::string_view key) {
    for (const auto& m : kRegistry) {
        if (m.key == key) return m.id;
    }
    throw Error(ErrorCode::UnknownMeasure, "unknown measure '" + std::string(key) + "'");
}

const QualityComponent* QualityReport::find(MeasureId id) const {
    if (id == MeasureId::UnifiedQualityScore && unified) return &*unified;
    for (const auto& c : components) {
        if (c.measure == id) return &c;
    }
    return nullptr;
}

int round_quality(double value) noexcept {
    return static_cast<int>(std::clamp(std::round(value), 0.0, 100.0));
}

QualityComponent dynamic_range(const LumaImage& img, const FaceAnnotation& ann,
                               const MeasureConfig& cfg) {
    ann.validate(img);
    const auto hist = normalized_histogram(img, ann.face_region.left, ann.face_region.right(),
                                           ann.face_region.top, ann.face_region.bottom(),
                                           cfg.entropy_bins);
    double entropy = 0.0;
    for (double p : hist) {
        if (p > 0.0) entropy -= p * std::log2(p);
    }
    // -0.0 for a single occupied bin
    entropy = std::abs(entropy);
    return {MeasureId::DynamicRange, entropy,
            round_quality(100.0 * std::min(1.0, entropy / cfg.entropy_max_bits))};
}

QualityComponent over_exposure(const LumaImage& img, const FaceAnnotation& ann,
                               const MeasureConfig& cfg) {
    return exposure(MeasureId::OverExposure, img, ann,
                    [t = cfg.over_exposure_threshold](std::uint8_t v) { return v >= t; });
}

QualityComponent under_exposure(const LumaImage& img, const FaceAnnotation& ann,
                                const MeasureConfig& cfg) {
    return exposure(MeasureId::UnderExposure, img, ann,
                    [t = cfg.under_exposure_threshold](std::uint8_t v) { return v <= t; });
}

QualityComponent illumination_uniformity(const LumaImage& img, const FaceAnnotation& ann,
                                         const MeasureConfig& cfg) {
    ann.validate(img);
    const image::Rect& r = ann.face_region;
    const int split = r.left + (r.width + 1) / 2;
    const auto left = normalized_histogram(img, r.left, split, r.top, r.bottom(),
                                           cfg.uniformity_bins);
    const auto right = normalized_histogram(img, split, r.right(), r.top, r.bottom(),
                                            cfg.uniformity_bins);
    double overlap = 0.0;
    for (int b = 0; b < cfg.uniformity_bins; ++b) overlap += std::min(left[b], right[b]);
    return {MeasureId::IlluminationUniformity, overlap, round_quality(100.0 * overlap)};
}

QualityComponent background_uniformity(const LumaImage& img, const FaceAnnotation& ann,
                                       const MeasureConfig& cfg) {
    ann.validate(img);
    const image::Rect& r = ann.face_region;
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (r.contains(x, y)) continue;
            sum += img.at(x, y);
            ++n;
        }
    }
    if (n == 0) {
        throw Error(ErrorCode::NoBackground, "face region covers the entire image");
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (r.contains(x, y)) continue;
            const double d = img.at(x, y) - mean;
            ss += d * d;
        }
    }
    const double sigma = std::sqrt(ss / static_cast<double>(n));
    return {MeasureId::BackgroundUniformity, sigma,
            round_quality(100.0 * std::max(0.0, 1.0 - sigma / cfg.background_sigma_scale))};
}

QualityComponent sharpness(const LumaImage& img, const FaceAnnotation& ann,
                           const MeasureConfig& cfg) {
    ann.validate(img);
    const image::Rect& r = ann.face_region;
    std::vector<double> lap;
    lap.reserve(static_cast<std::size_t>(r.width - 2) * (r.height - 2));
    for (int y = r.top + 1; y < r.bottom() - 1; ++y) {
        for (int x = r.left + 1; x < r.right() - 1; ++x) {
            lap.push_back(4.0 * img.at(x, y) - img.at(x - 1, y) - img.at(x + 1, y) -
                          img.at(x, y - 1) - img.at(x, y + 1));
        }
    }
    const double n = static_cast<double>(lap.size());
    const double mean = std::accumulate(lap.begin(), lap.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : lap) ss += (v - mean) * (v - mean);
    const double variance = ss / n;
    const double q =
        100.0 / (1.0 + std::exp(-(variance - cfg.sharpness_midpoint) / cfg.sharpness_scale));
    return {MeasureId::Sharpness, variance, round_quality(q)};
}

QualityComponent unified_quality_score(std::span<const QualityComponent> components) {
    if (components.empty()) {
        throw Error(ErrorCode::EmptyComponents, "unified score needs at least one component");
    }
    double sum = 0.0;
    for (const auto& c : components) sum += c.quality;
    const double mean = sum / static_cast<double>(components.size());
    return {MeasureId::UnifiedQualityScore, mean, round_quality(mean)};
}

QualityComponent evaluate(MeasureId id, const LumaImage& img, const FaceAnnotation& ann,
                          const MeasureConfig& cfg) {
    switch (id) {
        case MeasureId::DynamicRange: return dynamic_range(img, ann, cfg);
        case MeasureId::OverExposure: return over_exposure(img, ann, cfg);
        case MeasureId::UnderExposure: return under_exposure(img, ann, cfg);
        case MeasureId::IlluminationUniformity: return illumination_uniformity(img, ann, cfg);
        case MeasureId::BackgroundUniformity: return background_uniformity(img, ann, cfg);
        case MeasureId::Sharpness: return sharpness(img, ann, cfg);
        case MeasureId::UnifiedQualityScore: {
            std::vector<QualityComponent> parts;
            for (MeasureId c : component_measures()) parts.push_back(evaluate(c, img, ann, cfg));
            return unified_quality_score(parts);
        }
        case MeasureId::ExpressionNeutrality:
        case MeasureId::HeadPose:
        case MeasureId::MouthClosed:
        case MeasureId::FaceOcclusion:
            break;
    }
    throw Error(ErrorCode::MeasureUnavailable,
                "measure '" + std::string(measure_key(id)) + "' requires a face model and is not available");
}

QualityReport assess(const LumaImage& img, const FaceAnnotation& ann,
                     std::span<const MeasureId> measures, std::string image_id,
                     const MeasureConfig& cfg) {
    QualityReport report;
    report.image_id = std::move(image_id);
    for (MeasureId id : measures) {
        if (id == MeasureId::UnifiedQualityScore) {
            if (!report.unified) report.unified = evaluate(id, img, ann, cfg);
            continue;
        }
        if (report.find(id) != nullptr) continue;
        report.components.push_back(evaluate(id, img, ann, cfg));
    }
    return report;
}

QualityReport assess(const LumaImage& img, const FaceAnnotation& ann,
                     std::span<const std::string> measure_keys, std::string image_id,
                     const MeasureConfig& cfg) {
    std::vector<MeasureId> ids;
    ids.reserve(measure_keys.size());
    for (const auto& key : measure_keys) ids.push_back(parse_measure(key));
    return assess(img, ann, ids, std::move(image_id), cfg);
}

}  // namespace faceqa::quality
