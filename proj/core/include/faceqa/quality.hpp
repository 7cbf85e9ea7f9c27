/// @file quality.hpp
/// @brief Face image quality measures: component values and the unified score.
///
/// Each component maps a pixel statistic ("raw") over the annotated face
/// region, or the background around it, to an integer quality in [0,100].
/// Every mapping rounds half away from zero.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faceqa/image.hpp"

namespace faceqa::quality {

enum class MeasureId {
    DynamicRange,
    OverExposure,
    UnderExposure,
    IlluminationUniformity,
    BackgroundUniformity,
    Sharpness,
    UnifiedQualityScore,
    // Registered for routing only; evaluating them raises MeasureUnavailable.
    ExpressionNeutrality,
    HeadPose,
    MouthClosed,
    FaceOcclusion,
};

/// Every registered measure, in registry order.
std::span<const MeasureId> all_measures() noexcept;
/// The six pixel-statistic components that feed the unified score.
std::span<const MeasureId> component_measures() noexcept;
/// Components plus the unified score: everything that can be computed.
std::span<const MeasureId> shipped_measures() noexcept;

bool is_available(MeasureId id) noexcept;

/// Wire identifier, e.g. "dynamic_range".
std::string_view measure_key(MeasureId id) noexcept;
/// Human-readable name used in questions and answers, e.g. "dynamic range".
std::string_view measure_name(MeasureId id) noexcept;
/// Throws Error(UnknownMeasure) for unregistered keys.
MeasureId parse_measure(std::string_view key);

/// Constants behind every mapping, centralised for reproducibility.
struct MeasureConfig {
    int entropy_bins = 256;
    double entropy_max_bits = 8.0;
    int over_exposure_threshold = 247;   // luma >= threshold counts as over-exposed
    int under_exposure_threshold = 8;    // luma <= threshold counts as under-exposed
    int uniformity_bins = 64;
    double background_sigma_scale = 64.0;
    double sharpness_midpoint = 500.0;
    double sharpness_scale = 150.0;
};

inline const MeasureConfig kDefaultConfig{};

struct QualityComponent {
    MeasureId measure = MeasureId::DynamicRange;
    double raw = 0.0;
    int quality = 0;

    bool operator==(const QualityComponent&) const = default;
};

struct QualityReport {
    std::string image_id;
    std::vector<QualityComponent> components;   // unique measure ids, request order
    std::optional<QualityComponent> unified;

    const QualityComponent* find(MeasureId id) const;
};

/// std::round semantics: halves go away from zero.
int round_quality(double value) noexcept;

using image::FaceAnnotation;
using image::LumaImage;

/// Shannon entropy of the face-region histogram, scaled to 8 bits.
QualityComponent dynamic_range(const LumaImage& img, const FaceAnnotation& ann,
                               const MeasureConfig& cfg = kDefaultConfig);
/// Share of face pixels at or above the over-exposure threshold.
QualityComponent over_exposure(const LumaImage& img, const FaceAnnotation& ann,
                               const MeasureConfig& cfg = kDefaultConfig);
/// Share of face pixels at or below the under-exposure threshold.
QualityComponent under_exposure(const LumaImage& img, const FaceAnnotation& ann,
                                const MeasureConfig& cfg = kDefaultConfig);
/// Histogram intersection between the left and right halves of the face.
/// For odd widths the middle column belongs to the left half.
QualityComponent illumination_uniformity(const LumaImage& img, const FaceAnnotation& ann,
                                         const MeasureConfig& cfg = kDefaultConfig);
/// Population standard deviation of luma outside the face region.
/// Throws Error(NoBackground) when the face region covers the whole image.
QualityComponent background_uniformity(const LumaImage& img, const FaceAnnotation& ann,
                                       const MeasureConfig& cfg = kDefaultConfig);
/// Variance of the 4-neighbour Laplacian over interior face pixels, mapped
/// through a logistic curve.
QualityComponent sharpness(const LumaImage& img, const FaceAnnotation& ann,
                           const MeasureConfig& cfg = kDefaultConfig);

/// Mean of the component qualities. Throws Error(EmptyComponents).
QualityComponent unified_quality_score(std::span<const QualityComponent> components);

/// Evaluates a single component measure (not the unified score).
QualityComponent evaluate(MeasureId id, const LumaImage& img, const FaceAnnotation& ann,
                          const MeasureConfig& cfg = kDefaultConfig);

/// Runs each requested measure. Requesting UnifiedQualityScore computes it
/// over all six components; only requested components appear in
/// `components`.
QualityReport assess(const LumaImage& img, const FaceAnnotation& ann,
                     std::span<const MeasureId> measures, std::string image_id = {},
                     const MeasureConfig& cfg = kDefaultConfig);

/// Same as assess, with string keys. Throws Error(UnknownMeasure).
QualityReport assess(const LumaImage& img, const FaceAnnotation& ann,
                     std::span<const std::string> measure_keys, std::string image_id = {},
                     const MeasureConfig& cfg = kDefaultConfig);

}  // namespace faceqa::quality
