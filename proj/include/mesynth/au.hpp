#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "mesynth/error.hpp"

namespace mesynth {

// Domain vocabulary: the fixed 17-entry AU index set, intensity vectors in
// [0,1]^17, the unified 3-class emotion space, and AU triplets.

inline constexpr std::size_t kNumAus = 17;

// FACS AU numbers, in pipeline order. Fixed for the whole pipeline.
inline constexpr std::array<int, kNumAus> kAuNumbers = {
    1, 2, 4, 5, 6, 7, 9, 10, 12, 14, 15, 17, 20, 23, 25, 26, 45};

inline std::optional<std::size_t> au_position(int au_number) {
    for (std::size_t i = 0; i < kNumAus; ++i) {
        if (kAuNumbers[i] == au_number) return i;
    }
    return std::nullopt;
}

// 17 AU intensities, each in [0,1], positionally aligned with kAuNumbers.
class AuVector {
public:
    AuVector() : values_{} {}

    explicit AuVector(const std::array<double, kNumAus>& values) : values_(values) {
        validate();
    }

    static AuVector zero() { return AuVector(); }

    double operator[](std::size_t i) const { return values_[i]; }
    const std::array<double, kNumAus>& values() const { return values_; }

    // Intensity of a FACS AU number (not a position).
    double at_au(int au_number) const {
        auto pos = au_position(au_number);
        if (!pos) fail("UnknownAu", "AU" + std::to_string(au_number) + " is not in the AU set");
        return values_[*pos];
    }

    bool is_zero() const {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
    }

    friend bool operator==(const AuVector&, const AuVector&) = default;

private:
    void validate() const {
        for (std::size_t i = 0; i < kNumAus; ++i) {
            double v = values_[i];
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                fail("InvalidIntensity",
                     "AU" + std::to_string(kAuNumbers[i]) + " intensity " + std::to_string(v) +
                         " outside [0,1]");
            }
        }
    }

    std::array<double, kNumAus> values_;
};

// Bridges raw extractor intensity scales (OpenFace emits 0-5) to [0,1].
inline double normalize_intensity(double raw, double scale_max = 5.0) {
    if (!std::isfinite(raw)) fail("InvalidIntensity", "non-finite raw intensity");
    if (!(scale_max > 0.0)) fail("InvalidIntensity", "scale-max must be positive");
    return std::clamp(raw / scale_max, 0.0, 1.0);
}

enum class EmotionClass : int { Positive = 0, Negative = 1, Surprise = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<EmotionClass, kNumClasses> kEmotionClasses = {
    EmotionClass::Positive, EmotionClass::Negative, EmotionClass::Surprise};

inline std::string_view to_string(EmotionClass c) {
    switch (c) {
        case EmotionClass::Positive: return "positive";
        case EmotionClass::Negative: return "negative";
        case EmotionClass::Surprise: return "surprise";
    }
    fail("InvalidClass", "unrepresentable emotion class");
}

inline EmotionClass parse_emotion_class(std::string_view s) {
    if (s == "positive") return EmotionClass::Positive;
    if (s == "negative") return EmotionClass::Negative;
    if (s == "surprise") return EmotionClass::Surprise;
    fail("InvalidClass", "unknown emotion class '" + std::string(s) + "'");
}

enum class SourceTag : int { MiE = 0, MaE = 1, Expert = 2 };

inline constexpr std::size_t kNumSources = 3;
inline constexpr std::array<SourceTag, kNumSources> kSourceTags = {
    SourceTag::MiE, SourceTag::MaE, SourceTag::Expert};

inline std::string_view to_string(SourceTag s) {
    switch (s) {
        case SourceTag::MiE: return "mie";
        case SourceTag::MaE: return "mae";
        case SourceTag::Expert: return "expert";
    }
    fail("InvalidSource", "unrepresentable source tag");
}

inline SourceTag parse_source_tag(std::string_view s) {
    if (s == "mie") return SourceTag::MiE;
    if (s == "mae") return SourceTag::MaE;
    if (s == "expert") return SourceTag::Expert;
    fail("InvalidSource", "unknown source tag '" + std::string(s) + "'");
}

inline std::string lower_trim(std::string_view raw) {
    std::size_t b = raw.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    std::size_t e = raw.find_last_not_of(" \t\r\n");
    std::string out(raw.substr(b, e - b + 1));
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Raw label string -> emotion class. Total over its configured vocabulary;
// unknown labels are a hard error, never silently dropped.
class LabelMap {
public:
    LabelMap() = default;

    void add(std::string_view raw, EmotionClass c) {
        std::string key = lower_trim(raw);
        if (key.empty()) fail("UnknownLabel", "empty raw label in map");
        table_[key] = c;
    }

    // Valence-convention merge of the common 5/6-class label spaces into
    // {positive, negative, surprise}. "others" and "contempt" stay out on
    // purpose: clips carrying them must be filtered upstream.
    static LabelMap default_map() {
        LabelMap m;
        m.add("happiness", EmotionClass::Positive);
        m.add("positive", EmotionClass::Positive);
        m.add("anger", EmotionClass::Negative);
        m.add("disgust", EmotionClass::Negative);
        m.add("fear", EmotionClass::Negative);
        m.add("sadness", EmotionClass::Negative);
        m.add("repression", EmotionClass::Negative);
        m.add("negative", EmotionClass::Negative);
        m.add("surprise", EmotionClass::Surprise);
        return m;
    }

    EmotionClass map_label(std::string_view raw) const {
        std::string key = lower_trim(raw);
        if (key.empty()) fail("UnknownLabel", "empty raw label");
        auto it = table_.find(key);
        if (it == table_.end()) {
            fail("UnknownLabel", "raw label '" + key + "' is not in the label map");
        }
        return it->second;
    }

    const std::map<std::string, EmotionClass>& table() const { return table_; }

private:
    std::map<std::string, EmotionClass> table_;
};

inline EmotionClass map_label(std::string_view raw, const LabelMap& map) {
    return map.map_label(raw);
}

struct Provenance {
    std::string dataset;
    std::string clip_id;
    std::string subject_id;  // "synthetic" for triplets with no real subject

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

// The unit of MiE definition: an onset/apex AU pair plus label and origin.
// Expert-sourced triplets always carry an all-zeros onset.
struct AuTriplet {
    AuVector onset;
    AuVector apex;
    EmotionClass label = EmotionClass::Positive;
    SourceTag source = SourceTag::MiE;
    Provenance provenance;

    friend bool operator==(const AuTriplet&, const AuTriplet&) = default;
};

inline void validate_triplet(const AuTriplet& t) {
    if (t.source == SourceTag::Expert && !t.onset.is_zero()) {
        fail("InvalidTriplet", "expert triplet onset must be the zero vector");
    }
}

}  // namespace mesynth
