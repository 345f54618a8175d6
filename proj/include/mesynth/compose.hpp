#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mesynth/au.hpp"
#include "mesynth/error.hpp"
#include "mesynth/ingest.hpp"
#include "mesynth/parallel.hpp"
#include "mesynth/rng.hpp"
#include "mesynth/samplers.hpp"
#include "mesynth/version.hpp"

namespace mesynth {

// Dataset composition: assign AU triplets to identities, expand each triplet
// into a 2- or 10-frame AU condition sequence, and emit an ordered manifest
// for an external face generator.

struct CompositionConfig {
    std::size_t num_identities = 5000;
    CountGrid samples_per_id = CountGrid::uniform(1, 1, 1);  // 9 samples/id default
    // Optional cap on how many pool triplets each (class, source) bucket may
    // use; the cap keeps a deterministic prefix of the bucket.
    std::array<std::optional<std::size_t>, kNumSources> pool_limit_per_source{};
    int frames_per_sample = 2;  // 2 or 10
    std::uint64_t seed = 0;
};

inline void validate_composition_config(const CompositionConfig& cfg) {
    if (cfg.num_identities == 0) fail("InvalidConfig", "num_identities must be positive");
    if (cfg.frames_per_sample != 2 && cfg.frames_per_sample != 10) {
        fail("InvalidConfig", "frames_per_sample must be 2 or 10");
    }
    for (SourceTag s : kSourceTags) {
        const auto& limit = cfg.pool_limit_per_source[static_cast<int>(s)];
        if (limit && *limit == 0) fail("InvalidConfig", "pool limit must be positive when set");
    }
}

// The AU condition frames fed to a generator for one sample.
struct SampleSpec {
    std::string sample_id;
    std::string identity_id;
    std::string face_ref;
    EmotionClass label = EmotionClass::Positive;
    SourceTag source = SourceTag::MiE;
    std::vector<AuVector> frames;  // frames.front() == onset, frames.back() == apex, exactly
    Provenance provenance;
};

struct ManifestHeader {
    std::string tool_version = kToolVersion;
    std::uint64_t seed = 0;
    std::string config_digest;
};

struct DatasetManifest {
    ManifestHeader header;
    std::vector<SampleSpec> samples;  // canonical order: identity x class x source x repeat
};

// Linear AU path from onset to apex: frame k = onset + k/(frames-1) * (apex
// - onset). Endpoints are copied verbatim from the triplet, never recomputed,
// so frames.front()/back() match the triplet bitwise.
inline std::vector<AuVector> interpolate_sequence(const AuTriplet& triplet, int frames) {
    if (frames < 2) fail("InvalidFrameCount", "frames must be >= 2");
    std::vector<AuVector> out;
    out.reserve(static_cast<std::size_t>(frames));
    out.push_back(triplet.onset);
    for (int k = 1; k + 1 < frames; ++k) {
        double t = static_cast<double>(k) / static_cast<double>(frames - 1);
        std::array<double, kNumAus> v{};
        for (std::size_t i = 0; i < kNumAus; ++i) {
            double o = triplet.onset[i];
            double a = triplet.apex[i];
            v[i] = std::clamp(o + t * (a - o), 0.0, 1.0);
        }
        out.push_back(AuVector(v));
    }
    out.push_back(triplet.apex);
    return out;
}

namespace detail {

inline std::string sample_id_for(const std::string& identity_id, EmotionClass c, SourceTag s,
                                 std::size_t repeat) {
    std::string id = identity_id;
    id += '/';
    id += to_string(c);
    id += '/';
    id += to_string(s);
    id += '/';
    id += std::to_string(repeat);
    return id;
}

}  // namespace detail

// Composes the manifest: for each of the first num_identities identities,
// for each (class, source) with count c, draw c triplets from the matching
// pool bucket uniformly with replacement (triplet reuse across identities is
// the intended mechanism) and expand them into AU frame sequences. Every
// draw uses a stream addressed by the sample's canonical ordinal, so output
// is byte-identical for any worker count.
inline DatasetManifest compose(const TripletPool& pool, const IdentityPool& identities,
                               const CompositionConfig& cfg, int jobs = 1) {
    validate_composition_config(cfg);
    if (identities.empty()) fail("EmptyIdentityPool", "identity pool is empty");
    if (identities.size() < cfg.num_identities) {
        fail("EmptyIdentityPool", "identity pool has " + std::to_string(identities.size()) +
                                      " entries, config requests " +
                                      std::to_string(cfg.num_identities));
    }

    // Effective bucket sizes after the optional per-source cap.
    std::array<std::array<std::size_t, kNumSources>, kNumClasses> bucket_size{};
    for (EmotionClass c : kEmotionClasses) {
        for (SourceTag s : kSourceTags) {
            if (cfg.samples_per_id.at(c, s) == 0) continue;
            std::size_t available = pool.count(c, s);
            const auto& limit = cfg.pool_limit_per_source[static_cast<int>(s)];
            if (limit) available = std::min(available, *limit);
            if (available == 0) {
                fail("MissingTripletClass", "pool has no triplets for class '" +
                                                std::string(to_string(c)) + "', source '" +
                                                std::string(to_string(s)) + "'");
            }
            bucket_size[static_cast<int>(c)][static_cast<int>(s)] = available;
        }
    }

    const std::size_t per_id = cfg.samples_per_id.total();
    const std::size_t total = cfg.num_identities * per_id;

    DatasetManifest manifest;
    manifest.header.seed = cfg.seed;
    manifest.samples.resize(total);

    parallel_for(cfg.num_identities, jobs, [&](std::size_t id_index) {
        const IdentityPool::Entry& identity = identities.entries[id_index];
        std::size_t ordinal = id_index * per_id;
        for (EmotionClass c : kEmotionClasses) {
            for (SourceTag s : kSourceTags) {
                const std::size_t count = cfg.samples_per_id.at(c, s);
                for (std::size_t r = 0; r < count; ++r, ++ordinal) {
                    RngStream rng(cfg.seed, "compose/assign", ordinal);
                    const std::size_t n = bucket_size[static_cast<int>(c)][static_cast<int>(s)];
                    const std::size_t pick = rng.uniform_int(0, n - 1);
                    const AuTriplet& triplet = pool.triplets()[pool.bucket(c, s)[pick]];

                    SampleSpec spec;
                    spec.sample_id = detail::sample_id_for(identity.id, c, s, r);
                    spec.identity_id = identity.id;
                    spec.face_ref = identity.face_ref;
                    spec.label = c;
                    spec.source = s;
                    spec.frames = interpolate_sequence(triplet, cfg.frames_per_sample);
                    spec.provenance = triplet.provenance;
                    manifest.samples[ordinal] = std::move(spec);
                }
            }
        }
    });
    return manifest;
}

using SubjectKey = std::pair<std::string, std::string>;  // (dataset, subject id)

struct ExclusionResult {
    DatasetManifest manifest;
    std::size_t removed = 0;
};

// Fold-aware exclusion: drop every MiE-sourced sample whose provenance
// subject is in the test fold. MaE and Expert samples are never touched.
inline ExclusionResult apply_fold_exclusion(const DatasetManifest& manifest,
                                            const std::set<SubjectKey>& test_subjects) {
    ExclusionResult result;
    result.manifest.header = manifest.header;
    result.manifest.samples.reserve(manifest.samples.size());
    for (const SampleSpec& s : manifest.samples) {
        if (s.source == SourceTag::MiE &&
            test_subjects.count({s.provenance.dataset, s.provenance.subject_id})) {
            ++result.removed;
            continue;
        }
        result.manifest.samples.push_back(s);
    }
    return result;
}

}  // namespace mesynth
