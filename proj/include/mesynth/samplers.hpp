#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mesynth/au.hpp"
#include "mesynth/error.hpp"
#include "mesynth/ingest.hpp"
#include "mesynth/parallel.hpp"
#include "mesynth/rng.hpp"

namespace mesynth {

// The three AU-triplet sources: real MiE clips, early-stage MaE clips, and
// expert AU-emotion knowledge, under the counter-based randomness contract.

struct SamplerConfig {
    double alpha = 0.3;  // MaE apex window lower fraction
    double beta = 0.5;   // MaE apex window upper fraction
    double mu = 0.1;     // expert intensity lower bound
    double nu = 0.3;     // expert intensity upper bound
};

inline void validate_sampler_config(const SamplerConfig& c) {
    if (!(c.alpha > 0.0 && c.alpha < 1.0 && c.beta > 0.0 && c.beta < 1.0)) {
        fail("InvalidConfig", "alpha and beta must lie in (0,1)");
    }
    if (c.alpha > c.beta) fail("InvalidConfig", "require alpha <= beta");
    if (c.mu < 0.0 || c.nu > 1.0 || c.mu > c.nu) {
        fail("InvalidConfig", "require 0 <= mu <= nu <= 1");
    }
}

// Per emotion class: (AU number, activation probability). Unlisted AUs have
// implicit probability 0.
class ExpertTable {
public:
    struct Entry {
        int au = 0;
        double p = 0.0;
    };

    void add(EmotionClass c, int au, double p) {
        if (!au_position(au)) {
            fail("InvalidExpertEntry", "AU" + std::to_string(au) + " is not in the AU set");
        }
        if (!(p >= 0.0 && p <= 1.0)) {
            fail("InvalidExpertEntry", "AU" + std::to_string(au) + ": probability " +
                                           std::to_string(p) + " outside [0,1]");
        }
        for (const Entry& e : entries_[static_cast<int>(c)]) {
            if (e.au == au) {
                fail("InvalidExpertEntry", "AU" + std::to_string(au) + " listed twice for class '" +
                                               std::string(to_string(c)) + "'");
            }
        }
        entries_[static_cast<int>(c)].push_back(Entry{au, p});
    }

    std::span<const Entry> entries(EmotionClass c) const {
        return entries_[static_cast<int>(c)];
    }

private:
    std::array<std::vector<Entry>, kNumClasses> entries_{};
};

// Mechanical extraction: the clip's AU rows at its annotated onset and apex
// frames, with the clip's label and identity fields.
inline AuTriplet extract_mie_triplet(const ClipRecord& clip) {
    const AuVector* onset = clip.series.find(clip.annotation.onset);
    const AuVector* apex = clip.series.find(clip.annotation.apex);
    if (!onset || !apex) {
        fail("FrameCoverage", "clip '" + clip.annotation.clip_id +
                                  "': series does not cover onset/apex");
    }
    return AuTriplet{*onset, *apex, clip.label, SourceTag::MiE,
                     Provenance{clip.annotation.dataset, clip.annotation.clip_id,
                                clip.annotation.subject_id}};
}

// Uniform draw of the MaE apex frame index from the clamped window
// [max(1, floor(alpha*n)), floor(beta*n)]. The lower clamp keeps the apex
// away from the neutral frame 0.
inline std::int64_t select_mae_apex_index(std::int64_t n, const SamplerConfig& cfg, RngStream& rng) {
    if (n < 2) fail("WindowEmpty", "clip has " + std::to_string(n) + " frames, need at least 2");
    auto lo = static_cast<std::int64_t>(cfg.alpha * static_cast<double>(n));
    auto hi = static_cast<std::int64_t>(cfg.beta * static_cast<double>(n));
    if (hi < 1) {
        fail("WindowEmpty", "floor(beta*n) < 1 for n=" + std::to_string(n));
    }
    lo = std::max<std::int64_t>(1, lo);
    hi = std::max(lo, hi);
    return static_cast<std::int64_t>(
        rng.uniform_int(static_cast<std::uint64_t>(lo), static_cast<std::uint64_t>(hi)));
}

// Early-stage MaE triplet: onset is the clip's neutral first frame; the apex
// is drawn from the early window.
inline AuTriplet sample_mae_triplet(const ClipRecord& clip, const SamplerConfig& cfg,
                                    RngStream& rng) {
    const AuVector* onset = clip.series.find(0);
    if (!onset) {
        fail("FrameCoverage", "clip '" + clip.annotation.clip_id + "': no frame 0 in series");
    }
    std::int64_t apex_index = select_mae_apex_index(clip.annotation.n_frames, cfg, rng);
    const AuVector* apex = clip.series.find(apex_index);
    if (!apex) {
        fail("FrameCoverage", "clip '" + clip.annotation.clip_id + "': chosen apex frame " +
                                  std::to_string(apex_index) + " absent from series");
    }
    return AuTriplet{*onset, *apex, clip.label, SourceTag::MaE,
                     Provenance{clip.annotation.dataset, clip.annotation.clip_id,
                                clip.annotation.subject_id}};
}

// Expert triplet: zero onset; each listed AU is activated with its table
// probability, activated entries get an intensity drawn from [mu, nu],
// everything else stays exactly 0.
inline AuTriplet sample_expert_triplet(EmotionClass label, const ExpertTable& table,
                                       const SamplerConfig& cfg, RngStream& rng) {
    std::array<double, kNumAus> apex{};
    for (const ExpertTable::Entry& e : table.entries(label)) {
        if (rng.bernoulli(e.p)) {
            apex[*au_position(e.au)] = rng.uniform(cfg.mu, cfg.nu);
        }
    }
    return AuTriplet{AuVector::zero(), AuVector(apex), label, SourceTag::Expert,
                     Provenance{"expert", "", "synthetic"}};
}

// Requested triplet counts per (class, source).
struct CountGrid {
    std::array<std::array<std::size_t, kNumSources>, kNumClasses> counts{};

    std::size_t& at(EmotionClass c, SourceTag s) {
        return counts[static_cast<int>(c)][static_cast<int>(s)];
    }
    std::size_t at(EmotionClass c, SourceTag s) const {
        return counts[static_cast<int>(c)][static_cast<int>(s)];
    }
    std::size_t total() const {
        std::size_t t = 0;
        for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
        return t;
    }

    static CountGrid uniform(std::size_t mie, std::size_t mae, std::size_t expert) {
        CountGrid g;
        for (EmotionClass c : kEmotionClasses) {
            g.at(c, SourceTag::MiE) = mie;
            g.at(c, SourceTag::MaE) = mae;
            g.at(c, SourceTag::Expert) = expert;
        }
        return g;
    }
};

// Triplet list plus a per-(class, source) index for O(1) counts and bucket
// lookup during composition.
class TripletPool {
public:
    void add(AuTriplet t) {
        validate_triplet(t);
        buckets_[static_cast<int>(t.label)][static_cast<int>(t.source)].push_back(triplets_.size());
        triplets_.push_back(std::move(t));
    }

    const std::vector<AuTriplet>& triplets() const { return triplets_; }
    std::size_t size() const { return triplets_.size(); }

    std::size_t count(EmotionClass c, SourceTag s) const {
        return buckets_[static_cast<int>(c)][static_cast<int>(s)].size();
    }
    std::span<const std::size_t> bucket(EmotionClass c, SourceTag s) const {
        return buckets_[static_cast<int>(c)][static_cast<int>(s)];
    }

private:
    std::vector<AuTriplet> triplets_;
    std::array<std::array<std::vector<std::size_t>, kNumSources>, kNumClasses> buckets_{};
};

namespace detail {

inline std::vector<std::size_t> clip_indices_of_class(std::span<const ClipRecord> clips,
                                                      EmotionClass c) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        if (clips[i].label == c) out.push_back(i);
    }
    return out;
}

}  // namespace detail

// Deterministic pool construction. MiE triplets are extracted (never
// invented): a seeded draw without replacement picks which clips to use when
// fewer are requested than available. MaE and Expert triplets are sampled
// with per-ordinal streams, so the pool is a pure function of
// (inputs, seed) for every worker count. Canonical order: class-major, then
// source, then ordinal.
inline TripletPool build_triplet_pool(std::span<const ClipRecord> mie_clips,
                                      std::span<const ClipRecord> mae_clips,
                                      const ExpertTable& expert_table, const CountGrid& request,
                                      const SamplerConfig& cfg, std::uint64_t seed, int jobs = 1) {
    validate_sampler_config(cfg);

    struct Slot {
        EmotionClass label;
        SourceTag source;
        std::size_t bucket_ordinal;
    };
    std::vector<Slot> slots;
    slots.reserve(request.total());

    std::array<std::vector<std::size_t>, kNumClasses> mie_by_class;
    std::array<std::vector<std::size_t>, kNumClasses> mae_by_class;
    for (EmotionClass c : kEmotionClasses) {
        const int ci = static_cast<int>(c);
        mie_by_class[ci] = detail::clip_indices_of_class(mie_clips, c);
        mae_by_class[ci] = detail::clip_indices_of_class(mae_clips, c);

        std::size_t mie_requested = request.at(c, SourceTag::MiE);
        if (mie_requested > mie_by_class[ci].size()) {
            fail("InsufficientMiEClips",
                 "class '" + std::string(to_string(c)) + "': requested " +
                     std::to_string(mie_requested) + " MiE triplets, only " +
                     std::to_string(mie_by_class[ci].size()) + " annotated clips available");
        }
        if (request.at(c, SourceTag::MaE) > 0 && mae_by_class[ci].empty()) {
            fail("InsufficientMaEClips", "class '" + std::string(to_string(c)) +
                                             "': MaE triplets requested but no MaE clips available");
        }

        // Which MiE clips participate: seeded Fisher-Yates, take the first k.
        std::vector<std::size_t>& candidates = mie_by_class[ci];
        RngStream shuffle_rng(seed, "pool/mie-select/" + std::string(to_string(c)), 0);
        for (std::size_t i = candidates.size(); i > 1; --i) {
            std::size_t j = shuffle_rng.uniform_int(0, i - 1);
            std::swap(candidates[i - 1], candidates[j]);
        }

        for (SourceTag s : kSourceTags) {
            for (std::size_t k = 0; k < request.at(c, s); ++k) {
                slots.push_back(Slot{c, s, k});
            }
        }
    }

    std::vector<AuTriplet> produced(slots.size());
    parallel_for(slots.size(), jobs, [&](std::size_t i) {
        const Slot& slot = slots[i];
        const int ci = static_cast<int>(slot.label);
        switch (slot.source) {
            case SourceTag::MiE: {
                const ClipRecord& clip = mie_clips[mie_by_class[ci][slot.bucket_ordinal]];
                produced[i] = extract_mie_triplet(clip);
                break;
            }
            case SourceTag::MaE: {
                RngStream pick(seed, "pool/mae-clip", i);
                const auto& bucket = mae_by_class[ci];
                const ClipRecord& clip = mae_clips[bucket[pick.uniform_int(0, bucket.size() - 1)]];
                RngStream apex(seed, "pool/mae-apex", i);
                produced[i] = sample_mae_triplet(clip, cfg, apex);
                break;
            }
            case SourceTag::Expert: {
                RngStream rng(seed, "pool/expert", i);
                AuTriplet t = sample_expert_triplet(slot.label, expert_table, cfg, rng);
                t.provenance.clip_id = "expert/" + std::string(to_string(slot.label)) + "/" +
                                       std::to_string(slot.bucket_ordinal);
                produced[i] = std::move(t);
                break;
            }
        }
    });

    TripletPool pool;
    for (AuTriplet& t : produced) pool.add(std::move(t));
    return pool;
}

}  // namespace mesynth
