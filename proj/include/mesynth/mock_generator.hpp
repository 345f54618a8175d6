#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mesynth/au.hpp"
#include "mesynth/compose.hpp"
#include "mesynth/error.hpp"
#include "mesynth/parallel.hpp"
#include "mesynth/rng.hpp"

namespace mesynth {

// Deterministic stand-in for a conditional face generator: maps (identity,
// AU condition) to an embedding whose identity part depends only on the
// identity string and whose expression part is linear in the AU vector plus
// optional Gaussian noise. Identity preservation holds exactly by
// construction, which is what the desk-scale experiments rely on.

struct GeneratorParams {
    std::size_t embed_dim_identity = 16;
    std::size_t embed_dim_expression = 17;
    std::uint64_t mixing_matrix_seed = 0;
    double noise_sigma = 0.01;
};

inline void validate_generator_params(const GeneratorParams& p) {
    if (p.embed_dim_identity == 0 || p.embed_dim_expression == 0) {
        fail("InvalidConfig", "embedding dimensions must be positive");
    }
    if (!(p.noise_sigma >= 0.0)) fail("InvalidConfig", "noise_sigma must be >= 0");
}

struct FaceEmbedding {
    std::vector<double> identity_part;
    std::vector<double> expression_part;

    friend bool operator==(const FaceEmbedding&, const FaceEmbedding&) = default;
};

// Row-major (embed_dim_expression x 17) mixing matrix with seeded standard
// normal entries, column-normalized to unit L2.
class MixingMatrix {
public:
    MixingMatrix(std::uint64_t seed, std::size_t rows) : rows_(rows), data_(rows * kNumAus) {
        RngStream rng(seed, "generator/mixing-matrix", 0);
        for (double& v : data_) v = rng.gaussian();
        for (std::size_t c = 0; c < kNumAus; ++c) {
            double norm_sq = 0.0;
            for (std::size_t r = 0; r < rows_; ++r) norm_sq += at(r, c) * at(r, c);
            double norm = std::sqrt(norm_sq);
            if (norm > 0.0) {
                for (std::size_t r = 0; r < rows_; ++r) at(r, c) /= norm;
            }
        }
    }

    std::size_t rows() const { return rows_; }

    std::vector<double> apply(const AuVector& z) const {
        std::vector<double> out(rows_, 0.0);
        for (std::size_t c = 0; c < kNumAus; ++c) {
            double zc = z[c];
            if (zc == 0.0) continue;
            for (std::size_t r = 0; r < rows_; ++r) out[r] += at(r, c) * zc;
        }
        return out;
    }

private:
    double& at(std::size_t r, std::size_t c) { return data_[r * kNumAus + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * kNumAus + c]; }

    std::size_t rows_;
    std::vector<double> data_;
};

// Unit vector derived from the identity string alone; independent of the AU
// condition and of the mixing seed.
inline std::vector<double> identity_embedding(std::string_view identity_id, std::size_t dim) {
    RngStream rng(fnv1a64(identity_id), "generator/identity-embed", 0);
    std::vector<double> v(dim);
    double norm_sq = 0.0;
    for (double& x : v) {
        x = rng.gaussian();
        norm_sq += x * x;
    }
    double norm = std::sqrt(norm_sq);
    if (norm == 0.0) {
        v.assign(dim, 0.0);
        v[0] = 1.0;
        return v;
    }
    for (double& x : v) x /= norm;
    return v;
}

inline FaceEmbedding generate_face(std::string_view identity_id, const AuVector& z,
                                   const GeneratorParams& params, const MixingMatrix& mixing,
                                   RngStream& rng) {
    FaceEmbedding e;
    e.identity_part = identity_embedding(identity_id, params.embed_dim_identity);
    e.expression_part = mixing.apply(z);
    if (params.noise_sigma > 0.0) {
        for (double& x : e.expression_part) x += params.noise_sigma * rng.gaussian();
    }
    return e;
}

// Convenience overload that builds the mixing matrix on the fly.
inline FaceEmbedding generate_face(std::string_view identity_id, const AuVector& z,
                                   const GeneratorParams& params, RngStream& rng) {
    MixingMatrix mixing(params.mixing_matrix_seed, params.embed_dim_expression);
    return generate_face(identity_id, z, params, mixing, rng);
}

struct RenderedSample {
    std::string sample_id;
    std::vector<FaceEmbedding> frames;
};

// Noise streams are addressed by (manifest seed, sample ordinal, frame), so
// rendering is reproducible and shardable. Frame addresses are spaced by a
// fixed stride wide enough for any supported frames_per_sample.
inline constexpr std::uint64_t kRenderFrameStride = 64;

inline std::vector<RenderedSample> render_manifest(const DatasetManifest& manifest,
                                                   const GeneratorParams& params, int jobs = 1) {
    validate_generator_params(params);
    MixingMatrix mixing(params.mixing_matrix_seed, params.embed_dim_expression);
    std::vector<RenderedSample> out(manifest.samples.size());
    parallel_for(manifest.samples.size(), jobs, [&](std::size_t i) {
        const SampleSpec& spec = manifest.samples[i];
        RenderedSample rendered;
        rendered.sample_id = spec.sample_id;
        rendered.frames.reserve(spec.frames.size());
        for (std::size_t f = 0; f < spec.frames.size(); ++f) {
            RngStream rng(manifest.header.seed, "render/noise", i * kRenderFrameStride + f);
            rendered.frames.push_back(
                generate_face(spec.identity_id, spec.frames[f], params, mixing, rng));
        }
        out[i] = std::move(rendered);
    });
    return out;
}

}  // namespace mesynth
