#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lffont/decomposition.hpp"
#include "lffont/glyphset.hpp"
#include "lffont/rng.hpp"

namespace lffont {

class SamplingExhaustedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainingExample {
    struct Reference {
        const GlyphImage* glyph = nullptr;
        std::vector<int32_t> components;  // the glyph's own component ids, in order
    };
    std::vector<Reference> references;
    const GlyphImage* source = nullptr;  // style s0, character c
    const GlyphImage* target = nullptr;  // style s, character c
    std::vector<int32_t> target_components;  // ordered, duplicates preserved
    // Per target component occurrence, the reference index queried for it
    // (phase 1 only; phase 2 rebuilds the feature from factors instead).
    std::vector<int32_t> component_source_ref;
    int32_t self_reconstruction_ref = -1;  // phase 2: flagged reference index
};

struct SamplerConfig {
    int n_ref = 3;
    int batch_size = 4;
    int max_retries = 50;
    int greedy_after = 40;
};

// Phase 1 policy: one coherent style per example, references must cover the
// target's components.
class Phase1Sampler {
public:
    Phase1Sampler(const GlyphStore& store, const DecompositionTable& table, SamplerConfig config, Rng rng);
    std::vector<TrainingExample> sample_batch();
    TrainingExample sample_example();
    Rng& rng() { return rng_; }

private:
    const GlyphStore& store_;
    const DecompositionTable& table_;
    SamplerConfig config_;
    Rng rng_;
    std::vector<int32_t> train_styles_;
};

// Phase 2 policy: reference styles drawn independently, the target style is
// one of them; coverage is not required. One reference is flagged for the
// self-reconstruction pass.
class Phase2Sampler {
public:
    Phase2Sampler(const GlyphStore& store, const DecompositionTable& table, SamplerConfig config, Rng rng);
    std::vector<TrainingExample> sample_batch();
    TrainingExample sample_example();
    Rng& rng() { return rng_; }

private:
    const GlyphStore& store_;
    const DecompositionTable& table_;
    SamplerConfig config_;
    Rng rng_;
    std::vector<int32_t> train_styles_;
    bool fallback_warned_ = false;
};

}  // namespace lffont
