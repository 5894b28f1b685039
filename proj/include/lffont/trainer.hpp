#pragma once

// Two-phase optimization. Phase 1 trains encoders, generator, discriminator
// and the component classifier on coverage-constrained coherent-style batches
// without factorization; phase 2 activates F_s/F_u, the consistency loss,
// mixed-style batches and reference self-reconstruction.

#include <filesystem>
#include <optional>
#include <vector>

#include "lffont/checkpoint.hpp"
#include "lffont/losses.hpp"
#include "lffont/networks.hpp"
#include "lffont/sampler.hpp"

namespace lffont {

class TrainingDivergedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainConfig {
    int phase1_iters = 5000;
    int phase2_iters = 2000;
    int batch_size = 4;
    int n_ref = 3;
    double lr_d = 0.0008;
    double lr_others = 0.0002;
    double adam_beta1 = 0.0;
    double adam_beta2 = 0.99;
    nn::LossWeights weights;
    uint64_t seed = 0;
    int checkpoint_every = 1000;
    int max_retries = 50;
    bool end_to_end = false;  // single-phase ablation mode
    std::filesystem::path run_dir;  // empty: no checkpoints / metrics files

    void validate() const;
    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
};

struct IterationMetrics {
    int64_t iter = 0;
    int phase = 0;
    double adv_d = 0, adv_g = 0, l1 = 0, feat = 0, cls = 0, consist = 0, self_recon = 0, aux = 0;
    double g_total = 0, d_total = 0;
};

struct TrainResult {
    nn::ModelBundle<real> bundle;
    std::vector<IterationMetrics> metrics;
};

TrainResult train_phase1(const GlyphStore& store, const DecompositionTable& table, const nn::ArchConfig& arch,
                         const TrainConfig& config);

TrainResult train_phase2(nn::ModelBundle<real> bundle, const GlyphStore& store, const DecompositionTable& table,
                         const TrainConfig& config);

// Ablation direction: all objectives from iteration zero, mixed batch
// policies, no phase split.
TrainResult train_end_to_end(const GlyphStore& store, const DecompositionTable& table, const nn::ArchConfig& arch,
                             const TrainConfig& config);

// Exact continuation of an interrupted run: parameters, optimizer moments and
// RNG streams are restored from the checkpoint.
TrainResult resume_training(const std::filesystem::path& checkpoint, const GlyphStore& store,
                            const DecompositionTable& table, const TrainConfig& config);

}  // namespace lffont
