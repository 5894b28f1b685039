#pragma once

// Downstream character-recognition experiment: train a classifier under
// vanilla / CutMix / LF-FontMix augmentation and report held-out accuracy.
// Style-space mixing needs a trained generation bundle.

#include <optional>
#include <string>
#include <vector>

#include "lffont/evalsuite.hpp"
#include "lffont/inference.hpp"

namespace lffont {

enum class AugmentMode { vanilla, cutmix, fontmix_style, fontmix_char, fontmix_both };

AugmentMode augment_mode_from_string(const std::string& s);
std::string to_string(AugmentMode m);

struct AugmentConfig {
    AugmentMode mode = AugmentMode::vanilla;
    int epochs = 8;
    int batch_size = 64;
    double lr = 0.0002;
    bool cosine_decay = true;   // cosine-annealed learning rate
    double beta_alpha = 0.5;    // lambda ~ Beta(alpha, alpha)
    double mix_fraction = 0.5;  // half of each mini-batch is mixed
    uint64_t seed = 0;
    std::vector<int> channels = {16, 32, 64};
    // Classifier train split over styles (names); the rest is the test split.
    std::vector<std::string> train_styles;
};

struct AugmentResult {
    AugmentMode mode = AugmentMode::vanilla;
    double test_accuracy = 0;
    double train_accuracy = 0;
    int64_t mixed_samples = 0;
};

// bundle may be null for vanilla / cutmix; fontmix modes require it.
AugmentResult augment_train(const GlyphStore& store, const DecompositionTable& table, const AugmentConfig& config,
                            const nn::ModelBundle<real>* bundle);

}  // namespace lffont
