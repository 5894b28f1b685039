#pragma once

// Evaluation instruments: style- and content-aware classifiers trained with
// CutMix, accuracy, FID over classifier features, harmonic means and the
// unseen-style ratio p_unseen.

#include <set>
#include <vector>

#include "json.hpp"
#include "lffont/adam.hpp"
#include "lffont/decomposition.hpp"
#include "lffont/glyphset.hpp"
#include "lffont/networks.hpp"

namespace lffont {

enum class EvalKind { style, content };

struct LabeledGlyph {
    const Tensor<float>* pixels = nullptr;
    int64_t label = -1;
};

struct EvalTrainConfig {
    int epochs = 20;        // paper protocol: 64 / 2e-4 / 20
    int batch_size = 64;
    double lr = 0.0002;
    double cutmix_prob = 0.5;
    double cutmix_alpha = 0.5;
    uint64_t seed = 0;
    std::vector<int> channels = {16, 32, 64};
    bool cosine_decay = false;
    double mix_fraction = -1.0;  // < 0: mix decided per image by cutmix_prob
};

// Small residual classifier; the penultimate (pooled) activation doubles as
// the FID feature extractor.
class EvalClassifier {
public:
    EvalClassifier(EvalKind kind, int resolution, int num_classes, const std::vector<int>& channels, uint64_t seed);

    EvalKind kind() const { return kind_; }
    int num_classes() const { return num_classes_; }
    int feature_dim() const { return channels_.back(); }
    int resolution() const { return resolution_; }

    ad::Var<real> logits(const ad::Var<real>& images) const;           // [N,num_classes]
    Tensor<real> logits_of(const std::vector<const Tensor<float>*>& images) const;
    Tensor<double> features_of(const std::vector<const Tensor<float>*>& images) const;  // [N,feature_dim]
    int64_t predict(const Tensor<float>& image) const;

    nn::ParamStore<real>& params() { return params_; }

private:
    EvalKind kind_;
    int resolution_;
    int num_classes_;
    std::vector<int> channels_;
    nn::ParamStore<real> params_;
    nn::Conv<real> stem_;
    std::vector<nn::Conv<real>> downs_;
    std::vector<nn::ResBlock<real>> blocks_;
    nn::LinearLayer<real> head_;

    ad::Var<real> trunk(const ad::Var<real>& images) const;
};

// Rectangular patch paste with area ratio lambda ~ Beta(alpha, alpha); the
// label weight follows the surviving area.
struct CutMixSample {
    Tensor<float> pixels;
    int64_t label_a = -1;
    int64_t label_b = -1;
    double weight_a = 1.0;  // 1.0 when unmixed
};

CutMixSample cutmix(const Tensor<float>& image_a, int64_t label_a, const Tensor<float>& image_b, int64_t label_b,
                    double lam);

EvalClassifier train_eval_classifier(EvalKind kind, const std::vector<LabeledGlyph>& data, int resolution,
                                     int num_classes, const EvalTrainConfig& config);

double accuracy(const EvalClassifier& classifier, const std::vector<LabeledGlyph>& generated);

// Frechet distance over feature sets [n,d]; matrix square root via
// eigendecomposition of the symmetrized product, negative eigenvalues
// clipped, result clamped at zero.
double fid(const Tensor<double>& features_real, const Tensor<double>& features_fake, bool allow_shrinkage = true);

double p_unseen(const EvalClassifier& all_styles_classifier, const std::vector<const Tensor<float>*>& generated,
                const std::set<int64_t>& unseen_style_ids);

// 2ab/(a+b); 0 when a+b == 0.
double hmean(double a, double b);

struct MetricBlock {
    double acc_style = 0, acc_content = 0, acc_hmean = 0;
    double fid_style = 0, fid_content = 0, fid_hmean = 0;
    double p_unseen = 0;
    nlohmann::json to_json() const;
};

struct MetricReport {
    MetricBlock seen;
    MetricBlock unseen;
    int n_ref = 0;
    int n_repeats = 0;
    uint64_t seed = 0;
    nlohmann::json to_json() const;
};

struct EvalProtocol {
    int n_ref = 8;       // eight reference glyphs
    int n_repeats = 50;  // averaged over independent reference draws
    uint64_t seed = 0;
    int max_chars_per_block = 0;  // 0: every character in the block
    EvalTrainConfig classifier_config;
};

// Trains the desk-scale instruments on the test split (style and content
// evaluators) plus an all-styles classifier for p_unseen, then repeats
// generation with independent reference draws and averages the metrics.
MetricReport evaluate_run(const nn::ModelBundle<real>& bundle, const GlyphStore& store,
                          const DecompositionTable& table, const EvalProtocol& protocol);

}  // namespace lffont
