#include "lffont/augment.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace lffont {

namespace {
namespace ad = lffont::ad;
}

AugmentMode augment_mode_from_string(const std::string& s) {
    if (s == "vanilla") return AugmentMode::vanilla;
    if (s == "cutmix") return AugmentMode::cutmix;
    if (s == "fontmix-style") return AugmentMode::fontmix_style;
    if (s == "fontmix-char") return AugmentMode::fontmix_char;
    if (s == "fontmix-both") return AugmentMode::fontmix_both;
    throw std::invalid_argument("unknown augmentation mode: " + s);
}

std::string to_string(AugmentMode m) {
    switch (m) {
        case AugmentMode::vanilla: return "vanilla";
        case AugmentMode::cutmix: return "cutmix";
        case AugmentMode::fontmix_style: return "fontmix-style";
        case AugmentMode::fontmix_char: return "fontmix-char";
        case AugmentMode::fontmix_both: return "fontmix-both";
    }
    return "?";
}

namespace {

struct Sample {
    const GlyphImage* glyph;
};

// Randomized-patch CutMix for the training loop.
CutMixSample cutmix_randomized(const Tensor<float>& a, int64_t la, const Tensor<float>& b, int64_t lb, double lam,
                               Rng& rng) {
    int64_t H = a.dim(0), W = a.dim(1);
    CutMixSample out;
    out.pixels = a;
    out.label_a = la;
    out.label_b = lb;
    double cut = std::sqrt(std::max(0.0, 1.0 - lam));
    int64_t ph = static_cast<int64_t>(std::llround(cut * static_cast<double>(H)));
    int64_t pw = static_cast<int64_t>(std::llround(cut * static_cast<double>(W)));
    if (ph == 0 || pw == 0) return out;
    int64_t cy = rng.uniform_int(H), cx = rng.uniform_int(W);
    int64_t y0 = std::max<int64_t>(0, cy - ph / 2), x0 = std::max<int64_t>(0, cx - pw / 2);
    int64_t y1 = std::min<int64_t>(y0 + ph, H), x1 = std::min<int64_t>(x0 + pw, W);
    for (int64_t y = y0; y < y1; ++y)
        for (int64_t x = x0; x < x1; ++x) out.pixels[y * W + x] = b[y * W + x];
    out.weight_a = 1.0 - static_cast<double>((y1 - y0) * (x1 - x0)) / static_cast<double>(H * W);
    return out;
}

}  // namespace

AugmentResult augment_train(const GlyphStore& store, const DecompositionTable& table, const AugmentConfig& config,
                            const nn::ModelBundle<real>* bundle) {
    bool needs_bundle = config.mode == AugmentMode::fontmix_style || config.mode == AugmentMode::fontmix_char ||
                        config.mode == AugmentMode::fontmix_both;
    if (needs_bundle && bundle == nullptr)
        throw std::invalid_argument("augment_train: fontmix modes require a trained generation bundle");
    if (config.train_styles.empty()) throw std::invalid_argument("augment_train: no classifier train styles");

    const auto& manifest = store.manifest();
    std::set<int32_t> train_ids;
    for (const auto& name : config.train_styles) {
        auto id = manifest.style_by_name(name);
        if (!id) throw std::invalid_argument("augment_train: unknown style " + name);
        train_ids.insert(*id);
    }

    std::vector<Sample> train_set, test_set;
    for (const auto& st : manifest.styles) {
        for (int32_t c : store.chars_of_style(st.id)) {
            Sample s{&store.glyph(st.id, c)};
            (train_ids.count(st.id) ? train_set : test_set).push_back(s);
        }
    }
    if (train_set.empty() || test_set.empty())
        throw std::invalid_argument("augment_train: style split leaves an empty train or test set");

    EvalClassifier cls(EvalKind::content, manifest.resolution, table.num_characters(), config.channels, config.seed);
    nn::Adam<real> opt(cls.params().params, config.lr, 0.9, 0.999);
    Rng rng(Rng(config.seed).sub("augment-train"));

    std::vector<size_t> order(train_set.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    int64_t batches_per_epoch =
        static_cast<int64_t>((train_set.size() + static_cast<size_t>(config.batch_size) - 1) /
                             static_cast<size_t>(config.batch_size));
    int64_t total_batches = batches_per_epoch * config.epochs;
    int64_t batch_counter = 0;

    AugmentResult result;
    result.mode = config.mode;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (size_t start = 0; start < train_set.size(); start += static_cast<size_t>(config.batch_size)) {
            size_t end = std::min(train_set.size(), start + static_cast<size_t>(config.batch_size));
            AugmentMode mode = config.mode;
            if (mode == AugmentMode::fontmix_both)
                mode = (batch_counter % 2 == 0) ? AugmentMode::fontmix_style : AugmentMode::fontmix_char;

            std::vector<Tensor<float>> pixels;
            std::vector<int64_t> la, lb;
            std::vector<double> wa;
            for (size_t i = start; i < end; ++i) {
                const auto* g = train_set[order[i]].glyph;
                bool mix = mode != AugmentMode::vanilla &&
                           static_cast<double>(i - start) < config.mix_fraction * static_cast<double>(end - start);
                if (!mix) {
                    pixels.push_back(g->pixels);
                    la.push_back(g->character);
                    lb.push_back(g->character);
                    wa.push_back(1.0);
                    continue;
                }
                ++result.mixed_samples;
                double lam = rng.beta(config.beta_alpha, config.beta_alpha);
                const auto* other =
                    train_set[order[static_cast<size_t>(rng.uniform_int(static_cast<int64_t>(train_set.size())))]].glyph;
                if (mode == AugmentMode::cutmix) {
                    auto s = cutmix_randomized(g->pixels, g->character, other->pixels, other->character, lam, rng);
                    pixels.push_back(std::move(s.pixels));
                    la.push_back(s.label_a);
                    lb.push_back(s.label_b);
                    wa.push_back(s.weight_a);
                } else if (mode == AugmentMode::fontmix_style) {
                    // two style donors, unmixed target label
                    const auto* d2 = train_set[order[static_cast<size_t>(
                                                   rng.uniform_int(static_cast<int64_t>(train_set.size())))]]
                                         .glyph;
                    auto [img, label] = fontmix(*bundle, store, table, *other, *d2, g->character, lam, MixMode::style);
                    pixels.push_back(std::move(img.pixels));
                    la.push_back(label.char_a);
                    lb.push_back(label.char_a);
                    wa.push_back(1.0);
                } else {  // fontmix_char
                    auto [img, label] =
                        fontmix(*bundle, store, table, *g, *other, g->character, lam, MixMode::character);
                    pixels.push_back(std::move(img.pixels));
                    la.push_back(label.char_a);
                    lb.push_back(label.char_b);
                    wa.push_back(label.lam);
                }
            }
            std::vector<const Tensor<float>*> ptrs;
            for (auto& p : pixels) ptrs.push_back(&p);
            auto logits = cls.logits(nn::image_batch<real>(ptrs, manifest.resolution));
            auto ce_a = ad::softmax_cross_entropy(logits, la);
            auto ce_b = ad::softmax_cross_entropy(logits, lb);
            Tensor<real> w_a({static_cast<int64_t>(wa.size())}), w_b({static_cast<int64_t>(wa.size())});
            for (size_t i = 0; i < wa.size(); ++i) {
                w_a[static_cast<int64_t>(i)] = static_cast<real>(wa[i]);
                w_b[static_cast<int64_t>(i)] = static_cast<real>(1.0 - wa[i]);
            }
            auto loss = ad::mean_all(
                ad::add(ad::mul(ce_a, ad::constant(std::move(w_a))), ad::mul(ce_b, ad::constant(std::move(w_b)))));
            if (config.cosine_decay && total_batches > 1)
                opt.set_lr(config.lr * 0.5 *
                           (1.0 + std::cos(M_PI * static_cast<double>(batch_counter) /
                                           static_cast<double>(total_batches - 1))));
            opt.zero_grads();
            ad::backward(loss);
            opt.step();
            ++batch_counter;
        }
    }

    auto measure = [&](const std::vector<Sample>& set) {
        std::vector<LabeledGlyph> labeled;
        for (const auto& s : set) labeled.push_back({&s.glyph->pixels, s.glyph->character});
        return accuracy(cls, labeled);
    };
    result.train_accuracy = measure(train_set);
    result.test_accuracy = measure(test_set);
    return result;
}

}  // namespace lffont
