#include "lffont/evalsuite.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>

#include "lffont/inference.hpp"
#include "lffont/rng.hpp"

namespace lffont {

namespace {
namespace ad = lffont::ad;
using ad::Var;
}  // namespace

EvalClassifier::EvalClassifier(EvalKind kind, int resolution, int num_classes, const std::vector<int>& channels,
                               uint64_t seed)
    : kind_(kind), resolution_(resolution), num_classes_(num_classes), channels_(channels) {
    if (num_classes < 2) throw std::invalid_argument("eval classifier: need at least two classes");
    if (channels.empty()) throw std::invalid_argument("eval classifier: empty channel plan");
    Rng rng(Rng(seed).sub("eval-classifier"));
    stem_ = nn::make_conv(params_, rng, "stem", 1, channels_[0], 3, 1, 1);
    int ci = channels_[0];
    for (size_t i = 0; i < channels_.size(); ++i) {
        downs_.push_back(nn::make_conv(params_, rng, "down" + std::to_string(i), ci, channels_[i], 3, 2, 1));
        blocks_.push_back(nn::make_res_block(params_, rng, "res" + std::to_string(i), channels_[i]));
        ci = channels_[i];
    }
    head_ = nn::make_linear(params_, rng, "head", ci, num_classes);
}

Var<real> EvalClassifier::trunk(const Var<real>& images) const {
    Var<real> h = ad::leaky_relu(stem_(images));
    for (size_t i = 0; i < downs_.size(); ++i) h = blocks_[i](ad::leaky_relu(downs_[i](h)));
    return ad::global_avg_pool(h);
}

Var<real> EvalClassifier::logits(const Var<real>& images) const { return head_(trunk(images)); }

Tensor<real> EvalClassifier::logits_of(const std::vector<const Tensor<float>*>& images) const {
    return logits(nn::image_batch<real>(images, resolution_))->val;
}

Tensor<double> EvalClassifier::features_of(const std::vector<const Tensor<float>*>& images) const {
    // Batched to bound graph memory on large sets.
    Tensor<double> out({static_cast<int64_t>(images.size()), feature_dim()});
    size_t pos = 0;
    while (pos < images.size()) {
        size_t take = std::min<size_t>(images.size() - pos, 128);
        std::vector<const Tensor<float>*> chunk(images.begin() + static_cast<int64_t>(pos),
                                                images.begin() + static_cast<int64_t>(pos + take));
        auto f = trunk(nn::image_batch<real>(chunk, resolution_));
        for (size_t i = 0; i < take; ++i)
            for (int64_t j = 0; j < feature_dim(); ++j)
                out[static_cast<int64_t>(pos + i) * feature_dim() + j] =
                    static_cast<double>(f->val[static_cast<int64_t>(i) * feature_dim() + j]);
        pos += take;
    }
    return out;
}

int64_t EvalClassifier::predict(const Tensor<float>& image) const {
    auto lg = logits_of({&image});
    int64_t best = 0;
    for (int64_t j = 1; j < lg.dim(1); ++j)
        if (lg[j] > lg[best]) best = j;
    return best;
}

CutMixSample cutmix(const Tensor<float>& image_a, int64_t label_a, const Tensor<float>& image_b, int64_t label_b,
                    double lam) {
    if (!image_a.same_shape(image_b)) throw std::invalid_argument("cutmix: image shape mismatch");
    int64_t H = image_a.dim(0), W = image_a.dim(1);
    CutMixSample out;
    out.pixels = image_a;
    out.label_a = label_a;
    out.label_b = label_b;

    double cut = std::sqrt(std::max(0.0, 1.0 - lam));
    int64_t ph = static_cast<int64_t>(std::llround(cut * static_cast<double>(H)));
    int64_t pw = static_cast<int64_t>(std::llround(cut * static_cast<double>(W)));
    if (ph == 0 || pw == 0) {
        out.weight_a = 1.0;  // degenerate patch: image and label unchanged
        return out;
    }
    // deterministic center from the inputs keeps this function pure; callers
    // wanting randomness pass it through lam and their own patch placement
    int64_t cy = H / 2, cx = W / 2;
    int64_t y0 = std::clamp<int64_t>(cy - ph / 2, 0, H - 1);
    int64_t x0 = std::clamp<int64_t>(cx - pw / 2, 0, W - 1);
    int64_t y1 = std::min<int64_t>(y0 + ph, H);
    int64_t x1 = std::min<int64_t>(x0 + pw, W);
    for (int64_t y = y0; y < y1; ++y)
        for (int64_t x = x0; x < x1; ++x) out.pixels[y * W + x] = image_b[y * W + x];
    out.weight_a = 1.0 - static_cast<double>((y1 - y0) * (x1 - x0)) / static_cast<double>(H * W);
    return out;
}

namespace {

// CutMix with randomized patch placement, used by the training loop.
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

EvalClassifier train_eval_classifier(EvalKind kind, const std::vector<LabeledGlyph>& data, int resolution,
                                     int num_classes, const EvalTrainConfig& config) {
    if (data.empty()) throw std::invalid_argument("train_eval_classifier: empty data");
    std::set<int64_t> classes;
    for (const auto& d : data) classes.insert(d.label);
    if (classes.size() < 2) throw std::invalid_argument("train_eval_classifier: single-class data");

    EvalClassifier cls(kind, resolution, num_classes, config.channels, config.seed);
    nn::Adam<real> opt(cls.params().params, config.lr, 0.9, 0.999);
    Rng rng(Rng(config.seed).sub("eval-train"));

    std::vector<size_t> order(data.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    int64_t total_batches = static_cast<int64_t>(config.epochs) *
                            static_cast<int64_t>((data.size() + config.batch_size - 1) / config.batch_size);
    int64_t batch_counter = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (size_t start = 0; start < data.size(); start += static_cast<size_t>(config.batch_size)) {
            size_t end = std::min(data.size(), start + static_cast<size_t>(config.batch_size));
            std::vector<Tensor<float>> pixels;
            std::vector<int64_t> la, lb;
            std::vector<double> wa;
            for (size_t i = start; i < end; ++i) {
                const auto& sample = data[order[i]];
                bool mix = config.mix_fraction >= 0.0
                               ? (static_cast<double>(i - start) < config.mix_fraction * static_cast<double>(end - start))
                               : rng.uniform() < config.cutmix_prob;
                if (mix) {
                    const auto& other = data[order[static_cast<size_t>(rng.uniform_int(static_cast<int64_t>(data.size())))]];
                    double lam = rng.beta(config.cutmix_alpha, config.cutmix_alpha);
                    auto s = cutmix_randomized(*sample.pixels, sample.label, *other.pixels, other.label, lam, rng);
                    pixels.push_back(std::move(s.pixels));
                    la.push_back(s.label_a);
                    lb.push_back(s.label_b);
                    wa.push_back(s.weight_a);
                } else {
                    pixels.push_back(*sample.pixels);
                    la.push_back(sample.label);
                    lb.push_back(sample.label);
                    wa.push_back(1.0);
                }
            }
            std::vector<const Tensor<float>*> ptrs;
            for (auto& p : pixels) ptrs.push_back(&p);
            auto logits = cls.logits(nn::image_batch<real>(ptrs, resolution));
            auto ce_a = ad::softmax_cross_entropy(logits, la);
            auto ce_b = ad::softmax_cross_entropy(logits, lb);
            Tensor<real> w_a({static_cast<int64_t>(wa.size())}), w_b({static_cast<int64_t>(wa.size())});
            for (size_t i = 0; i < wa.size(); ++i) {
                w_a[static_cast<int64_t>(i)] = static_cast<real>(wa[i]);
                w_b[static_cast<int64_t>(i)] = static_cast<real>(1.0 - wa[i]);
            }
            auto loss = ad::mean_all(ad::add(ad::mul(ce_a, ad::constant(std::move(w_a))),
                                             ad::mul(ce_b, ad::constant(std::move(w_b)))));
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
    return cls;
}

double accuracy(const EvalClassifier& classifier, const std::vector<LabeledGlyph>& generated) {
    if (generated.empty()) throw std::invalid_argument("accuracy: empty set");
    int64_t correct = 0;
    size_t pos = 0;
    while (pos < generated.size()) {
        size_t take = std::min<size_t>(generated.size() - pos, 128);
        std::vector<const Tensor<float>*> chunk;
        for (size_t i = 0; i < take; ++i) chunk.push_back(generated[pos + i].pixels);
        auto lg = classifier.logits_of(chunk);
        for (size_t i = 0; i < take; ++i) {
            int64_t best = 0;
            for (int64_t j = 1; j < lg.dim(1); ++j)
                if (lg[static_cast<int64_t>(i) * lg.dim(1) + j] > lg[static_cast<int64_t>(i) * lg.dim(1) + best])
                    best = j;
            if (best == generated[pos + i].label) ++correct;
        }
        pos += take;
    }
    return static_cast<double>(correct) / static_cast<double>(generated.size());
}

double fid(const Tensor<double>& features_real, const Tensor<double>& features_fake, bool allow_shrinkage) {
    if (features_real.rank() != 2 || features_fake.rank() != 2 || features_real.dim(1) != features_fake.dim(1))
        throw std::invalid_argument("fid: feature sets must be [n,d] with matching d");
    int64_t d = features_real.dim(1);
    int64_t n1 = features_real.dim(0), n2 = features_fake.dim(0);
    if (n1 < 2 || n2 < 2) throw std::invalid_argument("fid: need at least two samples per set");
    bool low = n1 < d + 1 || n2 < d + 1;
    if (low && !allow_shrinkage)
        throw std::invalid_argument("fid: too few samples for a well-posed covariance without shrinkage");

    auto stats = [d](const Tensor<double>& f) {
        int64_t n = f.dim(0);
        Eigen::Map<const Eigen::MatrixXd> X(f.ptr(), d, n);  // column-major view: each column one sample
        Eigen::VectorXd mu = X.rowwise().mean();
        Eigen::MatrixXd centered = X.colwise() - mu;
        Eigen::MatrixXd sigma = centered * centered.transpose() / static_cast<double>(n - 1);
        return std::make_pair(mu, sigma);
    };
    auto [mu1, s1] = stats(features_real);
    auto [mu2, s2] = stats(features_fake);
    if (low) {
        double sh1 = 0.01 * s1.trace() / static_cast<double>(d);
        double sh2 = 0.01 * s2.trace() / static_cast<double>(d);
        s1 += sh1 * Eigen::MatrixXd::Identity(d, d);
        s2 += sh2 * Eigen::MatrixXd::Identity(d, d);
    }

    auto psd_sqrt = [](const Eigen::MatrixXd& m) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
        Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        return Eigen::MatrixXd(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
    };
    Eigen::MatrixXd a = psd_sqrt(s1);
    Eigen::MatrixXd inner = a * s2 * a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()));
    double tr_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

    double dist = (mu1 - mu2).squaredNorm() + s1.trace() + s2.trace() - 2.0 * tr_sqrt;
    return std::max(0.0, dist);
}

double p_unseen(const EvalClassifier& all_styles_classifier, const std::vector<const Tensor<float>*>& generated,
                const std::set<int64_t>& unseen_style_ids) {
    if (generated.empty()) throw std::invalid_argument("p_unseen: empty set");
    int64_t hits = 0;
    size_t pos = 0;
    while (pos < generated.size()) {
        size_t take = std::min<size_t>(generated.size() - pos, 128);
        std::vector<const Tensor<float>*> chunk(generated.begin() + static_cast<int64_t>(pos),
                                                generated.begin() + static_cast<int64_t>(pos + take));
        auto lg = all_styles_classifier.logits_of(chunk);
        for (size_t i = 0; i < take; ++i) {
            int64_t best = 0;
            for (int64_t j = 1; j < lg.dim(1); ++j)
                if (lg[static_cast<int64_t>(i) * lg.dim(1) + j] > lg[static_cast<int64_t>(i) * lg.dim(1) + best])
                    best = j;
            if (unseen_style_ids.count(best)) ++hits;
        }
        pos += take;
    }
    return static_cast<double>(hits) / static_cast<double>(generated.size());
}

double hmean(double a, double b) { return a + b == 0.0 ? 0.0 : 2.0 * a * b / (a + b); }

nlohmann::json MetricBlock::to_json() const {
    return {{"acc_style", acc_style}, {"acc_content", acc_content}, {"acc_hmean", acc_hmean},
            {"fid_style", fid_style}, {"fid_content", fid_content}, {"fid_hmean", fid_hmean},
            {"p_unseen", p_unseen}};
}

nlohmann::json MetricReport::to_json() const {
    return {{"seen_chars", seen.to_json()},
            {"unseen_chars", unseen.to_json()},
            {"n_ref", n_ref},
            {"n_repeats", n_repeats},
            {"seed", seed}};
}

MetricReport evaluate_run(const nn::ModelBundle<real>& bundle, const GlyphStore& store,
                          const DecompositionTable& table, const EvalProtocol& protocol) {
    if (protocol.n_repeats < 1 || protocol.n_ref < 1)
        throw std::invalid_argument("evaluate_run: n_ref and n_repeats must be >= 1");
    const auto& manifest = store.manifest();
    auto test_styles = manifest.test_style_ids();
    if (test_styles.empty()) throw std::invalid_argument("evaluate_run: manifest has no test styles");

    // ---- instruments, trained on the test split
    std::map<int32_t, int64_t> style_label;  // test style id -> label
    for (size_t i = 0; i < test_styles.size(); ++i) style_label[test_styles[static_cast<size_t>(i)]] = static_cast<int64_t>(i);

    std::vector<LabeledGlyph> style_data, content_data, all_style_data;
    for (int32_t s : test_styles)
        for (int32_t c : store.chars_of_style(s)) {
            style_data.push_back({&store.glyph(s, c).pixels, style_label[s]});
            content_data.push_back({&store.glyph(s, c).pixels, c});
        }
    for (const auto& st : manifest.styles)
        for (int32_t c : store.chars_of_style(st.id)) all_style_data.push_back({&store.glyph(st.id, c).pixels, st.id});

    EvalTrainConfig cc = protocol.classifier_config;
    cc.seed = protocol.seed ^ 0x5d5d;
    auto style_cls = train_eval_classifier(EvalKind::style, style_data, manifest.resolution,
                                           static_cast<int>(test_styles.size()), cc);
    cc.seed = protocol.seed ^ 0xc0c0;
    auto content_cls =
        train_eval_classifier(EvalKind::content, content_data, manifest.resolution, table.num_characters(), cc);
    cc.seed = protocol.seed ^ 0xabab;
    auto unseen_cls = train_eval_classifier(EvalKind::style, all_style_data, manifest.resolution,
                                            static_cast<int>(manifest.styles.size()), cc);
    std::set<int64_t> unseen_ids(test_styles.begin(), test_styles.end());

    // ---- character blocks
    auto block_chars = [&](const std::vector<char32_t>& cps) {
        std::vector<int32_t> ids;
        for (char32_t cp : cps) ids.push_back(table.character(cp).id);
        std::sort(ids.begin(), ids.end());
        if (protocol.max_chars_per_block > 0 && static_cast<int>(ids.size()) > protocol.max_chars_per_block)
            ids.resize(static_cast<size_t>(protocol.max_chars_per_block));
        return ids;
    };
    std::vector<int32_t> seen_ids = block_chars(manifest.seen_chars);
    std::vector<int32_t> unseen_char_ids = block_chars(manifest.unseen_chars);

    MetricReport report;
    report.n_ref = protocol.n_ref;
    report.n_repeats = protocol.n_repeats;
    report.seed = protocol.seed;

    struct Acc {
        double acc_style = 0, acc_content = 0, fid_style = 0, fid_content = 0, p_uns = 0;
    };
    Acc seen_acc, unseen_acc;

    Rng rng(Rng(protocol.seed).sub("evaluate-run"));
    for (int rep = 0; rep < protocol.n_repeats; ++rep) {
        for (auto* block : {&seen_ids, &unseen_char_ids}) {
            bool is_seen_block = block == &seen_ids;
            std::vector<Tensor<float>> generated;
            std::vector<int64_t> char_labels, style_labels_true;
            std::vector<const Tensor<float>*> real_for_fid;

            for (int32_t s : test_styles) {
                // reference draw: seen characters available in this test style
                std::vector<int32_t> pool;
                for (int32_t c : store.chars_of_style(s))
                    if (std::binary_search(seen_ids.begin(), seen_ids.end(), c) || protocol.max_chars_per_block > 0)
                        pool.push_back(c);
                if (static_cast<int>(pool.size()) < protocol.n_ref)
                    throw std::invalid_argument("evaluate_run: style lacks enough reference glyphs");
                auto pick = rng.sample_without_replacement(static_cast<int64_t>(pool.size()), protocol.n_ref);
                std::vector<int32_t> ref_chars;
                for (int64_t i : pick) ref_chars.push_back(pool[static_cast<size_t>(i)]);
                auto refs = ReferenceSet::from_store(store, table, s, ref_chars);
                auto z = extract_style_factor(bundle, refs);

                for (int32_t c : *block) {
                    if (!store.has(s, c)) continue;  // no ground truth for FID pairing
                    auto gen = generate_glyph(bundle, z, store, table, c);
                    generated.push_back(std::move(gen.image.pixels));
                    char_labels.push_back(c);
                    style_labels_true.push_back(style_label[s]);
                    real_for_fid.push_back(&store.glyph(s, c).pixels);
                }
            }
            if (generated.empty()) continue;

            std::vector<LabeledGlyph> by_style, by_content;
            std::vector<const Tensor<float>*> gen_ptrs;
            for (size_t i = 0; i < generated.size(); ++i) {
                by_style.push_back({&generated[i], style_labels_true[i]});
                by_content.push_back({&generated[i], char_labels[i]});
                gen_ptrs.push_back(&generated[i]);
            }
            Acc& acc = is_seen_block ? seen_acc : unseen_acc;
            acc.acc_style += accuracy(style_cls, by_style);
            acc.acc_content += accuracy(content_cls, by_content);
            acc.fid_style += fid(style_cls.features_of(real_for_fid), style_cls.features_of(gen_ptrs));
            acc.fid_content += fid(content_cls.features_of(real_for_fid), content_cls.features_of(gen_ptrs));
            acc.p_uns += p_unseen(unseen_cls, gen_ptrs, unseen_ids);
        }
    }

    auto finish = [&](const Acc& acc) {
        MetricBlock b;
        double inv = 1.0 / static_cast<double>(protocol.n_repeats);
        b.acc_style = acc.acc_style * inv;
        b.acc_content = acc.acc_content * inv;
        b.acc_hmean = hmean(b.acc_style, b.acc_content);
        b.fid_style = acc.fid_style * inv;
        b.fid_content = acc.fid_content * inv;
        b.fid_hmean = hmean(b.fid_style, b.fid_content);
        b.p_unseen = acc.p_uns * inv;
        return b;
    };
    report.seen = finish(seen_acc);
    report.unseen = finish(unseen_acc);
    return report;
}

}  // namespace lffont
