#pragma once

// All parametric functions: content encoder E_c, component-conditioned style
// encoder E_{s,u}, factorization modules F_s / F_u, generator G, multi-head
// conditional discriminator D, component classifier, and the auxiliary
// character classifier.

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "lffont/autodiff.hpp"
#include "lffont/rng.hpp"
#include "lffont/tensor.hpp"

namespace lffont::nn {

using ad::Var;

struct ArchConfig {
    int resolution = 128;
    std::vector<int> enc_channels = {32, 64, 128, 256};
    std::vector<int> enc_strides = {1, 2, 2, 2};
    int enc_res_blocks = 2;
    int cond_stage = 1;  // channel-bias conditioning is added after this stage
    int factor_k = 8;
    std::vector<int> disc_channels = {32, 64, 128, 256, 256};
    int aux_base_channels = 16;
    // label spaces
    int num_components = 0;
    int num_chars = 0;
    int num_styles = 0;

    int total_stride() const {
        int s = 1;
        for (int v : enc_strides) s *= v;
        return s;
    }
    int feature_hw() const { return resolution / total_stride(); }
    int feature_channels() const { return enc_channels.back(); }

    static ArchConfig desk_scale() {
        ArchConfig a;
        a.resolution = 64;
        a.enc_channels = {8, 16, 32, 64};
        a.disc_channels = {16, 32, 64, 128, 128};
        a.aux_base_channels = 12;
        return a;
    }

    nlohmann::json to_json() const;
    static ArchConfig from_json(const nlohmann::json& j);
    void validate() const;
};

// ---------------------------------------------------------------------------

template <class S>
struct ParamStore {
    std::vector<Var<S>> params;
    std::unordered_map<std::string, size_t> by_name;

    Var<S> create(const std::string& name, Tensor<S> init) {
        if (by_name.count(name)) throw std::logic_error("param store: duplicate parameter " + name);
        auto p = ad::param<S>(std::move(init), name);
        by_name.emplace(name, params.size());
        params.push_back(p);
        return p;
    }
    Var<S> get(const std::string& name) const {
        auto it = by_name.find(name);
        if (it == by_name.end()) throw std::out_of_range("param store: unknown parameter " + name);
        return params[it->second];
    }
    void zero_grads() {
        for (auto& p : params) p->zero_grad();
    }
};

template <class S>
Tensor<S> gaussian_init(Rng& rng, std::vector<int64_t> shape, double fan_in, double gain) {
    Tensor<S> t(std::move(shape));
    double std = std::sqrt(gain / std::max(1.0, fan_in));
    for (auto& v : t.data) v = static_cast<S>(rng.normal() * std);
    return t;
}

template <class S>
struct Conv {
    Var<S> w, b;
    int stride = 1, pad = 1;
    Var<S> operator()(const Var<S>& x) const { return ad::conv2d(x, w, b, stride, pad); }
};

template <class S>
Conv<S> make_conv(ParamStore<S>& ps, Rng& rng, const std::string& name, int ci, int co, int k, int stride, int pad,
                  double gain = 2.0) {
    Conv<S> c;
    c.w = ps.create(name + ".w", gaussian_init<S>(rng, {co, ci, k, k}, static_cast<double>(ci) * k * k, gain));
    c.b = ps.create(name + ".b", Tensor<S>::zeros({co}));
    c.stride = stride;
    c.pad = pad;
    return c;
}

template <class S>
struct LinearLayer {
    Var<S> w, b;
    Var<S> operator()(const Var<S>& x) const { return ad::linear(x, w, b); }
};

template <class S>
LinearLayer<S> make_linear(ParamStore<S>& ps, Rng& rng, const std::string& name, int in, int out, double gain = 1.0) {
    LinearLayer<S> l;
    l.w = ps.create(name + ".w", gaussian_init<S>(rng, {in, out}, in, gain));
    l.b = ps.create(name + ".b", Tensor<S>::zeros({out}));
    return l;
}

template <class S>
struct ResBlock {
    Conv<S> c1, c2;
    Var<S> operator()(const Var<S>& x) const {
        auto h = c2(ad::leaky_relu(c1(ad::leaky_relu(x))));
        return ad::add(x, h);
    }
};

template <class S>
ResBlock<S> make_res_block(ParamStore<S>& ps, Rng& rng, const std::string& name, int ch) {
    ResBlock<S> r;
    r.c1 = make_conv(ps, rng, name + ".c1", ch, ch, 3, 1, 1);
    r.c2 = make_conv(ps, rng, name + ".c2", ch, ch, 3, 1, 1);
    return r;
}

// Global-context block: softmax attention pooling plus a bottleneck
// transform, added back per channel.
template <class S>
struct GlobalContext {
    Conv<S> key;
    LinearLayer<S> down, up;
    Var<S> operator()(const Var<S>& x) const {
        auto ctx = ad::spatial_attention_pool(x, key(x));
        auto t = up(ad::leaky_relu(down(ctx)));
        return ad::broadcast_add_nc(x, t);
    }
};

template <class S>
GlobalContext<S> make_global_context(ParamStore<S>& ps, Rng& rng, const std::string& name, int ch) {
    GlobalContext<S> g;
    g.key = make_conv(ps, rng, name + ".key", ch, 1, 1, 1, 0, 1.0);
    int mid = std::max(1, ch / 4);
    g.down = make_linear(ps, rng, name + ".down", ch, mid, 2.0);
    g.up = make_linear(ps, rng, name + ".up", mid, ch, 1.0);
    return g;
}

// Channel gate from pooled statistics followed by a spatial gate, in the
// usual convolutional block attention arrangement.
template <class S>
struct Cbam {
    LinearLayer<S> fc1, fc2;
    Conv<S> spatial;
    Var<S> operator()(const Var<S>& x) const {
        auto avg = fc2(ad::leaky_relu(fc1(ad::global_avg_pool(x))));
        auto mx = fc2(ad::leaky_relu(fc1(ad::global_max_pool(x))));
        auto y = ad::mul_gate_nc(x, ad::sigmoid_(ad::add(avg, mx)));
        auto mask = ad::sigmoid_(spatial(ad::channel_stats_map(y)));
        return ad::mul_gate_spatial(y, mask);
    }
};

template <class S>
Cbam<S> make_cbam(ParamStore<S>& ps, Rng& rng, const std::string& name, int ch) {
    Cbam<S> c;
    int mid = std::max(1, ch / 8);
    c.fc1 = make_linear(ps, rng, name + ".fc1", ch, mid, 2.0);
    c.fc2 = make_linear(ps, rng, name + ".fc2", mid, ch, 1.0);
    c.spatial = make_conv(ps, rng, name + ".spatial", 2, 1, 7, 1, 3, 1.0);
    return c;
}

// ---------------------------------------------------------------------------
// encoders

template <class S>
struct ContentEncoder {
    std::vector<Conv<S>> stages;
    std::vector<ResBlock<S>> res;

    Var<S> operator()(const Var<S>& images) const {
        Var<S> h = images;
        for (const auto& c : stages) h = ad::leaky_relu(c(h));
        for (const auto& r : res) h = r(h);
        return h;
    }
};

template <class S>
ContentEncoder<S> make_content_encoder(ParamStore<S>& ps, Rng& rng, const ArchConfig& a) {
    ContentEncoder<S> e;
    int ci = 1;
    for (size_t i = 0; i < a.enc_channels.size(); ++i) {
        e.stages.push_back(make_conv(ps, rng, "content_encoder.stage" + std::to_string(i), ci, a.enc_channels[i], 3,
                                     a.enc_strides[i], 1));
        ci = a.enc_channels[i];
    }
    for (int i = 0; i < a.enc_res_blocks; ++i)
        e.res.push_back(make_res_block(ps, rng, "content_encoder.res" + std::to_string(i), ci));
    return e;
}

// Component-conditioned style encoder: shared trunk, learned per-component
// channel biases added after stage `cond_stage`, then a global-context block
// and a CBAM block on top of the residual trunk.
template <class S>
struct StyleEncoder {
    std::vector<Conv<S>> stages;
    std::vector<ResBlock<S>> res;
    Var<S> component_bias;  // [num_components, channels(cond_stage)]
    GlobalContext<S> gc;
    Cbam<S> cbam;
    int cond_stage = 1;
    int num_components = 0;

    // components[i] conditions sample i; pass conditioned=false for the
    // unconditioned (universal-style) pass used in cross-lingual mode.
    Var<S> operator()(const Var<S>& images, const std::vector<int64_t>& components, bool conditioned = true) const {
        if (conditioned) {
            if (static_cast<int64_t>(components.size()) != images->val.dim(0))
                throw std::invalid_argument("style encoder: one component id per image required");
            for (int64_t u : components)
                if (u < 0 || u >= num_components)
                    throw std::out_of_range("style encoder: unknown component id " + std::to_string(u));
        }
        Var<S> h = images;
        for (size_t i = 0; i < stages.size(); ++i) {
            h = ad::leaky_relu(stages[i](h));
            if (static_cast<int>(i) == cond_stage && conditioned)
                h = ad::broadcast_add_nc(h, ad::rows_select(component_bias, components));
        }
        for (const auto& r : res) h = r(h);
        h = gc(h);
        return cbam(h);
    }
};

template <class S>
StyleEncoder<S> make_style_encoder(ParamStore<S>& ps, Rng& rng, const ArchConfig& a) {
    StyleEncoder<S> e;
    int ci = 1;
    for (size_t i = 0; i < a.enc_channels.size(); ++i) {
        e.stages.push_back(make_conv(ps, rng, "style_encoder.stage" + std::to_string(i), ci, a.enc_channels[i], 3,
                                     a.enc_strides[i], 1));
        ci = a.enc_channels[i];
    }
    for (int i = 0; i < a.enc_res_blocks; ++i)
        e.res.push_back(make_res_block(ps, rng, "style_encoder.res" + std::to_string(i), ci));
    // Zero init keeps conditioning neutral at the start of training.
    e.component_bias = ps.create("style_encoder.component_bias",
                                 Tensor<S>::zeros({a.num_components, a.enc_channels[static_cast<size_t>(a.cond_stage)]}));
    e.gc = make_global_context(ps, rng, "style_encoder.gc", ci);
    e.cbam = make_cbam(ps, rng, "style_encoder.cbam", ci);
    e.cond_stage = a.cond_stage;
    e.num_components = a.num_components;
    return e;
}

// ---------------------------------------------------------------------------
// factorization modules (Eq. 4): z = [w_1 .* f + b_1; ...; w_k .* f + b_k]

template <class S>
struct Factorizer {
    Var<S> w;  // [k, d]
    Var<S> b;  // [k]
    Var<S> operator()(const Var<S>& f) const { return ad::factor_apply(f, w, b); }
};

template <class S>
Factorizer<S> make_factorizer(ParamStore<S>& ps, Rng& rng, const std::string& name, int k, int d) {
    Factorizer<S> f;
    f.w = ps.create(name + ".w", gaussian_init<S>(rng, {k, d}, 1.0, 1.0));
    f.b = ps.create(name + ".b", Tensor<S>::zeros({k}));
    return f;
}

// Eq. 3: f = 1^T (z_s .* z_u), i.e. the k-way elementwise product sum.
template <class S>
Var<S> reconstruct_feature(const Var<S>& z_style, const Var<S>& z_comp) {
    return ad::factor_reconstruct(z_style, z_comp);
}

// Eq. 2: localized style feature for a character is the sum over its
// component features, duplicates contributing once per occurrence.
template <class S>
Var<S> aggregate_localized_style(const std::vector<Var<S>>& features) {
    if (features.empty()) throw std::invalid_argument("aggregate_localized_style: empty feature list");
    Var<S> acc = features[0];
    for (size_t i = 1; i < features.size(); ++i) acc = ad::add(acc, features[i]);
    return acc;
}

// ---------------------------------------------------------------------------
// generator

template <class S>
struct Generator {
    Conv<S> fuse;
    std::vector<ResBlock<S>> res;
    std::vector<Conv<S>> up;
    Conv<S> out;

    // f_sc: [N,d,h,w] localized style, f_c: [N,Cf,h,w] content.
    Var<S> operator()(const Var<S>& f_sc, const Var<S>& f_c) const {
        Var<S> h = ad::leaky_relu(fuse(ad::concat_channels(f_sc, f_c)));
        for (const auto& r : res) h = r(h);
        for (const auto& c : up) h = ad::leaky_relu(c(ad::upsample_nearest2(h)));
        return ad::tanh_(out(h));
    }
};

template <class S>
Generator<S> make_generator(ParamStore<S>& ps, Rng& rng, const ArchConfig& a) {
    Generator<S> g;
    int d = a.feature_channels();
    g.fuse = make_conv(ps, rng, "generator.fuse", 2 * d, d, 1, 1, 0);
    for (int i = 0; i < a.enc_res_blocks; ++i)
        g.res.push_back(make_res_block(ps, rng, "generator.res" + std::to_string(i), d));
    int ci = d;
    int stage = 0;
    for (size_t i = a.enc_channels.size(); i-- > 0;) {
        if (a.enc_strides[i] != 2) continue;
        int co = i > 0 ? a.enc_channels[i - 1] : a.enc_channels[0];
        g.up.push_back(make_conv(ps, rng, "generator.up" + std::to_string(stage++), ci, co, 3, 1, 1));
        ci = co;
    }
    g.out = make_conv(ps, rng, "generator.out", ci, 1, 3, 1, 1, 1.0);
    return g;
}

// ---------------------------------------------------------------------------
// discriminator

template <class S>
struct DiscriminatorOut {
    Var<S> style_score;  // [N]
    Var<S> char_score;   // [N]
    std::vector<Var<S>> features;
};

template <class S>
struct Discriminator {
    std::vector<Conv<S>> trunk;
    LinearLayer<S> psi_style, psi_char;
    Var<S> emb_style;  // [num_styles, C]
    Var<S> emb_char;   // [num_chars, C]
    int num_styles = 0, num_chars = 0;

    DiscriminatorOut<S> operator()(const Var<S>& images, const std::vector<int64_t>& styles,
                                   const std::vector<int64_t>& chars) const {
        if (static_cast<int64_t>(styles.size()) != images->val.dim(0) || styles.size() != chars.size())
            throw std::invalid_argument("discriminator: one (style, char) label pair per image required");
        for (int64_t s : styles)
            if (s < 0 || s >= num_styles) throw std::out_of_range("discriminator: style label out of range");
        for (int64_t c : chars)
            if (c < 0 || c >= num_chars) throw std::out_of_range("discriminator: char label out of range");
        DiscriminatorOut<S> out;
        Var<S> h = images;
        for (const auto& c : trunk) {
            h = ad::leaky_relu(c(h));
            out.features.push_back(h);
        }
        auto phi = ad::global_avg_pool(h);
        out.style_score = ad::add(ad::reshape(psi_style(phi), {phi->val.dim(0)}),
                                  ad::rowwise_dot(phi, ad::rows_select(emb_style, styles)));
        out.char_score = ad::add(ad::reshape(psi_char(phi), {phi->val.dim(0)}),
                                 ad::rowwise_dot(phi, ad::rows_select(emb_char, chars)));
        return out;
    }
};

template <class S>
Discriminator<S> make_discriminator(ParamStore<S>& ps, Rng& rng, const ArchConfig& a) {
    Discriminator<S> d;
    int ci = 1;
    for (size_t i = 0; i < a.disc_channels.size(); ++i) {
        d.trunk.push_back(
            make_conv(ps, rng, "discriminator.trunk" + std::to_string(i), ci, a.disc_channels[i], 4, 2, 1));
        ci = a.disc_channels[i];
    }
    d.psi_style = make_linear(ps, rng, "discriminator.psi_style", ci, 1);
    d.psi_char = make_linear(ps, rng, "discriminator.psi_char", ci, 1);
    d.emb_style = ps.create("discriminator.emb_style", gaussian_init<S>(rng, {a.num_styles, ci}, ci, 1.0));
    d.emb_char = ps.create("discriminator.emb_char", gaussian_init<S>(rng, {a.num_chars, ci}, ci, 1.0));
    d.num_styles = a.num_styles;
    d.num_chars = a.num_chars;
    return d;
}

// ---------------------------------------------------------------------------
// classifiers

// Predicts the component label of a component-wise style feature (Eq. 8).
template <class S>
struct ComponentClassifier {
    Conv<S> conv;
    LinearLayer<S> head;
    Var<S> operator()(const Var<S>& features) const {
        return head(ad::global_avg_pool(ad::leaky_relu(conv(features))));
    }
};

template <class S>
ComponentClassifier<S> make_component_classifier(ParamStore<S>& ps, Rng& rng, const ArchConfig& a) {
    ComponentClassifier<S> c;
    int d = a.feature_channels();
    c.conv = make_conv(ps, rng, "component_classifier.conv", d, d, 3, 1, 1);
    c.head = make_linear(ps, rng, "component_classifier.head", d, a.num_components);
    return c;
}

// Auxiliary classifier over glyph images; its argmax is the pseudo character
// label used at inference time.
template <class S>
struct CharClassifier {
    std::vector<Conv<S>> convs;
    LinearLayer<S> head;
    Var<S> operator()(const Var<S>& images) const {
        Var<S> h = images;
        for (const auto& c : convs) h = ad::leaky_relu(c(h));
        return head(ad::global_avg_pool(h));
    }
};

template <class S>
CharClassifier<S> make_char_classifier(ParamStore<S>& ps, Rng& rng, const ArchConfig& a) {
    CharClassifier<S> c;
    int base = a.aux_base_channels;
    std::vector<std::pair<int, int>> plan = {{1, base}, {base, 2 * base}, {2 * base, 4 * base}, {4 * base, 4 * base}};
    for (size_t i = 0; i < plan.size(); ++i)
        c.convs.push_back(make_conv(ps, rng, "char_classifier.conv" + std::to_string(i), plan[i].first, plan[i].second,
                                    3, i == 0 ? 1 : 2, 1));
    c.head = make_linear(ps, rng, "char_classifier.head", 4 * base, a.num_chars);
    return c;
}

// ---------------------------------------------------------------------------
// model bundle

template <class S>
struct ModelBundle {
    ArchConfig arch;
    int phase = 0;  // 0: initialized, 1 or 2 after training
    uint64_t table_fingerprint = 0;
    ParamStore<S> params;

    ContentEncoder<S> content_encoder;
    StyleEncoder<S> style_encoder;
    Factorizer<S> factor_style;
    Factorizer<S> factor_comp;
    Generator<S> generator;
    Discriminator<S> discriminator;
    ComponentClassifier<S> component_classifier;
    CharClassifier<S> char_classifier;

    static ModelBundle init(const ArchConfig& arch, uint64_t table_fingerprint, uint64_t seed) {
        arch.validate();
        ModelBundle b;
        b.arch = arch;
        b.table_fingerprint = table_fingerprint;
        Rng rng(Rng(seed).sub("model-init"));
        b.content_encoder = make_content_encoder(b.params, rng, arch);
        b.style_encoder = make_style_encoder(b.params, rng, arch);
        b.factor_style = make_factorizer(b.params, rng, "factor_style", arch.factor_k, arch.feature_channels());
        b.factor_comp = make_factorizer(b.params, rng, "factor_comp", arch.factor_k, arch.feature_channels());
        b.generator = make_generator(b.params, rng, arch);
        b.discriminator = make_discriminator(b.params, rng, arch);
        b.component_classifier = make_component_classifier(b.params, rng, arch);
        b.char_classifier = make_char_classifier(b.params, rng, arch);
        return b;
    }

    // Parameter groups for the optimizers.
    std::vector<Var<S>> discriminator_params() const {
        std::vector<Var<S>> out;
        for (const auto& p : params.params)
            if (p->name.rfind("discriminator.", 0) == 0) out.push_back(p);
        return out;
    }
    std::vector<Var<S>> generator_side_params() const {
        std::vector<Var<S>> out;
        for (const auto& p : params.params)
            if (p->name.rfind("discriminator.", 0) != 0 && p->name.rfind("char_classifier.", 0) != 0)
                out.push_back(p);
        return out;
    }
    std::vector<Var<S>> char_classifier_params() const {
        std::vector<Var<S>> out;
        for (const auto& p : params.params)
            if (p->name.rfind("char_classifier.", 0) == 0) out.push_back(p);
        return out;
    }
};

// Single-image wrappers matching the operation-level contracts.

template <class S>
Var<S> image_batch(const std::vector<const Tensor<float>*>& images, int resolution) {
    if (images.empty()) throw std::invalid_argument("image_batch: empty");
    Tensor<S> t({static_cast<int64_t>(images.size()), 1, resolution, resolution});
    int64_t hw = static_cast<int64_t>(resolution) * resolution;
    for (size_t i = 0; i < images.size(); ++i) {
        const auto& img = *images[i];
        if (img.rank() != 2 || img.dim(0) != resolution || img.dim(1) != resolution)
            throw std::invalid_argument("image_batch: glyph resolution mismatch");
        for (int64_t p = 0; p < hw; ++p) t[static_cast<int64_t>(i) * hw + p] = static_cast<S>(img[p]);
    }
    return ad::constant(std::move(t));
}

template <class S>
Var<S> encode_content(const ModelBundle<S>& b, const Tensor<float>& glyph) {
    return b.content_encoder(image_batch<S>({&glyph}, b.arch.resolution));
}

template <class S>
Var<S> encode_component_style(const ModelBundle<S>& b, const Tensor<float>& glyph, int64_t component,
                              bool conditioned = true) {
    return b.style_encoder(image_batch<S>({&glyph}, b.arch.resolution), {component}, conditioned);
}

template <class S>
Var<S> generate(const ModelBundle<S>& b, const Var<S>& f_sc, const Var<S>& f_c) {
    return b.generator(f_sc, f_c);
}

template <class S>
DiscriminatorOut<S> discriminate(const ModelBundle<S>& b, const Tensor<float>& glyph, int64_t style, int64_t chr) {
    return b.discriminator(image_batch<S>({&glyph}, b.arch.resolution), {style}, {chr});
}

template <class S>
Var<S> classify_component(const ModelBundle<S>& b, const Var<S>& feature) {
    return b.component_classifier(feature);
}

template <class S>
Var<S> classify_character(const ModelBundle<S>& b, const Tensor<float>& glyph) {
    return b.char_classifier(image_batch<S>({&glyph}, b.arch.resolution));
}

// Argmax pseudo label; ties break toward the lowest character id.
template <class S>
int64_t pseudo_character_label(const ModelBundle<S>& b, const Tensor<float>& glyph) {
    auto logits = classify_character(b, glyph);
    const auto& v = logits->val;
    int64_t best = 0;
    for (int64_t j = 1; j < v.dim(1); ++j)
        if (v[j] > v[best]) best = j;
    return best;
}

// ---------------------------------------------------------------------------

inline nlohmann::json ArchConfig::to_json() const {
    nlohmann::json j;
    j["resolution"] = resolution;
    j["enc_channels"] = enc_channels;
    j["enc_strides"] = enc_strides;
    j["enc_res_blocks"] = enc_res_blocks;
    j["cond_stage"] = cond_stage;
    j["factor_k"] = factor_k;
    j["disc_channels"] = disc_channels;
    j["aux_base_channels"] = aux_base_channels;
    j["num_components"] = num_components;
    j["num_chars"] = num_chars;
    j["num_styles"] = num_styles;
    return j;
}

inline ArchConfig ArchConfig::from_json(const nlohmann::json& j) {
    ArchConfig a;
    a.resolution = j.at("resolution").get<int>();
    a.enc_channels = j.at("enc_channels").get<std::vector<int>>();
    a.enc_strides = j.at("enc_strides").get<std::vector<int>>();
    a.enc_res_blocks = j.at("enc_res_blocks").get<int>();
    a.cond_stage = j.at("cond_stage").get<int>();
    a.factor_k = j.at("factor_k").get<int>();
    a.disc_channels = j.at("disc_channels").get<std::vector<int>>();
    a.aux_base_channels = j.at("aux_base_channels").get<int>();
    a.num_components = j.at("num_components").get<int>();
    a.num_chars = j.at("num_chars").get<int>();
    a.num_styles = j.at("num_styles").get<int>();
    return a;
}

inline void ArchConfig::validate() const {
    if (enc_channels.size() != enc_strides.size() || enc_channels.empty())
        throw std::invalid_argument("arch: enc_channels and enc_strides must be non-empty and match");
    if (cond_stage < 0 || cond_stage >= static_cast<int>(enc_channels.size()))
        throw std::invalid_argument("arch: cond_stage out of range");
    if (factor_k < 1) throw std::invalid_argument("arch: factor_k must be >= 1");
    if (resolution % total_stride() != 0)
        throw std::invalid_argument("arch: resolution must be divisible by the encoder stride product");
    if (feature_hw() < 1) throw std::invalid_argument("arch: feature map would be empty");
    int disc_down = 1 << static_cast<int>(disc_channels.size());
    if (resolution / disc_down < 1)
        throw std::invalid_argument("arch: too many discriminator layers for this resolution");
    if (num_components < 1 || num_chars < 1 || num_styles < 1)
        throw std::invalid_argument("arch: label spaces must be set");
}

}  // namespace lffont::nn
