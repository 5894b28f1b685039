#include "lffont/inference.hpp"

#include <algorithm>
#include <cstring>

namespace lffont {

namespace {

namespace ad = lffont::ad;
using ad::Var;
using nn::ModelBundle;

struct Query {
    const Tensor<float>* image;
    int64_t comp;
    // canonical sort key for exact permutation invariance of the average
    int32_t char_key;
    const std::vector<float>* pixels;
};

// Style factor as the mean of F_s over all (glyph, component) pairs, summed
// in a canonical order so reference permutations give bit-identical output.
Tensor<real> style_factor_mean(const ModelBundle<real>& bundle, std::vector<Query> queries, bool conditioned) {
    if (queries.empty()) throw std::invalid_argument("extract_style_factor: no resolvable components in references");
    std::sort(queries.begin(), queries.end(), [](const Query& a, const Query& b) {
        if (a.char_key != b.char_key) return a.char_key < b.char_key;
        if (a.comp != b.comp) return a.comp < b.comp;
        return std::lexicographical_compare(a.pixels->begin(), a.pixels->end(), b.pixels->begin(), b.pixels->end());
    });
    std::vector<const Tensor<float>*> imgs;
    std::vector<int64_t> comps;
    for (const auto& q : queries) {
        imgs.push_back(q.image);
        comps.push_back(q.comp);
    }
    auto feats = bundle.style_encoder(nn::image_batch<real>(imgs, bundle.arch.resolution), comps, conditioned);
    auto factors = bundle.factor_style(feats);  // [Q,k,d,h,w]
    int64_t Q = factors->val.dim(0);
    int64_t stride = factors->val.numel() / Q;
    Tensor<real> out(std::vector<int64_t>(factors->val.shape.begin() + 1, factors->val.shape.end()));
    for (int64_t q = 0; q < Q; ++q) {
        const real* src = factors->val.ptr() + q * stride;
        for (int64_t i = 0; i < stride; ++i) out[i] += src[i];
    }
    real inv = real(1) / static_cast<real>(Q);
    for (auto& v : out.data) v *= inv;
    return out;
}

std::vector<Query> queries_of(const ReferenceSet& refs) {
    std::vector<Query> qs;
    for (size_t g = 0; g < refs.glyphs.size(); ++g) {
        if (refs.components[g].empty()) continue;  // skipped reference
        for (int32_t u : refs.components[g])
            qs.push_back({&refs.glyphs[g].pixels, u, refs.glyphs[g].character, &refs.glyphs[g].pixels.data});
    }
    return qs;
}

Tensor<real> lerp(const Tensor<real>& a, const Tensor<real>& b, double t) {
    if (t == 0.0) return a;
    if (t == 1.0) return b;
    Tensor<real> out = a;
    for (int64_t i = 0; i < out.numel(); ++i)
        out[i] = static_cast<real>((1.0 - t) * a[i] + t * b[i]);
    return out;
}

GlyphImage image_from_batch_row(const Tensor<real>& batch, int32_t char_id) {
    int64_t H = batch.dim(2), W = batch.dim(3);
    GlyphImage g;
    g.pixels = Tensor<float>({H, W});
    for (int64_t i = 0; i < H * W; ++i) g.pixels[i] = static_cast<float>(batch[i]);
    g.character = char_id;
    return g;
}

// Aggregated localized feature and content feature for a source character
// under a fixed style factor.
struct TargetSide {
    Var<real> f_sc;  // [1,d,h,w]
    Var<real> f_c;   // [1,Cf,h,w]
};

TargetSide build_target_side(const ModelBundle<real>& bundle, const GlyphStore& store,
                             const DecompositionTable& table, const Tensor<real>& z_style, int32_t char_id) {
    int32_t source_style = store.manifest().source_style;
    if (!store.has(source_style, char_id))
        throw NotFoundError("generate: target character id " + std::to_string(char_id) + " missing from source style");
    const auto& source = store.glyph(source_style, char_id);
    const auto comps = table.decompose(table.character_by_id(char_id));

    std::vector<const Tensor<float>*> imgs;
    std::vector<int64_t> comp_ids;
    for (const auto& u : comps) {
        imgs.push_back(&source.pixels);
        comp_ids.push_back(u.id);
    }
    auto feats = bundle.style_encoder(nn::image_batch<real>(imgs, bundle.arch.resolution), comp_ids, true);
    auto z_u = bundle.factor_comp(feats);  // [m,k,d,h,w]

    std::vector<int64_t> zshape = z_style.shape;
    zshape.insert(zshape.begin(), 1);
    auto z_one = ad::constant(z_style.reshaped(zshape));
    auto z_rows = ad::expand_batch(z_one, static_cast<int64_t>(comps.size()));
    auto recon = nn::reconstruct_feature(z_rows, z_u);  // one summand per component occurrence

    std::vector<std::vector<int64_t>> all_rows{{}};
    for (int64_t i = 0; i < static_cast<int64_t>(comps.size()); ++i) all_rows[0].push_back(i);
    TargetSide side;
    side.f_sc = ad::group_sum(recon, all_rows);
    side.f_c = bundle.content_encoder(nn::image_batch<real>({&source.pixels}, bundle.arch.resolution));
    return side;
}

}  // namespace

ReferenceSet ReferenceSet::from_store(const GlyphStore& store, const DecompositionTable& table, int32_t style_id,
                                      const std::vector<int32_t>& char_ids) {
    ReferenceSet refs;
    refs.mode = LabelMode::ground_truth;
    for (int32_t c : char_ids) {
        refs.glyphs.push_back(store.glyph(style_id, c));
        std::vector<int32_t> comps;
        for (const auto& u : table.decompose(table.character_by_id(c))) comps.push_back(u.id);
        refs.components.push_back(std::move(comps));
    }
    return refs;
}

ReferenceSet ReferenceSet::from_images_predicted(const nn::ModelBundle<real>& bundle, const DecompositionTable& table,
                                                 std::vector<GlyphImage> images) {
    ReferenceSet refs;
    refs.mode = LabelMode::predicted;
    for (auto& img : images) {
        int64_t pseudo = nn::pseudo_character_label(bundle, img.pixels);
        img.character = static_cast<int32_t>(pseudo);
        std::vector<int32_t> comps;
        for (const auto& u : table.decompose(table.character_by_id(static_cast<int32_t>(pseudo))))
            comps.push_back(u.id);
        refs.glyphs.push_back(std::move(img));
        refs.components.push_back(std::move(comps));
    }
    return refs;
}

StyleFactorValue extract_style_factor(const nn::ModelBundle<real>& bundle, const ReferenceSet& refs) {
    if (refs.glyphs.empty()) throw std::invalid_argument("extract_style_factor: empty reference set");
    if (refs.glyphs.size() != refs.components.size())
        throw std::invalid_argument("extract_style_factor: component lists do not match glyphs");
    return style_factor_mean(bundle, queries_of(refs), true);
}

std::vector<bool> trained_component_mask(const GlyphStore& store, const DecompositionTable& table) {
    std::vector<bool> mask(static_cast<size_t>(table.num_components()), false);
    for (char32_t cp : store.manifest().seen_chars)
        for (const auto& u : table.decompose(table.character(cp))) mask[static_cast<size_t>(u.id)] = true;
    return mask;
}

GenerationResult generate_glyph(const nn::ModelBundle<real>& bundle, const StyleFactorValue& z_style,
                                const GlyphStore& store, const DecompositionTable& table, int32_t target_char_id) {
    auto side = build_target_side(bundle, store, table, z_style, target_char_id);
    auto out = bundle.generator(side.f_sc, side.f_c);

    GenerationResult res;
    res.image = image_from_batch_row(out->val, target_char_id);
    auto mask = trained_component_mask(store, table);
    for (const auto& u : table.decompose(table.character_by_id(target_char_id)))
        if (!mask[static_cast<size_t>(u.id)]) res.low_confidence = true;
    return res;
}

LibraryResult generate_library(const nn::ModelBundle<real>& bundle, const GlyphStore& store,
                               const DecompositionTable& table, const ReferenceSet& refs,
                               const std::vector<int32_t>& char_ids) {
    if (char_ids.empty()) throw std::invalid_argument("generate_library: empty character list");
    auto z = extract_style_factor(bundle, refs);
    LibraryResult out;
    for (int32_t c : char_ids) {
        try {
            out.glyphs.emplace_back(c, generate_glyph(bundle, z, store, table, c));
        } catch (const std::exception& e) {
            out.failures.emplace_back(c, e.what());
        }
    }
    return out;
}

std::vector<GlyphImage> interpolate_style(const nn::ModelBundle<real>& bundle, const GlyphStore& store,
                                          const DecompositionTable& table, const ReferenceSet& refs_a,
                                          const ReferenceSet& refs_b, int32_t target_char_id, int steps) {
    if (steps < 2) throw std::invalid_argument("interpolate_style: steps must be >= 2");
    auto za = extract_style_factor(bundle, refs_a);
    auto zb = extract_style_factor(bundle, refs_b);
    std::vector<GlyphImage> out;
    for (int i = 0; i < steps; ++i) {
        double t = static_cast<double>(i) / (steps - 1);
        auto z = lerp(za, zb, t);
        out.push_back(generate_glyph(bundle, z, store, table, target_char_id).image);
    }
    return out;
}

std::vector<GlyphImage> interpolate_character(const nn::ModelBundle<real>& bundle, const GlyphStore& store,
                                              const DecompositionTable& table, const ReferenceSet& refs,
                                              int32_t char_a, int32_t char_b, int steps) {
    if (steps < 2) throw std::invalid_argument("interpolate_character: steps must be >= 2");
    auto z = extract_style_factor(bundle, refs);
    auto side_a = build_target_side(bundle, store, table, z, char_a);
    auto side_b = build_target_side(bundle, store, table, z, char_b);

    std::vector<GlyphImage> out;
    for (int i = 0; i < steps; ++i) {
        double t = static_cast<double>(i) / (steps - 1);
        auto f_sc = ad::constant(lerp(side_a.f_sc->val, side_b.f_sc->val, t));
        auto f_c = ad::constant(lerp(side_a.f_c->val, side_b.f_c->val, t));
        auto img = bundle.generator(f_sc, f_c);
        out.push_back(image_from_batch_row(img->val, t < 0.5 ? char_a : char_b));
    }
    return out;
}

std::pair<GlyphImage, MixedLabel> fontmix(const nn::ModelBundle<real>& bundle, const GlyphStore& store,
                                          const DecompositionTable& table, const GlyphImage& x1, const GlyphImage& x2,
                                          int32_t target_char_id, double lam, MixMode mode) {
    if (lam < 0.0 || lam > 1.0) throw std::invalid_argument("fontmix: lam must lie in [0,1]");
    auto comp_ids_of = [&](const GlyphImage& g) {
        std::vector<int32_t> out;
        for (const auto& u : table.decompose(table.character_by_id(g.character))) out.push_back(u.id);
        return out;
    };
    ReferenceSet r1, r2;
    r1.glyphs = {x1};
    r1.components = {comp_ids_of(x1)};
    r2.glyphs = {x2};
    r2.components = {comp_ids_of(x2)};
    auto z1 = extract_style_factor(bundle, r1);
    auto z2 = extract_style_factor(bundle, r2);
    // lam weights x1's style factor
    auto z = lerp(z2, z1, lam);

    if (mode == MixMode::style) {
        auto res = generate_glyph(bundle, z, store, table, target_char_id);
        return {std::move(res.image), MixedLabel{target_char_id, target_char_id, 1.0}};
    }

    // character mode: interpolate the aggregated component side and the
    // content representation between the two inputs' characters
    auto side_1 = build_target_side(bundle, store, table, z, x1.character);
    auto side_2 = build_target_side(bundle, store, table, z, x2.character);
    auto f_sc = ad::constant(lerp(side_2.f_sc->val, side_1.f_sc->val, lam));
    auto f_c = ad::constant(lerp(side_2.f_c->val, side_1.f_c->val, lam));
    auto img = bundle.generator(f_sc, f_c);
    auto glyph = image_from_batch_row(img->val, lam >= 0.5 ? x1.character : x2.character);
    return {std::move(glyph), MixedLabel{x1.character, x2.character, lam}};
}

GlyphImage generate_cross_lingual(const nn::ModelBundle<real>& bundle, const std::vector<GlyphImage>& refs,
                                  const GlyphImage& target_glyph_source) {
    if (refs.empty()) throw std::invalid_argument("generate_cross_lingual: empty reference set");
    // One unconditioned pass per reference glyph.
    std::vector<Query> qs;
    for (const auto& g : refs) qs.push_back({&g.pixels, 0, g.character, &g.pixels.data});
    auto z_style = style_factor_mean(bundle, std::move(qs), false);

    auto feats = bundle.style_encoder(nn::image_batch<real>({&target_glyph_source.pixels}, bundle.arch.resolution),
                                      {0}, false);
    auto z_u = bundle.factor_comp(feats);
    std::vector<int64_t> zshape = z_style.shape;
    zshape.insert(zshape.begin(), 1);
    auto f = nn::reconstruct_feature(ad::constant(z_style.reshaped(zshape)), z_u);
    auto f_c = bundle.content_encoder(nn::image_batch<real>({&target_glyph_source.pixels}, bundle.arch.resolution));
    auto out = bundle.generator(f, f_c);
    return image_from_batch_row(out->val, target_glyph_source.character);
}

}  // namespace lffont
