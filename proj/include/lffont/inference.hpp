#pragma once

// Few-shot generation from reference glyphs: style-factor extraction and
// averaging, localized-feature reconstruction from the known source glyphs,
// full-library generation, interpolation, style-space mixing, pseudo-label
// mode and the cross-lingual universal-style mode.

#include <optional>
#include <string>
#include <vector>

#include "lffont/decomposition.hpp"
#include "lffont/glyphset.hpp"
#include "lffont/networks.hpp"

namespace lffont {

enum class LabelMode { ground_truth, predicted };

struct ReferenceSet {
    std::vector<GlyphImage> glyphs;
    LabelMode mode = LabelMode::ground_truth;
    // Per glyph, the ordered component ids (given, or derived from the
    // predicted character). May be empty for a glyph, which skips it.
    std::vector<std::vector<int32_t>> components;

    // Ground-truth labels resolved through the table.
    static ReferenceSet from_store(const GlyphStore& store, const DecompositionTable& table, int32_t style_id,
                                   const std::vector<int32_t>& char_ids);
    // Pseudo labels from the auxiliary character classifier.
    static ReferenceSet from_images_predicted(const nn::ModelBundle<real>& bundle, const DecompositionTable& table,
                                              std::vector<GlyphImage> images);
};

// [k, d, h', w'] spatial style factor, averaged over all (glyph, component)
// pairs of the reference set.
using StyleFactorValue = Tensor<real>;

StyleFactorValue extract_style_factor(const nn::ModelBundle<real>& bundle, const ReferenceSet& refs);

struct GenerationResult {
    GlyphImage image;
    // Set when a target component never occurs in the training data
    // (long-tail components); the glyph is produced anyway.
    bool low_confidence = false;
};

GenerationResult generate_glyph(const nn::ModelBundle<real>& bundle, const StyleFactorValue& z_style,
                                const GlyphStore& store, const DecompositionTable& table, int32_t target_char_id);

struct LibraryResult {
    std::vector<std::pair<int32_t, GenerationResult>> glyphs;  // (char id, result)
    std::vector<std::pair<int32_t, std::string>> failures;     // (char id, reason)
};

LibraryResult generate_library(const nn::ModelBundle<real>& bundle, const GlyphStore& store,
                               const DecompositionTable& table, const ReferenceSet& refs,
                               const std::vector<int32_t>& char_ids);

std::vector<GlyphImage> interpolate_style(const nn::ModelBundle<real>& bundle, const GlyphStore& store,
                                          const DecompositionTable& table, const ReferenceSet& refs_a,
                                          const ReferenceSet& refs_b, int32_t target_char_id, int steps);

std::vector<GlyphImage> interpolate_character(const nn::ModelBundle<real>& bundle, const GlyphStore& store,
                                              const DecompositionTable& table, const ReferenceSet& refs,
                                              int32_t char_a, int32_t char_b, int steps);

enum class MixMode { style, character };

struct MixedLabel {
    int32_t char_a = -1;
    int32_t char_b = -1;
    double lam = 1.0;  // weight of char_a; style mode keeps lam = 1 on the target
};

// Eq. 9 style-space mixing. In style mode the output is the target character
// rendered with the lam-blended style factor of x1 and x2 and the label is
// the unmixed target; in character mode the content side is interpolated
// between the two inputs' characters and the label is mixed.
std::pair<GlyphImage, MixedLabel> fontmix(const nn::ModelBundle<real>& bundle, const GlyphStore& store,
                                          const DecompositionTable& table, const GlyphImage& x1, const GlyphImage& x2,
                                          int32_t target_char_id, double lam, MixMode mode);

// Universal-style mode: component-bias conditioning disabled, one
// unconditioned pass per reference; the content path takes the target glyph
// from any source font covering the target script.
GlyphImage generate_cross_lingual(const nn::ModelBundle<real>& bundle, const std::vector<GlyphImage>& refs,
                                  const GlyphImage& target_glyph_source);

// Components that occur in some seen character; targets outside this set are
// generated but flagged low-confidence.
std::vector<bool> trained_component_mask(const GlyphStore& store, const DecompositionTable& table);

}  // namespace lffont
