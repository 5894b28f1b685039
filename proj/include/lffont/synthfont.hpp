#pragma once

// Parametric stroke fonts. Components are deterministic stroke patterns keyed
// by codepoint; characters arrange their components into layout slots; a
// style is a small set of rendering parameters (weight, slant, ink, ...).
// This keeps the whole pipeline self-contained: no font engine needed, and
// two files with equal parameters produce pixel-identical glyphs.

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "lffont/glyphset.hpp"
#include "lffont/rng.hpp"

namespace lffont {

struct SynthStyleParams {
    std::string name;
    double thickness = 2.0;  // stroke width at 64 px, scaled with resolution
    double slant = 0.0;      // horizontal shear
    double scale = 0.92;     // glyph box fraction
    double rotate = 0.0;     // radians
    double softness = 1.0;   // anti-alias edge width in px
    double ink = 0.0;        // 0 = black strokes, 1 = background
    double jitter = 0.0;     // per-slot offset amplitude in px (at 64)
    uint64_t jitter_seed = 0;
    std::vector<char32_t> blank_codepoints;    // render as empty (invalid glyph)
    std::vector<char32_t> missing_codepoints;  // has_glyph() == false

    static SynthStyleParams random(const std::string& name, Rng& rng);
};

void write_synth_font(const std::filesystem::path& path, const SynthStyleParams& params);
SynthStyleParams read_synth_font(const std::filesystem::path& path);

class SyntheticFont : public GlyphRasterizer {
public:
    SyntheticFont(SynthStyleParams params, const DecompositionTable* table);

    std::string name() const override { return params_.name; }
    bool has_glyph(char32_t cp) const override;
    GrayImage render(char32_t cp, int resolution) const override;

    const SynthStyleParams& params() const { return params_; }

private:
    SynthStyleParams params_;
    const DecompositionTable* table_;
    std::set<char32_t> blank_;
    std::set<char32_t> missing_;
};

}  // namespace lffont
