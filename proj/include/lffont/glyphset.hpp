#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lffont/decomposition.hpp"
#include "lffont/png_io.hpp"
#include "lffont/tensor.hpp"

namespace lffont {

enum class Split { train, test };

struct StyleId {
    int32_t id = -1;
    std::string name;
    Split split = Split::train;
};

// H x W grayscale glyph, values in [-1,1], ink dark (strokes near -1,
// background near +1).
struct GlyphImage {
    Tensor<float> pixels;
    int32_t style = -1;
    int32_t character = -1;  // decomposition-table character id

    int resolution() const { return pixels.rank() == 2 ? static_cast<int>(pixels.dim(0)) : 0; }
};

class InvalidGlyphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline float gray_to_unit(uint8_t v) { return static_cast<float>(v) / 127.5f - 1.0f; }
inline uint8_t unit_to_gray(float x) {
    float v = (x + 1.0f) * 127.5f;
    if (v < 0.0f) v = 0.0f;
    if (v > 255.0f) v = 255.0f;
    return static_cast<uint8_t>(std::lround(v));
}

Tensor<float> gray_to_tensor(const GrayImage& img);
GrayImage tensor_to_gray(const Tensor<float>& t);

// Font-rendering facility behind an interface so the pipeline does not care
// whether glyphs come from parametric fonts or a pre-rendered directory.
class GlyphRasterizer {
public:
    virtual ~GlyphRasterizer() = default;
    virtual std::string name() const = 0;
    virtual bool has_glyph(char32_t cp) const = 0;
    virtual GrayImage render(char32_t cp, int resolution) const = 0;
};

// Serves glyphs from a directory of <hex-codepoint>.png files.
class PrerenderedFont : public GlyphRasterizer {
public:
    PrerenderedFont(std::string name, std::filesystem::path dir);
    std::string name() const override { return name_; }
    bool has_glyph(char32_t cp) const override;
    GrayImage render(char32_t cp, int resolution) const override;

private:
    std::string name_;
    std::filesystem::path dir_;
};

// Centered rasterization normalized to [-1,1]; rejects blank renders.
GlyphImage render_glyph(const GlyphRasterizer& font, char32_t cp, int resolution);

struct DatasetBuildConfig {
    int resolution = 128;
    uint64_t seed = 0;
    int num_test_styles = 2;
    double unseen_char_fraction = 0.1;
    std::string source_style;  // defaults to the first train style
    std::vector<std::string> train_styles;  // optional explicit split
    std::vector<std::string> test_styles;
    int64_t max_chars = 0;  // 0 = every table character
};

// Train/test split over styles and seen/unseen characters plus the cache
// locations. Immutable once built; glyph loading is read-only.
struct DatasetManifest {
    int resolution = 0;
    uint64_t table_fingerprint = 0;
    std::vector<StyleId> styles;
    int32_t source_style = -1;
    std::vector<char32_t> seen_chars;
    std::vector<char32_t> unseen_chars;
    // Per style, the sorted codepoints actually present in the cache.
    std::vector<std::vector<char32_t>> available;
    std::vector<std::pair<std::string, char32_t>> dropped;
    std::filesystem::path root;  // directory containing manifest.json and glyphs/

    std::vector<int32_t> train_style_ids() const;
    std::vector<int32_t> test_style_ids() const;
    const StyleId& style(int32_t id) const { return styles.at(static_cast<size_t>(id)); }
    std::optional<int32_t> style_by_name(const std::string& name) const;
    bool has_pair(int32_t style_id, char32_t cp) const;
    std::vector<char32_t> all_chars() const;

    std::filesystem::path glyph_path(int32_t style_id, char32_t cp) const;

    void save(const std::filesystem::path& json_path) const;
    static DatasetManifest load(const std::filesystem::path& json_path);
};

// Rasterizes every (style, char) pair into <out_dir>/glyphs/<style>/<hex>.png
// and writes <out_dir>/manifest.json. Deterministic for a fixed seed.
DatasetManifest build_manifest(const std::vector<std::shared_ptr<GlyphRasterizer>>& fonts,
                               const DecompositionTable& table, const DatasetBuildConfig& config,
                               const std::filesystem::path& out_dir);

// Convenience: scans font_dir for .synthfont files (and per-style PNG
// directories) and builds from those.
DatasetManifest build_manifest(const std::filesystem::path& font_dir, const DecompositionTable& table,
                               const DatasetBuildConfig& config, const std::filesystem::path& out_dir);

// Loads the whole glyph cache into memory and serves annotated images.
class GlyphStore {
public:
    GlyphStore(const DatasetManifest& manifest, const DecompositionTable& table);

    const DatasetManifest& manifest() const { return manifest_; }
    bool has(int32_t style_id, int32_t char_id) const;
    const GlyphImage& glyph(int32_t style_id, int32_t char_id) const;
    // Character ids (table ids) with a cached glyph for the style.
    const std::vector<int32_t>& chars_of_style(int32_t style_id) const;

private:
    DatasetManifest manifest_;
    std::vector<std::map<int32_t, GlyphImage>> glyphs_;  // [style][char id]
    std::vector<std::vector<int32_t>> chars_of_style_;
};

// Spec-level accessor: the (style, character) pair must be in the manifest.
const GlyphImage& load_glyph(const GlyphStore& store, int32_t style_id, int32_t char_id);

}  // namespace lffont
