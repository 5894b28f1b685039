#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>

#include "lffont/glyphset.hpp"
#include "lffont/png_io.hpp"
#include "lffont/synthfont.hpp"
#include "test_support.hpp"

using namespace lffont;

namespace {

DecompositionTable small_table(int chars = 30, int comps = 8, uint64_t seed = 5) {
    Rng rng(seed);
    std::vector<std::pair<char32_t, std::vector<char32_t>>> entries;
    for (int c = 0; c < chars; ++c) {
        int m = 1 + static_cast<int>(rng.uniform_int(3));
        std::vector<char32_t> cs;
        for (int i = 0; i < m; ++i) cs.push_back(static_cast<char32_t>(0x3100 + rng.uniform_int(comps)));
        entries.emplace_back(static_cast<char32_t>(0x4e00 + c), cs);
    }
    return DecompositionTable::from_entries(entries);
}

std::filesystem::path make_fonts(const DecompositionTable& table, int n_fonts, const std::filesystem::path& dir,
                                 uint64_t seed = 7) {
    (void)table;
    std::filesystem::create_directories(dir);
    Rng rng(seed);
    for (int i = 0; i < n_fonts; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "font%02d", i);
        write_synth_font(dir / (std::string(name) + ".synthfont"), SynthStyleParams::random(name, rng));
    }
    return dir;
}

}  // namespace

TEST_CASE("png round-trip is lossless") {
    GrayImage img;
    img.width = 17;
    img.height = 9;
    img.pixels.resize(17 * 9);
    Rng rng(3);
    for (auto& p : img.pixels) p = static_cast<uint8_t>(rng.uniform_int(256));
    auto path = test::temp_dir("png") / "t.png";
    write_gray_png(path, img);
    auto back = read_gray_png(path);
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.pixels == img.pixels);
}

TEST_CASE("render_glyph normalization and determinism") {
    auto table = small_table();
    Rng rng(11);
    SyntheticFont font(SynthStyleParams::random("f0", rng), &table);

    char32_t cp = table.character_by_id(0).codepoint;
    auto g1 = render_glyph(font, cp, 64);
    auto g2 = render_glyph(font, cp, 64);
    CHECK(g1.pixels.shape == std::vector<int64_t>({64, 64}));
    // bit-identical on double rendering
    CHECK(g1.pixels.data == g2.pixels.data);

    float mn = 1e9f, mx = -1e9f;
    for (float v : g1.pixels.data) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    CHECK(mn >= -1.0f);
    CHECK(mx <= 1.0f);
    CHECK(mn < 0.0f);   // some ink
    CHECK(mx > 0.9f);   // background near +1
}

TEST_CASE("blank and missing codepoints") {
    auto table = small_table();
    Rng rng(13);
    auto params = SynthStyleParams::random("f0", rng);
    char32_t blank_cp = table.character_by_id(1).codepoint;
    char32_t missing_cp = table.character_by_id(2).codepoint;
    params.blank_codepoints.push_back(blank_cp);
    params.missing_codepoints.push_back(missing_cp);
    SyntheticFont font(params, &table);

    CHECK_THROWS_AS(render_glyph(font, blank_cp, 64), InvalidGlyphError);
    CHECK_FALSE(font.has_glyph(missing_cp));
    CHECK_THROWS_AS(render_glyph(font, missing_cp, 64), NotFoundError);
}

TEST_CASE("synthfont file round-trip preserves parameters") {
    Rng rng(17);
    auto p = SynthStyleParams::random("style_a", rng);
    p.blank_codepoints = {0x4e01};
    auto dir = test::temp_dir("synthfont");
    write_synth_font(dir / "a.synthfont", p);
    auto q = read_synth_font(dir / "a.synthfont");
    CHECK(q.name == p.name);
    CHECK(q.thickness == doctest::Approx(p.thickness));
    CHECK(q.slant == doctest::Approx(p.slant));
    CHECK(q.jitter_seed == p.jitter_seed);
    CHECK(q.blank_codepoints == p.blank_codepoints);
}

TEST_CASE("build_manifest desk-scale split arithmetic") {
    auto table = small_table(300, 12, 23);
    auto dir = test::temp_dir("manifest");
    make_fonts(table, 10, dir / "fonts");

    DatasetBuildConfig cfg;
    cfg.resolution = 32;
    cfg.seed = 9;
    cfg.num_test_styles = 2;
    cfg.unseen_char_fraction = 0.1;
    auto m = build_manifest(dir / "fonts", table, cfg, dir / "data");

    CHECK(m.styles.size() == 10);
    CHECK(m.train_style_ids().size() == 8);
    CHECK(m.test_style_ids().size() == 2);
    CHECK(m.seen_chars.size() == 270);
    CHECK(m.unseen_chars.size() == 30);
    CHECK(m.style(m.source_style).split == Split::train);

    // seen and unseen are disjoint
    for (char32_t cp : m.unseen_chars)
        CHECK(std::find(m.seen_chars.begin(), m.seen_chars.end(), cp) == m.seen_chars.end());

    // determinism: rebuilding with the same seed gives the same split
    auto m2 = build_manifest(dir / "fonts", table, cfg, dir / "data2");
    CHECK(m2.seen_chars == m.seen_chars);
    CHECK(m2.unseen_chars == m.unseen_chars);
    for (size_t i = 0; i < m.styles.size(); ++i) CHECK(m2.styles[i].split == m.styles[i].split);

    // manifest save/load round trip
    auto loaded = DatasetManifest::load(dir / "data" / "manifest.json");
    CHECK(loaded.seen_chars == m.seen_chars);
    CHECK(loaded.resolution == m.resolution);
    CHECK(loaded.table_fingerprint == table.fingerprint());
    CHECK(loaded.style(loaded.source_style).name == m.style(m.source_style).name);
}

TEST_CASE("two identical font files give distinct styles with identical pixels") {
    auto table = small_table(20, 6, 29);
    auto dir = test::temp_dir("twin");
    std::filesystem::create_directories(dir / "fonts");
    Rng rng(31);
    auto p = SynthStyleParams::random("twin_a", rng);
    write_synth_font(dir / "fonts" / "twin_a.synthfont", p);
    p.name = "twin_b";
    write_synth_font(dir / "fonts" / "twin_b.synthfont", p);

    DatasetBuildConfig cfg;
    cfg.resolution = 32;
    cfg.num_test_styles = 0;
    cfg.unseen_char_fraction = 0.0;
    auto m = build_manifest(dir / "fonts", table, cfg, dir / "data");
    REQUIRE(m.styles.size() == 2);
    CHECK(m.styles[0].id != m.styles[1].id);

    GlyphStore store(m, table);
    for (int32_t c : store.chars_of_style(0))
        CHECK(store.glyph(0, c).pixels.data == store.glyph(1, c).pixels.data);
}

TEST_CASE("glyph store round-trips pixels through the PNG cache") {
    auto table = small_table(20, 6, 37);
    auto dir = test::temp_dir("cache");
    make_fonts(table, 2, dir / "fonts", 41);

    DatasetBuildConfig cfg;
    cfg.resolution = 32;
    cfg.num_test_styles = 0;
    cfg.unseen_char_fraction = 0.0;
    auto m = build_manifest(dir / "fonts", table, cfg, dir / "data");
    GlyphStore store(m, table);

    // oracle: render directly and compare against the cache round trip
    auto params = read_synth_font(dir / "fonts" / "font00.synthfont");
    SyntheticFont font(params, &table);
    for (int32_t c : store.chars_of_style(0)) {
        auto direct = render_glyph(font, table.character_by_id(c).codepoint, 32);
        CHECK(store.glyph(0, c).pixels.data == direct.pixels.data);
    }

    // annotations
    auto& g = store.glyph(1, store.chars_of_style(1)[0]);
    CHECK(g.style == 1);
    CHECK(g.character == store.chars_of_style(1)[0]);

    // absent pair
    CHECK_THROWS_AS(load_glyph(store, 0, 9999), NotFoundError);
}

TEST_CASE("source font missing a character is a hard error, other drops are logged") {
    auto table = small_table(10, 5, 43);
    auto dir = test::temp_dir("drops");
    std::filesystem::create_directories(dir / "fonts");
    Rng rng(47);
    auto src = SynthStyleParams::random("a_source", rng);
    write_synth_font(dir / "fonts" / "a_source.synthfont", src);
    auto other = SynthStyleParams::random("b_other", rng);
    other.missing_codepoints.push_back(table.character_by_id(3).codepoint);
    write_synth_font(dir / "fonts" / "b_other.synthfont", other);

    DatasetBuildConfig cfg;
    cfg.resolution = 32;
    cfg.num_test_styles = 0;
    cfg.unseen_char_fraction = 0.0;
    cfg.source_style = "a_source";
    auto m = build_manifest(dir / "fonts", table, cfg, dir / "data");
    CHECK(m.dropped.size() == 1);
    CHECK(m.dropped[0].first == "b_other");
    CHECK_FALSE(m.has_pair(*m.style_by_name("b_other"), table.character_by_id(3).codepoint));

    // now make the source font miss a char
    auto bad = src;
    bad.missing_codepoints.push_back(table.character_by_id(0).codepoint);
    write_synth_font(dir / "fonts" / "a_source.synthfont", bad);
    CHECK_THROWS(build_manifest(dir / "fonts", table, cfg, dir / "data_bad"));
}

TEST_CASE("prerendered directory fallback") {
    auto table = small_table(6, 4, 53);
    auto dir = test::temp_dir("prerendered");
    Rng rng(59);
    SyntheticFont font(SynthStyleParams::random("p0", rng), &table);
    std::filesystem::create_directories(dir / "p0");
    for (int32_t i = 0; i < table.num_characters(); ++i) {
        char32_t cp = table.character_by_id(i).codepoint;
        auto g = render_glyph(font, cp, 32);
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%x", static_cast<uint32_t>(cp));
        write_gray_png(dir / "p0" / (std::string(buf) + ".png"), tensor_to_gray(g.pixels));
    }
    PrerenderedFont pre("p0", dir / "p0");
    char32_t cp0 = table.character_by_id(0).codepoint;
    CHECK(pre.has_glyph(cp0));
    auto g1 = render_glyph(pre, cp0, 32);
    auto g2 = render_glyph(font, cp0, 32);
    CHECK(g1.pixels.data == g2.pixels.data);
    CHECK_FALSE(pre.has_glyph(0x9999));
}
