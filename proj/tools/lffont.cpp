// lffont: dataset building, two-phase training, few-shot generation,
// interpolation, style-space mixing, evaluation and the augmentation
// experiment, in one binary.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "lffont/augment.hpp"
#include "lffont/config.hpp"
#include "lffont/inference.hpp"
#include "lffont/synthfont.hpp"
#include "lffont/trainer.hpp"
#include "lffont/utf8.hpp"

using namespace lffont;

namespace {

std::string hex_cp(char32_t cp) {
    std::ostringstream os;
    os << std::hex << static_cast<uint32_t>(cp);
    return os.str();
}

char32_t parse_char(const std::string& s) {
    auto cps = utf8_decode(s);
    if (cps.size() == 1) return cps[0];
    if (!s.empty() && (s.rfind("U+", 0) == 0 || s.rfind("u+", 0) == 0))
        return static_cast<char32_t>(std::stoul(s.substr(2), nullptr, 16));
    throw std::invalid_argument("expected a single character or U+XXXX, got \"" + s + "\"");
}

nn::ModelBundle<real> load_bundle_checked(const std::filesystem::path& path, const DecompositionTable& table) {
    auto bundle = nn::load_checkpoint<real>(path);
    if (bundle.table_fingerprint != table.fingerprint())
        throw std::runtime_error("checkpoint was trained against a different decomposition table (fingerprint mismatch)");
    return bundle;
}

void save_glyph_png(const std::filesystem::path& path, const Tensor<float>& pixels) {
    write_gray_png(path, tensor_to_gray(pixels));
}

// Row-major contact sheet of equally sized glyphs.
void save_grid_png(const std::filesystem::path& path, const std::vector<const Tensor<float>*>& glyphs, int columns) {
    if (glyphs.empty()) return;
    int res = static_cast<int>(glyphs[0]->dim(0));
    int cols = std::min<int>(columns, static_cast<int>(glyphs.size()));
    int rows = (static_cast<int>(glyphs.size()) + cols - 1) / cols;
    GrayImage sheet;
    sheet.width = cols * res;
    sheet.height = rows * res;
    sheet.pixels.assign(static_cast<size_t>(sheet.width) * sheet.height, 255);
    for (size_t i = 0; i < glyphs.size(); ++i) {
        int r = static_cast<int>(i) / cols, c = static_cast<int>(i) % cols;
        for (int y = 0; y < res; ++y)
            for (int x = 0; x < res; ++x)
                sheet.at(r * res + y, c * res + x) = unit_to_gray((*glyphs[i])[y * res + x]);
    }
    write_gray_png(path, sheet);
}

ReferenceSet refs_from_directory(const std::filesystem::path& dir, const DecompositionTable& table,
                                 const nn::ModelBundle<real>& bundle, int resolution, bool predicted) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no .png reference glyphs in " + dir.string());

    std::vector<GlyphImage> images;
    for (const auto& f : files) {
        GrayImage img = read_gray_png(f);
        if (img.width != resolution || img.height != resolution)
            throw std::runtime_error("reference " + f.string() + " must be " + std::to_string(resolution) + "px");
        GlyphImage g;
        g.pixels = gray_to_tensor(img);
        if (!predicted) {
            char32_t cp = static_cast<char32_t>(std::stoul(f.stem().string(), nullptr, 16));
            g.character = table.character(cp).id;
        }
        images.push_back(std::move(g));
    }
    if (predicted) return ReferenceSet::from_images_predicted(bundle, table, std::move(images));
    ReferenceSet refs;
    refs.mode = LabelMode::ground_truth;
    for (auto& g : images) {
        std::vector<int32_t> comps;
        for (const auto& u : table.decompose(table.character_by_id(g.character))) comps.push_back(u.id);
        refs.glyphs.push_back(std::move(g));
        refs.components.push_back(std::move(comps));
    }
    return refs;
}

ReferenceSet refs_from_style(const GlyphStore& store, const DecompositionTable& table, const std::string& style_name,
                             int count, uint64_t seed) {
    auto sid = store.manifest().style_by_name(style_name);
    if (!sid) throw std::runtime_error("style not in manifest: " + style_name);
    const auto& chars = store.chars_of_style(*sid);
    if (static_cast<int>(chars.size()) < count) throw std::runtime_error("style has too few glyphs for the reference draw");
    Rng rng(Rng(seed).sub("ref-draw"));
    auto pick = rng.sample_without_replacement(static_cast<int64_t>(chars.size()), count);
    std::vector<int32_t> ids;
    for (int64_t i : pick) ids.push_back(chars[static_cast<size_t>(i)]);
    return ReferenceSet::from_store(store, table, *sid, ids);
}

std::vector<int32_t> chars_from_args(const DecompositionTable& table, const GlyphStore& store, bool all,
                                     const std::string& chars_file, const std::string& chars_inline) {
    std::vector<int32_t> out;
    if (all) {
        for (char32_t cp : store.manifest().all_chars()) out.push_back(table.character(cp).id);
        return out;
    }
    std::string text = chars_inline;
    if (!chars_file.empty()) {
        std::ifstream is(chars_file);
        if (!is) throw std::runtime_error("cannot open character list: " + chars_file);
        std::stringstream ss;
        ss << is.rdbuf();
        text = ss.str();
    }
    for (char32_t cp : utf8_decode(text)) {
        if (cp == '\n' || cp == '\r' || cp == ' ' || cp == '\t') continue;
        out.push_back(table.character(cp).id);
    }
    if (out.empty()) throw std::runtime_error("no target characters given (use --chars, --chars-file or --all)");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lffont: few-shot font generation with localized style factors"};
    app.require_subcommand(1);
    argv = app.ensure_utf8(argv);

    // ---- decomp
    auto* cmd_decomp = app.add_subcommand("decomp", "Decompose a character via a decomposition table");
    std::string d_table, d_char;
    cmd_decomp->add_option("--table", d_table, "decomposition TSV")->required();
    cmd_decomp->add_option("--char", d_char, "character (literal or U+XXXX)")->required();

    // ---- synth
    auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic decomposition table and parametric fonts");
    std::string s_out;
    int s_styles = 10, s_chars = 300, s_components = 40;
    uint64_t s_seed = 0;
    cmd_synth->add_option("--out", s_out, "output directory")->required();
    cmd_synth->add_option("--styles", s_styles, "number of synthetic fonts");
    cmd_synth->add_option("--chars", s_chars, "number of characters");
    cmd_synth->add_option("--components", s_components, "component vocabulary size");
    cmd_synth->add_option("--seed", s_seed, "seed");

    // ---- build-dataset
    auto* cmd_build = app.add_subcommand("build-dataset", "Rasterize fonts into a glyph cache plus manifest");
    std::string b_fonts, b_table, b_out, b_source;
    int b_resolution = 128, b_test_styles = 2;
    double b_unseen = 0.1;
    uint64_t b_seed = 0;
    cmd_build->add_option("--fonts", b_fonts, "directory of .synthfont files or pre-rendered style dirs")->required();
    cmd_build->add_option("--table", b_table, "decomposition TSV")->required();
    cmd_build->add_option("--out", b_out, "output dataset directory (default: $LFFONT_CACHE)");
    cmd_build->add_option("--resolution", b_resolution, "glyph resolution");
    cmd_build->add_option("--test-styles", b_test_styles, "number of held-out styles");
    cmd_build->add_option("--unseen-frac", b_unseen, "fraction of characters held out as unseen");
    cmd_build->add_option("--source", b_source, "source style name (default: first train style)");
    cmd_build->add_option("--seed", b_seed, "split seed");

    // ---- train
    auto* cmd_train = app.add_subcommand("train", "Train phase 1, phase 2 or both");
    std::string t_phase = "both", t_config, t_manifest, t_table, t_out, t_ckpt, t_resume, t_arch;
    int t_iters1 = -1, t_iters2 = -1, t_batch = -1, t_nref = -1;
    int64_t t_seed = -1;
    cmd_train->add_option("--phase", t_phase, "1, 2 or both")->check(CLI::IsMember({"1", "2", "both"}));
    cmd_train->add_option("--config", t_config, "run-config JSON");
    cmd_train->add_option("--manifest", t_manifest, "dataset directory (overrides config)");
    cmd_train->add_option("--table", t_table, "decomposition TSV (overrides config)");
    cmd_train->add_option("--out", t_out, "run directory");
    cmd_train->add_option("--ckpt", t_ckpt, "phase-1 checkpoint (required for --phase 2)");
    cmd_train->add_option("--resume", t_resume, "mid-run checkpoint to resume exactly");
    cmd_train->add_option("--arch", t_arch, "architecture preset: desk|default");
    cmd_train->add_option("--iters1", t_iters1, "phase-1 iterations");
    cmd_train->add_option("--iters2", t_iters2, "phase-2 iterations");
    cmd_train->add_option("--batch", t_batch, "batch size");
    cmd_train->add_option("--n-ref", t_nref, "references per example");
    cmd_train->add_option("--seed", t_seed, "seed");
    bool t_e2e = false;
    cmd_train->add_flag("--end-to-end", t_e2e, "single-phase ablation mode");

    // ---- generate
    auto* cmd_gen = app.add_subcommand("generate", "Generate glyphs from reference images");
    std::string g_ckpt, g_manifest, g_table, g_refs, g_ref_style, g_chars_file, g_chars_inline, g_out, g_labels = "gt";
    int g_ref_count = 8;
    bool g_all = false, g_cross = false;
    uint64_t g_seed = 0;
    cmd_gen->add_option("--ckpt", g_ckpt)->required();
    cmd_gen->add_option("--manifest", g_manifest)->required();
    cmd_gen->add_option("--table", g_table)->required();
    cmd_gen->add_option("--refs", g_refs, "directory of reference PNGs (<hex>.png)");
    cmd_gen->add_option("--ref-style", g_ref_style, "draw references from this manifest style");
    cmd_gen->add_option("--ref-count", g_ref_count, "references drawn with --ref-style");
    cmd_gen->add_option("--chars", g_chars_inline, "target characters, inline");
    cmd_gen->add_option("--chars-file", g_chars_file, "file with target characters");
    cmd_gen->add_flag("--all", g_all, "generate every manifest character");
    cmd_gen->add_option("--out", g_out)->required();
    cmd_gen->add_option("--labels", g_labels, "gt|pred")->check(CLI::IsMember({"gt", "pred"}));
    cmd_gen->add_flag("--cross-lingual", g_cross, "universal-style mode (conditioning disabled)");
    cmd_gen->add_option("--seed", g_seed);

    // ---- interpolate
    auto* cmd_interp = app.add_subcommand("interpolate", "Interpolate styles or characters");
    std::string i_ckpt, i_manifest, i_table, i_mode = "style", i_style_a, i_style_b, i_char, i_char_b, i_out;
    int i_steps = 5, i_ref_count = 8;
    uint64_t i_seed = 0;
    cmd_interp->add_option("--ckpt", i_ckpt)->required();
    cmd_interp->add_option("--manifest", i_manifest)->required();
    cmd_interp->add_option("--table", i_table)->required();
    cmd_interp->add_option("--mode", i_mode)->check(CLI::IsMember({"style", "character"}));
    cmd_interp->add_option("--refs-a", i_style_a, "style name for endpoint A")->required();
    cmd_interp->add_option("--refs-b", i_style_b, "style name for endpoint B (style mode)");
    cmd_interp->add_option("--char", i_char, "target character")->required();
    cmd_interp->add_option("--char-b", i_char_b, "second character (character mode)");
    cmd_interp->add_option("--steps", i_steps);
    cmd_interp->add_option("--ref-count", i_ref_count);
    cmd_interp->add_option("--out", i_out)->required();
    cmd_interp->add_option("--seed", i_seed);

    // ---- mix
    auto* cmd_mix = app.add_subcommand("mix", "Style-space mixing of two glyphs");
    std::string m_ckpt, m_manifest, m_table, m_x1, m_x2, m_target, m_mode = "style", m_out;
    double m_lam = 0.5;
    cmd_mix->add_option("--ckpt", m_ckpt)->required();
    cmd_mix->add_option("--manifest", m_manifest)->required();
    cmd_mix->add_option("--table", m_table)->required();
    cmd_mix->add_option("--x1", m_x1, "style:char of the first input")->required();
    cmd_mix->add_option("--x2", m_x2, "style:char of the second input")->required();
    cmd_mix->add_option("--target", m_target, "target character (style mode)");
    cmd_mix->add_option("--lam", m_lam, "mix ratio in [0,1]");
    cmd_mix->add_option("--mode", m_mode)->check(CLI::IsMember({"style", "character"}));
    cmd_mix->add_option("--out", m_out)->required();

    // ---- evaluate
    auto* cmd_eval = app.add_subcommand("evaluate", "Train evaluators and compute the metric report");
    std::string e_ckpt, e_manifest, e_table, e_out;
    int e_nref = 8, e_repeats = 50, e_max_chars = 0, e_cls_epochs = 8;
    uint64_t e_seed = 0;
    cmd_eval->add_option("--ckpt", e_ckpt)->required();
    cmd_eval->add_option("--manifest", e_manifest)->required();
    cmd_eval->add_option("--table", e_table)->required();
    cmd_eval->add_option("--n-ref", e_nref);
    cmd_eval->add_option("--repeats", e_repeats);
    cmd_eval->add_option("--max-chars", e_max_chars, "cap characters per block (0 = all)");
    cmd_eval->add_option("--classifier-epochs", e_cls_epochs);
    cmd_eval->add_option("--seed", e_seed);
    cmd_eval->add_option("--out", e_out, "report JSON path")->required();

    // ---- augment-train
    auto* cmd_aug = app.add_subcommand("augment-train", "Character-classifier augmentation experiment");
    std::string a_manifest, a_table, a_mode = "vanilla", a_ckpt, a_train_styles, a_out;
    int a_epochs = 8, a_batch = 64;
    uint64_t a_seed = 0;
    double a_alpha = 0.5;
    cmd_aug->add_option("--manifest", a_manifest)->required();
    cmd_aug->add_option("--table", a_table)->required();
    cmd_aug->add_option("--mode", a_mode)
        ->check(CLI::IsMember({"vanilla", "cutmix", "fontmix-style", "fontmix-char", "fontmix-both"}));
    cmd_aug->add_option("--ckpt", a_ckpt, "generation bundle (fontmix modes)");
    cmd_aug->add_option("--train-styles", a_train_styles, "comma-separated classifier train styles")->required();
    cmd_aug->add_option("--epochs", a_epochs);
    cmd_aug->add_option("--batch", a_batch);
    cmd_aug->add_option("--alpha", a_alpha, "Beta(alpha, alpha) for lambda");
    cmd_aug->add_option("--seed", a_seed);
    cmd_aug->add_option("--out", a_out, "report JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*cmd_decomp) {
            auto table = DecompositionTable::load(d_table);
            char32_t cp = parse_char(d_char);
            auto comps = table.decompose(table.character(cp));
            std::cout << utf8_encode(cp) << " ->";
            for (const auto& u : comps) std::cout << " " << utf8_encode(u.codepoint);
            std::cout << "\n";
            return 0;
        }

        if (*cmd_synth) {
            std::filesystem::path out(s_out);
            std::filesystem::create_directories(out / "fonts");
            Rng rng(s_seed);
            // table: components drawn per character from a fixed vocabulary
            Rng trng = rng.sub("table");
            std::ofstream ts(out / "table.tsv", std::ios::binary);
            for (int c = 0; c < s_chars; ++c) {
                char32_t cp = static_cast<char32_t>(0x4e00 + c);
                int m = 1 + static_cast<int>(trng.uniform_int(std::min(4, s_components)));
                ts << utf8_encode(cp) << "\t";
                for (int i = 0; i < m; ++i) {
                    if (i) ts << ",";
                    ts << utf8_encode(static_cast<char32_t>(0x3100 + trng.uniform_int(s_components)));
                }
                ts << "\n";
            }
            ts.close();
            Rng frng = rng.sub("fonts");
            for (int i = 0; i < s_styles; ++i) {
                char name[32];
                std::snprintf(name, sizeof(name), "synth%03d", i);
                write_synth_font(out / "fonts" / (std::string(name) + ".synthfont"),
                                 SynthStyleParams::random(name, frng));
            }
            std::cout << "wrote " << s_chars << " characters, " << s_styles << " fonts under " << out.string()
                      << "\n";
            return 0;
        }

        if (*cmd_build) {
            if (b_out.empty()) {
                const char* cache = std::getenv("LFFONT_CACHE");
                if (!cache) throw std::runtime_error("--out not given and LFFONT_CACHE is unset");
                b_out = cache;
            }
            auto table = DecompositionTable::load(b_table);
            DatasetBuildConfig cfg;
            cfg.resolution = b_resolution;
            cfg.seed = b_seed;
            cfg.num_test_styles = b_test_styles;
            cfg.unseen_char_fraction = b_unseen;
            cfg.source_style = b_source;
            auto manifest = build_manifest(std::filesystem::path(b_fonts), table, cfg, b_out);
            std::cout << "dataset: " << manifest.styles.size() << " styles ("
                      << manifest.train_style_ids().size() << " train), " << manifest.seen_chars.size()
                      << " seen + " << manifest.unseen_chars.size() << " unseen characters at " << b_resolution
                      << "px -> " << b_out << "\n";
            return 0;
        }

        if (*cmd_train) {
            RunConfig rc;
            if (!t_config.empty()) rc = RunConfig::from_file(t_config);
            if (!t_manifest.empty()) rc.manifest_dir = t_manifest;
            if (!t_table.empty()) rc.table_path = t_table;
            if (!t_arch.empty()) {
                rc.arch_preset = t_arch;
                rc.arch = arch_from_preset(t_arch);
            }
            if (t_iters1 >= 0) rc.train.phase1_iters = t_iters1;
            if (t_iters2 >= 0) rc.train.phase2_iters = t_iters2;
            if (t_batch > 0) rc.train.batch_size = t_batch;
            if (t_nref > 0) rc.train.n_ref = t_nref;
            if (t_seed >= 0) rc.train.seed = static_cast<uint64_t>(t_seed);
            if (t_e2e) rc.train.end_to_end = true;
            if (!t_out.empty()) rc.train.run_dir = t_out;
            if (rc.manifest_dir.empty() || rc.table_path.empty())
                throw std::runtime_error("train needs --manifest and --table (or a config file providing them)");

            auto table = DecompositionTable::load(rc.table_path);
            auto manifest = DatasetManifest::load(rc.manifest_dir / "manifest.json");
            GlyphStore store(manifest, table);
            if (!rc.train.run_dir.empty()) rc.echo(rc.train.run_dir, "train", table.fingerprint());

            if (!t_resume.empty()) {
                auto result = resume_training(t_resume, store, table, rc.train);
                std::cout << "resumed run complete; bundle phase " << result.bundle.phase << "\n";
                return 0;
            }
            if (rc.train.end_to_end) {
                auto result = train_end_to_end(store, table, rc.arch, rc.train);
                std::cout << "end-to-end training complete (" << result.metrics.size() << " iterations)\n";
                return 0;
            }
            if (t_phase == "1" || t_phase == "both") {
                auto r1 = train_phase1(store, table, rc.arch, rc.train);
                std::cout << "phase 1 complete (" << r1.metrics.size() << " iterations)\n";
                if (t_phase == "both") {
                    auto r2 = train_phase2(std::move(r1.bundle), store, table, rc.train);
                    std::cout << "phase 2 complete (" << r2.metrics.size() << " iterations)\n";
                }
            } else {
                if (t_ckpt.empty()) throw std::runtime_error("--phase 2 requires --ckpt with a phase-1 checkpoint");
                auto bundle = load_bundle_checked(t_ckpt, table);
                auto r2 = train_phase2(std::move(bundle), store, table, rc.train);
                std::cout << "phase 2 complete (" << r2.metrics.size() << " iterations)\n";
            }
            return 0;
        }

        if (*cmd_gen) {
            auto table = DecompositionTable::load(g_table);
            auto manifest = DatasetManifest::load(std::filesystem::path(g_manifest) / "manifest.json");
            GlyphStore store(manifest, table);
            auto bundle = load_bundle_checked(g_ckpt, table);
            std::filesystem::create_directories(g_out);

            auto chars = chars_from_args(table, store, g_all, g_chars_file, g_chars_inline);
            if (g_cross) {
                std::vector<GlyphImage> ref_imgs;
                if (!g_refs.empty()) {
                    auto rs = refs_from_directory(g_refs, table, bundle, manifest.resolution, true);
                    ref_imgs = rs.glyphs;
                } else if (!g_ref_style.empty()) {
                    auto rs = refs_from_style(store, table, g_ref_style, g_ref_count, g_seed);
                    ref_imgs = rs.glyphs;
                } else {
                    throw std::runtime_error("generate needs --refs or --ref-style");
                }
                std::vector<const Tensor<float>*> grid;
                std::vector<Tensor<float>> keep;
                for (int32_t c : chars) {
                    const auto& src = store.glyph(manifest.source_style, c);
                    auto img = generate_cross_lingual(bundle, ref_imgs, src);
                    char32_t cp = table.character_by_id(c).codepoint;
                    save_glyph_png(std::filesystem::path(g_out) / (hex_cp(cp) + ".png"), img.pixels);
                    keep.push_back(std::move(img.pixels));
                }
                for (auto& k : keep) grid.push_back(&k);
                save_grid_png(std::filesystem::path(g_out) / "grid.png", grid, 16);
                std::cout << "generated " << keep.size() << " cross-lingual glyphs -> " << g_out << "\n";
                return 0;
            }

            ReferenceSet refs;
            if (!g_refs.empty())
                refs = refs_from_directory(g_refs, table, bundle, manifest.resolution, g_labels == "pred");
            else if (!g_ref_style.empty())
                refs = refs_from_style(store, table, g_ref_style, g_ref_count, g_seed);
            else
                throw std::runtime_error("generate needs --refs or --ref-style");

            auto lib = generate_library(bundle, store, table, refs, chars);
            std::vector<Tensor<float>> keep;
            for (auto& [c, res] : lib.glyphs) {
                char32_t cp = table.character_by_id(c).codepoint;
                save_glyph_png(std::filesystem::path(g_out) / (hex_cp(cp) + ".png"), res.image.pixels);
                if (res.low_confidence)
                    std::cerr << "low-confidence glyph (untrained component): " << utf8_encode(cp) << "\n";
                keep.push_back(std::move(res.image.pixels));
            }
            std::vector<const Tensor<float>*> grid;
            for (auto& k : keep) grid.push_back(&k);
            save_grid_png(std::filesystem::path(g_out) / "grid.png", grid, 16);
            for (auto& [c, why] : lib.failures)
                std::cerr << "skipped " << utf8_encode(table.character_by_id(c).codepoint) << ": " << why << "\n";
            std::cout << "generated " << lib.glyphs.size() << "/" << chars.size() << " glyphs -> " << g_out << "\n";
            return lib.glyphs.empty() ? 1 : 0;
        }

        if (*cmd_interp) {
            auto table = DecompositionTable::load(i_table);
            auto manifest = DatasetManifest::load(std::filesystem::path(i_manifest) / "manifest.json");
            GlyphStore store(manifest, table);
            auto bundle = load_bundle_checked(i_ckpt, table);
            std::filesystem::create_directories(i_out);

            auto refs_a = refs_from_style(store, table, i_style_a, i_ref_count, i_seed);
            int32_t char_id = table.character(parse_char(i_char)).id;
            std::vector<GlyphImage> frames;
            if (i_mode == "style") {
                if (i_style_b.empty()) throw std::runtime_error("style interpolation needs --refs-b");
                auto refs_b = refs_from_style(store, table, i_style_b, i_ref_count, i_seed + 1);
                frames = interpolate_style(bundle, store, table, refs_a, refs_b, char_id, i_steps);
            } else {
                if (i_char_b.empty()) throw std::runtime_error("character interpolation needs --char-b");
                int32_t char_b = table.character(parse_char(i_char_b)).id;
                frames = interpolate_character(bundle, store, table, refs_a, char_id, char_b, i_steps);
            }
            std::vector<const Tensor<float>*> grid;
            for (size_t i = 0; i < frames.size(); ++i) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "step_%02zu.png", i);
                save_glyph_png(std::filesystem::path(i_out) / buf, frames[i].pixels);
                grid.push_back(&frames[i].pixels);
            }
            save_grid_png(std::filesystem::path(i_out) / "grid.png", grid, static_cast<int>(frames.size()));
            std::cout << "wrote " << frames.size() << " interpolation steps -> " << i_out << "\n";
            return 0;
        }

        if (*cmd_mix) {
            auto table = DecompositionTable::load(m_table);
            auto manifest = DatasetManifest::load(std::filesystem::path(m_manifest) / "manifest.json");
            GlyphStore store(manifest, table);
            auto bundle = load_bundle_checked(m_ckpt, table);
            std::filesystem::create_directories(m_out);

            auto parse_pair = [&](const std::string& s) {
                auto colon = s.rfind(':');
                if (colon == std::string::npos) throw std::runtime_error("expected style:char, got " + s);
                auto sid = manifest.style_by_name(s.substr(0, colon));
                if (!sid) throw std::runtime_error("style not in manifest: " + s.substr(0, colon));
                int32_t cid = table.character(parse_char(s.substr(colon + 1))).id;
                return store.glyph(*sid, cid);
            };
            auto x1 = parse_pair(m_x1);
            auto x2 = parse_pair(m_x2);
            int32_t target = m_target.empty() ? x1.character : table.character(parse_char(m_target)).id;
            auto [img, label] = fontmix(bundle, store, table, x1, x2, target, m_lam,
                                        m_mode == "style" ? MixMode::style : MixMode::character);
            save_glyph_png(std::filesystem::path(m_out) / "mix.png", img.pixels);
            nlohmann::json j = {{"mode", m_mode},
                                {"lam", label.lam},
                                {"char_a", utf8_encode(table.character_by_id(label.char_a).codepoint)},
                                {"char_b", utf8_encode(table.character_by_id(label.char_b).codepoint)}};
            std::ofstream(std::filesystem::path(m_out) / "label.json") << j.dump(2) << "\n";
            std::cout << "wrote mix.png (" << m_mode << ", lam=" << m_lam << ") -> " << m_out << "\n";
            return 0;
        }

        if (*cmd_eval) {
            auto table = DecompositionTable::load(e_table);
            auto manifest = DatasetManifest::load(std::filesystem::path(e_manifest) / "manifest.json");
            GlyphStore store(manifest, table);
            auto bundle = load_bundle_checked(e_ckpt, table);

            EvalProtocol protocol;
            protocol.n_ref = e_nref;
            protocol.n_repeats = e_repeats;
            protocol.seed = e_seed;
            protocol.max_chars_per_block = e_max_chars;
            protocol.classifier_config.epochs = e_cls_epochs;
            auto report = evaluate_run(bundle, store, table, protocol);
            std::ofstream os(e_out);
            os << report.to_json().dump(2) << "\n";
            std::cout << report.to_json().dump(2) << "\n";
            return 0;
        }

        if (*cmd_aug) {
            auto table = DecompositionTable::load(a_table);
            auto manifest = DatasetManifest::load(std::filesystem::path(a_manifest) / "manifest.json");
            GlyphStore store(manifest, table);
            AugmentConfig cfg;
            cfg.mode = augment_mode_from_string(a_mode);
            cfg.epochs = a_epochs;
            cfg.batch_size = a_batch;
            cfg.beta_alpha = a_alpha;
            cfg.seed = a_seed;
            std::stringstream ss(a_train_styles);
            std::string name;
            while (std::getline(ss, name, ','))
                if (!name.empty()) cfg.train_styles.push_back(name);

            std::optional<nn::ModelBundle<real>> bundle;
            if (!a_ckpt.empty()) bundle = load_bundle_checked(a_ckpt, table);
            auto result = augment_train(store, table, cfg, bundle ? &*bundle : nullptr);
            nlohmann::json j = {{"mode", to_string(result.mode)},
                                {"test_accuracy", result.test_accuracy},
                                {"train_accuracy", result.train_accuracy},
                                {"mixed_samples", result.mixed_samples}};
            if (!a_out.empty()) std::ofstream(a_out) << j.dump(2) << "\n";
            std::cout << j.dump(2) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "lffont: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
