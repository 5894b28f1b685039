#include "lffont/glyphset.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lffont/rng.hpp"
#include "lffont/synthfont.hpp"
#include "lffont/utf8.hpp"

namespace lffont {

namespace {

std::string hex_cp(char32_t cp) {
    std::ostringstream os;
    os << std::hex << static_cast<uint32_t>(cp);
    return os.str();
}

}  // namespace

Tensor<float> gray_to_tensor(const GrayImage& img) {
    Tensor<float> t({img.height, img.width});
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = gray_to_unit(img.pixels[static_cast<size_t>(i)]);
    return t;
}

GrayImage tensor_to_gray(const Tensor<float>& t) {
    if (t.rank() != 2) throw std::invalid_argument("tensor_to_gray: rank-2 tensor required");
    GrayImage img;
    img.height = static_cast<int>(t.dim(0));
    img.width = static_cast<int>(t.dim(1));
    img.pixels.resize(static_cast<size_t>(t.numel()));
    for (int64_t i = 0; i < t.numel(); ++i) img.pixels[static_cast<size_t>(i)] = unit_to_gray(t[i]);
    return img;
}

PrerenderedFont::PrerenderedFont(std::string name, std::filesystem::path dir)
    : name_(std::move(name)), dir_(std::move(dir)) {}

bool PrerenderedFont::has_glyph(char32_t cp) const {
    return std::filesystem::exists(dir_ / (hex_cp(cp) + ".png"));
}

GrayImage PrerenderedFont::render(char32_t cp, int resolution) const {
    auto path = dir_ / (hex_cp(cp) + ".png");
    if (!std::filesystem::exists(path)) throw NotFoundError("prerendered font: missing " + path.string());
    GrayImage img = read_gray_png(path);
    if (img.width != resolution || img.height != resolution)
        throw InvalidGlyphError("prerendered font: " + path.string() + " is " + std::to_string(img.width) + "x" +
                                std::to_string(img.height) + ", expected " + std::to_string(resolution));
    return img;
}

GlyphImage render_glyph(const GlyphRasterizer& font, char32_t cp, int resolution) {
    if (!font.has_glyph(cp)) throw NotFoundError("render_glyph: codepoint not in font: " + utf8_encode(cp));
    GrayImage img = font.render(cp, resolution);
    bool has_ink = false;
    for (uint8_t v : img.pixels)
        if (v < 250) {
            has_ink = true;
            break;
        }
    if (!has_ink)
        throw InvalidGlyphError("render_glyph: blank glyph for codepoint " + utf8_encode(cp) + " in font " +
                                font.name());
    GlyphImage g;
    g.pixels = gray_to_tensor(img);
    return g;
}

std::vector<int32_t> DatasetManifest::train_style_ids() const {
    std::vector<int32_t> out;
    for (const auto& s : styles)
        if (s.split == Split::train) out.push_back(s.id);
    return out;
}

std::vector<int32_t> DatasetManifest::test_style_ids() const {
    std::vector<int32_t> out;
    for (const auto& s : styles)
        if (s.split == Split::test) out.push_back(s.id);
    return out;
}

std::optional<int32_t> DatasetManifest::style_by_name(const std::string& name) const {
    for (const auto& s : styles)
        if (s.name == name) return s.id;
    return std::nullopt;
}

bool DatasetManifest::has_pair(int32_t style_id, char32_t cp) const {
    const auto& av = available.at(static_cast<size_t>(style_id));
    return std::binary_search(av.begin(), av.end(), cp);
}

std::vector<char32_t> DatasetManifest::all_chars() const {
    std::vector<char32_t> out = seen_chars;
    out.insert(out.end(), unseen_chars.begin(), unseen_chars.end());
    return out;
}

std::filesystem::path DatasetManifest::glyph_path(int32_t style_id, char32_t cp) const {
    return root / "glyphs" / style(style_id).name / (hex_cp(cp) + ".png");
}

void DatasetManifest::save(const std::filesystem::path& json_path) const {
    nlohmann::json j;
    j["format"] = "lffont-manifest-v1";
    j["resolution"] = resolution;
    std::ostringstream fp;
    fp << std::hex << table_fingerprint;
    j["table_fingerprint"] = fp.str();
    j["source_style"] = styles.at(static_cast<size_t>(source_style)).name;
    nlohmann::json jstyles = nlohmann::json::array();
    for (const auto& s : styles)
        jstyles.push_back({{"name", s.name}, {"split", s.split == Split::train ? "train" : "test"}});
    j["styles"] = jstyles;
    j["seen_chars"] = std::vector<uint32_t>(seen_chars.begin(), seen_chars.end());
    j["unseen_chars"] = std::vector<uint32_t>(unseen_chars.begin(), unseen_chars.end());
    nlohmann::json javail = nlohmann::json::object();
    for (const auto& s : styles)
        javail[s.name] =
            std::vector<uint32_t>(available[static_cast<size_t>(s.id)].begin(), available[static_cast<size_t>(s.id)].end());
    j["available"] = javail;
    nlohmann::json jdropped = nlohmann::json::array();
    for (const auto& [name, cp] : dropped) jdropped.push_back({name, static_cast<uint32_t>(cp)});
    j["dropped"] = jdropped;

    std::ofstream os(json_path);
    if (!os) throw std::runtime_error("manifest: cannot write " + json_path.string());
    os << j.dump(2) << "\n";
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& json_path) {
    std::ifstream is(json_path);
    if (!is) throw std::runtime_error("manifest: cannot open " + json_path.string());
    nlohmann::json j;
    is >> j;
    if (j.value("format", "") != "lffont-manifest-v1")
        throw std::runtime_error("manifest: unrecognized format in " + json_path.string());

    DatasetManifest m;
    m.root = json_path.parent_path();
    m.resolution = j.at("resolution").get<int>();
    m.table_fingerprint = std::stoull(j.at("table_fingerprint").get<std::string>(), nullptr, 16);
    for (const auto& js : j.at("styles")) {
        StyleId s;
        s.id = static_cast<int32_t>(m.styles.size());
        s.name = js.at("name").get<std::string>();
        s.split = js.at("split").get<std::string>() == "train" ? Split::train : Split::test;
        m.styles.push_back(s);
    }
    auto src = m.style_by_name(j.at("source_style").get<std::string>());
    if (!src) throw std::runtime_error("manifest: source style not in style list");
    m.source_style = *src;
    for (uint32_t cp : j.at("seen_chars").get<std::vector<uint32_t>>()) m.seen_chars.push_back(cp);
    for (uint32_t cp : j.at("unseen_chars").get<std::vector<uint32_t>>()) m.unseen_chars.push_back(cp);
    m.available.resize(m.styles.size());
    for (const auto& s : m.styles) {
        auto v = j.at("available").at(s.name).get<std::vector<uint32_t>>();
        m.available[static_cast<size_t>(s.id)].assign(v.begin(), v.end());
    }
    for (const auto& jd : j.value("dropped", nlohmann::json::array()))
        m.dropped.emplace_back(jd.at(0).get<std::string>(), jd.at(1).get<uint32_t>());
    return m;
}

DatasetManifest build_manifest(const std::vector<std::shared_ptr<GlyphRasterizer>>& fonts,
                               const DecompositionTable& table, const DatasetBuildConfig& config,
                               const std::filesystem::path& out_dir) {
    if (fonts.empty()) throw std::invalid_argument("build_manifest: no fonts");
    if (config.resolution < 16) throw std::invalid_argument("build_manifest: resolution too small");

    DatasetManifest m;
    m.resolution = config.resolution;
    m.table_fingerprint = table.fingerprint();
    m.root = out_dir;

    // Style split: explicit lists win, otherwise a seeded shuffle takes the
    // last num_test_styles as the test split.
    std::set<std::string> test_names(config.test_styles.begin(), config.test_styles.end());
    if (config.train_styles.empty() && config.test_styles.empty()) {
        std::vector<size_t> order(fonts.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng rng(Rng(config.seed).sub("style-split"));
        rng.shuffle(order);
        int n_test = std::min<int>(config.num_test_styles, static_cast<int>(fonts.size()) - 1);
        for (int i = 0; i < n_test; ++i) test_names.insert(fonts[order[order.size() - 1 - i]]->name());
    }
    for (const auto& f : fonts) {
        StyleId s;
        s.id = static_cast<int32_t>(m.styles.size());
        s.name = f->name();
        s.split = test_names.count(f->name()) ? Split::test : Split::train;
        m.styles.push_back(s);
    }
    if (m.train_style_ids().empty()) throw std::invalid_argument("build_manifest: no train styles");

    std::string source_name = config.source_style;
    if (source_name.empty()) source_name = m.style(m.train_style_ids().front()).name;
    auto src = m.style_by_name(source_name);
    if (!src || m.style(*src).split != Split::train)
        throw std::invalid_argument("build_manifest: source style must be a train style: " + source_name);
    m.source_style = *src;

    // Character split.
    std::vector<char32_t> chars;
    for (const auto& c : table.characters()) chars.push_back(c.codepoint);
    if (config.max_chars > 0 && static_cast<int64_t>(chars.size()) > config.max_chars)
        chars.resize(static_cast<size_t>(config.max_chars));
    {
        Rng rng(Rng(config.seed).sub("char-split"));
        rng.shuffle(chars);
        size_t n_unseen = static_cast<size_t>(std::llround(config.unseen_char_fraction * static_cast<double>(chars.size())));
        if (n_unseen >= chars.size()) throw std::invalid_argument("build_manifest: unseen fraction too large");
        m.unseen_chars.assign(chars.end() - static_cast<int64_t>(n_unseen), chars.end());
        m.seen_chars.assign(chars.begin(), chars.end() - static_cast<int64_t>(n_unseen));
        std::sort(m.seen_chars.begin(), m.seen_chars.end());
        std::sort(m.unseen_chars.begin(), m.unseen_chars.end());
    }

    std::filesystem::create_directories(out_dir / "glyphs");
    m.available.resize(m.styles.size());
    std::vector<char32_t> all = m.all_chars();
    std::sort(all.begin(), all.end());

    for (const auto& font : fonts) {
        int32_t sid = *m.style_by_name(font->name());
        auto style_dir = out_dir / "glyphs" / font->name();
        std::filesystem::create_directories(style_dir);
        for (char32_t cp : all) {
            bool ok = font->has_glyph(cp);
            GlyphImage g;
            if (ok) {
                try {
                    g = render_glyph(*font, cp, config.resolution);
                } catch (const InvalidGlyphError&) {
                    ok = false;
                }
            }
            if (!ok) {
                if (sid == m.source_style)
                    throw std::runtime_error("build_manifest: source font '" + font->name() +
                                             "' is missing character " + utf8_encode(cp));
                m.dropped.emplace_back(font->name(), cp);
                std::cerr << "build_manifest: dropping (" << font->name() << ", " << utf8_encode(cp) << ")\n";
                continue;
            }
            write_gray_png(style_dir / (hex_cp(cp) + ".png"), tensor_to_gray(g.pixels));
            m.available[static_cast<size_t>(sid)].push_back(cp);
        }
    }
    m.save(out_dir / "manifest.json");
    return m;
}

DatasetManifest build_manifest(const std::filesystem::path& font_dir, const DecompositionTable& table,
                               const DatasetBuildConfig& config, const std::filesystem::path& out_dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(font_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".synthfont") files.push_back(e.path());
        if (e.is_directory()) files.push_back(e.path());  // pre-rendered style directory
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::invalid_argument("build_manifest: no fonts found in " + font_dir.string());
    std::vector<std::shared_ptr<GlyphRasterizer>> fonts;
    for (const auto& f : files) {
        if (std::filesystem::is_directory(f))
            fonts.push_back(std::make_shared<PrerenderedFont>(f.filename().string(), f));
        else
            fonts.push_back(std::make_shared<SyntheticFont>(read_synth_font(f), &table));
    }
    return build_manifest(fonts, table, config, out_dir);
}

GlyphStore::GlyphStore(const DatasetManifest& manifest, const DecompositionTable& table) : manifest_(manifest) {
    glyphs_.resize(manifest_.styles.size());
    chars_of_style_.resize(manifest_.styles.size());
    for (const auto& s : manifest_.styles) {
        for (char32_t cp : manifest_.available[static_cast<size_t>(s.id)]) {
            CharacterId c = table.character(cp);  // every manifest char must be decomposable
            GrayImage img = read_gray_png(manifest_.glyph_path(s.id, cp));
            if (img.width != manifest_.resolution || img.height != manifest_.resolution)
                throw std::runtime_error("glyph store: cached glyph has wrong resolution");
            GlyphImage g;
            g.pixels = gray_to_tensor(img);
            g.style = s.id;
            g.character = c.id;
            glyphs_[static_cast<size_t>(s.id)].emplace(c.id, std::move(g));
            chars_of_style_[static_cast<size_t>(s.id)].push_back(c.id);
        }
        std::sort(chars_of_style_[static_cast<size_t>(s.id)].begin(), chars_of_style_[static_cast<size_t>(s.id)].end());
    }
}

bool GlyphStore::has(int32_t style_id, int32_t char_id) const {
    if (style_id < 0 || static_cast<size_t>(style_id) >= glyphs_.size()) return false;
    return glyphs_[static_cast<size_t>(style_id)].count(char_id) > 0;
}

const GlyphImage& GlyphStore::glyph(int32_t style_id, int32_t char_id) const {
    if (!has(style_id, char_id))
        throw NotFoundError("glyph store: no glyph for style " + std::to_string(style_id) + ", char id " +
                            std::to_string(char_id));
    return glyphs_[static_cast<size_t>(style_id)].at(char_id);
}

const std::vector<int32_t>& GlyphStore::chars_of_style(int32_t style_id) const {
    return chars_of_style_.at(static_cast<size_t>(style_id));
}

const GlyphImage& load_glyph(const GlyphStore& store, int32_t style_id, int32_t char_id) {
    return store.glyph(style_id, char_id);
}

}  // namespace lffont
