#include "lffont/synthfont.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "lffont/utf8.hpp"

namespace lffont {

namespace {

struct Segment {
    double x0, y0, x1, y1;
};

// Stroke pattern for one component, in the unit square. Derived from the
// codepoint alone so a component looks the same in every character and
// every style (before style transforms).
std::vector<Segment> component_strokes(char32_t cp) {
    Rng rng(0x5f3759df ^ (static_cast<uint64_t>(cp) * 0x9e3779b97f4a7c15ull));
    std::vector<Segment> segs;
    int n = 2 + static_cast<int>(rng.uniform_int(3));  // 2..4 primitives
    for (int i = 0; i < n; ++i) {
        int kind = static_cast<int>(rng.uniform_int(5));
        double a = rng.uniform(0.15, 0.85);
        double b = rng.uniform(0.15, 0.85);
        double lo = rng.uniform(0.1, 0.3), hi = rng.uniform(0.7, 0.9);
        switch (kind) {
            case 0:  // horizontal bar
                segs.push_back({lo, a, hi, a});
                break;
            case 1:  // vertical bar
                segs.push_back({a, lo, a, hi});
                break;
            case 2:  // diagonal
                segs.push_back({lo, rng.uniform() < 0.5 ? lo : hi, hi, rng.uniform() < 0.5 ? hi : lo});
                break;
            case 3:  // corner hook
                segs.push_back({lo, a, hi, a});
                segs.push_back({hi, a, hi, std::min(0.9, a + rng.uniform(0.2, 0.5))});
                break;
            default:  // tick
                segs.push_back({a, b, std::min(0.9, a + rng.uniform(0.1, 0.35)), std::min(0.9, b + rng.uniform(0.1, 0.35))});
                break;
        }
    }
    return segs;
}

struct Slot {
    double x, y, w, h;
};

// Layout of m component slots in the unit square; the variant is keyed by the
// character so identical component sets can still differ in arrangement.
std::vector<Slot> layout_slots(char32_t char_cp, size_t m) {
    Rng rng(0x2545f491 ^ (static_cast<uint64_t>(char_cp) * 0xbf58476d1ce4e5b9ull));
    auto pick = [&rng](int n) { return static_cast<int>(rng.uniform_int(n)); };
    if (m == 1) return {{0, 0, 1, 1}};
    if (m == 2) {
        if (pick(2) == 0) return {{0, 0, 0.5, 1}, {0.5, 0, 0.5, 1}};
        return {{0, 0, 1, 0.5}, {0, 0.5, 1, 0.5}};
    }
    if (m == 3) {
        switch (pick(3)) {
            case 0: return {{0, 0, 0.45, 1}, {0.45, 0, 0.55, 0.5}, {0.45, 0.5, 0.55, 0.5}};
            case 1: return {{0, 0, 1, 0.45}, {0, 0.45, 0.5, 0.55}, {0.5, 0.45, 0.5, 0.55}};
            default: return {{0, 0, 1.0 / 3, 1}, {1.0 / 3, 0, 1.0 / 3, 1}, {2.0 / 3, 0, 1.0 / 3, 1}};
        }
    }
    if (m == 4) {
        if (pick(2) == 0)
            return {{0, 0, 0.5, 0.5}, {0.5, 0, 0.5, 0.5}, {0, 0.5, 0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}};
        return {{0, 0, 0.3, 1}, {0.3, 0, 0.7, 1.0 / 3}, {0.3, 1.0 / 3, 0.7, 1.0 / 3}, {0.3, 2.0 / 3, 0.7, 1.0 / 3}};
    }
    // grid fallback for long decompositions
    size_t cols = static_cast<size_t>(std::ceil(std::sqrt(static_cast<double>(m))));
    size_t rows = (m + cols - 1) / cols;
    std::vector<Slot> slots;
    for (size_t i = 0; i < m; ++i) {
        size_t r = i / cols, c = i % cols;
        slots.push_back({static_cast<double>(c) / cols, static_cast<double>(r) / rows, 1.0 / cols, 1.0 / rows});
    }
    return slots;
}

}  // namespace

SynthStyleParams SynthStyleParams::random(const std::string& name, Rng& rng) {
    SynthStyleParams p;
    p.name = name;
    p.thickness = rng.uniform(1.2, 3.6);
    p.slant = rng.uniform(-0.28, 0.28);
    p.scale = rng.uniform(0.78, 0.98);
    p.rotate = rng.uniform(-0.1, 0.1);
    p.softness = rng.uniform(0.7, 1.6);
    p.ink = rng.uniform(0.0, 0.25);
    p.jitter = rng.uniform(0.0, 1.2);
    p.jitter_seed = rng.u64();
    return p;
}

void write_synth_font(const std::filesystem::path& path, const SynthStyleParams& p) {
    nlohmann::json j;
    j["format"] = "lffont-synthfont-v1";
    j["name"] = p.name;
    j["thickness"] = p.thickness;
    j["slant"] = p.slant;
    j["scale"] = p.scale;
    j["rotate"] = p.rotate;
    j["softness"] = p.softness;
    j["ink"] = p.ink;
    j["jitter"] = p.jitter;
    j["jitter_seed"] = p.jitter_seed;
    j["blank"] = std::vector<uint32_t>(p.blank_codepoints.begin(), p.blank_codepoints.end());
    j["missing"] = std::vector<uint32_t>(p.missing_codepoints.begin(), p.missing_codepoints.end());
    std::ofstream os(path);
    if (!os) throw std::runtime_error("synthfont: cannot write " + path.string());
    os << j.dump(2) << "\n";
}

SynthStyleParams read_synth_font(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("synthfont: cannot open " + path.string());
    nlohmann::json j;
    is >> j;
    if (j.value("format", "") != "lffont-synthfont-v1")
        throw std::runtime_error("synthfont: unrecognized format in " + path.string());
    SynthStyleParams p;
    p.name = j.at("name").get<std::string>();
    p.thickness = j.at("thickness").get<double>();
    p.slant = j.at("slant").get<double>();
    p.scale = j.at("scale").get<double>();
    p.rotate = j.at("rotate").get<double>();
    p.softness = j.at("softness").get<double>();
    p.ink = j.at("ink").get<double>();
    p.jitter = j.at("jitter").get<double>();
    p.jitter_seed = j.at("jitter_seed").get<uint64_t>();
    for (uint32_t cp : j.value("blank", std::vector<uint32_t>{})) p.blank_codepoints.push_back(cp);
    for (uint32_t cp : j.value("missing", std::vector<uint32_t>{})) p.missing_codepoints.push_back(cp);
    return p;
}

SyntheticFont::SyntheticFont(SynthStyleParams params, const DecompositionTable* table)
    : params_(std::move(params)), table_(table) {
    blank_.insert(params_.blank_codepoints.begin(), params_.blank_codepoints.end());
    missing_.insert(params_.missing_codepoints.begin(), params_.missing_codepoints.end());
}

bool SyntheticFont::has_glyph(char32_t cp) const {
    return table_->has_character(cp) && !missing_.count(cp);
}

GrayImage SyntheticFont::render(char32_t cp, int resolution) const {
    if (!has_glyph(cp)) throw NotFoundError("synthfont: codepoint not in font: " + utf8_encode(cp));
    GrayImage img;
    img.width = img.height = resolution;
    img.pixels.assign(static_cast<size_t>(resolution) * resolution, 255);
    if (blank_.count(cp)) return img;

    const auto comps = table_->decompose(table_->character(cp));
    const auto slots = layout_slots(cp, comps.size());

    double res = static_cast<double>(resolution);
    double px_scale = res / 64.0;  // parameters are defined at 64 px
    double half_w = 0.5 * params_.thickness * px_scale;
    double soft = std::max(0.3, params_.softness * px_scale);
    double cx = res / 2.0, cy = res / 2.0;
    double cosr = std::cos(params_.rotate), sinr = std::sin(params_.rotate);
    uint8_t ink_level = static_cast<uint8_t>(std::lround(params_.ink * 200.0));

    std::vector<Segment> segs;
    for (size_t si = 0; si < comps.size(); ++si) {
        Rng jrng(params_.jitter_seed ^ (static_cast<uint64_t>(cp) * 0x9e3779b97f4a7c15ull) ^
                 (static_cast<uint64_t>(si) * 0xd1342543de82ef95ull));
        double jx = params_.jitter * px_scale * jrng.uniform(-1.0, 1.0);
        double jy = params_.jitter * px_scale * jrng.uniform(-1.0, 1.0);
        const Slot& slot = slots[si];
        // Slot padding keeps neighbouring components from touching.
        double pad = 0.08;
        for (const Segment& s : component_strokes(comps[si].codepoint)) {
            auto map_pt = [&](double u, double v, double& ox, double& oy) {
                double sx = slot.x + (pad + u * (1 - 2 * pad)) * slot.w;
                double sy = slot.y + (pad + v * (1 - 2 * pad)) * slot.h;
                // center, style scale, shear, rotation
                double gx = (sx - 0.5) * params_.scale;
                double gy = (sy - 0.5) * params_.scale;
                gx += params_.slant * gy;
                double rx = gx * cosr - gy * sinr;
                double ry = gx * sinr + gy * cosr;
                ox = cx + rx * res + jx;
                oy = cy + ry * res + jy;
            };
            Segment out;
            map_pt(s.x0, s.y0, out.x0, out.y0);
            map_pt(s.x1, s.y1, out.x1, out.y1);
            segs.push_back(out);
        }
    }

    for (const Segment& s : segs) {
        double margin = half_w + soft + 1.0;
        int x_lo = std::max(0, static_cast<int>(std::floor(std::min(s.x0, s.x1) - margin)));
        int x_hi = std::min(resolution - 1, static_cast<int>(std::ceil(std::max(s.x0, s.x1) + margin)));
        int y_lo = std::max(0, static_cast<int>(std::floor(std::min(s.y0, s.y1) - margin)));
        int y_hi = std::min(resolution - 1, static_cast<int>(std::ceil(std::max(s.y0, s.y1) + margin)));
        double dx = s.x1 - s.x0, dy = s.y1 - s.y0;
        double len2 = dx * dx + dy * dy;
        for (int y = y_lo; y <= y_hi; ++y) {
            for (int x = x_lo; x <= x_hi; ++x) {
                double px = x + 0.5, py = y + 0.5;
                double t = len2 > 0 ? ((px - s.x0) * dx + (py - s.y0) * dy) / len2 : 0.0;
                t = std::clamp(t, 0.0, 1.0);
                double qx = s.x0 + t * dx, qy = s.y0 + t * dy;
                double dist = std::hypot(px - qx, py - qy);
                double cov = std::clamp((half_w + soft * 0.5 - dist) / soft, 0.0, 1.0);
                if (cov <= 0) continue;
                uint8_t cur = img.at(y, x);
                uint8_t val = static_cast<uint8_t>(std::lround(255.0 - cov * (255.0 - ink_level)));
                if (val < cur) img.at(y, x) = val;
            }
        }
    }
    return img;
}

}  // namespace lffont
