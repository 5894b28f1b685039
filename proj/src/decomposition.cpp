#include "lffont/decomposition.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "lffont/utf8.hpp"

namespace lffont {

namespace {

char32_t single_codepoint(const std::string& field, int line_no, const char* what) {
    auto cps = utf8_decode(field);
    if (cps.size() != 1)
        throw ParseError("decomposition table line " + std::to_string(line_no) + ": " + what +
                         " must be a single codepoint, got \"" + field + "\"");
    return cps[0];
}

}  // namespace

DecompositionTable DecompositionTable::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("decomposition table: cannot open " + path.string());

    std::map<char32_t, std::vector<char32_t>> raw;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw ParseError("decomposition table line " + std::to_string(line_no) + ": missing tab separator");
        char32_t ch = single_codepoint(line.substr(0, tab), line_no, "character");
        std::string rest = line.substr(tab + 1);
        if (rest.empty())
            throw ParseError("decomposition table line " + std::to_string(line_no) + ": empty component list");
        std::vector<char32_t> comps;
        size_t start = 0;
        while (start <= rest.size()) {
            size_t comma = rest.find(',', start);
            std::string field = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (field.empty())
                throw ParseError("decomposition table line " + std::to_string(line_no) + ": empty component");
            comps.push_back(single_codepoint(field, line_no, "component"));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (comps.empty())
            throw ParseError("decomposition table line " + std::to_string(line_no) + ": empty component list");
        if (raw.count(ch))
            throw ParseError("decomposition table line " + std::to_string(line_no) + ": duplicate character entry");
        raw.emplace(ch, std::move(comps));
    }
    if (raw.empty()) throw ParseError("decomposition table: no entries in " + path.string());

    DecompositionTable t;
    t.build(std::move(raw));
    return t;
}

DecompositionTable DecompositionTable::from_entries(
    const std::vector<std::pair<char32_t, std::vector<char32_t>>>& entries) {
    std::map<char32_t, std::vector<char32_t>> raw;
    for (const auto& [ch, comps] : entries) {
        if (comps.empty()) throw ParseError("decomposition table: empty component list");
        if (raw.count(ch)) throw ParseError("decomposition table: duplicate character entry");
        raw.emplace(ch, comps);
    }
    if (raw.empty()) throw ParseError("decomposition table: no entries");
    DecompositionTable t;
    t.build(std::move(raw));
    return t;
}

void DecompositionTable::build(std::map<char32_t, std::vector<char32_t>> raw) {
    std::set<char32_t> comp_set;
    for (const auto& [ch, comps] : raw)
        for (char32_t c : comps) comp_set.insert(c);

    std::map<char32_t, int32_t> comp_id;
    for (char32_t cp : comp_set) {  // std::set iterates in sorted codepoint order
        int32_t id = static_cast<int32_t>(vocabulary_.size());
        vocabulary_.push_back({id, cp});
        comp_id.emplace(cp, id);
    }

    for (const auto& [ch, comps] : raw) {
        int32_t id = static_cast<int32_t>(characters_.size());
        characters_.push_back({id, ch});
        char_by_codepoint_.emplace(ch, id);
        std::vector<ComponentId> out;
        out.reserve(comps.size());
        for (char32_t c : comps) out.push_back(vocabulary_[static_cast<size_t>(comp_id.at(c))]);
        decompositions_.push_back(std::move(out));
    }

    // FNV-1a over the canonical serialization.
    uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ull;
        }
    };
    for (size_t i = 0; i < characters_.size(); ++i) {
        mix(characters_[i].codepoint);
        for (const auto& c : decompositions_[i]) mix(c.codepoint);
        mix(0xffffffffull);
    }
    fingerprint_ = h;
}

CharacterId DecompositionTable::character(char32_t cp) const {
    auto it = char_by_codepoint_.find(cp);
    if (it == char_by_codepoint_.end())
        throw NotFoundError("decomposition table: unknown character U+" + std::to_string(static_cast<uint32_t>(cp)) +
                            " (" + utf8_encode(cp) + ")");
    return characters_[static_cast<size_t>(it->second)];
}

CharacterId DecompositionTable::character_by_id(int32_t id) const {
    if (id < 0 || id >= num_characters()) throw NotFoundError("decomposition table: character id out of range");
    return characters_[static_cast<size_t>(id)];
}

ComponentId DecompositionTable::component_by_id(int32_t id) const {
    if (id < 0 || id >= num_components()) throw NotFoundError("decomposition table: component id out of range");
    return vocabulary_[static_cast<size_t>(id)];
}

const std::vector<ComponentId>& DecompositionTable::decompose(const CharacterId& c) const {
    if (c.id < 0 || c.id >= num_characters() || characters_[static_cast<size_t>(c.id)].codepoint != c.codepoint)
        throw NotFoundError("decomposition table: character not in table");
    return decompositions_[static_cast<size_t>(c.id)];
}

bool DecompositionTable::covers(const std::vector<CharacterId>& references, const CharacterId& target) const {
    std::set<int32_t> have;
    for (const auto& r : references)
        for (const auto& c : decompose(r)) have.insert(c.id);
    for (const auto& c : decompose(target))
        if (!have.count(c.id)) return false;
    return true;
}

std::map<int32_t, int64_t> DecompositionTable::component_frequency() const {
    std::map<int32_t, int64_t> freq;
    for (const auto& c : vocabulary_) freq[c.id] = 0;
    for (const auto& comps : decompositions_) {
        std::set<int32_t> distinct;
        for (const auto& c : comps) distinct.insert(c.id);
        for (int32_t id : distinct) ++freq[id];
    }
    return freq;
}

}  // namespace lffont
