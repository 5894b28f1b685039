#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace lffont {

struct ComponentId {
    int32_t id = -1;
    char32_t codepoint = 0;
    bool operator==(const ComponentId&) const = default;
};

struct CharacterId {
    int32_t id = -1;
    char32_t codepoint = 0;
    bool operator==(const CharacterId&) const = default;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Character -> ordered component list, plus the component vocabulary U.
// Immutable after load; ids are dense and assigned in sorted-codepoint order
// so they are stable across runs and checkpoints.
class DecompositionTable {
public:
    // Each line: <character>\t<component>[,<component>...]  (UTF-8, LF)
    static DecompositionTable load(const std::filesystem::path& path);
    static DecompositionTable from_entries(const std::vector<std::pair<char32_t, std::vector<char32_t>>>& entries);

    const std::vector<ComponentId>& vocabulary() const { return vocabulary_; }
    const std::vector<CharacterId>& characters() const { return characters_; }
    int32_t num_components() const { return static_cast<int32_t>(vocabulary_.size()); }
    int32_t num_characters() const { return static_cast<int32_t>(characters_.size()); }

    bool has_character(char32_t cp) const { return char_by_codepoint_.count(cp) > 0; }
    CharacterId character(char32_t cp) const;
    CharacterId character_by_id(int32_t id) const;
    ComponentId component_by_id(int32_t id) const;

    // Ordered, duplicates preserved.
    const std::vector<ComponentId>& decompose(const CharacterId& c) const;
    const std::vector<ComponentId>& decompose(char32_t cp) const { return decompose(character(cp)); }

    // True iff every distinct component of target occurs in some reference.
    bool covers(const std::vector<CharacterId>& references, const CharacterId& target) const;

    // Number of characters (not occurrences) containing each component.
    std::map<int32_t, int64_t> component_frequency() const;

    // Content hash; checkpoints store it and verify at load time.
    uint64_t fingerprint() const { return fingerprint_; }

private:
    std::vector<ComponentId> vocabulary_;
    std::vector<CharacterId> characters_;
    std::map<char32_t, int32_t> char_by_codepoint_;
    std::vector<std::vector<ComponentId>> decompositions_;  // indexed by character id
    uint64_t fingerprint_ = 0;

    void build(std::map<char32_t, std::vector<char32_t>> raw);
};

}  // namespace lffont
