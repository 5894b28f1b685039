#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <set>

#include "lffont/decomposition.hpp"
#include "lffont/utf8.hpp"
#include "test_support.hpp"

using namespace lffont;

namespace {

std::filesystem::path write_table(const std::string& content, const std::string& name) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << content;
    return path;
}

}  // namespace

TEST_CASE("load_table parses the synthetic fixture") {
    auto path = write_table("A\tp,q\nB\tq,r\nC\tp,q,q\nD\tr\n", "decomp_fixture.tsv");
    auto t = DecompositionTable::load(path);
    CHECK(t.num_characters() == 4);
    CHECK(t.num_components() == 3);  // {p, q, r}

    // vocabulary ids dense, sorted by codepoint
    std::set<char32_t> vocab;
    for (int32_t i = 0; i < t.num_components(); ++i) {
        auto c = t.component_by_id(i);
        CHECK(c.id == i);
        vocab.insert(c.codepoint);
    }
    CHECK(vocab == std::set<char32_t>{U'p', U'q', U'r'});

    auto c = t.decompose(U'C');
    REQUIRE(c.size() == 3);
    CHECK(c[0].codepoint == U'p');
    CHECK(c[1].codepoint == U'q');
    CHECK(c[2].codepoint == U'q');  // duplicates preserved
}

TEST_CASE("single-line identity table") {
    auto path = write_table(std::string(utf8_encode(U'一')) + "\t" + utf8_encode(U'一') + "\n", "decomp_one.tsv");
    auto t = DecompositionTable::load(path);
    CHECK(t.num_characters() == 1);
    CHECK(t.num_components() == 1);
    auto d = t.decompose(U'一');
    REQUIRE(d.size() == 1);
    CHECK(d[0].codepoint == U'一');
}

TEST_CASE("load_table error paths") {
    CHECK_THROWS_AS(DecompositionTable::load(write_table("", "decomp_empty.tsv")), ParseError);
    CHECK_THROWS_AS(DecompositionTable::load(write_table("A p,q\n", "decomp_notab.tsv")), ParseError);
    CHECK_THROWS_AS(DecompositionTable::load(write_table("A\t\n", "decomp_nocomp.tsv")), ParseError);
    CHECK_THROWS_AS(DecompositionTable::load(write_table("A\tp,\n", "decomp_trailing.tsv")), ParseError);
    CHECK_THROWS_AS(DecompositionTable::load(write_table("A\tp\nA\tq\n", "decomp_dup.tsv")), ParseError);
    CHECK_THROWS_AS(DecompositionTable::load(std::filesystem::path("/nonexistent/decomp.tsv")), ParseError);
    // line number in message
    try {
        DecompositionTable::load(write_table("A\tp\nB q\n", "decomp_lineno.tsv"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("load_table is idempotent: identical id assignments") {
    auto path = write_table("B\tq,r\nA\tp,q\nC\tp,q,q\n", "decomp_idem.tsv");
    auto t1 = DecompositionTable::load(path);
    auto t2 = DecompositionTable::load(path);
    CHECK(t1.fingerprint() == t2.fingerprint());
    for (int32_t i = 0; i < t1.num_characters(); ++i)
        CHECK(t1.character_by_id(i).codepoint == t2.character_by_id(i).codepoint);
    // ids assigned in sorted codepoint order regardless of file order
    CHECK(t1.character_by_id(0).codepoint == U'A');
    CHECK(t1.character_by_id(1).codepoint == U'B');
    CHECK(t1.character_by_id(2).codepoint == U'C');
}

TEST_CASE("decompose unknown character raises") {
    auto t = test::fixture_table();
    CHECK_THROWS_AS(t.character(U'Z'), NotFoundError);
    CharacterId fake{99, U'Z'};
    CHECK_THROWS_AS(t.decompose(fake), NotFoundError);
}

TEST_CASE("covers on the fixture") {
    auto t = test::fixture_table();
    auto A = t.character(U'A'), B = t.character(U'B'), C = t.character(U'C'), D = t.character(U'D');
    CHECK(t.covers({A, B}, C));   // p,q covered
    CHECK_FALSE(t.covers({D}, A));
    CHECK(t.covers({C}, C));      // self-coverage
    CHECK(t.covers({A, D}, B));   // q from A, r from D
    CHECK_FALSE(t.covers({A}, B));
}

TEST_CASE("covers equals brute-force set algebra on random tables") {
    Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        // random table over 8 components, 12 characters
        std::vector<std::pair<char32_t, std::vector<char32_t>>> entries;
        for (int c = 0; c < 12; ++c) {
            std::vector<char32_t> comps;
            int m = 1 + static_cast<int>(rng.uniform_int(4));
            for (int i = 0; i < m; ++i) comps.push_back(static_cast<char32_t>(U'a' + rng.uniform_int(8)));
            entries.emplace_back(static_cast<char32_t>(0x4e00 + c), comps);
        }
        auto t = DecompositionTable::from_entries(entries);
        for (int q = 0; q < 20; ++q) {
            int n_ref = 1 + static_cast<int>(rng.uniform_int(3));
            std::vector<CharacterId> refs;
            for (int i = 0; i < n_ref; ++i)
                refs.push_back(t.character_by_id(static_cast<int32_t>(rng.uniform_int(t.num_characters()))));
            auto target = t.character_by_id(static_cast<int32_t>(rng.uniform_int(t.num_characters())));

            std::set<int32_t> union_comps, target_comps;
            for (const auto& r : refs)
                for (const auto& u : t.decompose(r)) union_comps.insert(u.id);
            for (const auto& u : t.decompose(target)) target_comps.insert(u.id);
            bool expected = std::includes(union_comps.begin(), union_comps.end(), target_comps.begin(),
                                          target_comps.end());
            CHECK(t.covers(refs, target) == expected);
        }
    }
}

TEST_CASE("component_frequency counts characters, not occurrences") {
    auto t = test::fixture_table();
    auto freq = t.component_frequency();
    auto id_of = [&](char32_t cp) {
        for (int32_t i = 0; i < t.num_components(); ++i)
            if (t.component_by_id(i).codepoint == cp) return i;
        return -1;
    };
    CHECK(freq.at(id_of(U'q')) == 3);  // A, B, C (C's duplicate counts once)
    CHECK(freq.at(id_of(U'p')) == 2);  // A, C
    CHECK(freq.at(id_of(U'r')) == 2);  // B, D

    // a component used by every character has count == table size
    auto t2 = DecompositionTable::from_entries({{U'X', {U'z'}}, {U'Y', {U'z', U'w'}}});
    auto f2 = t2.component_frequency();
    int32_t zid = t2.decompose(U'X')[0].id;
    CHECK(f2.at(zid) == t2.num_characters());
}

TEST_CASE("every decomposition is non-empty and in-vocabulary") {
    auto t = test::fixture_table();
    for (int32_t i = 0; i < t.num_characters(); ++i) {
        auto d = t.decompose(t.character_by_id(i));
        CHECK(!d.empty());
        for (const auto& u : d) {
            CHECK(u.id >= 0);
            CHECK(u.id < t.num_components());
            CHECK(t.component_by_id(u.id).codepoint == u.codepoint);
        }
    }
}
