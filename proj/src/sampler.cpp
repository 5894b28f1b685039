#include "lffont/sampler.hpp"

#include <algorithm>
#include <iostream>
#include <set>

namespace lffont {

namespace {

std::vector<int32_t> component_ids(const DecompositionTable& table, int32_t char_id) {
    std::vector<int32_t> out;
    for (const auto& c : table.decompose(table.character_by_id(char_id))) out.push_back(c.id);
    return out;
}

// Assign each target component occurrence to a reference that contains it.
std::vector<int32_t> assign_component_sources(const std::vector<TrainingExample::Reference>& refs,
                                              const std::vector<int32_t>& target_components, Rng& rng) {
    std::vector<int32_t> out;
    out.reserve(target_components.size());
    for (int32_t u : target_components) {
        std::vector<int32_t> carriers;
        for (size_t r = 0; r < refs.size(); ++r)
            if (std::find(refs[r].components.begin(), refs[r].components.end(), u) != refs[r].components.end())
                carriers.push_back(static_cast<int32_t>(r));
        if (carriers.empty()) return {};  // caller rejects
        out.push_back(carriers[static_cast<size_t>(rng.uniform_int(static_cast<int64_t>(carriers.size())))]);
    }
    return out;
}

}  // namespace

Phase1Sampler::Phase1Sampler(const GlyphStore& store, const DecompositionTable& table, SamplerConfig config, Rng rng)
    : store_(store), table_(table), config_(config), rng_(rng) {
    if (config_.n_ref < 1) throw std::invalid_argument("sampler: n_ref must be >= 1");
    train_styles_ = store_.manifest().train_style_ids();
    if (train_styles_.empty()) throw std::invalid_argument("sampler: manifest has no train styles");
}

TrainingExample Phase1Sampler::sample_example() {
    int32_t last_style = -1;
    for (int attempt = 0; attempt < config_.max_retries; ++attempt) {
        int32_t style = train_styles_[static_cast<size_t>(rng_.uniform_int(static_cast<int64_t>(train_styles_.size())))];
        last_style = style;
        const auto& chars = store_.chars_of_style(style);
        if (static_cast<int>(chars.size()) < config_.n_ref + 1) continue;

        int32_t target = chars[static_cast<size_t>(rng_.uniform_int(static_cast<int64_t>(chars.size())))];
        std::vector<int32_t> target_comps = component_ids(table_, target);
        std::set<int32_t> needed(target_comps.begin(), target_comps.end());

        std::vector<int32_t> pool;
        for (int32_t c : chars)
            if (c != target) pool.push_back(c);

        std::vector<int32_t> ref_chars;
        if (attempt >= config_.greedy_after) {
            // Greedy coverage: pick a carrier for each uncovered component,
            // then fill the remaining slots at random.
            std::set<int32_t> uncovered = needed;
            std::set<int32_t> chosen;
            while (!uncovered.empty() && static_cast<int>(chosen.size()) < config_.n_ref) {
                int32_t want = *uncovered.begin();
                std::vector<int32_t> carriers;
                for (int32_t c : pool) {
                    if (chosen.count(c)) continue;
                    auto comps = component_ids(table_, c);
                    if (std::find(comps.begin(), comps.end(), want) != comps.end()) carriers.push_back(c);
                }
                if (carriers.empty()) break;
                int32_t pick = carriers[static_cast<size_t>(rng_.uniform_int(static_cast<int64_t>(carriers.size())))];
                chosen.insert(pick);
                for (int32_t u : component_ids(table_, pick)) uncovered.erase(u);
            }
            if (!uncovered.empty()) continue;
            ref_chars.assign(chosen.begin(), chosen.end());
            while (static_cast<int>(ref_chars.size()) < config_.n_ref) {
                int32_t c = pool[static_cast<size_t>(rng_.uniform_int(static_cast<int64_t>(pool.size())))];
                if (std::find(ref_chars.begin(), ref_chars.end(), c) == ref_chars.end()) ref_chars.push_back(c);
            }
        } else {
            auto idx = rng_.sample_without_replacement(static_cast<int64_t>(pool.size()), config_.n_ref);
            for (int64_t i : idx) ref_chars.push_back(pool[static_cast<size_t>(i)]);
            std::set<int32_t> have;
            for (int32_t c : ref_chars)
                for (int32_t u : component_ids(table_, c)) have.insert(u);
            bool covered = std::all_of(needed.begin(), needed.end(), [&](int32_t u) { return have.count(u) > 0; });
            if (!covered) continue;
        }

        TrainingExample ex;
        for (int32_t c : ref_chars) {
            TrainingExample::Reference r;
            r.glyph = &store_.glyph(style, c);
            r.components = component_ids(table_, c);
            ex.references.push_back(std::move(r));
        }
        if (!store_.has(store_.manifest().source_style, target)) continue;
        ex.source = &store_.glyph(store_.manifest().source_style, target);
        ex.target = &store_.glyph(style, target);
        ex.target_components = std::move(target_comps);
        ex.component_source_ref = assign_component_sources(ex.references, ex.target_components, rng_);
        if (ex.component_source_ref.empty() && !ex.target_components.empty()) continue;
        return ex;
    }
    throw SamplingExhaustedError("phase-1 sampler: no coverable target after " + std::to_string(config_.max_retries) +
                                 " retries (last style: " +
                                 (last_style >= 0 ? store_.manifest().style(last_style).name : std::string("none")) +
                                 ")");
}

std::vector<TrainingExample> Phase1Sampler::sample_batch() {
    std::vector<TrainingExample> batch;
    batch.reserve(static_cast<size_t>(config_.batch_size));
    for (int i = 0; i < config_.batch_size; ++i) batch.push_back(sample_example());
    return batch;
}

Phase2Sampler::Phase2Sampler(const GlyphStore& store, const DecompositionTable& table, SamplerConfig config, Rng rng)
    : store_(store), table_(table), config_(config), rng_(rng) {
    if (config_.n_ref < 1) throw std::invalid_argument("sampler: n_ref must be >= 1");
    train_styles_ = store_.manifest().train_style_ids();
    if (train_styles_.empty()) throw std::invalid_argument("sampler: manifest has no train styles");
}

TrainingExample Phase2Sampler::sample_example() {
    if (train_styles_.size() < 2) {
        if (!fallback_warned_) {
            std::cerr << "phase-2 sampler: fewer than 2 train styles, falling back to the phase-1 policy\n";
            fallback_warned_ = true;
        }
        Phase1Sampler fallback(store_, table_, config_, rng_.sub("phase1-fallback"));
        TrainingExample ex = fallback.sample_example();
        ex.self_reconstruction_ref = static_cast<int32_t>(rng_.uniform_int(static_cast<int64_t>(ex.references.size())));
        return ex;
    }

    for (int attempt = 0; attempt < config_.max_retries; ++attempt) {
        // Independent style draw per reference slot.
        std::vector<int32_t> ref_styles;
        for (int i = 0; i < config_.n_ref; ++i)
            ref_styles.push_back(
                train_styles_[static_cast<size_t>(rng_.uniform_int(static_cast<int64_t>(train_styles_.size())))]);

        std::vector<std::pair<int32_t, int32_t>> ref_pairs;  // (style, char)
        bool ok = true;
        for (int32_t s : ref_styles) {
            const auto& chars = store_.chars_of_style(s);
            if (chars.empty()) {
                ok = false;
                break;
            }
            for (int tries = 0;; ++tries) {
                int32_t c = chars[static_cast<size_t>(rng_.uniform_int(static_cast<int64_t>(chars.size())))];
                if (std::find(ref_pairs.begin(), ref_pairs.end(), std::make_pair(s, c)) == ref_pairs.end()) {
                    ref_pairs.emplace_back(s, c);
                    break;
                }
                if (tries > 20) {
                    ok = false;
                    break;
                }
            }
            if (!ok) break;
        }
        if (!ok) continue;

        int32_t target_slot = static_cast<int32_t>(rng_.uniform_int(config_.n_ref));
        int32_t target_style = ref_pairs[static_cast<size_t>(target_slot)].first;
        std::set<int32_t> ref_chars;
        for (const auto& [s, c] : ref_pairs) ref_chars.insert(c);

        const auto& chars = store_.chars_of_style(target_style);
        std::vector<int32_t> pool;
        for (int32_t c : chars)
            if (!ref_chars.count(c) && store_.has(store_.manifest().source_style, c)) pool.push_back(c);
        if (pool.empty()) continue;
        int32_t target = pool[static_cast<size_t>(rng_.uniform_int(static_cast<int64_t>(pool.size())))];

        TrainingExample ex;
        for (const auto& [s, c] : ref_pairs) {
            TrainingExample::Reference r;
            r.glyph = &store_.glyph(s, c);
            r.components = component_ids(table_, c);
            ex.references.push_back(std::move(r));
        }
        ex.source = &store_.glyph(store_.manifest().source_style, target);
        ex.target = &store_.glyph(target_style, target);
        ex.target_components = component_ids(table_, target);
        ex.self_reconstruction_ref = static_cast<int32_t>(rng_.uniform_int(config_.n_ref));
        return ex;
    }
    throw SamplingExhaustedError("phase-2 sampler: could not build an example after " +
                                 std::to_string(config_.max_retries) + " retries");
}

std::vector<TrainingExample> Phase2Sampler::sample_batch() {
    std::vector<TrainingExample> batch;
    batch.reserve(static_cast<size_t>(config_.batch_size));
    for (int i = 0; i < config_.batch_size; ++i) batch.push_back(sample_example());
    return batch;
}

}  // namespace lffont
