#include "lffont/trainer.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "lffont/adam.hpp"

namespace lffont {

namespace {

namespace ad = lffont::ad;
using ad::Var;
using nn::ModelBundle;

Var<real> batch_images(const std::vector<const Tensor<float>*>& imgs, int resolution) {
    return nn::image_batch<real>(imgs, resolution);
}

std::vector<std::string> u64s_to_strings(const std::array<uint64_t, 4>& st) {
    std::vector<std::string> out;
    for (uint64_t v : st) out.push_back(std::to_string(v));
    return out;
}

std::array<uint64_t, 4> strings_to_u64s(const std::vector<std::string>& v) {
    std::array<uint64_t, 4> out{};
    for (size_t i = 0; i < 4 && i < v.size(); ++i) out[i] = std::stoull(v[i]);
    return out;
}

// One training iteration: D step, G step, auxiliary-classifier step.
class Engine {
public:
    Engine(ModelBundle<real>& bundle, const GlyphStore& store, const TrainConfig& config)
        : bundle_(bundle),
          store_(store),
          config_(config),
          opt_d_(bundle.discriminator_params(), config.lr_d, config.adam_beta1, config.adam_beta2),
          opt_g_(bundle.generator_side_params(), config.lr_others, config.adam_beta1, config.adam_beta2),
          opt_aux_(bundle.char_classifier_params(), config.lr_others, config.adam_beta1, config.adam_beta2) {}

    nn::Adam<real>& opt_d() { return opt_d_; }
    nn::Adam<real>& opt_g() { return opt_g_; }
    nn::Adam<real>& opt_aux() { return opt_aux_; }

    IterationMetrics step(const std::vector<TrainingExample>& batch, bool factorized, int phase, int64_t iter) {
        const int64_t B = static_cast<int64_t>(batch.size());
        const int res = bundle_.arch.resolution;

        // ---- reference queries: every reference's own components
        std::vector<const Tensor<float>*> ref_imgs;
        std::vector<int64_t> ref_comps;
        std::vector<int32_t> ref_styles;
        std::map<std::tuple<int64_t, int64_t, int64_t>, int64_t> slot_of;  // (example, ref, comp) -> first slot
        std::vector<std::vector<std::vector<int64_t>>> ref_slots(batch.size());
        for (int64_t e = 0; e < B; ++e) {
            ref_slots[static_cast<size_t>(e)].resize(batch[static_cast<size_t>(e)].references.size());
            for (size_t r = 0; r < batch[static_cast<size_t>(e)].references.size(); ++r) {
                const auto& ref = batch[static_cast<size_t>(e)].references[r];
                for (int32_t u : ref.components) {
                    int64_t slot = static_cast<int64_t>(ref_imgs.size());
                    ref_imgs.push_back(&ref.glyph->pixels);
                    ref_comps.push_back(u);
                    ref_styles.push_back(ref.glyph->style);
                    ref_slots[static_cast<size_t>(e)][r].push_back(slot);
                    slot_of.try_emplace({e, static_cast<int64_t>(r), u}, slot);
                }
            }
        }
        auto ref_feats = bundle_.style_encoder(batch_images(ref_imgs, res), ref_comps, true);

        // ---- localized style features for the target path
        Var<real> f_sc;
        Var<real> zs_ref, zu_ref, src_feats, zs_src, zu_src;
        std::vector<int64_t> src_example;  // source query row -> example
        std::vector<int64_t> src_comps;
        if (!factorized) {
            std::vector<std::vector<int64_t>> groups(batch.size());
            for (int64_t e = 0; e < B; ++e) {
                const auto& ex = batch[static_cast<size_t>(e)];
                for (size_t i = 0; i < ex.target_components.size(); ++i) {
                    auto it = slot_of.find({e, ex.component_source_ref[i], ex.target_components[i]});
                    if (it == slot_of.end())
                        throw std::logic_error("trainer: component source assignment lacks a carrier slot");
                    groups[static_cast<size_t>(e)].push_back(it->second);
                }
            }
            f_sc = ad::group_sum(ref_feats, groups);
        } else {
            zs_ref = bundle_.factor_style(ref_feats);
            zu_ref = bundle_.factor_comp(ref_feats);
            // per-example style factor: mean over slots of refs in the target style
            std::vector<std::vector<int64_t>> style_slots(batch.size());
            for (int64_t e = 0; e < B; ++e) {
                const auto& ex = batch[static_cast<size_t>(e)];
                for (size_t r = 0; r < ex.references.size(); ++r)
                    if (ex.references[r].glyph->style == ex.target->style)
                        for (int64_t s : ref_slots[static_cast<size_t>(e)][r])
                            style_slots[static_cast<size_t>(e)].push_back(s);
                if (style_slots[static_cast<size_t>(e)].empty())
                    throw std::logic_error("trainer: no reference of the target style in a phase-2 example");
            }
            auto z_style = ad::group_mean(zs_ref, style_slots);  // [B,k,d,h,w]

            std::vector<const Tensor<float>*> src_imgs;
            for (int64_t e = 0; e < B; ++e) {
                const auto& ex = batch[static_cast<size_t>(e)];
                for (int32_t u : ex.target_components) {
                    src_imgs.push_back(&ex.source->pixels);
                    src_comps.push_back(u);
                    src_example.push_back(e);
                }
            }
            src_feats = bundle_.style_encoder(batch_images(src_imgs, res), src_comps, true);
            zu_src = bundle_.factor_comp(src_feats);
            zs_src = bundle_.factor_style(src_feats);  // consistency only
            auto z_style_rows = ad::gather_batch(z_style, src_example);
            auto recon = nn::reconstruct_feature(z_style_rows, zu_src);  // [M,d,h,w]
            std::vector<std::vector<int64_t>> occ_groups(batch.size());
            for (size_t q = 0; q < src_example.size(); ++q)
                occ_groups[static_cast<size_t>(src_example[q])].push_back(static_cast<int64_t>(q));
            f_sc = ad::group_sum(recon, occ_groups);
        }

        // ---- content features and generation
        std::vector<const Tensor<float>*> source_imgs;
        for (const auto& ex : batch) source_imgs.push_back(&ex.source->pixels);
        auto f_c = bundle_.content_encoder(batch_images(source_imgs, res));
        auto fake = bundle_.generator(f_sc, f_c);

        std::vector<const Tensor<float>*> target_imgs;
        std::vector<int64_t> style_labels, char_labels;
        for (const auto& ex : batch) {
            target_imgs.push_back(&ex.target->pixels);
            style_labels.push_back(ex.target->style);
            char_labels.push_back(ex.target->character);
        }
        auto real_batch = batch_images(target_imgs, res);

        IterationMetrics m;
        m.iter = iter;
        m.phase = phase;

        // ---- D step (fake detached)
        bundle_.params.zero_grads();
        {
            auto real_out = bundle_.discriminator(real_batch, style_labels, char_labels);
            auto fake_out = bundle_.discriminator(ad::detach(fake), style_labels, char_labels);
            auto real_scores = ad::concat_batch<real>({real_out.style_score, real_out.char_score});
            auto fake_scores = ad::concat_batch<real>({fake_out.style_score, fake_out.char_score});
            auto d_loss = nn::adv_loss_d(real_scores, fake_scores);
            m.adv_d = d_loss->val[0];
            m.d_total = m.adv_d;
            check_finite(m.adv_d, "discriminator loss", iter);
            ad::backward(d_loss);
            opt_d_.step();
        }

        // ---- G step (against the updated D)
        bundle_.params.zero_grads();
        {
            auto fake_out = bundle_.discriminator(fake, style_labels, char_labels);
            auto adv_g = nn::adv_loss_g(ad::concat_batch<real>({fake_out.style_score, fake_out.char_score}));

            auto l1 = nn::l1_loss(fake, real_batch);

            auto real_out = bundle_.discriminator(real_batch, style_labels, char_labels);
            std::vector<Var<real>> real_feats;
            for (auto& f : real_out.features) real_feats.push_back(ad::detach(f));
            auto feat = nn::feature_matching_loss(real_feats, fake_out.features);

            // component classification on reference-derived features
            Var<real> ref_for_cls = ref_feats;
            if (factorized) ref_for_cls = nn::reconstruct_feature(zs_ref, zu_ref);
            auto ref_logits = bundle_.component_classifier(ref_for_cls);

            // ... and on features re-encoded from the generated glyph
            std::vector<int64_t> gen_rows, gen_comps;
            for (int64_t e = 0; e < B; ++e)
                for (int32_t u : batch[static_cast<size_t>(e)].target_components) {
                    gen_rows.push_back(e);
                    gen_comps.push_back(u);
                }
            auto gen_in = ad::gather_batch(fake, gen_rows);
            auto gen_feats = bundle_.style_encoder(gen_in, gen_comps, true);
            Var<real> gen_for_cls = gen_feats;
            if (factorized)
                gen_for_cls = nn::reconstruct_feature(bundle_.factor_style(gen_feats), bundle_.factor_comp(gen_feats));
            auto gen_logits = bundle_.component_classifier(gen_for_cls);
            auto cls = nn::component_cls_loss(ref_logits, ref_comps, gen_logits, gen_comps, B);

            // consistency over factors of real-glyph features, batch-local groups
            Var<real> consist;
            if (factorized) {
                auto zs_all = ad::concat_batch<real>({zs_ref, zs_src});
                auto zu_all = ad::concat_batch<real>({zu_ref, zu_src});
                std::map<int32_t, std::vector<int64_t>> by_style, by_comp;
                int64_t Q = static_cast<int64_t>(ref_comps.size());
                for (int64_t q = 0; q < Q; ++q) {
                    by_style[ref_styles[static_cast<size_t>(q)]].push_back(q);
                    by_comp[static_cast<int32_t>(ref_comps[static_cast<size_t>(q)])].push_back(q);
                }
                int32_t source_style = store_.manifest().source_style;
                for (size_t i = 0; i < src_comps.size(); ++i) {
                    by_style[source_style].push_back(Q + static_cast<int64_t>(i));
                    by_comp[static_cast<int32_t>(src_comps[i])].push_back(Q + static_cast<int64_t>(i));
                }
                std::vector<std::vector<int64_t>> sgroups, ugroups;
                for (auto& [key, v] : by_style)
                    if (v.size() > 1) sgroups.push_back(v);
                for (auto& [key, v] : by_comp)
                    if (v.size() > 1) ugroups.push_back(v);
                if (!sgroups.empty() || !ugroups.empty())
                    consist = nn::consistency_loss(zs_all, sgroups, zu_all, ugroups);
            }

            // phase 2 also reconstructs a flagged reference from raw features
            Var<real> self_l1;
            if (factorized) {
                std::vector<std::vector<int64_t>> self_groups;
                std::vector<const Tensor<float>*> self_src_imgs, self_target_imgs;
                for (int64_t e = 0; e < B; ++e) {
                    const auto& ex = batch[static_cast<size_t>(e)];
                    if (ex.self_reconstruction_ref < 0) continue;
                    const auto& flagged = ex.references[static_cast<size_t>(ex.self_reconstruction_ref)];
                    if (!store_.has(store_.manifest().source_style, flagged.glyph->character)) continue;
                    self_groups.push_back(
                        ref_slots[static_cast<size_t>(e)][static_cast<size_t>(ex.self_reconstruction_ref)]);
                    self_src_imgs.push_back(
                        &store_.glyph(store_.manifest().source_style, flagged.glyph->character).pixels);
                    self_target_imgs.push_back(&flagged.glyph->pixels);
                }
                if (!self_groups.empty()) {
                    auto f_self = ad::group_sum(ref_feats, self_groups);
                    auto f_c_self = bundle_.content_encoder(batch_images(self_src_imgs, res));
                    auto self_fake = bundle_.generator(f_self, f_c_self);
                    self_l1 = nn::l1_loss(self_fake, batch_images(self_target_imgs, res));
                }
            }

            auto g_loss = nn::combine_g_loss(adv_g, l1, feat, cls, consist, self_l1, config_.weights, phase);
            m.adv_g = adv_g->val[0];
            m.l1 = l1->val[0];
            m.feat = feat->val[0];
            m.cls = cls->val[0];
            m.consist = consist ? consist->val[0] : 0.0;
            m.self_recon = self_l1 ? self_l1->val[0] : 0.0;
            m.g_total = g_loss->val[0];
            check_finite(m.g_total, "generator loss", iter);
            ad::backward(g_loss);
            opt_g_.step();
        }

        // ---- auxiliary character classifier on real glyphs
        bundle_.params.zero_grads();
        {
            std::vector<const Tensor<float>*> aux_imgs;
            std::vector<int64_t> aux_labels;
            for (const auto& ex : batch) {
                aux_imgs.push_back(&ex.target->pixels);
                aux_labels.push_back(ex.target->character);
                for (const auto& r : ex.references) {
                    aux_imgs.push_back(&r.glyph->pixels);
                    aux_labels.push_back(r.glyph->character);
                }
            }
            auto logits = bundle_.char_classifier(batch_images(aux_imgs, res));
            auto aux = ad::mean_all(ad::softmax_cross_entropy(logits, aux_labels));
            m.aux = aux->val[0];
            check_finite(m.aux, "auxiliary classifier loss", iter);
            ad::backward(aux);
            opt_aux_.step();
        }
        return m;
    }

    void check_finite(double v, const char* what, int64_t iter) {
        if (std::isfinite(v)) return;
        if (!config_.run_dir.empty()) {
            std::filesystem::create_directories(config_.run_dir / "ckpt");
            nn::CheckpointExtras<real> extras;
            extras.meta = {{"diagnostic", true}, {"iteration", iter}, {"failed_loss", what}};
            nn::save_checkpoint(config_.run_dir / "ckpt" / "diagnostic.lfckpt", bundle_, extras);
        }
        throw TrainingDivergedError(std::string(what) + " is not finite at iteration " + std::to_string(iter));
    }

private:
    ModelBundle<real>& bundle_;
    const GlyphStore& store_;
    const TrainConfig& config_;
    nn::Adam<real> opt_d_, opt_g_, opt_aux_;
};

struct MetricsWriter {
    std::ofstream os;
    explicit MetricsWriter(const std::filesystem::path& run_dir) {
        if (run_dir.empty()) return;
        std::filesystem::create_directories(run_dir);
        os.open(run_dir / "metrics.jsonl", std::ios::app);
    }
    void write(const IterationMetrics& m) {
        if (!os.is_open()) return;
        nlohmann::json j = {{"iter", m.iter},   {"phase", m.phase},     {"adv_d", m.adv_d},
                            {"adv_g", m.adv_g}, {"l1", m.l1},           {"feat", m.feat},
                            {"cls", m.cls},     {"consist", m.consist}, {"self_recon", m.self_recon},
                            {"aux", m.aux},     {"g_total", m.g_total}, {"d_total", m.d_total}};
        os << j.dump() << "\n";
        if (m.iter % 50 == 0) os.flush();
    }
};

void collect_adam_state(const std::string& tag, nn::Adam<real>& opt, nn::CheckpointExtras<real>& extras) {
    const auto& ps = opt.params();
    for (size_t i = 0; i < ps.size(); ++i) {
        extras.tensors.emplace_back(tag + ".m." + ps[i]->name, opt.m_state()[i]);
        extras.tensors.emplace_back(tag + ".v." + ps[i]->name, opt.v_state()[i]);
    }
    extras.meta[tag + "_t"] = opt.step_count();
}

void restore_adam_state(const std::string& tag, nn::Adam<real>& opt, const nn::CheckpointExtras<real>& extras) {
    std::map<std::string, const Tensor<real>*> by_name;
    for (const auto& [name, t] : extras.tensors) by_name[name] = &t;
    const auto& ps = opt.params();
    for (size_t i = 0; i < ps.size(); ++i) {
        auto m = by_name.find(tag + ".m." + ps[i]->name);
        auto v = by_name.find(tag + ".v." + ps[i]->name);
        if (m == by_name.end() || v == by_name.end())
            throw std::runtime_error("checkpoint: missing optimizer state for " + ps[i]->name);
        opt.m_state()[i] = *m->second;
        opt.v_state()[i] = *v->second;
    }
    opt.set_step_count(extras.meta.at(tag + "_t").get<int64_t>());
}

struct RunState {
    ModelBundle<real> bundle;
    int phase = 1;
    int64_t start_iter = 0;
    std::optional<nn::CheckpointExtras<real>> resume_extras;
};

// Shared driver for both phases, the end-to-end mode and resumption.
TrainResult run_phase(RunState state, const GlyphStore& store, const DecompositionTable& table,
                      const TrainConfig& config, bool end_to_end) {
    config.validate();
    if (store.manifest().resolution != state.bundle.arch.resolution)
        throw std::invalid_argument("trainer: manifest resolution does not match the architecture");
    if (table.fingerprint() != state.bundle.table_fingerprint)
        throw std::invalid_argument("trainer: decomposition table fingerprint mismatch");

    const int phase = state.phase;
    const int64_t total_iters = end_to_end ? config.phase1_iters + config.phase2_iters
                                           : (phase == 1 ? config.phase1_iters : config.phase2_iters);

    SamplerConfig sc;
    sc.n_ref = config.n_ref;
    sc.batch_size = config.batch_size;
    sc.max_retries = config.max_retries;
    std::string tag = end_to_end ? "e2e" : ("phase" + std::to_string(phase));
    Phase1Sampler sampler1(store, table, sc, Rng(config.seed).sub("sampler1-" + tag));
    Phase2Sampler sampler2(store, table, sc, Rng(config.seed).sub("sampler2-" + tag));

    Engine engine(state.bundle, store, config);
    if (state.resume_extras) {
        restore_adam_state("adam_d", engine.opt_d(), *state.resume_extras);
        restore_adam_state("adam_g", engine.opt_g(), *state.resume_extras);
        restore_adam_state("adam_aux", engine.opt_aux(), *state.resume_extras);
        sampler1.rng().set_state(
            strings_to_u64s(state.resume_extras->meta.at("rng_sampler1").get<std::vector<std::string>>()));
        sampler2.rng().set_state(
            strings_to_u64s(state.resume_extras->meta.at("rng_sampler2").get<std::vector<std::string>>()));
    }

    MetricsWriter writer(config.run_dir);
    TrainResult result{std::move(state.bundle), {}};

    auto snapshot = [&](int64_t iter) {
        if (config.run_dir.empty()) return;
        std::filesystem::create_directories(config.run_dir / "ckpt");
        nn::CheckpointExtras<real> extras;
        extras.meta["iteration"] = iter;
        extras.meta["phase_in_progress"] = phase;
        extras.meta["end_to_end"] = end_to_end;
        extras.meta["rng_sampler1"] = u64s_to_strings(sampler1.rng().state());
        extras.meta["rng_sampler2"] = u64s_to_strings(sampler2.rng().state());
        collect_adam_state("adam_d", engine.opt_d(), extras);
        collect_adam_state("adam_g", engine.opt_g(), extras);
        collect_adam_state("adam_aux", engine.opt_aux(), extras);
        char name[64];
        std::snprintf(name, sizeof(name), "iter_%07lld.lfckpt", static_cast<long long>(iter));
        nn::save_checkpoint(config.run_dir / "ckpt" / name, result.bundle, extras);
    };

    for (int64_t iter = state.start_iter + 1; iter <= total_iters; ++iter) {
        bool factorized = end_to_end ? true : phase == 2;
        int loss_phase = factorized ? 2 : 1;
        std::vector<TrainingExample> batch;
        if (end_to_end)
            batch = (iter % 2 == 1) ? sampler1.sample_batch() : sampler2.sample_batch();
        else
            batch = phase == 1 ? sampler1.sample_batch() : sampler2.sample_batch();
        auto m = engine.step(batch, factorized, loss_phase, iter);
        writer.write(m);
        result.metrics.push_back(m);
        if (config.checkpoint_every > 0 && iter % config.checkpoint_every == 0 && iter < total_iters) snapshot(iter);
    }

    result.bundle.phase = end_to_end ? 2 : phase;
    if (!config.run_dir.empty()) {
        std::filesystem::create_directories(config.run_dir / "ckpt");
        std::string name = end_to_end ? "end_to_end.lfckpt" : ("phase" + std::to_string(phase) + ".lfckpt");
        nn::CheckpointExtras<real> extras;
        extras.meta["iteration"] = total_iters;
        nn::save_checkpoint(config.run_dir / "ckpt" / name, result.bundle, extras);
    }
    return result;
}

}  // namespace

void TrainConfig::validate() const {
    if (phase1_iters < 0 || phase2_iters < 0) throw std::invalid_argument("train config: iterations must be >= 0");
    if (lr_d <= 0 || lr_others <= 0) throw std::invalid_argument("train config: learning rates must be positive");
    if (batch_size < 1 || n_ref < 1) throw std::invalid_argument("train config: batch_size and n_ref must be >= 1");
    weights.validate();
}

nlohmann::json TrainConfig::to_json() const {
    nlohmann::json j;
    j["phase1_iters"] = phase1_iters;
    j["phase2_iters"] = phase2_iters;
    j["batch_size"] = batch_size;
    j["n_ref"] = n_ref;
    j["lr_d"] = lr_d;
    j["lr_others"] = lr_others;
    j["adam_beta1"] = adam_beta1;
    j["adam_beta2"] = adam_beta2;
    j["lambda_l1"] = weights.lambda_l1;
    j["lambda_feat"] = weights.lambda_feat;
    j["lambda_cls"] = weights.lambda_cls;
    j["lambda_consist"] = weights.lambda_consist;
    j["seed"] = seed;
    j["checkpoint_every"] = checkpoint_every;
    j["max_retries"] = max_retries;
    j["end_to_end"] = end_to_end;
    return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.phase1_iters = j.value("phase1_iters", c.phase1_iters);
    c.phase2_iters = j.value("phase2_iters", c.phase2_iters);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.n_ref = j.value("n_ref", c.n_ref);
    c.lr_d = j.value("lr_d", c.lr_d);
    c.lr_others = j.value("lr_others", c.lr_others);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.weights.lambda_l1 = j.value("lambda_l1", c.weights.lambda_l1);
    c.weights.lambda_feat = j.value("lambda_feat", c.weights.lambda_feat);
    c.weights.lambda_cls = j.value("lambda_cls", c.weights.lambda_cls);
    c.weights.lambda_consist = j.value("lambda_consist", c.weights.lambda_consist);
    c.seed = j.value("seed", c.seed);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.end_to_end = j.value("end_to_end", c.end_to_end);
    return c;
}

TrainResult train_phase1(const GlyphStore& store, const DecompositionTable& table, const nn::ArchConfig& arch,
                         const TrainConfig& config) {
    nn::ArchConfig a = arch;
    a.resolution = store.manifest().resolution;
    a.num_components = table.num_components();
    a.num_chars = table.num_characters();
    a.num_styles = static_cast<int>(store.manifest().styles.size());
    RunState state;
    state.bundle = ModelBundle<real>::init(a, table.fingerprint(), config.seed);
    state.phase = 1;
    return run_phase(std::move(state), store, table, config, false);
}

TrainResult train_phase2(ModelBundle<real> bundle, const GlyphStore& store, const DecompositionTable& table,
                         const TrainConfig& config) {
    if (bundle.phase != 1)
        throw std::invalid_argument("train_phase2: input bundle must be phase 1 (got phase " +
                                    std::to_string(bundle.phase) + ")");
    RunState state;
    state.bundle = std::move(bundle);
    state.phase = 2;
    return run_phase(std::move(state), store, table, config, false);
}

TrainResult train_end_to_end(const GlyphStore& store, const DecompositionTable& table, const nn::ArchConfig& arch,
                             const TrainConfig& config) {
    nn::ArchConfig a = arch;
    a.resolution = store.manifest().resolution;
    a.num_components = table.num_components();
    a.num_chars = table.num_characters();
    a.num_styles = static_cast<int>(store.manifest().styles.size());
    RunState state;
    state.bundle = ModelBundle<real>::init(a, table.fingerprint(), config.seed);
    state.phase = 1;
    return run_phase(std::move(state), store, table, config, true);
}

TrainResult resume_training(const std::filesystem::path& checkpoint, const GlyphStore& store,
                            const DecompositionTable& table, const TrainConfig& config) {
    nn::CheckpointExtras<real> extras;
    auto bundle = nn::load_checkpoint<real>(checkpoint, &extras);
    if (!extras.meta.contains("phase_in_progress"))
        throw std::invalid_argument("resume_training: checkpoint has no in-progress training state");
    RunState state;
    state.bundle = std::move(bundle);
    state.phase = extras.meta.at("phase_in_progress").get<int>();
    state.start_iter = extras.meta.at("iteration").get<int64_t>();
    bool e2e = extras.meta.value("end_to_end", false);
    state.resume_extras = std::move(extras);
    return run_phase(std::move(state), store, table, config, e2e);
}

}  // namespace lffont
