#pragma once

// Training objectives: hinge adversarial losses, L1, feature matching,
// component classification, factor consistency, and the weighted total.

#include <stdexcept>
#include <vector>

#include "lffont/autodiff.hpp"

namespace lffont::nn {

using ad::Var;

struct LossWeights {
    double lambda_l1 = 1.0;
    double lambda_feat = 0.1;
    double lambda_cls = 0.1;
    double lambda_consist = 0.1;

    void validate() const {
        if (lambda_l1 < 0 || lambda_feat < 0 || lambda_cls < 0 || lambda_consist < 0)
            throw std::invalid_argument("loss weights must be non-negative");
    }
};

// Hinge loss for the discriminator over pooled per-(sample, head) scores:
// mean(max(0, 1 - real)) + mean(max(0, 1 + fake)).
template <class S>
Var<S> adv_loss_d(const Var<S>& real_scores, const Var<S>& fake_scores) {
    if (real_scores->val.numel() == 0 || fake_scores->val.numel() == 0)
        throw std::invalid_argument("adv_loss_d: empty score batch");
    auto real_term = ad::mean_all(ad::relu(ad::add_scalar(ad::neg(real_scores), S(1))));
    auto fake_term = ad::mean_all(ad::relu(ad::add_scalar(fake_scores, S(1))));
    return ad::add(real_term, fake_term);
}

template <class S>
Var<S> adv_loss_g(const Var<S>& fake_scores) {
    if (fake_scores->val.numel() == 0) throw std::invalid_argument("adv_loss_g: empty score batch");
    return ad::neg(ad::mean_all(fake_scores));
}

template <class S>
Var<S> l1_loss(const Var<S>& generated, const Var<S>& target) {
    if (!generated->val.same_shape(target->val)) throw std::invalid_argument("l1_loss: shape mismatch");
    if (generated->val.numel() == 0) throw std::invalid_argument("l1_loss: empty input");
    return ad::mean_all(ad::abs_(ad::sub(generated, target)));
}

// sum_l mean | D_f^(l)(x) - D_f^(l)(x~) |
template <class S>
Var<S> feature_matching_loss(const std::vector<Var<S>>& real_feats, const std::vector<Var<S>>& fake_feats) {
    if (real_feats.size() != fake_feats.size() || real_feats.empty())
        throw std::invalid_argument("feature_matching_loss: feature list mismatch");
    Var<S> total;
    for (size_t l = 0; l < real_feats.size(); ++l) {
        auto term = l1_loss(real_feats[l], fake_feats[l]);
        total = total ? ad::add(total, term) : term;
    }
    return total;
}

// Eq. 8: sum of cross-entropy over reference-derived features plus
// generated-derived features, then mean over the batch dimension implied by
// the caller's batch size.
template <class S>
Var<S> component_cls_loss(const Var<S>& ref_logits, const std::vector<int64_t>& ref_labels,
                          const Var<S>& gen_logits, const std::vector<int64_t>& gen_labels, int64_t batch_size) {
    if (batch_size < 1) throw std::invalid_argument("component_cls_loss: empty batch");
    Var<S> total;
    if (ref_logits && ref_logits->val.numel() > 0) total = ad::sum_all(ad::softmax_cross_entropy(ref_logits, ref_labels));
    if (gen_logits && gen_logits->val.numel() > 0) {
        auto t = ad::sum_all(ad::softmax_cross_entropy(gen_logits, gen_labels));
        total = total ? ad::add(total, t) : t;
    }
    if (!total) throw std::invalid_argument("component_cls_loss: no features");
    return ad::scale(total, S(1) / static_cast<S>(batch_size));
}

// Eq. 5 on batch-local groups: factors [Q, ...] with index groups per style
// and per component; each group contributes sum_i ||z_i - mu_group||^2.
template <class S>
Var<S> consistency_loss(const Var<S>& style_factors, const std::vector<std::vector<int64_t>>& style_groups,
                        const Var<S>& comp_factors, const std::vector<std::vector<int64_t>>& comp_groups) {
    auto group_term = [](const Var<S>& factors, const std::vector<std::vector<int64_t>>& groups) -> Var<S> {
        Var<S> total;
        for (const auto& grp : groups) {
            if (grp.empty()) throw std::invalid_argument("consistency_loss: empty group");
            auto members = ad::gather_batch(factors, grp);
            auto mu = ad::group_mean(factors, {grp});
            auto centered = ad::sub(members, ad::expand_batch(mu, static_cast<int64_t>(grp.size())));
            auto term = ad::sum_all(ad::square(centered));
            total = total ? ad::add(total, term) : term;
        }
        return total;
    };
    Var<S> s_term = style_groups.empty() ? Var<S>{} : group_term(style_factors, style_groups);
    Var<S> u_term = comp_groups.empty() ? Var<S>{} : group_term(comp_factors, comp_groups);
    if (s_term && u_term) return ad::add(s_term, u_term);
    if (s_term) return s_term;
    if (u_term) return u_term;
    throw std::invalid_argument("consistency_loss: no groups");
}

struct LossParts {
    double adv_d = 0;
    double adv_g = 0;
    double l1 = 0;
    double feat = 0;
    double cls = 0;
    double consist = 0;
};

struct TotalLoss {
    double g_total = 0;
    double d_total = 0;
};

// Phase 1 forces lambda_consist to zero.
inline TotalLoss total_loss(const LossParts& parts, const LossWeights& weights, int phase) {
    weights.validate();
    if (phase != 1 && phase != 2) throw std::invalid_argument("total_loss: phase must be 1 or 2");
    double consist_w = phase == 1 ? 0.0 : weights.lambda_consist;
    TotalLoss t;
    t.g_total = parts.adv_g + weights.lambda_l1 * parts.l1 + weights.lambda_feat * parts.feat +
                weights.lambda_cls * parts.cls + consist_w * parts.consist;
    t.d_total = parts.adv_d;
    return t;
}

// Graph-level combination used by the trainer's G step.
template <class S>
Var<S> combine_g_loss(const Var<S>& adv_g, const Var<S>& l1, const Var<S>& feat, const Var<S>& cls,
                      const Var<S>& consist, const Var<S>& self_recon_l1, const LossWeights& weights, int phase) {
    weights.validate();
    if (phase != 1 && phase != 2) throw std::invalid_argument("combine_g_loss: phase must be 1 or 2");
    Var<S> total = adv_g;
    auto acc = [&total](const Var<S>& term, double w) {
        if (!term || w == 0.0) return;
        auto scaled = ad::scale(term, static_cast<S>(w));
        total = total ? ad::add(total, scaled) : scaled;
    };
    acc(l1, weights.lambda_l1);
    acc(feat, weights.lambda_feat);
    acc(cls, weights.lambda_cls);
    acc(consist, phase == 1 ? 0.0 : weights.lambda_consist);
    acc(self_recon_l1, weights.lambda_l1);
    return total;
}

}  // namespace lffont::nn
