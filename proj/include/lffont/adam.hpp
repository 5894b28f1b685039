#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lffont/autodiff.hpp"

namespace lffont::nn {

// Moment-based update; the trainer uses betas (0.0, 0.99) for the
// adversarial parts. State is exposed for exact checkpoint resumption.
template <class S>
class Adam {
public:
    Adam(std::vector<ad::Var<S>> params, double lr, double beta1 = 0.0, double beta2 = 0.99, double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        if (lr <= 0) throw std::invalid_argument("adam: learning rate must be positive");
        for (const auto& p : params_) {
            m_.push_back(Tensor<S>::zeros(p->val.shape));
            v_.push_back(Tensor<S>::zeros(p->val.shape));
        }
    }

    void step() {
        ++t_;
        double bc1 = 1.0 - std::pow(beta1_, t_);
        double bc2 = 1.0 - std::pow(beta2_, t_);
        for (size_t i = 0; i < params_.size(); ++i) {
            auto& p = params_[i];
            if (p->grad.empty()) continue;
            S* w = p->val.ptr();
            const S* g = p->grad.ptr();
            S* m = m_[i].ptr();
            S* v = v_[i].ptr();
            for (int64_t j = 0; j < p->val.numel(); ++j) {
                m[j] = static_cast<S>(beta1_ * m[j] + (1.0 - beta1_) * g[j]);
                v[j] = static_cast<S>(beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j]);
                double mhat = m[j] / bc1;
                double vhat = v[j] / bc2;
                w[j] -= static_cast<S>(lr_ * mhat / (std::sqrt(vhat) + eps_));
            }
        }
    }

    void zero_grads() {
        for (auto& p : params_) p->zero_grad();
    }

    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }
    int64_t step_count() const { return t_; }
    void set_step_count(int64_t t) { t_ = t; }

    const std::vector<ad::Var<S>>& params() const { return params_; }
    std::vector<Tensor<S>>& m_state() { return m_; }
    std::vector<Tensor<S>>& v_state() { return v_; }

private:
    std::vector<ad::Var<S>> params_;
    double lr_, beta1_, beta2_, eps_;
    int64_t t_ = 0;
    std::vector<Tensor<S>> m_, v_;
};

}  // namespace lffont::nn
