#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "lffont/autodiff.hpp"
#include "lffont/decomposition.hpp"
#include "lffont/rng.hpp"
#include "lffont/tensor.hpp"

namespace lffont::test {

// The 4-line synthetic fixture used throughout: {A->[p,q], B->[q,r],
// C->[p,q,q], D->[r]}.
inline DecompositionTable fixture_table() {
    return DecompositionTable::from_entries({
        {U'A', {U'p', U'q'}},
        {U'B', {U'q', U'r'}},
        {U'C', {U'p', U'q', U'q'}},
        {U'D', {U'r'}},
    });
}

inline Tensor<double> random_tensor(Rng& rng, std::vector<int64_t> shape, double scale = 1.0) {
    Tensor<double> t(std::move(shape));
    for (auto& v : t.data) v = rng.normal() * scale;
    return t;
}

inline Tensor<float> random_tensor_f(Rng& rng, std::vector<int64_t> shape, double scale = 1.0) {
    Tensor<float> t(std::move(shape));
    for (auto& v : t.data) v = static_cast<float>(rng.normal() * scale);
    return t;
}

struct GradCheckResult {
    double max_rel_err = 0.0;
    int checked = 0;
};

// Central finite differences against the autodiff gradient on a sampled
// subset of each parameter tensor. `build` must construct the full graph
// from scratch so perturbed parameter values are observed.
inline GradCheckResult grad_check(const std::vector<ad::Var<double>>& params,
                                  const std::function<ad::Var<double>()>& build, Rng& rng,
                                  int samples_per_param = 4, double h = 1e-5) {
    auto loss = build();
    for (auto& p : params) p->zero_grad();
    // Rebuild so gradients land on the persistent parameter nodes.
    loss = build();
    ad::backward(loss);

    GradCheckResult res;
    for (auto& p : params) {
        int64_t n = p->val.numel();
        int take = static_cast<int>(std::min<int64_t>(samples_per_param, n));
        for (int s = 0; s < take; ++s) {
            int64_t idx = rng.uniform_int(n);
            double orig = p->val[idx];
            double step = h * std::max(1.0, std::abs(orig));
            p->val[idx] = orig + step;
            double up = build()->val[0];
            p->val[idx] = orig - step;
            double down = build()->val[0];
            p->val[idx] = orig;
            double fd = (up - down) / (2 * step);
            double an = p->grad.empty() ? 0.0 : p->grad[idx];
            double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
            double rel = std::abs(fd - an) / denom;
            res.max_rel_err = std::max(res.max_rel_err, rel);
            ++res.checked;
        }
    }
    return res;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("lffont_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace lffont::test
