#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lffont/autodiff.hpp"
#include "lffont/rng.hpp"
#include "test_support.hpp"

using namespace lffont;
using lffont::ad::Var;
namespace ad = lffont::ad;

namespace {

// Scalar functional used to gradcheck a single op output.
ad::Var<double> weighted_sum(const ad::Var<double>& x, const Tensor<double>& w) {
    return ad::sum_all(ad::mul(x, ad::constant(Tensor<double>(w))));
}

}  // namespace

TEST_CASE("tensor basics") {
    Tensor<double> t({2, 3});
    CHECK(t.numel() == 6);
    t.at({1, 2}) = 5.0;
    CHECK(t[5] == 5.0);
    CHECK_THROWS(t.at({2, 0}));
    auto r = t.reshaped({3, 2});
    CHECK(r.dim(0) == 3);
    CHECK_THROWS(t.reshaped({4, 2}));
}

TEST_CASE("rng determinism and distributions") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.u64() == b.u64());
    Rng c(7);
    for (int i = 0; i < 1000; ++i) {
        double v = c.uniform();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
        double bv = c.beta(0.5, 0.5);
        CHECK(bv >= 0.0);
        CHECK(bv <= 1.0);
    }
    // Derived streams differ from the parent and from each other.
    Rng d(9);
    CHECK(d.sub("x").u64() != d.sub("y").u64());
}

TEST_CASE("backward accumulates through shared subgraphs") {
    auto x = ad::param<double>(Tensor<double>::scalar(3.0));
    auto y = ad::mul(x, x);           // x^2
    auto z = ad::add(y, ad::scale(x, 2.0));  // x^2 + 2x
    ad::backward(z);
    CHECK(x->grad[0] == doctest::Approx(2 * 3.0 + 2.0));
}

TEST_CASE("detach stops gradients") {
    auto x = ad::param<double>(Tensor<double>::scalar(2.0));
    auto y = ad::mul(ad::detach(ad::mul(x, x)), x);
    ad::backward(ad::sum_all(y));
    CHECK(x->grad[0] == doctest::Approx(4.0));  // d/dx of const(4) * x
}

TEST_CASE("elementwise and reduction gradients match finite differences") {
    Rng rng(11);
    auto x = ad::param<double>(test::random_tensor(rng, {3, 4}));
    auto w = test::random_tensor(rng, {3, 4});

    auto check = [&](const std::function<ad::Var<double>()>& build) {
        Rng pick(5);
        auto res = test::grad_check({x}, build, pick, 6);
        CHECK(res.max_rel_err < 1e-6);
    };
    check([&] { return weighted_sum(ad::tanh_(x), w); });
    check([&] { return weighted_sum(ad::sigmoid_(x), w); });
    check([&] { return weighted_sum(ad::leaky_relu(x), w); });
    check([&] { return weighted_sum(ad::square(x), w); });
    check([&] { return ad::mean_all(ad::abs_(x)); });
    check([&] { return ad::mean_all(ad::mul(x, x)); });
}

TEST_CASE("linear layer gradients") {
    Rng rng(13);
    auto x = ad::param<double>(test::random_tensor(rng, {4, 5}));
    auto w = ad::param<double>(test::random_tensor(rng, {5, 3}));
    auto b = ad::param<double>(test::random_tensor(rng, {3}));
    auto wsum = test::random_tensor(rng, {4, 3});
    Rng pick(3);
    auto res = test::grad_check({x, w, b}, [&] { return weighted_sum(ad::linear(x, w, b), wsum); }, pick, 5);
    CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("conv2d forward matches a direct loop and gradients check out") {
    Rng rng(17);
    auto x = ad::param<double>(test::random_tensor(rng, {2, 3, 5, 5}));
    auto w = ad::param<double>(test::random_tensor(rng, {4, 3, 3, 3}));
    auto b = ad::param<double>(test::random_tensor(rng, {4}));

    for (int stride : {1, 2}) {
        auto y = ad::conv2d(x, w, b, stride, 1);
        int64_t Ho = (5 + 2 - 3) / stride + 1;
        REQUIRE(y->val.shape == std::vector<int64_t>({2, 4, Ho, Ho}));
        // direct convolution oracle
        for (int64_t n = 0; n < 2; ++n)
            for (int64_t co = 0; co < 4; ++co)
                for (int64_t ho = 0; ho < Ho; ++ho)
                    for (int64_t wo = 0; wo < Ho; ++wo) {
                        double acc = b->val[co];
                        for (int64_t ci = 0; ci < 3; ++ci)
                            for (int64_t i = 0; i < 3; ++i)
                                for (int64_t j = 0; j < 3; ++j) {
                                    int64_t hi = ho * stride - 1 + i, wi = wo * stride - 1 + j;
                                    if (hi < 0 || hi >= 5 || wi < 0 || wi >= 5) continue;
                                    acc += x->val.at({n, ci, hi, wi}) * w->val.at({co, ci, i, j});
                                }
                        CHECK(y->val.at({n, co, ho, wo}) == doctest::Approx(acc).epsilon(1e-10));
                    }

        auto wsum = test::random_tensor(rng, y->val.shape);
        Rng pick(71 + stride);
        auto res = test::grad_check({x, w, b}, [&] { return weighted_sum(ad::conv2d(x, w, b, stride, 1), wsum); },
                                    pick, 4);
        CHECK(res.max_rel_err < 1e-5);
    }
}

TEST_CASE("upsample, concat, gating and pooling gradients") {
    Rng rng(19);
    auto x = ad::param<double>(test::random_tensor(rng, {2, 3, 4, 4}));
    auto y = ad::param<double>(test::random_tensor(rng, {2, 2, 4, 4}));
    auto gate = ad::param<double>(test::random_tensor(rng, {2, 3}));
    auto mask = ad::param<double>(test::random_tensor(rng, {2, 1, 4, 4}));

    Rng pick(23);
    auto check = [&](const std::vector<ad::Var<double>>& ps, const std::function<ad::Var<double>()>& build,
                     double tol = 1e-6) {
        auto res = test::grad_check(ps, build, pick, 4);
        CHECK(res.max_rel_err < tol);
    };
    {
        auto w = test::random_tensor(rng, {2, 3, 8, 8});
        check({x}, [&] { return weighted_sum(ad::upsample_nearest2(x), w); });
    }
    {
        auto w = test::random_tensor(rng, {2, 5, 4, 4});
        check({x, y}, [&] { return weighted_sum(ad::concat_channels(x, y), w); });
    }
    {
        auto w = test::random_tensor(rng, {2, 3, 4, 4});
        check({x, gate}, [&] { return weighted_sum(ad::mul_gate_nc(x, gate), w); });
        check({x, gate}, [&] { return weighted_sum(ad::broadcast_add_nc(x, gate), w); });
        check({x, mask}, [&] { return weighted_sum(ad::mul_gate_spatial(x, mask), w); });
    }
    {
        auto w = test::random_tensor(rng, {2, 3});
        check({x}, [&] { return weighted_sum(ad::global_avg_pool(x), w); });
        check({x}, [&] { return weighted_sum(ad::global_max_pool(x), w); });
        check({x, mask}, [&] { return weighted_sum(ad::spatial_attention_pool(x, mask), w); });
    }
    {
        auto w = test::random_tensor(rng, {2, 2, 4, 4});
        check({x}, [&] { return weighted_sum(ad::channel_stats_map(x), w); });
    }
}

TEST_CASE("gather, group_sum and group_mean") {
    Rng rng(29);
    auto x = ad::param<double>(test::random_tensor(rng, {5, 3}));
    auto g = ad::gather_batch(x, {4, 0, 0});
    CHECK(g->val.at({0, 1}) == x->val.at({4, 1}));
    CHECK(g->val.at({1, 2}) == x->val.at({0, 2}));

    auto s = ad::group_sum(x, {{0, 1}, {2, 2, 3}});
    CHECK(s->val.at({0, 0}) == doctest::Approx(x->val.at({0, 0}) + x->val.at({1, 0})));
    CHECK(s->val.at({1, 1}) == doctest::Approx(2 * x->val.at({2, 1}) + x->val.at({3, 1})));

    Rng pick(31);
    auto w1 = test::random_tensor(rng, {3, 3});
    auto res = test::grad_check({x}, [&] { return weighted_sum(ad::gather_batch(x, {4, 0, 0}), w1); }, pick, 6);
    CHECK(res.max_rel_err < 1e-6);
    auto w2 = test::random_tensor(rng, {2, 3});
    res = test::grad_check({x}, [&] { return weighted_sum(ad::group_mean(x, {{0, 1, 2}, {3, 4}}), w2); }, pick, 6);
    CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("factor ops match scalar-loop oracles") {
    Rng rng(37);
    int64_t N = 2, k = 3, C = 4, H = 2, W = 2;
    auto f = ad::param<double>(test::random_tensor(rng, {N, C, H, W}));
    auto w = ad::param<double>(test::random_tensor(rng, {k, C}));
    auto b = ad::param<double>(test::random_tensor(rng, {k}));

    auto z = ad::factor_apply(f, w, b);
    REQUIRE(z->val.shape == std::vector<int64_t>({N, k, C, H, W}));
    for (int64_t n = 0; n < N; ++n)
        for (int64_t i = 0; i < k; ++i)
            for (int64_t c = 0; c < C; ++c)
                for (int64_t h = 0; h < H; ++h)
                    for (int64_t x2 = 0; x2 < W; ++x2)
                        CHECK(z->val.at({n, i, c, h, x2}) ==
                              doctest::Approx(w->val.at({i, c}) * f->val.at({n, c, h, x2}) + b->val[i]));

    auto zu = ad::param<double>(test::random_tensor(rng, {N, k, C, H, W}));
    auto r = ad::factor_reconstruct(z, zu);
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c)
            for (int64_t h = 0; h < H; ++h)
                for (int64_t x2 = 0; x2 < W; ++x2) {
                    double acc = 0;
                    for (int64_t i = 0; i < k; ++i) acc += z->val.at({n, i, c, h, x2}) * zu->val.at({n, i, c, h, x2});
                    CHECK(r->val.at({n, c, h, x2}) == doctest::Approx(acc).epsilon(1e-10));
                }

    Rng pick(41);
    auto wsum = test::random_tensor(rng, {N, C, H, W});
    auto res = test::grad_check(
        {f, w, b, zu}, [&] { return weighted_sum(ad::factor_reconstruct(ad::factor_apply(f, w, b), zu), wsum); },
        pick, 5);
    CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("softmax cross entropy values and gradients") {
    Rng rng(43);
    auto logits = ad::param<double>(test::random_tensor(rng, {3, 5}));
    std::vector<int64_t> labels{0, 4, 2};
    auto ce = ad::softmax_cross_entropy(logits, labels);
    // uniform logits give ln(K)
    auto uniform = ad::constant(Tensor<double>::zeros({1, 5}));
    auto ce_u = ad::softmax_cross_entropy(uniform, std::vector<int64_t>{3});
    CHECK(ce_u->val[0] == doctest::Approx(std::log(5.0)));
    CHECK(ce->val.numel() == 3);

    Rng pick(47);
    auto res = test::grad_check({logits}, [&] {
        return ad::mean_all(ad::softmax_cross_entropy(logits, labels));
    }, pick, 8);
    CHECK(res.max_rel_err < 1e-6);

    CHECK_THROWS(ad::softmax_cross_entropy(logits, std::vector<int64_t>{0, 1, 9}));
}

TEST_CASE("shape mismatches raise") {
    auto a = ad::constant(Tensor<double>::zeros({2, 3}));
    auto b = ad::constant(Tensor<double>::zeros({3, 2}));
    CHECK_THROWS(ad::add(a, b));
    CHECK_THROWS(ad::mul(a, b));
    auto x = ad::constant(Tensor<double>::zeros({1, 2, 4, 4}));
    auto w = ad::constant(Tensor<double>::zeros({3, 5, 3, 3}));
    CHECK_THROWS(ad::conv2d(x, w, ad::Var<double>{}, 1, 1));
}
