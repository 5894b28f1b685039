#pragma once

// Reverse-mode autodiff over dense tensors: the define-by-run graph that
// backs every network in this project. Scalar type is a template parameter
// so the same graph code runs in float for training and in double for
// finite-difference audits.

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "lffont/parallel.hpp"
#include "lffont/tensor.hpp"

namespace lffont::ad {

template <class S>
struct Node;

template <class S>
using Var = std::shared_ptr<Node<S>>;

inline int64_t next_node_id() {
    static std::atomic<int64_t> counter{0};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

template <class S>
struct Node {
    Tensor<S> val;
    Tensor<S> grad;  // allocated on first use
    bool needs_grad = false;
    int64_t id = next_node_id();
    std::string name;  // parameters only
    std::vector<Var<S>> parents;
    std::function<void(Node<S>&)> backprop;

    Tensor<S>& g() {
        if (grad.empty() && !val.empty()) grad = Tensor<S>::zeros(val.shape);
        return grad;
    }
    void zero_grad() {
        if (!grad.empty()) grad.fill(S(0));
    }
};

template <class S>
Var<S> make_node(Tensor<S> value) {
    auto n = std::make_shared<Node<S>>();
    n->val = std::move(value);
    return n;
}

template <class S>
Var<S> constant(Tensor<S> value) {
    return make_node(std::move(value));
}

template <class S>
Var<S> param(Tensor<S> value, std::string name = {}) {
    auto n = make_node(std::move(value));
    n->needs_grad = true;
    n->name = std::move(name);
    return n;
}

template <class S>
Var<S> detach(const Var<S>& x) {
    return constant(Tensor<S>(x->val));
}

namespace detail {

template <class S>
bool any_grad(std::initializer_list<const Var<S>*> xs) {
    for (auto* x : xs)
        if ((*x)->needs_grad) return true;
    return false;
}

template <class S>
Var<S> result(Tensor<S> value, std::vector<Var<S>> parents, std::function<void(Node<S>&)> backprop) {
    auto n = make_node(std::move(value));
    bool needs = false;
    for (auto& p : parents) needs = needs || p->needs_grad;
    if (needs) {
        n->needs_grad = true;
        n->parents = std::move(parents);
        n->backprop = std::move(backprop);
    }
    return n;
}

template <class S>
void check_same_shape(const Var<S>& a, const Var<S>& b, const char* op) {
    if (!a->val.same_shape(b->val))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + a->val.shape_str() + " vs " +
                                    b->val.shape_str());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// backward pass

template <class S>
void backward(const Var<S>& root) {
    if (root->val.numel() != 1) throw std::invalid_argument("backward: root must be scalar");
    if (!root->needs_grad) return;

    std::vector<Node<S>*> order;
    std::unordered_set<Node<S>*> seen;
    std::vector<Node<S>*> stack{root.get()};
    while (!stack.empty()) {
        Node<S>* n = stack.back();
        stack.pop_back();
        if (!n->needs_grad || !seen.insert(n).second) continue;
        order.push_back(n);
        for (auto& p : n->parents) stack.push_back(p.get());
    }
    // Creation order is a topological order for a define-by-run graph.
    std::sort(order.begin(), order.end(), [](Node<S>* a, Node<S>* b) { return a->id > b->id; });

    root->g()[0] = S(1);
    for (Node<S>* n : order)
        if (n->backprop) n->backprop(*n);
}

// ---------------------------------------------------------------------------
// elementwise arithmetic

template <class S>
Var<S> add(const Var<S>& a, const Var<S>& b) {
    detail::check_same_shape(a, b, "add");
    Tensor<S> out = a->val;
    const S* pb = b->val.ptr();
    S* po = out.ptr();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] += pb[i];
    return detail::result<S>(std::move(out), {a, b}, [a, b](Node<S>& n) {
        const S* g = n.grad.ptr();
        if (a->needs_grad) {
            S* ga = a->g().ptr();
            for (int64_t i = 0; i < n.val.numel(); ++i) ga[i] += g[i];
        }
        if (b->needs_grad) {
            S* gb = b->g().ptr();
            for (int64_t i = 0; i < n.val.numel(); ++i) gb[i] += g[i];
        }
    });
}

template <class S>
Var<S> sub(const Var<S>& a, const Var<S>& b) {
    detail::check_same_shape(a, b, "sub");
    Tensor<S> out = a->val;
    const S* pb = b->val.ptr();
    S* po = out.ptr();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] -= pb[i];
    return detail::result<S>(std::move(out), {a, b}, [a, b](Node<S>& n) {
        const S* g = n.grad.ptr();
        if (a->needs_grad) {
            S* ga = a->g().ptr();
            for (int64_t i = 0; i < n.val.numel(); ++i) ga[i] += g[i];
        }
        if (b->needs_grad) {
            S* gb = b->g().ptr();
            for (int64_t i = 0; i < n.val.numel(); ++i) gb[i] -= g[i];
        }
    });
}

template <class S>
Var<S> mul(const Var<S>& a, const Var<S>& b) {
    detail::check_same_shape(a, b, "mul");
    Tensor<S> out = a->val;
    const S* pb = b->val.ptr();
    S* po = out.ptr();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] *= pb[i];
    return detail::result<S>(std::move(out), {a, b}, [a, b](Node<S>& n) {
        const S* g = n.grad.ptr();
        if (a->needs_grad) {
            S* ga = a->g().ptr();
            const S* pb2 = b->val.ptr();
            for (int64_t i = 0; i < n.val.numel(); ++i) ga[i] += g[i] * pb2[i];
        }
        if (b->needs_grad) {
            S* gb = b->g().ptr();
            const S* pa = a->val.ptr();
            for (int64_t i = 0; i < n.val.numel(); ++i) gb[i] += g[i] * pa[i];
        }
    });
}

template <class S>
Var<S> scale(const Var<S>& a, S s) {
    Tensor<S> out = a->val;
    for (auto& v : out.data) v *= s;
    return detail::result<S>(std::move(out), {a}, [a, s](Node<S>& n) {
        S* ga = a->g().ptr();
        const S* g = n.grad.ptr();
        for (int64_t i = 0; i < n.val.numel(); ++i) ga[i] += s * g[i];
    });
}

template <class S>
Var<S> add_scalar(const Var<S>& a, S s) {
    Tensor<S> out = a->val;
    for (auto& v : out.data) v += s;
    return detail::result<S>(std::move(out), {a}, [a](Node<S>& n) {
        S* ga = a->g().ptr();
        const S* g = n.grad.ptr();
        for (int64_t i = 0; i < n.val.numel(); ++i) ga[i] += g[i];
    });
}

template <class S>
Var<S> neg(const Var<S>& a) {
    return scale(a, S(-1));
}

template <class S>
Var<S> reshape(const Var<S>& a, std::vector<int64_t> shape) {
    Tensor<S> out = a->val.reshaped(std::move(shape));
    return detail::result<S>(std::move(out), {a}, [a](Node<S>& n) {
        S* ga = a->g().ptr();
        const S* g = n.grad.ptr();
        for (int64_t i = 0; i < n.val.numel(); ++i) ga[i] += g[i];
    });
}

// ---------------------------------------------------------------------------
// activations

template <class S>
Var<S> leaky_relu(const Var<S>& a, S slope = S(0.2)) {
    Tensor<S> out = a->val;
    for (auto& v : out.data)
        if (v < S(0)) v *= slope;
    return detail::result<S>(std::move(out), {a}, [a, slope](Node<S>& n) {
        S* ga = a->g().ptr();
        const S* g = n.grad.ptr();
        const S* x = a->val.ptr();
        for (int64_t i = 0; i < n.val.numel(); ++i) ga[i] += (x[i] >= S(0) ? g[i] : slope * g[i]);
    });
}

template <class S>
Var<S> relu(const Var<S>& a) {
    return leaky_relu(a, S(0));
}

template <class S>
Var<S> tanh_(const Var<S>& a) {
    Tensor<S> out = a->val;
    for (auto& v : out.data) v = std::tanh(v);
    return detail::result<S>(std::move(out), {a}, [a](Node<S>& n) {
        S* ga = a->g().ptr();
        const S* g = n.grad.ptr();
        const S* y = n.val.ptr();
        for (int64_t i = 0; i < n.val.numel(); ++i) ga[i] += g[i] * (S(1) - y[i] * y[i]);
    });
}

template <class S>
Var<S> sigmoid_(const Var<S>& a) {
    Tensor<S> out = a->val;
    for (auto& v : out.data) v = S(1) / (S(1) + std::exp(-v));
    return detail::result<S>(std::move(out), {a}, [a](Node<S>& n) {
        S* ga = a->g().ptr();
        const S* g = n.grad.ptr();
        const S* y = n.val.ptr();
        for (int64_t i = 0; i < n.val.numel(); ++i) ga[i] += g[i] * y[i] * (S(1) - y[i]);
    });
}

template <class S>
Var<S> abs_(const Var<S>& a) {
    Tensor<S> out = a->val;
    for (auto& v : out.data) v = std::abs(v);
    return detail::result<S>(std::move(out), {a}, [a](Node<S>& n) {
        S* ga = a->g().ptr();
        const S* g = n.grad.ptr();
        const S* x = a->val.ptr();
        for (int64_t i = 0; i < n.val.numel(); ++i) ga[i] += (x[i] > S(0) ? g[i] : (x[i] < S(0) ? -g[i] : S(0)));
    });
}

template <class S>
Var<S> square(const Var<S>& a) {
    Tensor<S> out = a->val;
    for (auto& v : out.data) v *= v;
    return detail::result<S>(std::move(out), {a}, [a](Node<S>& n) {
        S* ga = a->g().ptr();
        const S* g = n.grad.ptr();
        const S* x = a->val.ptr();
        for (int64_t i = 0; i < n.val.numel(); ++i) ga[i] += S(2) * x[i] * g[i];
    });
}

// ---------------------------------------------------------------------------
// reductions

template <class S>
Var<S> sum_all(const Var<S>& a) {
    S acc = 0;
    for (S v : a->val.data) acc += v;
    return detail::result<S>(Tensor<S>::scalar(acc), {a}, [a](Node<S>& n) {
        S g = n.grad[0];
        S* ga = a->g().ptr();
        for (int64_t i = 0; i < a->val.numel(); ++i) ga[i] += g;
    });
}

template <class S>
Var<S> mean_all(const Var<S>& a) {
    if (a->val.numel() == 0) throw std::invalid_argument("mean_all: empty tensor");
    S acc = 0;
    for (S v : a->val.data) acc += v;
    S inv = S(1) / static_cast<S>(a->val.numel());
    return detail::result<S>(Tensor<S>::scalar(acc * inv), {a}, [a, inv](Node<S>& n) {
        S g = n.grad[0] * inv;
        S* ga = a->g().ptr();
        for (int64_t i = 0; i < a->val.numel(); ++i) ga[i] += g;
    });
}

// ---------------------------------------------------------------------------
// linear algebra

template <class S>
using MatMap = Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <class S>
using ConstMatMap = Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// x [n,m] * w [m,p] + b [p]; b may be empty.
template <class S>
Var<S> linear(const Var<S>& x, const Var<S>& w, const Var<S>& b) {
    if (x->val.rank() != 2 || w->val.rank() != 2 || x->val.dim(1) != w->val.dim(0))
        throw std::invalid_argument("linear: shape mismatch");
    int64_t n = x->val.dim(0), m = x->val.dim(1), p = w->val.dim(1);
    bool has_bias = b && b->val.numel() > 0;
    if (has_bias && b->val.numel() != p) throw std::invalid_argument("linear: bias size mismatch");

    Tensor<S> out({n, p});
    ConstMatMap<S> X(x->val.ptr(), n, m), W(w->val.ptr(), m, p);
    MatMap<S> O(out.ptr(), n, p);
    O.noalias() = X * W;
    if (has_bias) {
        const S* pb = b->val.ptr();
        for (int64_t i = 0; i < n; ++i)
            for (int64_t j = 0; j < p; ++j) out[i * p + j] += pb[j];
    }
    std::vector<Var<S>> parents{x, w};
    if (has_bias) parents.push_back(b);
    return detail::result<S>(std::move(out), std::move(parents), [x, w, b, n, m, p, has_bias](Node<S>& n_) {
        ConstMatMap<S> G(n_.grad.ptr(), n, p);
        if (x->needs_grad) {
            ConstMatMap<S> W(w->val.ptr(), m, p);
            MatMap<S> GX(x->g().ptr(), n, m);
            GX.noalias() += G * W.transpose();
        }
        if (w->needs_grad) {
            ConstMatMap<S> X(x->val.ptr(), n, m);
            MatMap<S> GW(w->g().ptr(), m, p);
            GW.noalias() += X.transpose() * G;
        }
        if (has_bias && b->needs_grad) {
            S* gb = b->g().ptr();
            const S* g = n_.grad.ptr();
            for (int64_t i = 0; i < n; ++i)
                for (int64_t j = 0; j < p; ++j) gb[j] += g[i * p + j];
        }
    });
}

template <class S>
Var<S> matmul(const Var<S>& a, const Var<S>& b) {
    return linear(a, b, Var<S>{});
}

// rowwise dot product: a [n,c], b [n,c] -> [n]
template <class S>
Var<S> rowwise_dot(const Var<S>& a, const Var<S>& b) {
    detail::check_same_shape(a, b, "rowwise_dot");
    if (a->val.rank() != 2) throw std::invalid_argument("rowwise_dot: rank-2 input required");
    int64_t n = a->val.dim(0), c = a->val.dim(1);
    Tensor<S> out({n});
    for (int64_t i = 0; i < n; ++i) {
        S acc = 0;
        for (int64_t j = 0; j < c; ++j) acc += a->val[i * c + j] * b->val[i * c + j];
        out[i] = acc;
    }
    return detail::result<S>(std::move(out), {a, b}, [a, b, n, c](Node<S>& n_) {
        const S* g = n_.grad.ptr();
        if (a->needs_grad) {
            S* ga = a->g().ptr();
            for (int64_t i = 0; i < n; ++i)
                for (int64_t j = 0; j < c; ++j) ga[i * c + j] += g[i] * b->val[i * c + j];
        }
        if (b->needs_grad) {
            S* gb = b->g().ptr();
            for (int64_t i = 0; i < n; ++i)
                for (int64_t j = 0; j < c; ++j) gb[i * c + j] += g[i] * a->val[i * c + j];
        }
    });
}

// ---------------------------------------------------------------------------
// convolution

// x [N,Ci,H,W], w [Co,Ci,kh,kw], b [Co] (optional). Zero padding.
template <class S>
Var<S> conv2d(const Var<S>& x, const Var<S>& w, const Var<S>& b, int stride, int pad) {
    if (x->val.rank() != 4 || w->val.rank() != 4) throw std::invalid_argument("conv2d: rank-4 inputs required");
    int64_t N = x->val.dim(0), Ci = x->val.dim(1), H = x->val.dim(2), W = x->val.dim(3);
    int64_t Co = w->val.dim(0), kh = w->val.dim(2), kw = w->val.dim(3);
    if (w->val.dim(1) != Ci) throw std::invalid_argument("conv2d: channel mismatch");
    bool has_bias = b && b->val.numel() > 0;
    if (has_bias && b->val.numel() != Co) throw std::invalid_argument("conv2d: bias size mismatch");
    int64_t Ho = (H + 2 * pad - kh) / stride + 1;
    int64_t Wo = (W + 2 * pad - kw) / stride + 1;
    if (Ho <= 0 || Wo <= 0) throw std::invalid_argument("conv2d: output would be empty");

    int64_t K = Ci * kh * kw;
    int64_t P = Ho * Wo;

    // Column buffers are cached per sample for the backward pass.
    auto cols = std::make_shared<Tensor<S>>(std::vector<int64_t>{N, K, P});
    Tensor<S> out({N, Co, Ho, Wo});

    parallel_for(N, [&](int64_t n) {
        S* col = cols->ptr() + n * K * P;
        const S* xn = x->val.ptr() + n * Ci * H * W;
        for (int64_t ci = 0; ci < Ci; ++ci) {
            for (int64_t i = 0; i < kh; ++i) {
                for (int64_t j = 0; j < kw; ++j) {
                    S* dst = col + ((ci * kh + i) * kw + j) * P;
                    for (int64_t ho = 0; ho < Ho; ++ho) {
                        int64_t hi = ho * stride - pad + i;
                        if (hi < 0 || hi >= H) {
                            for (int64_t wo = 0; wo < Wo; ++wo) dst[ho * Wo + wo] = S(0);
                            continue;
                        }
                        const S* src_row = xn + (ci * H + hi) * W;
                        for (int64_t wo = 0; wo < Wo; ++wo) {
                            int64_t wi = wo * stride - pad + j;
                            dst[ho * Wo + wo] = (wi >= 0 && wi < W) ? src_row[wi] : S(0);
                        }
                    }
                }
            }
        }
        ConstMatMap<S> Wm(w->val.ptr(), Co, K);
        ConstMatMap<S> Cm(col, K, P);
        MatMap<S> Om(out.ptr() + n * Co * P, Co, P);
        Om.noalias() = Wm * Cm;
        if (has_bias) {
            const S* pb = b->val.ptr();
            S* on = out.ptr() + n * Co * P;
            for (int64_t co = 0; co < Co; ++co)
                for (int64_t p2 = 0; p2 < P; ++p2) on[co * P + p2] += pb[co];
        }
    });

    std::vector<Var<S>> parents{x, w};
    if (has_bias) parents.push_back(b);
    auto back = [x, w, b, cols, N, Ci, H, W, Co, kh, kw, Ho, Wo, K, P, stride, pad, has_bias](Node<S>& node) {
        const S* gout = node.grad.ptr();
        if (w->needs_grad) {
            // Parallel over output-channel blocks; each block accumulates over
            // samples in a fixed order, so the result is thread-count invariant.
            S* gw = w->g().ptr();
            int nblocks = std::min<int64_t>(Co, std::max(1, hardware_threads()));
            int64_t per = (Co + nblocks - 1) / nblocks;
            parallel_for(nblocks, [&](int64_t blk) {
                int64_t r0 = blk * per;
                int64_t r1 = std::min(Co, r0 + per);
                if (r0 >= r1) return;
                MatMap<S> GW(gw + r0 * K, r1 - r0, K);
                for (int64_t n = 0; n < N; ++n) {
                    ConstMatMap<S> G(gout + n * Co * P + r0 * P, r1 - r0, P);
                    ConstMatMap<S> Cm(cols->ptr() + n * K * P, K, P);
                    GW.noalias() += G * Cm.transpose();
                }
            });
        }
        if (has_bias && b->needs_grad) {
            S* gb = b->g().ptr();
            for (int64_t n = 0; n < N; ++n)
                for (int64_t co = 0; co < Co; ++co) {
                    S acc = 0;
                    const S* g = gout + (n * Co + co) * P;
                    for (int64_t p2 = 0; p2 < P; ++p2) acc += g[p2];
                    gb[co] += acc;
                }
        }
        if (x->needs_grad) {
            S* gx = x->g().ptr();
            parallel_for(N, [&](int64_t n) {
                Tensor<S> gcol({K, P});
                ConstMatMap<S> Wm(w->val.ptr(), Co, K);
                ConstMatMap<S> G(gout + n * Co * P, Co, P);
                MatMap<S> GC(gcol.ptr(), K, P);
                GC.noalias() = Wm.transpose() * G;
                S* gxn = gx + n * Ci * H * W;
                for (int64_t ci = 0; ci < Ci; ++ci)
                    for (int64_t i = 0; i < kh; ++i)
                        for (int64_t j = 0; j < kw; ++j) {
                            const S* src = gcol.ptr() + ((ci * kh + i) * kw + j) * P;
                            for (int64_t ho = 0; ho < Ho; ++ho) {
                                int64_t hi = ho * stride - pad + i;
                                if (hi < 0 || hi >= H) continue;
                                S* dst_row = gxn + (ci * H + hi) * W;
                                for (int64_t wo = 0; wo < Wo; ++wo) {
                                    int64_t wi = wo * stride - pad + j;
                                    if (wi >= 0 && wi < W) dst_row[wi] += src[ho * Wo + wo];
                                }
                            }
                        }
            });
        }
    };
    return detail::result<S>(std::move(out), std::move(parents), std::move(back));
}

template <class S>
Var<S> upsample_nearest2(const Var<S>& x) {
    if (x->val.rank() != 4) throw std::invalid_argument("upsample: rank-4 input required");
    int64_t N = x->val.dim(0), C = x->val.dim(1), H = x->val.dim(2), W = x->val.dim(3);
    Tensor<S> out({N, C, 2 * H, 2 * W});
    const S* px = x->val.ptr();
    S* po = out.ptr();
    for (int64_t nc = 0; nc < N * C; ++nc)
        for (int64_t i = 0; i < H; ++i)
            for (int64_t j = 0; j < W; ++j) {
                S v = px[(nc * H + i) * W + j];
                S* row0 = po + (nc * 2 * H + 2 * i) * 2 * W + 2 * j;
                S* row1 = row0 + 2 * W;
                row0[0] = row0[1] = row1[0] = row1[1] = v;
            }
    return detail::result<S>(std::move(out), {x}, [x, N, C, H, W](Node<S>& n_) {
        S* gx = x->g().ptr();
        const S* g = n_.grad.ptr();
        for (int64_t nc = 0; nc < N * C; ++nc)
            for (int64_t i = 0; i < H; ++i)
                for (int64_t j = 0; j < W; ++j) {
                    const S* row0 = g + (nc * 2 * H + 2 * i) * 2 * W + 2 * j;
                    const S* row1 = row0 + 2 * W;
                    gx[(nc * H + i) * W + j] += row0[0] + row0[1] + row1[0] + row1[1];
                }
    });
}

// ---------------------------------------------------------------------------
// structured ops for the style/content pipelines

template <class S>
Var<S> concat_channels(const Var<S>& a, const Var<S>& b) {
    if (a->val.rank() != 4 || b->val.rank() != 4) throw std::invalid_argument("concat_channels: rank-4 required");
    int64_t N = a->val.dim(0), Ca = a->val.dim(1), H = a->val.dim(2), W = a->val.dim(3);
    int64_t Cb = b->val.dim(1);
    if (b->val.dim(0) != N || b->val.dim(2) != H || b->val.dim(3) != W)
        throw std::invalid_argument("concat_channels: shape mismatch");
    Tensor<S> out({N, Ca + Cb, H, W});
    int64_t hw = H * W;
    for (int64_t n = 0; n < N; ++n) {
        std::copy_n(a->val.ptr() + n * Ca * hw, Ca * hw, out.ptr() + n * (Ca + Cb) * hw);
        std::copy_n(b->val.ptr() + n * Cb * hw, Cb * hw, out.ptr() + (n * (Ca + Cb) + Ca) * hw);
    }
    return detail::result<S>(std::move(out), {a, b}, [a, b, N, Ca, Cb, hw](Node<S>& n_) {
        const S* g = n_.grad.ptr();
        if (a->needs_grad) {
            S* ga = a->g().ptr();
            for (int64_t n = 0; n < N; ++n)
                for (int64_t i = 0; i < Ca * hw; ++i) ga[n * Ca * hw + i] += g[n * (Ca + Cb) * hw + i];
        }
        if (b->needs_grad) {
            S* gb = b->g().ptr();
            for (int64_t n = 0; n < N; ++n)
                for (int64_t i = 0; i < Cb * hw; ++i) gb[n * Cb * hw + i] += g[(n * (Ca + Cb) + Ca) * hw + i];
        }
    });
}

// Stack along dim 0.
template <class S>
Var<S> concat_batch(const std::vector<Var<S>>& xs) {
    if (xs.empty()) throw std::invalid_argument("concat_batch: empty list");
    std::vector<int64_t> inner(xs[0]->val.shape.begin() + 1, xs[0]->val.shape.end());
    int64_t rows = 0;
    for (auto& x : xs) {
        std::vector<int64_t> xin(x->val.shape.begin() + 1, x->val.shape.end());
        if (xin != inner) throw std::invalid_argument("concat_batch: inner shape mismatch");
        rows += x->val.dim(0);
    }
    int64_t stride = Tensor<S>::count(inner);
    std::vector<int64_t> shp{rows};
    shp.insert(shp.end(), inner.begin(), inner.end());
    Tensor<S> out(shp);
    int64_t off = 0;
    for (auto& x : xs) {
        std::copy_n(x->val.ptr(), x->val.numel(), out.ptr() + off);
        off += x->val.numel();
    }
    std::vector<Var<S>> parents = xs;
    return detail::result<S>(std::move(out), std::move(parents), [xs, stride](Node<S>& n_) {
        const S* g = n_.grad.ptr();
        int64_t off2 = 0;
        for (auto& x : xs) {
            if (x->needs_grad) {
                S* gx = x->g().ptr();
                for (int64_t i = 0; i < x->val.numel(); ++i) gx[i] += g[off2 + i];
            }
            off2 += x->val.numel();
        }
        (void)stride;
    });
}

// Select rows along dim 0; backward scatter-adds.
template <class S>
Var<S> gather_batch(const Var<S>& x, std::vector<int64_t> idx) {
    if (x->val.rank() < 1) throw std::invalid_argument("gather_batch: rank >= 1 required");
    int64_t rows = x->val.dim(0);
    int64_t stride = x->val.numel() / std::max<int64_t>(rows, 1);
    for (int64_t i : idx)
        if (i < 0 || i >= rows) throw std::out_of_range("gather_batch: index out of range");
    std::vector<int64_t> shp = x->val.shape;
    shp[0] = static_cast<int64_t>(idx.size());
    Tensor<S> out(shp);
    for (size_t r = 0; r < idx.size(); ++r)
        std::copy_n(x->val.ptr() + idx[r] * stride, stride, out.ptr() + static_cast<int64_t>(r) * stride);
    return detail::result<S>(std::move(out), {x}, [x, idx = std::move(idx), stride](Node<S>& n_) {
        S* gx = x->g().ptr();
        const S* g = n_.grad.ptr();
        for (size_t r = 0; r < idx.size(); ++r)
            for (int64_t i = 0; i < stride; ++i) gx[idx[r] * stride + i] += g[static_cast<int64_t>(r) * stride + i];
    });
}

// groups[b] lists the rows of x summed into output row b.
template <class S>
Var<S> group_sum(const Var<S>& x, std::vector<std::vector<int64_t>> groups) {
    int64_t rows = x->val.dim(0);
    int64_t stride = x->val.numel() / std::max<int64_t>(rows, 1);
    for (auto& grp : groups) {
        if (grp.empty()) throw std::invalid_argument("group_sum: empty group");
        for (int64_t i : grp)
            if (i < 0 || i >= rows) throw std::out_of_range("group_sum: index out of range");
    }
    std::vector<int64_t> shp = x->val.shape;
    shp[0] = static_cast<int64_t>(groups.size());
    Tensor<S> out(shp);
    for (size_t b = 0; b < groups.size(); ++b) {
        S* dst = out.ptr() + static_cast<int64_t>(b) * stride;
        for (int64_t r : groups[b]) {
            const S* src = x->val.ptr() + r * stride;
            for (int64_t i = 0; i < stride; ++i) dst[i] += src[i];
        }
    }
    return detail::result<S>(std::move(out), {x}, [x, groups = std::move(groups), stride](Node<S>& n_) {
        S* gx = x->g().ptr();
        const S* g = n_.grad.ptr();
        for (size_t b = 0; b < groups.size(); ++b)
            for (int64_t r : groups[b])
                for (int64_t i = 0; i < stride; ++i)
                    gx[r * stride + i] += g[static_cast<int64_t>(b) * stride + i];
    });
}

template <class S>
Var<S> group_mean(const Var<S>& x, std::vector<std::vector<int64_t>> groups) {
    int64_t rows = x->val.dim(0);
    int64_t stride = x->val.numel() / std::max<int64_t>(rows, 1);
    for (auto& grp : groups) {
        if (grp.empty()) throw std::invalid_argument("group_mean: empty group");
        for (int64_t i : grp)
            if (i < 0 || i >= rows) throw std::out_of_range("group_mean: index out of range");
    }
    std::vector<int64_t> shp = x->val.shape;
    shp[0] = static_cast<int64_t>(groups.size());
    Tensor<S> out(shp);
    for (size_t b = 0; b < groups.size(); ++b) {
        S inv = S(1) / static_cast<S>(groups[b].size());
        S* dst = out.ptr() + static_cast<int64_t>(b) * stride;
        for (int64_t r : groups[b]) {
            const S* src = x->val.ptr() + r * stride;
            for (int64_t i = 0; i < stride; ++i) dst[i] += src[i] * inv;
        }
    }
    return detail::result<S>(std::move(out), {x}, [x, groups = std::move(groups), stride](Node<S>& n_) {
        S* gx = x->g().ptr();
        const S* g = n_.grad.ptr();
        for (size_t b = 0; b < groups.size(); ++b) {
            S inv = S(1) / static_cast<S>(groups[b].size());
            for (int64_t r : groups[b])
                for (int64_t i = 0; i < stride; ++i)
                    gx[r * stride + i] += g[static_cast<int64_t>(b) * stride + i] * inv;
        }
    });
}

// Repeat a batch of size 1 n times.
template <class S>
Var<S> expand_batch(const Var<S>& x, int64_t n) {
    if (x->val.dim(0) != 1) throw std::invalid_argument("expand_batch: dim 0 must be 1");
    std::vector<std::vector<int64_t>> groups(static_cast<size_t>(n), std::vector<int64_t>{0});
    return group_sum(x, std::move(groups));
}

// table [R,C] indexed by idx -> [N,C]
template <class S>
Var<S> rows_select(const Var<S>& table, std::vector<int64_t> idx) {
    if (table->val.rank() != 2) throw std::invalid_argument("rows_select: rank-2 table required");
    return gather_batch(table, std::move(idx));
}

// x [N,C,H,W] + y [N,C] broadcast over spatial positions.
template <class S>
Var<S> broadcast_add_nc(const Var<S>& x, const Var<S>& y) {
    if (x->val.rank() != 4 || y->val.rank() != 2 || x->val.dim(0) != y->val.dim(0) || x->val.dim(1) != y->val.dim(1))
        throw std::invalid_argument("broadcast_add_nc: shape mismatch");
    int64_t N = x->val.dim(0), C = x->val.dim(1), hw = x->val.dim(2) * x->val.dim(3);
    Tensor<S> out = x->val;
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c) {
            S v = y->val[n * C + c];
            S* dst = out.ptr() + (n * C + c) * hw;
            for (int64_t i = 0; i < hw; ++i) dst[i] += v;
        }
    return detail::result<S>(std::move(out), {x, y}, [x, y, N, C, hw](Node<S>& n_) {
        const S* g = n_.grad.ptr();
        if (x->needs_grad) {
            S* gx = x->g().ptr();
            for (int64_t i = 0; i < n_.val.numel(); ++i) gx[i] += g[i];
        }
        if (y->needs_grad) {
            S* gy = y->g().ptr();
            for (int64_t n = 0; n < N; ++n)
                for (int64_t c = 0; c < C; ++c) {
                    S acc = 0;
                    const S* src = g + (n * C + c) * hw;
                    for (int64_t i = 0; i < hw; ++i) acc += src[i];
                    gy[n * C + c] += acc;
                }
        }
    });
}

// x [N,C,H,W] * gate [N,C] broadcast over spatial positions.
template <class S>
Var<S> mul_gate_nc(const Var<S>& x, const Var<S>& y) {
    if (x->val.rank() != 4 || y->val.rank() != 2 || x->val.dim(0) != y->val.dim(0) || x->val.dim(1) != y->val.dim(1))
        throw std::invalid_argument("mul_gate_nc: shape mismatch");
    int64_t N = x->val.dim(0), C = x->val.dim(1), hw = x->val.dim(2) * x->val.dim(3);
    Tensor<S> out = x->val;
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c) {
            S v = y->val[n * C + c];
            S* dst = out.ptr() + (n * C + c) * hw;
            for (int64_t i = 0; i < hw; ++i) dst[i] *= v;
        }
    return detail::result<S>(std::move(out), {x, y}, [x, y, N, C, hw](Node<S>& n_) {
        const S* g = n_.grad.ptr();
        if (x->needs_grad) {
            S* gx = x->g().ptr();
            for (int64_t n = 0; n < N; ++n)
                for (int64_t c = 0; c < C; ++c) {
                    S v = y->val[n * C + c];
                    const S* src = g + (n * C + c) * hw;
                    S* dst = gx + (n * C + c) * hw;
                    for (int64_t i = 0; i < hw; ++i) dst[i] += src[i] * v;
                }
        }
        if (y->needs_grad) {
            S* gy = y->g().ptr();
            for (int64_t n = 0; n < N; ++n)
                for (int64_t c = 0; c < C; ++c) {
                    S acc = 0;
                    const S* gg = g + (n * C + c) * hw;
                    const S* xx = x->val.ptr() + (n * C + c) * hw;
                    for (int64_t i = 0; i < hw; ++i) acc += gg[i] * xx[i];
                    gy[n * C + c] += acc;
                }
        }
    });
}

// x [N,C,H,W] * mask [N,1,H,W] broadcast over channels.
template <class S>
Var<S> mul_gate_spatial(const Var<S>& x, const Var<S>& m) {
    if (x->val.rank() != 4 || m->val.rank() != 4 || m->val.dim(1) != 1 || x->val.dim(0) != m->val.dim(0) ||
        x->val.dim(2) != m->val.dim(2) || x->val.dim(3) != m->val.dim(3))
        throw std::invalid_argument("mul_gate_spatial: shape mismatch");
    int64_t N = x->val.dim(0), C = x->val.dim(1), hw = x->val.dim(2) * x->val.dim(3);
    Tensor<S> out = x->val;
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c) {
            S* dst = out.ptr() + (n * C + c) * hw;
            const S* mm = m->val.ptr() + n * hw;
            for (int64_t i = 0; i < hw; ++i) dst[i] *= mm[i];
        }
    return detail::result<S>(std::move(out), {x, m}, [x, m, N, C, hw](Node<S>& n_) {
        const S* g = n_.grad.ptr();
        if (x->needs_grad) {
            S* gx = x->g().ptr();
            for (int64_t n = 0; n < N; ++n)
                for (int64_t c = 0; c < C; ++c) {
                    S* dst = gx + (n * C + c) * hw;
                    const S* gg = g + (n * C + c) * hw;
                    const S* mm = m->val.ptr() + n * hw;
                    for (int64_t i = 0; i < hw; ++i) dst[i] += gg[i] * mm[i];
                }
        }
        if (m->needs_grad) {
            S* gm = m->g().ptr();
            for (int64_t n = 0; n < N; ++n)
                for (int64_t i = 0; i < hw; ++i) {
                    S acc = 0;
                    for (int64_t c = 0; c < C; ++c)
                        acc += g[(n * C + c) * hw + i] * x->val[(n * C + c) * hw + i];
                    gm[n * hw + i] += acc;
                }
        }
    });
}

template <class S>
Var<S> global_avg_pool(const Var<S>& x) {
    if (x->val.rank() != 4) throw std::invalid_argument("global_avg_pool: rank-4 required");
    int64_t N = x->val.dim(0), C = x->val.dim(1), hw = x->val.dim(2) * x->val.dim(3);
    Tensor<S> out({N, C});
    S inv = S(1) / static_cast<S>(hw);
    for (int64_t nc = 0; nc < N * C; ++nc) {
        S acc = 0;
        const S* src = x->val.ptr() + nc * hw;
        for (int64_t i = 0; i < hw; ++i) acc += src[i];
        out[nc] = acc * inv;
    }
    return detail::result<S>(std::move(out), {x}, [x, hw, inv](Node<S>& n_) {
        S* gx = x->g().ptr();
        const S* g = n_.grad.ptr();
        for (int64_t nc = 0; nc < n_.val.numel(); ++nc) {
            S v = g[nc] * inv;
            S* dst = gx + nc * hw;
            for (int64_t i = 0; i < hw; ++i) dst[i] += v;
        }
    });
}

template <class S>
Var<S> global_max_pool(const Var<S>& x) {
    if (x->val.rank() != 4) throw std::invalid_argument("global_max_pool: rank-4 required");
    int64_t N = x->val.dim(0), C = x->val.dim(1), hw = x->val.dim(2) * x->val.dim(3);
    Tensor<S> out({N, C});
    auto argmax = std::make_shared<std::vector<int64_t>>(static_cast<size_t>(N * C));
    for (int64_t nc = 0; nc < N * C; ++nc) {
        const S* src = x->val.ptr() + nc * hw;
        int64_t best = 0;
        for (int64_t i = 1; i < hw; ++i)
            if (src[i] > src[best]) best = i;
        out[nc] = src[best];
        (*argmax)[static_cast<size_t>(nc)] = best;
    }
    return detail::result<S>(std::move(out), {x}, [x, hw, argmax](Node<S>& n_) {
        S* gx = x->g().ptr();
        const S* g = n_.grad.ptr();
        for (int64_t nc = 0; nc < n_.val.numel(); ++nc) gx[nc * hw + (*argmax)[static_cast<size_t>(nc)]] += g[nc];
    });
}

// Per-position channel mean and max: [N,C,H,W] -> [N,2,H,W].
template <class S>
Var<S> channel_stats_map(const Var<S>& x) {
    if (x->val.rank() != 4) throw std::invalid_argument("channel_stats_map: rank-4 required");
    int64_t N = x->val.dim(0), C = x->val.dim(1), hw = x->val.dim(2) * x->val.dim(3);
    Tensor<S> out({N, 2, x->val.dim(2), x->val.dim(3)});
    auto argmax = std::make_shared<std::vector<int64_t>>(static_cast<size_t>(N * hw));
    S inv = S(1) / static_cast<S>(C);
    for (int64_t n = 0; n < N; ++n)
        for (int64_t i = 0; i < hw; ++i) {
            S acc = 0;
            int64_t best = 0;
            S bestv = x->val[(n * C) * hw + i];
            for (int64_t c = 0; c < C; ++c) {
                S v = x->val[(n * C + c) * hw + i];
                acc += v;
                if (v > bestv) {
                    bestv = v;
                    best = c;
                }
            }
            out[(n * 2) * hw + i] = acc * inv;
            out[(n * 2 + 1) * hw + i] = bestv;
            (*argmax)[static_cast<size_t>(n * hw + i)] = best;
        }
    return detail::result<S>(std::move(out), {x}, [x, N, C, hw, inv, argmax](Node<S>& n_) {
        S* gx = x->g().ptr();
        const S* g = n_.grad.ptr();
        for (int64_t n = 0; n < N; ++n)
            for (int64_t i = 0; i < hw; ++i) {
                S gmean = g[(n * 2) * hw + i] * inv;
                for (int64_t c = 0; c < C; ++c) gx[(n * C + c) * hw + i] += gmean;
                gx[(n * C + (*argmax)[static_cast<size_t>(n * hw + i)]) * hw + i] += g[(n * 2 + 1) * hw + i];
            }
    });
}

// Softmax-attention pooling: weights = softmax(logits over H*W);
// out[n,c] = sum_p w[n,p] * x[n,c,p].
template <class S>
Var<S> spatial_attention_pool(const Var<S>& x, const Var<S>& logits) {
    if (x->val.rank() != 4 || logits->val.rank() != 4 || logits->val.dim(1) != 1 ||
        x->val.dim(0) != logits->val.dim(0) || x->val.dim(2) != logits->val.dim(2) ||
        x->val.dim(3) != logits->val.dim(3))
        throw std::invalid_argument("spatial_attention_pool: shape mismatch");
    int64_t N = x->val.dim(0), C = x->val.dim(1), hw = x->val.dim(2) * x->val.dim(3);
    auto weights = std::make_shared<Tensor<S>>(std::vector<int64_t>{N, hw});
    for (int64_t n = 0; n < N; ++n) {
        const S* lg = logits->val.ptr() + n * hw;
        S mx = lg[0];
        for (int64_t i = 1; i < hw; ++i) mx = std::max(mx, lg[i]);
        S denom = 0;
        S* w = weights->ptr() + n * hw;
        for (int64_t i = 0; i < hw; ++i) {
            w[i] = std::exp(lg[i] - mx);
            denom += w[i];
        }
        for (int64_t i = 0; i < hw; ++i) w[i] /= denom;
    }
    Tensor<S> out({N, C});
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c) {
            S acc = 0;
            const S* xx = x->val.ptr() + (n * C + c) * hw;
            const S* w = weights->ptr() + n * hw;
            for (int64_t i = 0; i < hw; ++i) acc += xx[i] * w[i];
            out[n * C + c] = acc;
        }
    return detail::result<S>(std::move(out), {x, logits}, [x, logits, weights, N, C, hw](Node<S>& n_) {
        const S* g = n_.grad.ptr();
        if (x->needs_grad) {
            S* gx = x->g().ptr();
            for (int64_t n = 0; n < N; ++n)
                for (int64_t c = 0; c < C; ++c) {
                    S gv = g[n * C + c];
                    const S* w = weights->ptr() + n * hw;
                    S* dst = gx + (n * C + c) * hw;
                    for (int64_t i = 0; i < hw; ++i) dst[i] += gv * w[i];
                }
        }
        if (logits->needs_grad) {
            S* gl = logits->g().ptr();
            for (int64_t n = 0; n < N; ++n) {
                const S* w = weights->ptr() + n * hw;
                // s[i] = sum_c g[n,c] * x[n,c,i]
                std::vector<S> s(static_cast<size_t>(hw), S(0));
                for (int64_t c = 0; c < C; ++c) {
                    S gv = g[n * C + c];
                    const S* xx = x->val.ptr() + (n * C + c) * hw;
                    for (int64_t i = 0; i < hw; ++i) s[static_cast<size_t>(i)] += gv * xx[i];
                }
                S sw = 0;
                for (int64_t i = 0; i < hw; ++i) sw += w[i] * s[static_cast<size_t>(i)];
                for (int64_t i = 0; i < hw; ++i) gl[n * hw + i] += w[i] * (s[static_cast<size_t>(i)] - sw);
            }
        }
    });
}

// ---------------------------------------------------------------------------
// factorization ops (Eq. 3 / Eq. 4 algebra)

// f [N,C,H,W], W [k,C], b [k] -> z [N,k,C,H,W]; z[n,i,c,p] = W[i,c]*f[n,c,p] + b[i]
template <class S>
Var<S> factor_apply(const Var<S>& f, const Var<S>& w, const Var<S>& b) {
    if (f->val.rank() != 4 || w->val.rank() != 2 || b->val.rank() != 1)
        throw std::invalid_argument("factor_apply: bad ranks");
    int64_t N = f->val.dim(0), C = f->val.dim(1), H = f->val.dim(2), Wd = f->val.dim(3);
    int64_t k = w->val.dim(0);
    if (w->val.dim(1) != C || b->val.dim(0) != k) throw std::invalid_argument("factor_apply: dimension mismatch");
    int64_t hw = H * Wd;
    Tensor<S> out({N, k, C, H, Wd});
    for (int64_t n = 0; n < N; ++n)
        for (int64_t i = 0; i < k; ++i)
            for (int64_t c = 0; c < C; ++c) {
                S wv = w->val[i * C + c];
                S bv = b->val[i];
                const S* src = f->val.ptr() + (n * C + c) * hw;
                S* dst = out.ptr() + ((n * k + i) * C + c) * hw;
                for (int64_t p = 0; p < hw; ++p) dst[p] = wv * src[p] + bv;
            }
    return detail::result<S>(std::move(out), {f, w, b}, [f, w, b, N, C, k, hw](Node<S>& n_) {
        const S* g = n_.grad.ptr();
        if (f->needs_grad) {
            S* gf = f->g().ptr();
            for (int64_t n = 0; n < N; ++n)
                for (int64_t i = 0; i < k; ++i)
                    for (int64_t c = 0; c < C; ++c) {
                        S wv = w->val[i * C + c];
                        const S* gg = g + ((n * k + i) * C + c) * hw;
                        S* dst = gf + (n * C + c) * hw;
                        for (int64_t p = 0; p < hw; ++p) dst[p] += wv * gg[p];
                    }
        }
        if (w->needs_grad) {
            S* gw = w->g().ptr();
            for (int64_t i = 0; i < k; ++i)
                for (int64_t c = 0; c < C; ++c) {
                    S acc = 0;
                    for (int64_t n = 0; n < N; ++n) {
                        const S* gg = g + ((n * k + i) * C + c) * hw;
                        const S* src = f->val.ptr() + (n * C + c) * hw;
                        for (int64_t p = 0; p < hw; ++p) acc += gg[p] * src[p];
                    }
                    gw[i * C + c] += acc;
                }
        }
        if (b->needs_grad) {
            S* gb = b->g().ptr();
            for (int64_t i = 0; i < k; ++i) {
                S acc = 0;
                for (int64_t n = 0; n < N; ++n) {
                    const S* gg = g + (n * k + i) * C * hw;
                    for (int64_t p = 0; p < C * hw; ++p) acc += gg[p];
                }
                gb[i] += acc;
            }
        }
    });
}

// zs, zu [N,k,C,H,W] -> [N,C,H,W]; out = sum_i zs[:,i] * zu[:,i]
template <class S>
Var<S> factor_reconstruct(const Var<S>& zs, const Var<S>& zu) {
    detail::check_same_shape(zs, zu, "factor_reconstruct");
    if (zs->val.rank() != 5) throw std::invalid_argument("factor_reconstruct: rank-5 factors required");
    int64_t N = zs->val.dim(0), k = zs->val.dim(1);
    int64_t chw = zs->val.dim(2) * zs->val.dim(3) * zs->val.dim(4);
    Tensor<S> out({N, zs->val.dim(2), zs->val.dim(3), zs->val.dim(4)});
    for (int64_t n = 0; n < N; ++n) {
        S* dst = out.ptr() + n * chw;
        for (int64_t i = 0; i < k; ++i) {
            const S* ps = zs->val.ptr() + (n * k + i) * chw;
            const S* pu = zu->val.ptr() + (n * k + i) * chw;
            for (int64_t p = 0; p < chw; ++p) dst[p] += ps[p] * pu[p];
        }
    }
    return detail::result<S>(std::move(out), {zs, zu}, [zs, zu, N, k, chw](Node<S>& n_) {
        const S* g = n_.grad.ptr();
        if (zs->needs_grad) {
            S* gs = zs->g().ptr();
            for (int64_t n = 0; n < N; ++n)
                for (int64_t i = 0; i < k; ++i) {
                    const S* pu = zu->val.ptr() + (n * k + i) * chw;
                    S* dst = gs + (n * k + i) * chw;
                    const S* gg = g + n * chw;
                    for (int64_t p = 0; p < chw; ++p) dst[p] += gg[p] * pu[p];
                }
        }
        if (zu->needs_grad) {
            S* gu = zu->g().ptr();
            for (int64_t n = 0; n < N; ++n)
                for (int64_t i = 0; i < k; ++i) {
                    const S* ps = zs->val.ptr() + (n * k + i) * chw;
                    S* dst = gu + (n * k + i) * chw;
                    const S* gg = g + n * chw;
                    for (int64_t p = 0; p < chw; ++p) dst[p] += gg[p] * ps[p];
                }
        }
    });
}

// ---------------------------------------------------------------------------
// classification

// logits [N,K], labels [N] -> per-sample cross-entropy [N]
template <class S>
Var<S> softmax_cross_entropy(const Var<S>& logits, std::vector<int64_t> labels) {
    if (logits->val.rank() != 2) throw std::invalid_argument("softmax_cross_entropy: rank-2 logits required");
    int64_t N = logits->val.dim(0), K = logits->val.dim(1);
    if (static_cast<int64_t>(labels.size()) != N)
        throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
    for (int64_t y : labels)
        if (y < 0 || y >= K) throw std::out_of_range("softmax_cross_entropy: label out of range");

    auto probs = std::make_shared<Tensor<S>>(std::vector<int64_t>{N, K});
    Tensor<S> out({N});
    for (int64_t n = 0; n < N; ++n) {
        const S* lg = logits->val.ptr() + n * K;
        S mx = lg[0];
        for (int64_t j = 1; j < K; ++j) mx = std::max(mx, lg[j]);
        S denom = 0;
        S* pr = probs->ptr() + n * K;
        for (int64_t j = 0; j < K; ++j) {
            pr[j] = std::exp(lg[j] - mx);
            denom += pr[j];
        }
        for (int64_t j = 0; j < K; ++j) pr[j] /= denom;
        out[n] = -(lg[labels[static_cast<size_t>(n)]] - mx - std::log(denom));
    }
    return detail::result<S>(std::move(out), {logits}, [logits, probs, labels = std::move(labels), N, K](Node<S>& n_) {
        S* gl = logits->g().ptr();
        const S* g = n_.grad.ptr();
        for (int64_t n = 0; n < N; ++n) {
            const S* pr = probs->ptr() + n * K;
            S gv = g[n];
            for (int64_t j = 0; j < K; ++j) gl[n * K + j] += gv * pr[j];
            gl[n * K + labels[static_cast<size_t>(n)]] -= gv;
        }
    });
}

template <class S>
Tensor<S> softmax_values(const Tensor<S>& logits) {
    if (logits.rank() != 2) throw std::invalid_argument("softmax_values: rank-2 logits required");
    int64_t N = logits.dim(0), K = logits.dim(1);
    Tensor<S> out({N, K});
    for (int64_t n = 0; n < N; ++n) {
        const S* lg = logits.ptr() + n * K;
        S mx = lg[0];
        for (int64_t j = 1; j < K; ++j) mx = std::max(mx, lg[j]);
        S denom = 0;
        S* pr = out.ptr() + n * K;
        for (int64_t j = 0; j < K; ++j) {
            pr[j] = std::exp(lg[j] - mx);
            denom += pr[j];
        }
        for (int64_t j = 0; j < K; ++j) pr[j] /= denom;
    }
    return out;
}

}  // namespace lffont::ad
