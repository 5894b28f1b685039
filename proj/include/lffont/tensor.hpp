#pragma once

#include <cstdint>
#include <cmath>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lffont {

// Training and inference scalar type; tests instantiate the templated core
// with double for finite-difference audits.
using real = float;

// Dense row-major tensor. Rank and shape are dynamic; data is owned.
template <class S>
struct Tensor {
    std::vector<int64_t> shape;
    std::vector<S> data;

    Tensor() = default;
    explicit Tensor(std::vector<int64_t> shp) : shape(std::move(shp)), data(count(shape), S(0)) {}
    Tensor(std::vector<int64_t> shp, std::vector<S> values) : shape(std::move(shp)), data(std::move(values)) {
        if (static_cast<int64_t>(data.size()) != count(shape))
            throw std::invalid_argument("tensor: data size does not match shape");
    }

    static int64_t count(const std::vector<int64_t>& shp) {
        int64_t n = 1;
        for (int64_t d : shp) {
            if (d < 0) throw std::invalid_argument("tensor: negative dimension");
            n *= d;
        }
        return n;
    }

    static Tensor zeros(std::vector<int64_t> shp) { return Tensor(std::move(shp)); }
    static Tensor full(std::vector<int64_t> shp, S v) {
        Tensor t(std::move(shp));
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }
    static Tensor scalar(S v) { return Tensor({1}, {v}); }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    bool empty() const { return data.empty(); }
    int rank() const { return static_cast<int>(shape.size()); }
    int64_t dim(int i) const { return shape.at(static_cast<size_t>(i)); }

    S* ptr() { return data.data(); }
    const S* ptr() const { return data.data(); }

    S& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
    const S& operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

    // Flat index from multi-index; bounds-checked, test/debug use.
    S& at(std::initializer_list<int64_t> idx) { return data[static_cast<size_t>(offset(idx))]; }
    const S& at(std::initializer_list<int64_t> idx) const { return data[static_cast<size_t>(offset(idx))]; }

    int64_t offset(std::initializer_list<int64_t> idx) const {
        if (static_cast<int>(idx.size()) != rank()) throw std::out_of_range("tensor: index rank mismatch");
        int64_t off = 0;
        int i = 0;
        for (int64_t v : idx) {
            if (v < 0 || v >= shape[static_cast<size_t>(i)]) throw std::out_of_range("tensor: index out of range");
            off = off * shape[static_cast<size_t>(i)] + v;
            ++i;
        }
        return off;
    }

    Tensor reshaped(std::vector<int64_t> shp) const {
        if (count(shp) != numel()) throw std::invalid_argument("tensor: reshape changes element count");
        Tensor t;
        t.shape = std::move(shp);
        t.data = data;
        return t;
    }

    void fill(S v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    template <class T>
    Tensor<T> cast() const {
        Tensor<T> t;
        t.shape = shape;
        t.data.resize(data.size());
        for (size_t i = 0; i < data.size(); ++i) t.data[i] = static_cast<T>(data[i]);
        return t;
    }

    std::string shape_str() const {
        std::ostringstream os;
        os << '[';
        for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
        os << ']';
        return os.str();
    }
};

template <class S>
bool all_finite(const Tensor<S>& t) {
    for (S v : t.data)
        if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
}

}  // namespace lffont
