#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace kdessi::nn {

/// Dense row-major tensor. Scalar is float for training/storage and double
/// for finite-difference gradient checking.
template <typename S>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<S> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims)
        : shape(std::move(dims)), data(count(shape), S(0)) {}

    static std::size_t count(const std::vector<std::size_t>& dims) {
        std::size_t n = 1;
        for (std::size_t d : dims) n *= d;
        return n;
    }

    std::size_t numel() const { return data.size(); }
    S* ptr() { return data.data(); }
    const S* ptr() const { return data.data(); }

    void fill(S v) { std::fill(data.begin(), data.end(), v); }

    template <typename T>
    Tensor<T> cast() const {
        Tensor<T> out(shape);
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<T>(data[i]);
        return out;
    }
};

template <typename S>
struct Param {
    Tensor<S> value;
    Tensor<S> grad;

    Param() = default;
    explicit Param(std::vector<std::size_t> dims) : value(dims), grad(std::move(dims)) {}
    void zero_grad() { grad.fill(S(0)); }
};

namespace blas {

// C[M,N] += A[M,K] * B[K,N]; saxpy ordering keeps the inner loop contiguous.
template <typename S>
inline void gemm_acc(std::size_t M, std::size_t N, std::size_t K,
                     const S* A, const S* B, S* C) {
    for (std::size_t i = 0; i < M; ++i) {
        const S* a = A + i * K;
        S* c = C + i * N;
        for (std::size_t k = 0; k < K; ++k) {
            const S av = a[k];
            const S* b = B + k * N;
            for (std::size_t j = 0; j < N; ++j) c[j] += av * b[j];
        }
    }
}

// Dot product with fixed 8-lane accumulation order (vectorizable and
// deterministic without -ffast-math).
template <typename S>
inline S dot(const S* a, const S* b, std::size_t n) {
    S acc[8] = {S(0), S(0), S(0), S(0), S(0), S(0), S(0), S(0)};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (std::size_t l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
    for (; i < n; ++i) acc[i % 8] += a[i] * b[i];
    const S s01 = acc[0] + acc[1], s23 = acc[2] + acc[3];
    const S s45 = acc[4] + acc[5], s67 = acc[6] + acc[7];
    return (s01 + s23) + (s45 + s67);
}

} // namespace blas

} // namespace kdessi::nn
