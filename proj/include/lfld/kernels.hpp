#pragma once

#include <cstddef>
#include <type_traits>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

// Dense matrix kernels shared by the forward and reverse passes.
//
// Determinism contract (load-bearing, see tests/test_tensor.cpp):
//   * For every output element the reduction runs in a fixed ascending order
//     of the contraction index, independent of how the caller partitions the
//     non-contracted row dimension. Splitting a forward pass into row chunks
//     therefore reproduces the unchunked result bit for bit.
//   * Everything is single-threaded. Reproducibility here beats the last
//     factor of n_cores, and the training loops are latency-bound anyway.
//   * No -ffast-math anywhere in the build; the compiler must not reassociate.
//
// The float path is hand-vectorized for AVX-512 because the training budget
// assumes a few tens of GFLOP/s from one core. Each output element keeps its
// own accumulator register, so the per-element operation sequence (an FMA per
// contraction step) is identical between the 4-row main tiles and the 1-3 row
// edge tiles. Other scalar types fall back to plain loops with the same
// per-element ordering.

namespace lfld::detail {

// ---------------------------------------------------------------------------
// Generic fallbacks (used for double, and for float when AVX-512 is absent).
// ---------------------------------------------------------------------------

/// C[m,n] += A[m,k] * B[k,n]
template <typename S>
void gemm_nn_generic(const S* a, const S* b, S* c,
                     std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const S* arow = a + i * k;
        S* crow = c + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const S av = arow[kk];
            const S* brow = b + kk * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

/// dA[m,k] += dC[m,n] * B[k,n]^T   (row-by-row dot products)
template <typename S>
void gemm_nt_generic(const S* dc, const S* b, S* da,
                     std::size_t m, std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        const S* dcrow = dc + i * n;
        S* darow = da + i * k;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const S* brow = b + kk * n;
            S acc = S(0);
            for (std::size_t j = 0; j < n; ++j) acc += dcrow[j] * brow[j];
            darow[kk] += acc;
        }
    }
}

/// dB[k,n] += A[m,k]^T * dC[m,n]   (reduction over rows, ascending)
template <typename S>
void gemm_tn_generic(const S* a, const S* dc, S* db,
                     std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const S* arow = a + i * k;
        const S* dcrow = dc + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const S av = arow[kk];
            S* dbrow = db + kk * n;
            for (std::size_t j = 0; j < n; ++j) dbrow[j] += av * dcrow[j];
        }
    }
}

#if defined(__AVX512F__)

// Four 16-lane column strips = one 64-wide register tile per row.
inline __mmask16 strip_mask(std::size_t j0, std::size_t n) {
    if (j0 >= n) return 0;
    const std::size_t w = n - j0;
    return w >= 16 ? __mmask16(0xFFFF) : __mmask16((1u << w) - 1u);
}

/// R rows of C[m,n] += A[m,k] * B[k,n], accumulators held in registers across k.
template <int R>
inline void gemm_nn_tile(const float* a, const float* b, float* c,
                         std::size_t k, std::size_t n, std::size_t i0, std::size_t j0) {
    __mmask16 mk[4];
    for (int s = 0; s < 4; ++s) mk[s] = strip_mask(j0 + 16 * std::size_t(s), n);
    __m512 acc[R][4];
    for (int r = 0; r < R; ++r)
        for (int s = 0; s < 4; ++s) acc[r][s] = _mm512_setzero_ps();
    for (std::size_t kk = 0; kk < k; ++kk) {
        __m512 bv[4];
        const float* brow = b + kk * n + j0;
        for (int s = 0; s < 4; ++s) bv[s] = _mm512_maskz_loadu_ps(mk[s], brow + 16 * s);
        for (int r = 0; r < R; ++r) {
            const __m512 av = _mm512_set1_ps(a[(i0 + std::size_t(r)) * k + kk]);
            for (int s = 0; s < 4; ++s) acc[r][s] = _mm512_fmadd_ps(av, bv[s], acc[r][s]);
        }
    }
    for (int r = 0; r < R; ++r) {
        float* crow = c + (i0 + std::size_t(r)) * n + j0;
        for (int s = 0; s < 4; ++s) {
            if (!mk[s]) continue;
            const __m512 cv = _mm512_maskz_loadu_ps(mk[s], crow + 16 * s);
            _mm512_mask_storeu_ps(crow + 16 * s, mk[s], _mm512_add_ps(cv, acc[r][s]));
        }
    }
}

inline void gemm_nn_f32(const float* a, const float* b, float* c,
                        std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t j0 = 0; j0 < n; j0 += 64) {
        std::size_t i = 0;
        for (; i + 4 <= m; i += 4) gemm_nn_tile<4>(a, b, c, k, n, i, j0);
        switch (m - i) {
            case 3: gemm_nn_tile<3>(a, b, c, k, n, i, j0); break;
            case 2: gemm_nn_tile<2>(a, b, c, k, n, i, j0); break;
            case 1: gemm_nn_tile<1>(a, b, c, k, n, i, j0); break;
            default: break;
        }
    }
}

/// R rows of dC against C rows of B, dot-product form for dA += dC * B^T.
/// _mm512_reduce_add_ps is a fixed shuffle/add tree, so the horizontal order
/// is stable for a given build.
template <int R, int C>
inline void gemm_nt_tile(const float* dc, const float* b, float* da,
                         std::size_t n, std::size_t k, std::size_t i0, std::size_t c0) {
    __m512 acc[R][C];
    for (int r = 0; r < R; ++r)
        for (int q = 0; q < C; ++q) acc[r][q] = _mm512_setzero_ps();
    for (std::size_t j0 = 0; j0 < n; j0 += 16) {
        const __mmask16 mk = strip_mask(j0, n);
        __m512 dv[R], bv[C];
        for (int r = 0; r < R; ++r)
            dv[r] = _mm512_maskz_loadu_ps(mk, dc + (i0 + std::size_t(r)) * n + j0);
        for (int q = 0; q < C; ++q)
            bv[q] = _mm512_maskz_loadu_ps(mk, b + (c0 + std::size_t(q)) * n + j0);
        for (int r = 0; r < R; ++r)
            for (int q = 0; q < C; ++q) acc[r][q] = _mm512_fmadd_ps(dv[r], bv[q], acc[r][q]);
    }
    for (int r = 0; r < R; ++r)
        for (int q = 0; q < C; ++q)
            da[(i0 + std::size_t(r)) * k + c0 + std::size_t(q)] +=
                _mm512_reduce_add_ps(acc[r][q]);
}

template <int R>
inline void gemm_nt_rows(const float* dc, const float* b, float* da,
                         std::size_t n, std::size_t k, std::size_t i0) {
    std::size_t c0 = 0;
    for (; c0 + 4 <= k; c0 += 4) gemm_nt_tile<R, 4>(dc, b, da, n, k, i0, c0);
    switch (k - c0) {
        case 3: gemm_nt_tile<R, 3>(dc, b, da, n, k, i0, c0); break;
        case 2: gemm_nt_tile<R, 2>(dc, b, da, n, k, i0, c0); break;
        case 1: gemm_nt_tile<R, 1>(dc, b, da, n, k, i0, c0); break;
        default: break;
    }
}

inline void gemm_nt_f32(const float* dc, const float* b, float* da,
                        std::size_t m, std::size_t n, std::size_t k) {
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) gemm_nt_rows<4>(dc, b, da, n, k, i);
    switch (m - i) {
        case 3: gemm_nt_rows<3>(dc, b, da, n, k, i); break;
        case 2: gemm_nt_rows<2>(dc, b, da, n, k, i); break;
        case 1: gemm_nt_rows<1>(dc, b, da, n, k, i); break;
        default: break;
    }
}

/// R rows of dB[k,n] += A^T * dC, reduction over sample rows i (ascending).
template <int R>
inline void gemm_tn_tile(const float* a, const float* dc, float* db,
                         std::size_t m, std::size_t k, std::size_t n,
                         std::size_t k0, std::size_t j0) {
    __mmask16 mk[4];
    for (int s = 0; s < 4; ++s) mk[s] = strip_mask(j0 + 16 * std::size_t(s), n);
    __m512 acc[R][4];
    for (int r = 0; r < R; ++r)
        for (int s = 0; s < 4; ++s) acc[r][s] = _mm512_setzero_ps();
    for (std::size_t i = 0; i < m; ++i) {
        __m512 dv[4];
        const float* dcrow = dc + i * n + j0;
        for (int s = 0; s < 4; ++s) dv[s] = _mm512_maskz_loadu_ps(mk[s], dcrow + 16 * s);
        const float* acol = a + i * k + k0;
        for (int r = 0; r < R; ++r) {
            const __m512 av = _mm512_set1_ps(acol[r]);
            for (int s = 0; s < 4; ++s) acc[r][s] = _mm512_fmadd_ps(av, dv[s], acc[r][s]);
        }
    }
    for (int r = 0; r < R; ++r) {
        float* dbrow = db + (k0 + std::size_t(r)) * n + j0;
        for (int s = 0; s < 4; ++s) {
            if (!mk[s]) continue;
            const __m512 cur = _mm512_maskz_loadu_ps(mk[s], dbrow + 16 * s);
            _mm512_mask_storeu_ps(dbrow + 16 * s, mk[s], _mm512_add_ps(cur, acc[r][s]));
        }
    }
}

inline void gemm_tn_f32(const float* a, const float* dc, float* db,
                        std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t j0 = 0; j0 < n; j0 += 64) {
        std::size_t k0 = 0;
        for (; k0 + 4 <= k; k0 += 4) gemm_tn_tile<4>(a, dc, db, m, k, n, k0, j0);
        switch (k - k0) {
            case 3: gemm_tn_tile<3>(a, dc, db, m, k, n, k0, j0); break;
            case 2: gemm_tn_tile<2>(a, dc, db, m, k, n, k0, j0); break;
            case 1: gemm_tn_tile<1>(a, dc, db, m, k, n, k0, j0); break;
            default: break;
        }
    }
}

#endif  // __AVX512F__

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

template <typename S>
void gemm_nn(const S* a, const S* b, S* c, std::size_t m, std::size_t k, std::size_t n) {
#if defined(__AVX512F__)
    if constexpr (std::is_same_v<S, float>) {
        gemm_nn_f32(a, b, c, m, k, n);
        return;
    }
#endif
    gemm_nn_generic(a, b, c, m, k, n);
}

template <typename S>
void gemm_nt(const S* dc, const S* b, S* da, std::size_t m, std::size_t n, std::size_t k) {
#if defined(__AVX512F__)
    if constexpr (std::is_same_v<S, float>) {
        gemm_nt_f32(dc, b, da, m, n, k);
        return;
    }
#endif
    gemm_nt_generic(dc, b, da, m, n, k);
}

template <typename S>
void gemm_tn(const S* a, const S* dc, S* db, std::size_t m, std::size_t k, std::size_t n) {
#if defined(__AVX512F__)
    if constexpr (std::is_same_v<S, float>) {
        gemm_tn_f32(a, dc, db, m, k, n);
        return;
    }
#endif
    gemm_tn_generic(a, dc, db, m, k, n);
}

}  // namespace lfld::detail
