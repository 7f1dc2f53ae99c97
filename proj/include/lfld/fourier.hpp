#pragma once

#include <cstdint>
#include <numbers>
#include <string>

#include "lfld/errors.hpp"
#include "lfld/rng.hpp"
#include "lfld/tensor.hpp"

// Trainable Fourier coordinate embedding: x -> [cos(2*pi*B x), sin(2*pi*B x)].
// B is an [n_freq x n_dim] matrix optimized together with the rest of the
// model; a wider/better-placed set of frequencies lets the reconstruction
// network pick up high-frequency spatial content much sooner than a plain
// coordinate input does.

namespace lfld {

/// Draw the frequency matrix B [n_freq x n_dim] with entries i.i.d.
/// Gaussian(0, scale^2) from the portable RNG. n_freq == 0 yields the empty
/// kernel: the embedding output then has zero columns and the model
/// degenerates to the no-embedding ablation.
template <typename S = float>
TensorT<S> init_fourier_kernel(std::int64_t n_freq, std::int64_t n_dim, double scale,
                               std::uint64_t seed) {
    if (n_freq < 0) throw ConfigError("fourier kernel: frequency count must be >= 0, got " +
                                      std::to_string(n_freq));
    if (n_dim < 0) throw ConfigError("fourier kernel: coordinate dimension must be >= 0, got " +
                                     std::to_string(n_dim));
    if (scale < 0.0)
        throw ConfigError("fourier kernel: init scale must be non-negative, got " +
                          std::to_string(scale));
    auto B = TensorT<S>::zeros({n_freq, n_dim}, true);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < B.size(); ++i) B.data()[i] = S(rng.normal(0.0, scale));
    return B;
}

/// Embed a batch of coordinates x [m x n_dim] with kernel B [n_freq x n_dim]:
/// out [m x 2*n_freq], columns [0, n_freq) are cos(2*pi*(x B^T)) and columns
/// [n_freq, 2*n_freq) are sin(2*pi*(x B^T)). Differentiable in both x and B.
template <typename S>
TensorT<S> fourier_embed(const TensorT<S>& x, const TensorT<S>& B) {
    if (x.ndim() != 2 || B.ndim() != 2 || x.shape()[1] != B.shape()[1])
        throw ShapeError("fourier_embed: coordinates " + shape_str(x.shape()) +
                         " do not match kernel " + shape_str(B.shape()));
    auto theta = affine(matmul(x, transpose(B)), S(2) * std::numbers::pi_v<S>, S(0));
    return concat_cols(apply_activation(theta, Act::cos), apply_activation(theta, Act::sin));
}

}  // namespace lfld
