#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lfld/errors.hpp"
#include "lfld/fourier.hpp"
#include "lfld/nn.hpp"
#include "lfld/rng.hpp"
#include "lfld/tensor.hpp"

// Pointwise field reconstruction: a GELU MLP mapping one latent-state row plus
// per-node spatial features to field values at that node. Spatial features are
// either the trainable Fourier embedding of the (normalized) coordinates or
// the raw coordinates themselves (the no-embedding variants), optionally
// followed by extra per-node channels G and D.
//
// Feature column order is fixed — [state | coordinate features | G | D] — and
// checkpoints depend on it; reordering is a format break.

namespace lfld {

/// Shape of the reconstruction MLP's input and body.
struct ReconstructionConfig {
    std::int64_t n_state = 0;  ///< latent-state width contributed by the dynamics net
    std::int64_t n_freq = 0;   ///< Fourier frequency count; 0 disables the embedding
    std::int64_t n_dim = 0;    ///< coordinate dimension
    bool raw_coords = false;   ///< feed coordinates directly instead of embedding them
    std::int64_t dim_g = 0;    ///< extra static per-node channels
    std::int64_t dim_d = 0;    ///< extra per-node channels that may vary in time
    std::vector<std::int64_t> hidden;  ///< hidden layer widths (GELU)
    std::int64_t n_out = 1;    ///< field dimension

    std::int64_t coord_feature_width() const {
        return 2 * n_freq + (raw_coords ? n_dim : 0) + dim_g + dim_d;
    }
    std::int64_t input_width() const { return n_state + coord_feature_width(); }
};

/// Per-node feature columns in the fixed order
/// [fourier embedding | raw coordinates | G | D]; every block is optional and
/// contributes zero columns when disabled/absent. x is [m x n_dim]; G and D,
/// when given, are [m x dim_g] / [m x dim_d].
template <typename S>
TensorT<S> point_features(const ReconstructionConfig& cfg, const TensorT<S>& kernel,
                          const TensorT<S>& x, const TensorT<S>* g = nullptr,
                          const TensorT<S>* d = nullptr) {
    if (x.ndim() != 2)
        throw ShapeError("point_features: coordinates must be 2-D, got " + shape_str(x.shape()));
    const std::int64_t m = x.shape()[0];
    TensorT<S> feats = TensorT<S>::zeros({m, 0});
    if (cfg.n_freq > 0) {
        if (kernel.ndim() != 2 || kernel.shape()[0] != cfg.n_freq)
            throw ShapeError("point_features: kernel " + shape_str(kernel.shape()) +
                             " does not provide " + std::to_string(cfg.n_freq) + " frequencies");
        feats = fourier_embed(x, kernel);
    }
    if (cfg.raw_coords) {
        if (x.shape()[1] != cfg.n_dim)
            throw ShapeError("point_features: coordinates " + shape_str(x.shape()) +
                             " do not have dimension " + std::to_string(cfg.n_dim));
        feats = cfg.n_freq > 0 ? concat_cols(feats, x) : x;
    }
    auto append = [&](const TensorT<S>* extra, std::int64_t want, const char* what) {
        if (want == 0) {
            if (extra != nullptr && extra->size() != 0)
                throw ShapeError(std::string("point_features: ") + what +
                                 " channels given but configured width is 0");
            return;
        }
        if (extra == nullptr)
            throw ShapeError(std::string("point_features: missing ") + what + " channels (want " +
                             std::to_string(want) + " columns)");
        if (extra->ndim() != 2 || extra->shape()[0] != m || extra->shape()[1] != want)
            throw ShapeError(std::string("point_features: ") + what + " channels " +
                             shape_str(extra->shape()) + " do not match [" + std::to_string(m) +
                             "," + std::to_string(want) + "]");
        feats = concat_cols(feats, *extra);
    };
    append(g, cfg.dim_g, "G");
    append(d, cfg.dim_d, "D");
    return feats;
}

/// GELU MLP over [state | point features] rows, linear output.
template <typename S>
struct ReconstructionNetT {
    ReconstructionConfig config;
    FcnnT<S> mlp;

    static ReconstructionNetT build(const ReconstructionConfig& cfg, SplitMix64& rng) {
        if (cfg.n_state < 0 || cfg.n_freq < 0 || cfg.n_dim < 0 || cfg.dim_g < 0 || cfg.dim_d < 0)
            throw ConfigError("reconstruction: negative width in config");
        if (cfg.n_out < 1)
            throw ConfigError("reconstruction: output width must be >= 1, got " +
                              std::to_string(cfg.n_out));
        if (cfg.input_width() < 1)
            throw ConfigError("reconstruction: input width is 0 — no state and no features");
        for (auto h : cfg.hidden)
            if (h < 1)
                throw ConfigError("reconstruction: hidden width must be >= 1, got " +
                                  std::to_string(h));
        std::vector<std::int64_t> widths;
        widths.push_back(cfg.input_width());
        widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
        widths.push_back(cfg.n_out);
        ReconstructionNetT net;
        net.config = cfg;
        net.mlp = FcnnT<S>::build(widths, Act::gelu, rng);
        return net;
    }

    TensorT<S> forward(const TensorT<S>& rows) const { return mlp.forward(rows); }

    void collect(ParamList<S>& out, const std::string& prefix) const {
        mlp.collect(out, prefix);
    }
};

using ReconstructionNet = ReconstructionNetT<float>;

/// Field values for every (state row, node) pair: s [k x n_state] crossed with
/// m nodes gives [k*m x n_out], row (i*m + r) belonging to state i at node r.
template <typename S>
TensorT<S> reconstruct(const ReconstructionNetT<S>& net, const TensorT<S>& kernel,
                       const TensorT<S>& s, const TensorT<S>& x, const TensorT<S>* g = nullptr,
                       const TensorT<S>* d = nullptr) {
    auto feats = point_features(net.config, kernel, x, g, d);
    return net.forward(kron_concat(s, feats));
}

/// Strong Dirichlet constraint on a per-node prediction block. Nodes with
/// forced[r] != 0 are clamped to `value` exactly and pass no gradient; an
/// empty flag array means no constraint at all.
struct BoundaryMask {
    std::vector<std::uint8_t> forced;
    float value = 0.0f;
};

template <typename S>
TensorT<S> apply_boundary_mask(const TensorT<S>& pred, const BoundaryMask& mask) {
    if (mask.forced.empty()) return pred;
    if (std::int64_t(mask.forced.size()) != pred.rows())
        throw ShapeError("apply_boundary_mask: mask covers " +
                         std::to_string(mask.forced.size()) + " nodes but predictions are " +
                         shape_str(pred.shape()));
    std::vector<std::uint8_t> keep(mask.forced.size());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = mask.forced[i] ? 0u : 1u;
    return mask_rows(pred, keep, S(mask.value));
}

}  // namespace lfld
