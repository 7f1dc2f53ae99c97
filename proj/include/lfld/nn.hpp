#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lfld/errors.hpp"
#include "lfld/rng.hpp"
#include "lfld/tensor.hpp"

// Small shared building blocks for the networks: a named parameter registry
// (what the optimizer and the checkpoint walk), scaled-normal initialization,
// and a plain fully-connected network used by the ODE right-hand sides and
// the reconstruction head alike.

namespace lfld {

/// One optimizable tensor. `mask` (when set) is a 0/1 indicator aligned with
/// the tensor; entries at 0 are structurally absent: initialized to zero and
/// re-zeroed after every optimizer step, so they stay exactly 0.0f.
template <typename S>
struct ParamRef {
    std::string name;
    TensorT<S> tensor;
    std::shared_ptr<const std::vector<float>> mask;
};

template <typename S>
using ParamList = std::vector<ParamRef<S>>;

template <typename S>
std::int64_t count_parameters(const ParamList<S>& params) {
    std::int64_t n = 0;
    for (const auto& p : params) {
        if (p.mask) {
            for (float m : *p.mask)
                if (m != 0.0f) ++n;
        } else {
            n += std::int64_t(p.tensor.size());
        }
    }
    return n;
}

namespace detail {

/// LeCun-style scaled normal init: sigma = 1/sqrt(fan_in). Draw order is
/// row-major over the full buffer so the stream does not depend on any mask.
template <typename S>
void init_scaled_normal(TensorT<S>& t, std::int64_t fan_in, SplitMix64& rng) {
    const double sigma = 1.0 / std::sqrt(double(std::max<std::int64_t>(1, fan_in)));
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = S(rng.normal(0.0, sigma));
}

}  // namespace detail

/// Feed-forward network: linear layers with one activation kind on hidden
/// layers and a linear output. `widths` runs input..output, so at least
/// {in, out}; no hidden layers means a single affine map.
template <typename S>
struct FcnnT {
    std::vector<TensorT<S>> weights;  // [widths[i] x widths[i+1]]
    std::vector<TensorT<S>> biases;   // [widths[i+1]]
    Act hidden_act = Act::tanh;

    static FcnnT build(const std::vector<std::int64_t>& widths, Act hidden_act,
                       SplitMix64& rng) {
        if (widths.size() < 2) throw ConfigError("FcnnT: need at least input and output widths");
        FcnnT net;
        net.hidden_act = hidden_act;
        for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
            auto W = TensorT<S>::zeros({widths[l], widths[l + 1]}, true);
            detail::init_scaled_normal(W, widths[l], rng);
            net.weights.push_back(W);
            net.biases.push_back(TensorT<S>::zeros({widths[l + 1]}, true));
        }
        return net;
    }

    TensorT<S> forward(const TensorT<S>& x) const {
        TensorT<S> h = x;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            h = add_bias(matmul(h, weights[l]), biases[l]);
            if (l + 1 < weights.size()) h = apply_activation(h, hidden_act);
        }
        return h;
    }

    std::int64_t in_width() const { return weights.front().shape()[0]; }
    std::int64_t out_width() const { return weights.back().shape()[1]; }

    void collect(ParamList<S>& out, const std::string& prefix) const {
        for (std::size_t l = 0; l < weights.size(); ++l) {
            out.push_back({prefix + ".l" + std::to_string(l) + ".W", weights[l], nullptr});
            out.push_back({prefix + ".l" + std::to_string(l) + ".b", biases[l], nullptr});
        }
    }
};

using Fcnn = FcnnT<float>;

}  // namespace lfld
