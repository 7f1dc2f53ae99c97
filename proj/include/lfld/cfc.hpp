#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lfld/errors.hpp"
#include "lfld/nn.hpp"
#include "lfld/rng.hpp"
#include "lfld/tensor.hpp"
#include "lfld/wiring.hpp"

// Closed-form continuous-time (CfC) dynamics over the four-layer wiring.
//
// Each layer step is the gated update
//
//     y_next = sigma(-f(y) * dt) (.) g(y, I) + [1 - sigma(-f(y) * dt)] (.) h(y)
//
// with three independent heads (no shared trunk): f linear-out, g and h
// LeCun-tanh-out, every head one hidden LeCun-tanh layer wide as its
// destination. dt enters only through the gate, so there is no ODE solver
// anywhere in this path: one step costs one gate evaluation per layer no
// matter how large or small the gap is. The output of a step is an
// elementwise convex combination of two LeCun-tanh-bounded heads, hence
// |state| <= 1.7159 always.
//
// The command layer owns the recurrence: its feedforward input is the inter
// activation concatenated with the previous command activation, and when
// mixed memory is on, an LSTM cell driven by the same inter activation adds
// its hidden state to that recurrent context (the paper-recommended cure for
// vanishing gradients over long horizons; on by default).

namespace lfld {

namespace diag {
/// Gate evaluations performed by cfc_layer_step since the counter was reset.
/// Diagnostic for the "cost independent of dt" property; not thread-merged.
inline thread_local std::uint64_t cfc_gate_evals = 0;
}  // namespace diag

struct CfcOptions {
    bool mixed_memory = true;
};

namespace detail {

/// Indicator + polarity pair describing which entries of a stacked weight
/// matrix exist and what sign they start with (polarity 0 = free sign).
struct StackedMask {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<float> indicator;
    std::vector<float> polarity;

    static StackedMask from_blocks(const std::vector<const MaskMatrix*>& blocks,
                                   std::int64_t dense_rows);
    bool all_ones() const;
};

inline StackedMask StackedMask::from_blocks(const std::vector<const MaskMatrix*>& blocks,
                                            std::int64_t dense_rows) {
    StackedMask m;
    m.cols = blocks.front()->cols;
    for (const auto* b : blocks) {
        if (b->cols != m.cols) throw ShapeError("StackedMask: block column mismatch");
        m.rows += b->rows;
    }
    m.rows += dense_rows;
    m.indicator.reserve(std::size_t(m.rows * m.cols));
    m.polarity.reserve(std::size_t(m.rows * m.cols));
    for (const auto* b : blocks)
        for (float x : b->v) {
            m.indicator.push_back(x != 0.0f ? 1.0f : 0.0f);
            m.polarity.push_back(x);
        }
    for (std::int64_t i = 0; i < dense_rows * m.cols; ++i) {
        m.indicator.push_back(1.0f);
        m.polarity.push_back(0.0f);
    }
    return m;
}

inline bool StackedMask::all_ones() const {
    for (float x : indicator)
        if (x == 0.0f) return false;
    return true;
}

}  // namespace detail

template <typename S>
struct CfcHeadT {
    TensorT<S> W1;  // [in x dst], wiring-masked
    TensorT<S> b1;  // [dst]
    TensorT<S> w2;  // [1 x dst] per-neuron output gain
    TensorT<S> b2;  // [1 x dst]
    std::shared_ptr<const std::vector<float>> mask;  // indicator for W1; null = dense
    bool bounded = true;  // LeCun tanh on the output (g, h); false = linear (f)

    /// x: [1 x in] -> [1 x dst]
    TensorT<S> forward(const TensorT<S>& x) const {
        auto hidden = lecun_tanh(add_bias(matmul(x, W1), b1));
        auto out = add(mul(hidden, w2), b2);
        return bounded ? lecun_tanh(out) : out;
    }

    void collect(ParamList<S>& out, const std::string& prefix) const {
        out.push_back({prefix + ".W1", W1, mask});
        out.push_back({prefix + ".b1", b1, nullptr});
        out.push_back({prefix + ".w2", w2, nullptr});
        out.push_back({prefix + ".b2", b2, nullptr});
    }

    /// Weight draws are row-major over the full matrix regardless of the
    /// mask (absent entries consume-and-discard), so the random stream
    /// depends only on shapes. Wired entries start at polarity * |N(0, s_j)|
    /// with s_j = 1/sqrt(fan_in of column j); dense rows (the I-block of g
    /// heads) are unconstrained N(0, s_j).
    static CfcHeadT build(const detail::StackedMask& m, bool bounded, SplitMix64& rng) {
        CfcHeadT head;
        head.bounded = bounded;
        head.W1 = TensorT<S>::zeros({m.rows, m.cols}, true);
        head.b1 = TensorT<S>::zeros({m.cols}, true);
        head.w2 = TensorT<S>::zeros({1, m.cols}, true);
        head.b2 = TensorT<S>::zeros({1, m.cols}, true);
        for (std::size_t j = 0; j < std::size_t(m.cols); ++j) head.w2.data()[j] = S(1);

        std::vector<double> sigma(std::size_t(m.cols), 0.0);
        for (std::int64_t i = 0; i < m.rows; ++i)
            for (std::int64_t j = 0; j < m.cols; ++j)
                sigma[std::size_t(j)] += double(m.indicator[std::size_t(i * m.cols + j)]);
        for (auto& s : sigma) s = 1.0 / std::sqrt(std::max(1.0, s));

        for (std::int64_t i = 0; i < m.rows; ++i)
            for (std::int64_t j = 0; j < m.cols; ++j) {
                const double z = rng.normal();
                const std::size_t at = std::size_t(i * m.cols + j);
                if (m.indicator[at] == 0.0f) continue;
                const double scaled = z * sigma[std::size_t(j)];
                const float pol = m.polarity[at];
                head.W1.data()[at] = S(pol == 0.0f ? scaled : double(pol) * std::abs(scaled));
            }
        if (!m.all_ones())
            head.mask = std::make_shared<const std::vector<float>>(m.indicator);
        return head;
    }
};

/// One CfC layer: f/g/h heads over the same source activation, g additionally
/// seeing the raw input signals.
template <typename S>
struct CfcLayerT {
    CfcHeadT<S> f, g, h;

    TensorT<S> step(const TensorT<S>& y_src, const TensorT<S>& I_row, double dt) const {
        if (dt < 0)
            throw ContractError("cfc_layer_step: negative dt (" + std::to_string(dt) + ")");
        ++diag::cfc_gate_evals;
        auto f_out = f.forward(y_src);
        auto g_out = g.forward(concat_cols(y_src, I_row));
        auto h_out = h.forward(y_src);
        auto gate = sigmoid(affine(f_out, S(-dt), S(0)));
        return add(mul(gate, g_out), mul(affine(gate, S(-1), S(1)), h_out));
    }

    void collect(ParamList<S>& out, const std::string& prefix) const {
        f.collect(out, prefix + ".f");
        g.collect(out, prefix + ".g");
        h.collect(out, prefix + ".h");
    }
};

/// LSTM cell for the mixed-memory path. Gates are dense (the wiring
/// constrains the CfC heads, not the memory).
template <typename S>
struct LstmCellT {
    // gate order: input, forget, output, candidate
    std::vector<TensorT<S>> Wx, Uh, b;

    static LstmCellT build(std::int64_t x_dim, std::int64_t h_dim, SplitMix64& rng) {
        LstmCellT cell;
        for (int gate = 0; gate < 4; ++gate) {
            auto wx = TensorT<S>::zeros({x_dim, h_dim}, true);
            detail::init_scaled_normal(wx, x_dim, rng);
            cell.Wx.push_back(wx);
            auto uh = TensorT<S>::zeros({h_dim, h_dim}, true);
            detail::init_scaled_normal(uh, h_dim, rng);
            cell.Uh.push_back(uh);
            auto bias = TensorT<S>::zeros({h_dim}, true);
            if (gate == 1)  // forget gate opens the memory path at init
                for (std::size_t i = 0; i < bias.size(); ++i) bias.data()[i] = S(1);
            cell.b.push_back(bias);
        }
        return cell;
    }

    std::pair<TensorT<S>, TensorT<S>> step(const TensorT<S>& x, const TensorT<S>& h,
                                           const TensorT<S>& c) const {
        auto gate = [&](int idx, Act act) {
            return apply_activation(
                add_bias(add(matmul(x, Wx[std::size_t(idx)]), matmul(h, Uh[std::size_t(idx)])),
                         b[std::size_t(idx)]),
                act);
        };
        auto in_g = gate(0, Act::sigmoid);
        auto forget_g = gate(1, Act::sigmoid);
        auto out_g = gate(2, Act::sigmoid);
        auto cand = gate(3, Act::tanh);
        auto c_next = add(mul(forget_g, c), mul(in_g, cand));
        auto h_next = mul(out_g, tanh_t(c_next));  // |h| <= 1 by construction
        return {h_next, c_next};
    }

    void collect(ParamList<S>& out, const std::string& prefix) const {
        static constexpr const char* names[4] = {"i", "f", "o", "c"};
        for (int gate = 0; gate < 4; ++gate) {
            out.push_back({prefix + "." + names[gate] + ".Wx", Wx[std::size_t(gate)], nullptr});
            out.push_back({prefix + "." + names[gate] + ".Uh", Uh[std::size_t(gate)], nullptr});
            out.push_back({prefix + "." + names[gate] + ".b", b[std::size_t(gate)], nullptr});
        }
    }
};

template <typename S>
struct CfcNetT {
    WiringGraph wiring;
    CfcOptions options;
    CfcLayerT<S> sensory_inter;   // layer 0: input/sensory -> inter
    CfcLayerT<S> inter_command;   // layer 1: [inter | recurrent command ctx] -> command
    CfcLayerT<S> command_motor;   // layer 2: command -> motor
    LstmCellT<S> memory;          // used only when options.mixed_memory

    std::int64_t n_inputs() const { return wiring.split.sensory; }
    std::int64_t n_states() const { return wiring.split.motor; }

    /// Head init draw order is frozen: layer 0 f,g,h; layer 1 f,g,h; layer 2
    /// f,g,h; then the LSTM gates (drawn even when mixed memory is disabled,
    /// so toggling the flag does not reshuffle everything else).
    static CfcNetT build(const WiringGraph& wiring, const CfcOptions& opt, SplitMix64& rng) {
        const auto masks = adjacency_masks(wiring);
        const auto& sp = wiring.split;
        using detail::StackedMask;

        CfcNetT net;
        net.wiring = wiring;
        net.options = opt;

        const auto s2i = StackedMask::from_blocks({&masks.sensory_inter}, 0);
        const auto s2i_g = StackedMask::from_blocks({&masks.sensory_inter}, sp.sensory);
        net.sensory_inter.f = CfcHeadT<S>::build(s2i, false, rng);
        net.sensory_inter.g = CfcHeadT<S>::build(s2i_g, true, rng);
        net.sensory_inter.h = CfcHeadT<S>::build(s2i, true, rng);

        const auto ic = StackedMask::from_blocks({&masks.inter_command, &masks.command_command}, 0);
        const auto ic_g =
            StackedMask::from_blocks({&masks.inter_command, &masks.command_command}, sp.sensory);
        net.inter_command.f = CfcHeadT<S>::build(ic, false, rng);
        net.inter_command.g = CfcHeadT<S>::build(ic_g, true, rng);
        net.inter_command.h = CfcHeadT<S>::build(ic, true, rng);

        const auto cm = StackedMask::from_blocks({&masks.command_motor}, 0);
        const auto cm_g = StackedMask::from_blocks({&masks.command_motor}, sp.sensory);
        net.command_motor.f = CfcHeadT<S>::build(cm, false, rng);
        net.command_motor.g = CfcHeadT<S>::build(cm_g, true, rng);
        net.command_motor.h = CfcHeadT<S>::build(cm, true, rng);

        net.memory = LstmCellT<S>::build(sp.inter, sp.command, rng);
        return net;
    }

    /// I_series: row-major [T x n_inputs]; times: strictly increasing, first
    /// gap measured from t_start (default 0, where the zero initial state
    /// lives). The trajectory depends on times only through the gap sequence,
    /// so translating times and t_start together reproduces it bitwise.
    /// Returns the motor activations, [T x n_states].
    TensorT<S> sequence_forward(const std::vector<S>& I_series, const std::vector<double>& times,
                                double t_start = 0.0) const {
        const std::int64_t n_in = wiring.split.sensory;
        const std::size_t T = times.size();
        if (T == 0) throw ContractError("sequence_forward: empty time grid");
        if (I_series.size() != T * std::size_t(n_in))
            throw ShapeError("sequence_forward: " + std::to_string(I_series.size()) +
                             " input values for " + std::to_string(T) + " x " +
                             std::to_string(n_in) + " grid");
        double prev = t_start;
        for (std::size_t k = 1; k < T; ++k) {
            if (times[k] <= times[k - 1])
                throw ContractError("sequence_forward: times must be strictly increasing (t[" +
                                    std::to_string(k) + "])");
        }
        if (times[0] < t_start)
            throw ContractError("sequence_forward: first time precedes the sequence start");

        auto command_ctx = TensorT<S>::zeros({1, wiring.split.command});
        auto mem_h = TensorT<S>::zeros({1, wiring.split.command});
        auto mem_c = TensorT<S>::zeros({1, wiring.split.command});
        std::vector<TensorT<S>> out_rows;
        out_rows.reserve(T);

        for (std::size_t k = 0; k < T; ++k) {
            const double dt = times[k] - prev;
            prev = times[k];
            std::vector<S> slice(I_series.begin() + std::int64_t(k) * n_in,
                                 I_series.begin() + std::int64_t(k + 1) * n_in);
            auto I_row = TensorT<S>::row(std::move(slice));

            auto inter = sensory_inter.step(I_row, I_row, dt);
            auto ctx = command_ctx;
            if (options.mixed_memory) {
                auto [h_next, c_next] = memory.step(inter, mem_h, mem_c);
                mem_h = h_next;
                mem_c = c_next;
                ctx = add(command_ctx, mem_h);
            }
            auto command = inter_command.step(concat_cols(inter, ctx), I_row, dt);
            auto motor = command_motor.step(command, I_row, dt);
            command_ctx = command;
            out_rows.push_back(motor);
        }
        return vstack(out_rows);
    }

    void collect(ParamList<S>& out, const std::string& prefix) const {
        sensory_inter.collect(out, prefix + ".l0");
        inter_command.collect(out, prefix + ".l1");
        command_motor.collect(out, prefix + ".l2");
        if (options.mixed_memory) memory.collect(out, prefix + ".mem");
    }
};

using CfcNet = CfcNetT<float>;

}  // namespace lfld
