#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lfld/errors.hpp"
#include "lfld/nn.hpp"
#include "lfld/rng.hpp"
#include "lfld/tensor.hpp"

// The ODE side of the dynamics module: the liquid time-constant right-hand
// side, the plain neural-ODE baseline advanced by forward Euler, and the
// approximate closed-form solution used as a diagnostic only.

namespace lfld {

namespace diag {
/// Right-hand-side evaluations by neural_ode_forward since last reset. The
/// counterpart to cfc_gate_evals: this one scales with substeps.
inline thread_local std::uint64_t ode_rhs_evals = 0;
}  // namespace diag

/// Liquid time-constant parameters:
///   dy/dt = -w_tau (.) y + N(y, I) (.) (A - y)
/// w_tau is kept positive by softplus over a raw parameter. The inner network
/// N consumes [y | I]; the step time t is accepted by the evaluators for
/// signature compatibility but the default inner structure does not use it.
template <typename S>
struct LtcParamsT {
    TensorT<S> raw_wtau;  // [1 x n]; w_tau = softplus(raw_wtau)
    TensorT<S> A;         // [1 x n]
    FcnnT<S> inner;       // [n + n_inputs] -> n, tanh hidden, linear out

    static LtcParamsT build(std::int64_t n, std::int64_t n_inputs,
                            const std::vector<std::int64_t>& hidden, SplitMix64& rng) {
        LtcParamsT p;
        p.raw_wtau = TensorT<S>::zeros({1, n}, true);
        // softplus(0.5413...) = 1: start at unit time constants
        const S raw_one = S(std::log(std::exp(1.0) - 1.0));
        for (std::size_t i = 0; i < p.raw_wtau.size(); ++i) p.raw_wtau.data()[i] = raw_one;
        p.A = TensorT<S>::zeros({1, n}, true);
        std::vector<std::int64_t> widths{n + n_inputs};
        widths.insert(widths.end(), hidden.begin(), hidden.end());
        widths.push_back(n);
        p.inner = FcnnT<S>::build(widths, Act::tanh, rng);
        return p;
    }

    TensorT<S> time_constants() const { return softplus(raw_wtau); }

    /// Sets w_tau exactly by inverting the softplus (values must be > 0).
    void set_time_constants(const std::vector<double>& w) {
        if (w.size() != raw_wtau.size())
            throw ShapeError("set_time_constants: " + std::to_string(w.size()) + " values for " +
                             std::to_string(raw_wtau.size()) + " neurons");
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] <= 0) throw ContractError("set_time_constants: time constants must be > 0");
            raw_wtau.data()[i] = S(std::log(std::expm1(w[i])));
        }
    }

    void collect(ParamList<S>& out, const std::string& prefix) const {
        out.push_back({prefix + ".raw_wtau", raw_wtau, nullptr});
        out.push_back({prefix + ".A", A, nullptr});
        inner.collect(out, prefix + ".inner");
    }
};

/// dy/dt for the liquid ODE. y, I are [1 x n], [1 x n_inputs] rows.
template <typename S>
TensorT<S> ltc_rhs(const LtcParamsT<S>& p, const TensorT<S>& y, const TensorT<S>& I,
                   double /*t*/ = 0.0) {
    auto w = softplus(p.raw_wtau);
    auto inner_out = p.inner.forward(concat_cols(y, I));
    auto leak = affine(mul(w, y), S(-1), S(0));
    return add(leak, mul(inner_out, sub(p.A, y)));
}

/// Approximate closed-form trajectory point for constant input, used as a
/// diagnostic. The formula nominally references y(t) inside its own
/// right-hand side; here it is frozen at y0 throughout:
///   y(t) = (y0 - A) (.) exp(-[w_tau + N(y0, I)] t) (.) N(-y0, -I) + A
template <typename S>
TensorT<S> cfc_closed_form_reference(const LtcParamsT<S>& p, const TensorT<S>& y0,
                                     const TensorT<S>& I, double t) {
    if (t < 0) throw ContractError("cfc_closed_form_reference: t must be >= 0");
    auto rate = add(softplus(p.raw_wtau), p.inner.forward(concat_cols(y0, I)));
    auto decay = apply_activation(affine(rate, S(-t), S(0)), Act::exp);
    auto neg_branch =
        p.inner.forward(concat_cols(affine(y0, S(-1), S(0)), affine(I, S(-1), S(0))));
    return add(mul(mul(sub(y0, p.A), decay), neg_branch), p.A);
}

/// Forward-Euler trajectory of dy/dt = N(y, I) with zero-order-held inputs.
/// Each inter-sample gap is subdivided into `substeps` equal Euler steps; the
/// state doubles as the output (the no-extra-reconstruction baseline
/// dynamics). y0 empty means the zero start shared by all architectures.
template <typename S>
TensorT<S> neural_ode_forward(const FcnnT<S>& rhs_net, const std::vector<S>& I_series,
                              std::int64_t n_inputs, const std::vector<double>& times,
                              std::int64_t substeps, std::vector<S> y0 = {},
                              double t_start = 0.0) {
    if (substeps < 1) throw ContractError("neural_ode_forward: substeps must be >= 1");
    const std::size_t T = times.size();
    if (T == 0) throw ContractError("neural_ode_forward: empty time grid");
    if (I_series.size() != T * std::size_t(n_inputs))
        throw ShapeError("neural_ode_forward: input grid size mismatch");
    for (std::size_t k = 1; k < T; ++k)
        if (times[k] <= times[k - 1])
            throw ContractError("neural_ode_forward: times must be strictly increasing");
    if (times[0] < t_start)
        throw ContractError("neural_ode_forward: first time precedes the sequence start");

    const std::int64_t n = rhs_net.out_width();
    if (rhs_net.in_width() != n + n_inputs)
        throw ShapeError("neural_ode_forward: rhs network expects " +
                         std::to_string(rhs_net.in_width()) + " inputs, got state " +
                         std::to_string(n) + " + signals " + std::to_string(n_inputs));
    TensorT<S> y;
    if (y0.empty()) {
        y = TensorT<S>::zeros({1, n});
    } else {
        if (std::int64_t(y0.size()) != n)
            throw ShapeError("neural_ode_forward: y0 size mismatch");
        y = TensorT<S>::row(std::move(y0));
    }

    std::vector<TensorT<S>> rows;
    rows.reserve(T);
    double prev = t_start;
    for (std::size_t k = 0; k < T; ++k) {
        const double dt = times[k] - prev;
        prev = times[k];
        std::vector<S> slice(I_series.begin() + std::int64_t(k) * n_inputs,
                             I_series.begin() + std::int64_t(k + 1) * n_inputs);
        auto I_row = TensorT<S>::row(std::move(slice));
        const S h = S(dt / double(substeps));
        for (std::int64_t s = 0; s < substeps; ++s) {
            ++diag::ode_rhs_evals;
            auto rhs = rhs_net.forward(concat_cols(y, I_row));
            y = add(y, affine(rhs, h, S(0)));
        }
        rows.push_back(y);
    }
    return vstack(rows);
}

}  // namespace lfld
