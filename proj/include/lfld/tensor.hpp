#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lfld/errors.hpp"
#include "lfld/kernels.hpp"

// Reverse-mode automatic differentiation on dense row-major tensors.
//
// The engine is a classic linear tape: every differentiable op appends one
// closure that, replayed in reverse, scatters the output gradient into the
// input gradients. There is no graph pruning and no operator fusion beyond
// what the op set itself provides — the model code is written so that almost
// all FLOPs land in matmul, whose kernels (kernels.hpp) carry the determinism
// contract. Gradient accumulation per buffer is plain ascending-index loops,
// so a whole training step is bitwise reproducible run to run.
//
// Everything is templated on the scalar type. Training runs float; the
// finite-difference gradient checks instantiate the same code with double.

namespace lfld {

using Shape = std::vector<std::int64_t>;

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ']';
    return os.str();
}

inline std::int64_t shape_numel(const Shape& s) {
    std::int64_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

// ---------------------------------------------------------------------------
// Activation kinds
// ---------------------------------------------------------------------------

enum class Act {
    lecun_tanh,  // 1.7159 * tanh(2x/3)
    gelu,        // exact erf form, x * Phi(x)
    sigmoid,
    tanh,
    exp,
    neg,
    softplus,
    cos,
    sin,
};

inline Act act_from_string(const std::string& name) {
    if (name == "lecun_tanh") return Act::lecun_tanh;
    if (name == "gelu") return Act::gelu;
    if (name == "sigmoid") return Act::sigmoid;
    if (name == "tanh") return Act::tanh;
    if (name == "exp") return Act::exp;
    if (name == "neg") return Act::neg;
    if (name == "softplus") return Act::softplus;
    if (name == "cos") return Act::cos;
    if (name == "sin") return Act::sin;
    throw ConfigError("unknown activation '" + name + "'");
}

inline const char* act_to_string(Act a) {
    switch (a) {
        case Act::lecun_tanh: return "lecun_tanh";
        case Act::gelu: return "gelu";
        case Act::sigmoid: return "sigmoid";
        case Act::tanh: return "tanh";
        case Act::exp: return "exp";
        case Act::neg: return "neg";
        case Act::softplus: return "softplus";
        case Act::cos: return "cos";
        case Act::sin: return "sin";
    }
    return "?";
}

namespace detail {

template <typename S>
inline S act_eval(Act a, S x) {
    switch (a) {
        case Act::lecun_tanh: return S(1.7159) * std::tanh(S(2.0 / 3.0) * x);
        case Act::gelu: {
            const S phi = S(0.5) * (S(1) + std::erf(x * S(std::numbers::sqrt2 / 2.0)));
            return x * phi;
        }
        case Act::sigmoid: return S(1) / (S(1) + std::exp(-x));
        case Act::tanh: return std::tanh(x);
        case Act::exp: return std::exp(x);
        case Act::neg: return -x;
        case Act::softplus:
            // log(1 + e^x), written to avoid overflow for large |x|
            return x > S(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
        case Act::cos: return std::cos(x);
        case Act::sin: return std::sin(x);
    }
    return S(0);
}

/// d/dx of act_eval, given both the input x and the already-computed output y.
template <typename S>
inline S act_grad(Act a, S x, S y) {
    switch (a) {
        case Act::lecun_tanh: {
            const S t = y / S(1.7159);  // tanh(2x/3)
            return S(1.7159) * S(2.0 / 3.0) * (S(1) - t * t);
        }
        case Act::gelu: {
            const S phi = S(0.5) * (S(1) + std::erf(x * S(std::numbers::sqrt2 / 2.0)));
            const S pdf = std::exp(S(-0.5) * x * x) * S(0.3989422804014327);  // 1/sqrt(2*pi)
            return phi + x * pdf;
        }
        case Act::sigmoid: return y * (S(1) - y);
        case Act::tanh: return S(1) - y * y;
        case Act::exp: return y;
        case Act::neg: return S(-1);
        case Act::softplus: return S(1) / (S(1) + std::exp(-x));
        case Act::cos: return -std::sin(x);
        case Act::sin: return std::cos(x);
    }
    return S(0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tensor and tape
// ---------------------------------------------------------------------------

template <typename S>
struct NodeT {
    std::vector<S> value;
    std::vector<S> grad;  // empty until first touched by backward / zero_grad
    Shape shape;
    bool requires_grad = false;

    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), S(0));
    }
};

template <typename S>
class TensorT {
public:
    TensorT() : n_(std::make_shared<NodeT<S>>()) {}

    static TensorT zeros(Shape shape, bool requires_grad = false) {
        TensorT t;
        t.n_->shape = std::move(shape);
        t.n_->value.assign(static_cast<std::size_t>(shape_numel(t.n_->shape)), S(0));
        t.n_->requires_grad = requires_grad;
        return t;
    }

    static TensorT from_data(std::vector<S> data, Shape shape, bool requires_grad = false) {
        if (static_cast<std::int64_t>(data.size()) != shape_numel(shape))
            throw ShapeError("from_data: " + std::to_string(data.size()) +
                             " values do not fill shape " + shape_str(shape));
        TensorT t;
        t.n_->shape = std::move(shape);
        t.n_->value = std::move(data);
        t.n_->requires_grad = requires_grad;
        return t;
    }

    static TensorT row(std::vector<S> data, bool requires_grad = false) {
        const std::int64_t n = static_cast<std::int64_t>(data.size());
        return from_data(std::move(data), Shape{1, n}, requires_grad);
    }

    static TensorT scalar(S v) { return from_data({v}, Shape{1}); }

    const Shape& shape() const { return n_->shape; }
    std::size_t size() const { return n_->value.size(); }
    std::size_t ndim() const { return n_->shape.size(); }

    std::int64_t rows() const {
        return n_->shape.empty() ? 0 : (n_->shape.size() == 1 ? 1 : n_->shape[0]);
    }
    std::int64_t cols() const {
        return n_->shape.empty() ? 0 : n_->shape.back();
    }

    S* data() { return n_->value.data(); }
    const S* data() const { return n_->value.data(); }
    std::vector<S>& values() { return n_->value; }
    const std::vector<S>& values() const { return n_->value; }

    S& at(std::int64_t i, std::int64_t j) { return n_->value[std::size_t(i * cols() + j)]; }
    S at(std::int64_t i, std::int64_t j) const { return n_->value[std::size_t(i * cols() + j)]; }

    S item() const {
        if (size() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
        return n_->value[0];
    }

    bool requires_grad() const { return n_->requires_grad; }
    TensorT& set_requires_grad(bool v) {
        n_->requires_grad = v;
        return *this;
    }

    /// Gradient buffer; allocates (zeroed) on first access.
    std::vector<S>& grad() {
        n_->ensure_grad();
        return n_->grad;
    }
    const std::vector<S>& grad() const {
        n_->ensure_grad();
        return n_->grad;
    }

    void zero_grad() {
        n_->grad.assign(n_->value.size(), S(0));
    }

    std::shared_ptr<NodeT<S>> node() const { return n_; }

private:
    std::shared_ptr<NodeT<S>> n_;
};

/// Linear operation tape. Constructing a tape makes it the active recorder on
/// this thread (restored on destruction), nanograd-style. Ops record onto the
/// active tape only when some input wants gradients, so plain inference code
/// that never opens a tape pays nothing.
template <typename S>
class TapeT {
public:
    TapeT() : prev_(active_ptr()) { active_ptr() = this; }
    ~TapeT() { active_ptr() = prev_; }
    TapeT(const TapeT&) = delete;
    TapeT& operator=(const TapeT&) = delete;

    static TapeT* active() { return active_ptr(); }

    void record(std::function<void()> back) { entries_.push_back(std::move(back)); }

    std::size_t size() const { return entries_.size(); }

    /// Reverse sweep from a scalar loss. One sweep per tape: a second call
    /// without reset() would silently double-count into leaf gradients, so it
    /// is rejected instead.
    void backward(const TensorT<S>& loss) {
        if (loss.size() != 1)
            throw ContractError("backward: loss must be a scalar, got shape " +
                                shape_str(loss.shape()));
        if (consumed_)
            throw StateError("backward: tape already consumed; call reset() to reuse it");
        consumed_ = true;
        loss.node()->ensure_grad();
        loss.node()->grad[0] += S(1);
        for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
    }

    void reset() {
        entries_.clear();
        consumed_ = false;
    }

private:
    static TapeT*& active_ptr() {
        thread_local TapeT* active = nullptr;
        return active;
    }

    std::vector<std::function<void()>> entries_;
    bool consumed_ = false;
    TapeT* prev_ = nullptr;
};

namespace detail {

template <typename S>
inline bool tracking(std::initializer_list<const TensorT<S>*> inputs) {
    if (TapeT<S>::active() == nullptr) return false;
    for (const auto* t : inputs)
        if (t->requires_grad()) return true;
    return false;
}

template <typename S>
inline void record(std::function<void()> back) {
    TapeT<S>::active()->record(std::move(back));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ops
// ---------------------------------------------------------------------------

/// C = A * B for A [m,k], B [k,n].
template <typename S>
TensorT<S> matmul(const TensorT<S>& a, const TensorT<S>& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.shape()[1] != b.shape()[0])
        throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
    const std::size_t m = std::size_t(a.shape()[0]);
    const std::size_t k = std::size_t(a.shape()[1]);
    const std::size_t n = std::size_t(b.shape()[1]);

    auto out = TensorT<S>::zeros({std::int64_t(m), std::int64_t(n)});
    detail::gemm_nn(a.data(), b.data(), out.data(), m, k, n);

    if (detail::tracking<S>({&a, &b})) {
        out.set_requires_grad(true);
        auto an = a.node(), bn = b.node(), on = out.node();
        detail::record<S>([an, bn, on, m, k, n] {
            on->ensure_grad();
            if (an->requires_grad) {
                an->ensure_grad();
                detail::gemm_nt(on->grad.data(), bn->value.data(), an->grad.data(), m, n, k);
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                detail::gemm_tn(an->value.data(), on->grad.data(), bn->grad.data(), m, k, n);
            }
        });
    }
    return out;
}

/// Out[j,i] = X[i,j].
template <typename S>
TensorT<S> transpose(const TensorT<S>& x) {
    if (x.ndim() != 2)
        throw ShapeError("transpose: need 2-D input, got " + shape_str(x.shape()));
    const std::size_t m = std::size_t(x.shape()[0]);
    const std::size_t n = std::size_t(x.shape()[1]);
    auto out = TensorT<S>::zeros({std::int64_t(n), std::int64_t(m)});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.data()[j * m + i] = x.data()[i * n + j];
    if (detail::tracking<S>({&x})) {
        out.set_requires_grad(true);
        auto xn = x.node(), on = out.node();
        detail::record<S>([xn, on, m, n] {
            if (!xn->requires_grad) return;
            on->ensure_grad();
            xn->ensure_grad();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) xn->grad[i * n + j] += on->grad[j * m + i];
        });
    }
    return out;
}

namespace detail {

template <typename S, typename FwdFn, typename BwdFn>
TensorT<S> binary_same_shape(const char* name, const TensorT<S>& a, const TensorT<S>& b,
                             FwdFn fwd, BwdFn bwd) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(name) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
    auto out = TensorT<S>::zeros(a.shape());
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = fwd(a.data()[i], b.data()[i]);

    if (tracking<S>({&a, &b})) {
        out.set_requires_grad(true);
        auto an = a.node(), bn = b.node(), on = out.node();
        record<S>([an, bn, on, n, bwd] {
            on->ensure_grad();
            if (an->requires_grad) an->ensure_grad();
            if (bn->requires_grad) bn->ensure_grad();
            for (std::size_t i = 0; i < n; ++i) {
                const S g = on->grad[i];
                S da, db;
                bwd(an->value[i], bn->value[i], g, da, db);
                if (an->requires_grad) an->grad[i] += da;
                if (bn->requires_grad) bn->grad[i] += db;
            }
        });
    }
    return out;
}

}  // namespace detail

template <typename S>
TensorT<S> add(const TensorT<S>& a, const TensorT<S>& b) {
    return detail::binary_same_shape<S>(
        "add", a, b, [](S x, S y) { return x + y; },
        [](S, S, S g, S& da, S& db) { da = g; db = g; });
}

template <typename S>
TensorT<S> sub(const TensorT<S>& a, const TensorT<S>& b) {
    return detail::binary_same_shape<S>(
        "sub", a, b, [](S x, S y) { return x - y; },
        [](S, S, S g, S& da, S& db) { da = g; db = -g; });
}

/// Elementwise product (Hadamard).
template <typename S>
TensorT<S> mul(const TensorT<S>& a, const TensorT<S>& b) {
    return detail::binary_same_shape<S>(
        "mul", a, b, [](S x, S y) { return x * y; },
        [](S x, S y, S g, S& da, S& db) { da = g * y; db = g * x; });
}

/// x [m,n] plus a bias row. This is the one sanctioned broadcast in the op
/// set: bias of shape [n] (or [1,n]) is added to every row. The bias gradient
/// is a column-sum reduced in ascending row order.
template <typename S>
TensorT<S> add_bias(const TensorT<S>& x, const TensorT<S>& bias) {
    if (x.ndim() != 2)
        throw ShapeError("add_bias: x must be 2-D, got " + shape_str(x.shape()));
    const std::size_t m = std::size_t(x.shape()[0]);
    const std::size_t n = std::size_t(x.shape()[1]);
    if (bias.size() != n)
        throw ShapeError("add_bias: bias " + shape_str(bias.shape()) + " does not match row width " +
                         std::to_string(n));
    auto out = TensorT<S>::zeros(x.shape());
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.data()[i * n + j] = x.data()[i * n + j] + bias.data()[j];

    if (detail::tracking<S>({&x, &bias})) {
        out.set_requires_grad(true);
        auto xn = x.node(), bn = bias.node(), on = out.node();
        detail::record<S>([xn, bn, on, m, n] {
            on->ensure_grad();
            if (xn->requires_grad) {
                xn->ensure_grad();
                for (std::size_t i = 0; i < m * n; ++i) xn->grad[i] += on->grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < n; ++j) bn->grad[j] += on->grad[i * n + j];
            }
        });
    }
    return out;
}

/// alpha * x + beta with compile-time-constant coefficients (covers negation,
/// scaling, and the 1-minus-gate construction without extra tensors).
template <typename S>
TensorT<S> affine(const TensorT<S>& x, S alpha, S beta) {
    auto out = TensorT<S>::zeros(x.shape());
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = alpha * x.data()[i] + beta;
    if (detail::tracking<S>({&x})) {
        out.set_requires_grad(true);
        auto xn = x.node(), on = out.node();
        detail::record<S>([xn, on, n, alpha] {
            on->ensure_grad();
            xn->ensure_grad();
            for (std::size_t i = 0; i < n; ++i) xn->grad[i] += alpha * on->grad[i];
        });
    }
    return out;
}

template <typename S>
TensorT<S> apply_activation(const TensorT<S>& x, Act act) {
    auto out = TensorT<S>::zeros(x.shape());
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = detail::act_eval<S>(act, x.data()[i]);
    if (detail::tracking<S>({&x})) {
        out.set_requires_grad(true);
        auto xn = x.node(), on = out.node();
        detail::record<S>([xn, on, n, act] {
            on->ensure_grad();
            xn->ensure_grad();
            for (std::size_t i = 0; i < n; ++i)
                xn->grad[i] += on->grad[i] * detail::act_grad<S>(act, xn->value[i], on->value[i]);
        });
    }
    return out;
}

template <typename S>
TensorT<S> lecun_tanh(const TensorT<S>& x) { return apply_activation(x, Act::lecun_tanh); }
template <typename S>
TensorT<S> gelu(const TensorT<S>& x) { return apply_activation(x, Act::gelu); }
template <typename S>
TensorT<S> sigmoid(const TensorT<S>& x) { return apply_activation(x, Act::sigmoid); }
template <typename S>
TensorT<S> tanh_t(const TensorT<S>& x) { return apply_activation(x, Act::tanh); }
template <typename S>
TensorT<S> softplus(const TensorT<S>& x) { return apply_activation(x, Act::softplus); }

/// Sum of all elements, as a scalar tensor. Ascending-index accumulation.
template <typename S>
TensorT<S> sum(const TensorT<S>& x) {
    S acc = S(0);
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) acc += x.data()[i];
    auto out = TensorT<S>::from_data({acc}, Shape{1});
    if (detail::tracking<S>({&x})) {
        out.set_requires_grad(true);
        auto xn = x.node(), on = out.node();
        detail::record<S>([xn, on, n] {
            on->ensure_grad();
            xn->ensure_grad();
            const S g = on->grad[0];
            for (std::size_t i = 0; i < n; ++i) xn->grad[i] += g;
        });
    }
    return out;
}

/// Mean squared error between a prediction and a (usually constant) target.
template <typename S>
TensorT<S> mse(const TensorT<S>& pred, const TensorT<S>& target) {
    if (pred.shape() != target.shape())
        throw ShapeError("mse: shape mismatch " + shape_str(pred.shape()) + " vs " +
                         shape_str(target.shape()));
    if (pred.size() == 0) throw ContractError("mse: empty tensors");
    auto d = sub(pred, target);
    auto sq = mul(d, d);
    return affine(sum(sq), S(1) / S(pred.size()), S(0));
}

/// [m,p] | [m,q] -> [m,p+q]
template <typename S>
TensorT<S> concat_cols(const TensorT<S>& a, const TensorT<S>& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.shape()[0] != b.shape()[0])
        throw ShapeError("concat_cols: row mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    const std::size_t m = std::size_t(a.shape()[0]);
    const std::size_t p = std::size_t(a.shape()[1]);
    const std::size_t q = std::size_t(b.shape()[1]);
    auto out = TensorT<S>::zeros({std::int64_t(m), std::int64_t(p + q)});
    for (std::size_t i = 0; i < m; ++i) {
        S* orow = out.data() + i * (p + q);
        const S* arow = a.data() + i * p;
        const S* brow = b.data() + i * q;
        for (std::size_t j = 0; j < p; ++j) orow[j] = arow[j];
        for (std::size_t j = 0; j < q; ++j) orow[p + j] = brow[j];
    }
    if (detail::tracking<S>({&a, &b})) {
        out.set_requires_grad(true);
        auto an = a.node(), bn = b.node(), on = out.node();
        detail::record<S>([an, bn, on, m, p, q] {
            on->ensure_grad();
            if (an->requires_grad) an->ensure_grad();
            if (bn->requires_grad) bn->ensure_grad();
            for (std::size_t i = 0; i < m; ++i) {
                const S* grow = on->grad.data() + i * (p + q);
                if (an->requires_grad)
                    for (std::size_t j = 0; j < p; ++j) an->grad[i * p + j] += grow[j];
                if (bn->requires_grad)
                    for (std::size_t j = 0; j < q; ++j) bn->grad[i * q + j] += grow[p + j];
            }
        });
    }
    return out;
}

/// Stack 2-D blocks with equal column counts on top of each other.
template <typename S>
TensorT<S> vstack(const std::vector<TensorT<S>>& parts) {
    if (parts.empty()) throw ContractError("vstack: no tensors given");
    const std::int64_t n = parts[0].cols();
    std::int64_t m = 0;
    for (const auto& t : parts) {
        if (t.ndim() != 2 || t.cols() != n)
            throw ShapeError("vstack: block " + shape_str(t.shape()) + " does not have " +
                             std::to_string(n) + " columns");
        m += t.shape()[0];
    }
    auto out = TensorT<S>::zeros({m, n});
    std::size_t off = 0;
    bool track = TapeT<S>::active() != nullptr;
    bool any_grad = false;
    for (const auto& t : parts) {
        for (std::size_t i = 0; i < t.size(); ++i) out.data()[off + i] = t.data()[i];
        off += t.size();
        any_grad = any_grad || t.requires_grad();
    }
    if (track && any_grad) {
        out.set_requires_grad(true);
        std::vector<std::shared_ptr<NodeT<S>>> nodes;
        nodes.reserve(parts.size());
        for (const auto& t : parts) nodes.push_back(t.node());
        auto on = out.node();
        detail::record<S>([nodes, on] {
            on->ensure_grad();
            std::size_t off2 = 0;
            for (auto& nd : nodes) {
                const std::size_t len = nd->value.size();
                if (nd->requires_grad) {
                    nd->ensure_grad();
                    for (std::size_t i = 0; i < len; ++i) nd->grad[i] += on->grad[off2 + i];
                }
                off2 += len;
            }
        });
    }
    return out;
}

/// Fused repeat-and-concat: rows of A [m,p] crossed with rows of B [n,q],
/// giving [m*n, p+q] where row (i*n + r) = [A_i | B_r]. This is how per-step
/// latent states are joined with per-point spatial features without
/// materializing m*n copies of either input in the graph.
template <typename S>
TensorT<S> kron_concat(const TensorT<S>& a, const TensorT<S>& b) {
    if (a.ndim() != 2 || b.ndim() != 2)
        throw ShapeError("kron_concat: need 2-D inputs, got " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
    const std::size_t m = std::size_t(a.shape()[0]);
    const std::size_t p = std::size_t(a.shape()[1]);
    const std::size_t n = std::size_t(b.shape()[0]);
    const std::size_t q = std::size_t(b.shape()[1]);
    auto out = TensorT<S>::zeros({std::int64_t(m * n), std::int64_t(p + q)});
    for (std::size_t i = 0; i < m; ++i) {
        const S* arow = a.data() + i * p;
        for (std::size_t r = 0; r < n; ++r) {
            S* orow = out.data() + (i * n + r) * (p + q);
            const S* brow = b.data() + r * q;
            for (std::size_t j = 0; j < p; ++j) orow[j] = arow[j];
            for (std::size_t j = 0; j < q; ++j) orow[p + j] = brow[j];
        }
    }
    if (detail::tracking<S>({&a, &b})) {
        out.set_requires_grad(true);
        auto an = a.node(), bn = b.node(), on = out.node();
        detail::record<S>([an, bn, on, m, p, n, q] {
            on->ensure_grad();
            if (an->requires_grad) {
                an->ensure_grad();
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t r = 0; r < n; ++r) {
                        const S* grow = on->grad.data() + (i * n + r) * (p + q);
                        for (std::size_t j = 0; j < p; ++j) an->grad[i * p + j] += grow[j];
                    }
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t r = 0; r < n; ++r) {
                        const S* grow = on->grad.data() + (i * n + r) * (p + q);
                        for (std::size_t j = 0; j < q; ++j) bn->grad[r * q + j] += grow[p + j];
                    }
            }
        });
    }
    return out;
}

/// Row-wise constraint: rows with keep[r] != 0 pass through; the others are
/// overwritten with `value` and act as constants — no gradient reaches x there.
template <typename S>
TensorT<S> mask_rows(const TensorT<S>& x, const std::vector<std::uint8_t>& keep, S value) {
    if (x.ndim() != 2)
        throw ShapeError("mask_rows: need 2-D input, got " + shape_str(x.shape()));
    const std::size_t m = std::size_t(x.shape()[0]);
    const std::size_t n = std::size_t(x.shape()[1]);
    if (keep.size() != m)
        throw ShapeError("mask_rows: mask has " + std::to_string(keep.size()) + " entries for " +
                         std::to_string(m) + " rows");
    auto out = TensorT<S>::zeros(x.shape());
    for (std::size_t i = 0; i < m; ++i) {
        S* orow = out.data() + i * n;
        const S* xrow = x.data() + i * n;
        if (keep[i])
            for (std::size_t j = 0; j < n; ++j) orow[j] = xrow[j];
        else
            for (std::size_t j = 0; j < n; ++j) orow[j] = value;
    }
    if (detail::tracking<S>({&x})) {
        out.set_requires_grad(true);
        auto xn = x.node(), on = out.node();
        detail::record<S>([xn, on, keep, m, n] {
            on->ensure_grad();
            xn->ensure_grad();
            for (std::size_t i = 0; i < m; ++i) {
                if (!keep[i]) continue;
                for (std::size_t j = 0; j < n; ++j)
                    xn->grad[i * n + j] += on->grad[i * n + j];
            }
        });
    }
    return out;
}

using Tensor = TensorT<float>;
using Tape = TapeT<float>;

}  // namespace lfld
