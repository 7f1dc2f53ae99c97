#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lfld/errors.hpp"
#include "lfld/nn.hpp"

// Adam with bias correction over a ParamList. The parameter list order is the
// reduction order, fixed for bitwise reproducibility. Wiring masks are
// re-applied after every step: masked entries contribute no moment updates and
// are forced back to exactly 0.0f, so structurally absent weights can never
// drift into existence.

namespace lfld {

template <typename S>
class AdamT {
public:
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamT(double lr_ = 3e-4) : lr(lr_) {}

    std::int64_t step_count() const { return step_; }

    /// One update over every parameter, in list order. Parameters whose
    /// gradient buffer was never touched this step count as zero gradient.
    void step(ParamList<S>& params) {
        if (m_.empty()) {
            m_.resize(params.size());
            v_.resize(params.size());
            for (std::size_t p = 0; p < params.size(); ++p) {
                m_[p].assign(params[p].tensor.size(), 0.0);
                v_[p].assign(params[p].tensor.size(), 0.0);
            }
        }
        if (m_.size() != params.size())
            throw ContractError("AdamT: parameter list changed size (" +
                                std::to_string(params.size()) + " blocks, state has " +
                                std::to_string(m_.size()) + ")");
        ++step_;
        const double bc1 = 1.0 - std::pow(beta1, double(step_));
        const double bc2 = 1.0 - std::pow(beta2, double(step_));
        for (std::size_t p = 0; p < params.size(); ++p) {
            auto& ref = params[p];
            const std::size_t n = ref.tensor.size();
            if (m_[p].size() != n)
                throw ContractError("AdamT: parameter block '" + ref.name + "' changed size");
            S* theta = ref.tensor.data();
            const std::vector<S>& grad = ref.tensor.grad();
            const float* mask = ref.mask ? ref.mask->data() : nullptr;
            for (std::size_t i = 0; i < n; ++i) {
                double g = double(grad[i]);
                if (!std::isfinite(g))
                    throw DivergenceError("non-finite gradient in parameter block '" + ref.name +
                                          "' (entry " + std::to_string(i) + ")");
                if (mask && mask[i] == 0.0f) {
                    theta[i] = S(0);
                    continue;
                }
                m_[p][i] = beta1 * m_[p][i] + (1.0 - beta1) * g;
                v_[p][i] = beta2 * v_[p][i] + (1.0 - beta2) * g * g;
                const double mhat = m_[p][i] / bc1;
                const double vhat = v_[p][i] / bc2;
                theta[i] = S(double(theta[i]) - lr * mhat / (std::sqrt(vhat) + eps));
            }
        }
    }

    void zero_grad(ParamList<S>& params) const {
        for (auto& p : params) p.tensor.zero_grad();
    }

private:
    std::int64_t step_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

using Adam = AdamT<float>;

}  // namespace lfld
