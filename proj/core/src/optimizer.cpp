#include "tcdiff/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace tcdiff {

void Adam::step(std::vector<ParamRef>& params, const TrainMask& mask) {
    if (m_.empty()) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const ParamRef& p : params) {
            m_.push_back(Tensor::zeros_like(*p.value));
            v_.push_back(Tensor::zeros_like(*p.value));
        }
    }
    if (m_.size() != params.size()) {
        throw std::invalid_argument("Adam::step: parameter set changed under the optimizer");
    }

    double norm_sq = 0.0;
    for (const ParamRef& p : params) {
        if (!mask.allows(p.group)) continue;
        const Tensor& g = *p.grad;
        for (size_t i = 0; i < g.size(); ++i) norm_sq += g[i] * g[i];
    }
    double scale = 1.0;
    if (opts_.clip_norm > 0.0) {
        const double norm = std::sqrt(norm_sq);
        if (norm > opts_.clip_norm) scale = opts_.clip_norm / norm;
    }

    ++t_;
    const double bc1 = 1.0 - std::pow(opts_.beta1, t_);
    const double bc2 = 1.0 - std::pow(opts_.beta2, t_);
    for (size_t pi = 0; pi < params.size(); ++pi) {
        if (!mask.allows(params[pi].group)) continue;
        Tensor& w = *params[pi].value;
        const Tensor& g = *params[pi].grad;
        Tensor& m = m_[pi];
        Tensor& v = v_[pi];
        for (size_t i = 0; i < w.size(); ++i) {
            const double gi = g[i] * scale;
            m[i] = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * gi;
            v[i] = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * gi * gi;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= opts_.lr * mhat / (std::sqrt(vhat) + opts_.eps);
        }
    }
}

}  // namespace tcdiff
