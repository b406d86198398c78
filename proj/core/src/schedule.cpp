#include "tcdiff/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tcdiff {

VarianceSchedule make_linear_schedule(int T, double beta_start, double beta_end) {
    if (T < 1) throw std::invalid_argument("make_linear_schedule: T must be >= 1");
    if (!(beta_start > 0.0) || !(beta_end < 1.0) || beta_start > beta_end) {
        throw std::invalid_argument(
            "make_linear_schedule: need 0 < beta_start <= beta_end < 1, got [" +
            std::to_string(beta_start) + ", " + std::to_string(beta_end) + "]");
    }
    VarianceSchedule s;
    s.T = T;
    s.betas.resize(static_cast<size_t>(T));
    s.alphas.resize(static_cast<size_t>(T));
    s.alpha_bars.resize(static_cast<size_t>(T));
    double prod = 1.0;
    for (int i = 0; i < T; ++i) {
        double beta = (T == 1) ? beta_start
                               : beta_start + (beta_end - beta_start) * static_cast<double>(i) /
                                                  static_cast<double>(T - 1);
        s.betas[static_cast<size_t>(i)] = beta;
        s.alphas[static_cast<size_t>(i)] = 1.0 - beta;
        prod *= 1.0 - beta;
        s.alpha_bars[static_cast<size_t>(i)] = prod;
    }
    return s;
}

NoisyState forward_diffuse(const Tensor& x0, int t, const Tensor& eps,
                           const VarianceSchedule& schedule) {
    require_same_shape(x0, eps, "forward_diffuse");
    if (t < 0 || t > schedule.T) {
        throw std::invalid_argument("forward_diffuse: timestep " + std::to_string(t) +
                                    " outside [0, " + std::to_string(schedule.T) + "]");
    }
    NoisyState out;
    out.timestep = t;
    if (t == 0) {
        out.values = x0;
        return out;
    }
    const double ab = schedule.alpha_bar(t);
    const double ca = std::sqrt(ab);
    const double ce = std::sqrt(1.0 - ab);
    out.values = Tensor::zeros_like(x0);
    for (size_t i = 0; i < x0.size(); ++i) {
        out.values[i] = ca * x0[i] + ce * eps[i];
    }
    return out;
}

double training_loss(const EpsPredictor& denoiser, const Tensor& x0, int t, const Tensor& eps,
                     const VarianceSchedule& schedule) {
    NoisyState xt = forward_diffuse(x0, t, eps, schedule);
    Tensor pred = denoiser(xt);
    require_same_shape(pred, eps, "training_loss: denoiser output");
    return mean_sq_diff(pred, eps);
}

}  // namespace tcdiff
