#ifndef TCDIFF_SCHEDULE_HPP
#define TCDIFF_SCHEDULE_HPP

#include <functional>
#include <vector>

#include "tcdiff/tensor.hpp"

namespace tcdiff {

// Forward-process variance schedule. Arrays are indexed by t-1 for t in
// [1, T]; alpha_bar(0) == 1 by convention so that step 0 is the clean image.
struct VarianceSchedule {
    int T = 0;
    std::vector<double> betas;       // beta_t
    std::vector<double> alphas;      // 1 - beta_t
    std::vector<double> alpha_bars;  // running product of alphas

    double beta(int t) const { return betas[static_cast<size_t>(t - 1)]; }
    double alpha(int t) const { return alphas[static_cast<size_t>(t - 1)]; }
    double alpha_bar(int t) const {
        return t == 0 ? 1.0 : alpha_bars[static_cast<size_t>(t - 1)];
    }
};

// An image-shaped value together with its diffusion timestep.
struct NoisyState {
    Tensor values;
    int timestep = 0;
};

// betas linearly spaced over [beta_start, beta_end], both endpoints included.
VarianceSchedule make_linear_schedule(int T, double beta_start, double beta_end);

// Closed-form jump to step t: x_t = sqrt(abar_t) x0 + sqrt(1-abar_t) eps.
// t == 0 returns x0 unchanged.
NoisyState forward_diffuse(const Tensor& x0, int t, const Tensor& eps,
                           const VarianceSchedule& schedule);

// eps-prediction objective: mean squared error between eps and the
// denoiser's prediction at the diffused state. The caller supplies eps drawn
// from a standard normal and t uniform in [1, T].
using EpsPredictor = std::function<Tensor(const NoisyState&)>;
double training_loss(const EpsPredictor& denoiser, const Tensor& x0, int t, const Tensor& eps,
                     const VarianceSchedule& schedule);

}  // namespace tcdiff

#endif
