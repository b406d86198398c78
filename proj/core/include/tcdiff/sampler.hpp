#ifndef TCDIFF_SAMPLER_HPP
#define TCDIFF_SAMPLER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tcdiff/rng.hpp"
#include "tcdiff/schedule.hpp"
#include "tcdiff/tensor.hpp"

namespace tcdiff {

// Anything that maps (x_t, t) to an eps prediction. The network, the guided
// combination of two network passes, and the analytic test oracles all fit
// behind this signature.
using NoisePredictor = std::function<Tensor(const Tensor& x, int t)>;

// classifier-free guidance: eps_uncond + scale * (eps_cond - eps_uncond)
Tensor guided_eps(const Tensor& eps_uncond, const Tensor& eps_cond, double scale);

// Fully denoised result for one frame.
struct FramePrediction {
    Tensor final_state;  // x_0 of that frame (codec space)
    int frame_index = 0;
};

struct TemporalSamplerConfig {
    int S = 30;                      // DDIM step count
    int tau = 23;                    // blend step index, counted from the noisiest step
    double w_c = 1.0;                // current-frame weight
    double w_p = 0.0;                // previous-frame weight
    double w_n = 0.0;                // noise weight
    double guidance_scale = 1.0;     // 1 = plain conditional pass
    double strength = 1.0;           // control strength
    uint64_t seed = 0;
    bool fresh_blend_noise = true;   // per-frame blend noise from (seed, frame)

    // throws on hard violations; returns a warning string when the weights
    // drift more than 0.25 from summing to 1 (not an error)
    std::optional<std::string> validate(int T) const;
};

// one reverse step t -> t-1 with posterior mean from the eps prediction and
// fixed variance beta_t; `noise` is the injected z (pass zeros for the final
// step or deterministic tests)
NoisyState ddpm_step(const NoisePredictor& predictor, const NoisyState& state,
                     const VarianceSchedule& schedule, const Tensor& noise);

// deterministic (eta = 0) DDIM update t -> next_t
NoisyState ddim_step(const NoisePredictor& predictor, const NoisyState& state, int next_t,
                     const VarianceSchedule& schedule);

// descending timestep plan; plan[0] = T, each of the S entries is the state
// timestep before update i+1, the final update lands on t=0
std::vector<int> ddim_timestep_plan(int T, int S);

// Eq-style spatio-temporal blend: w_c*current + w_p*previous + w_n*noise.
// Zero-weight terms are skipped so degenerate configs are bit-exact.
NoisyState temporal_blend(const NoisyState& current, const FramePrediction& previous,
                          const TemporalSamplerConfig& config, const Tensor& noise);

// observation hook for instrumenting trajectories (step index is 1-based,
// state is the value before that step's update)
using StepObserver = std::function<void(int step_index, const NoisyState& state)>;

// Runs S DDIM steps from init_noise. When `previous` is present the blend is
// applied exactly once, to the state arriving at step index tau; the first
// frame of a sequence passes previous = nullptr and skips it.
FramePrediction sample_frame(const NoisePredictor& predictor, const TemporalSamplerConfig& config,
                             const VarianceSchedule& schedule, const Tensor& init_noise,
                             const FramePrediction* previous, const Tensor& blend_noise,
                             int frame_index, const StepObserver* observer = nullptr);

// Per-frame predictors (controls differ per frame).
using FramePredictorFactory = std::function<NoisePredictor(int frame_index)>;

// Shared init noise drawn once from config.seed and reused for every frame;
// frames are produced strictly in order, each fed the previous prediction.
std::vector<FramePrediction> generate_sequence(const FramePredictorFactory& predictor_for_frame,
                                               int num_frames, const std::vector<int>& shape,
                                               const TemporalSamplerConfig& config,
                                               const VarianceSchedule& schedule,
                                               const StepObserver* observer = nullptr);

}  // namespace tcdiff

#endif
