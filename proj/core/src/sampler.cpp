#include "tcdiff/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace tcdiff {

Tensor guided_eps(const Tensor& eps_uncond, const Tensor& eps_cond, double scale) {
    require_same_shape(eps_uncond, eps_cond, "guided_eps");
    Tensor out = eps_uncond;
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = eps_uncond[i] + scale * (eps_cond[i] - eps_uncond[i]);
    }
    return out;
}

std::optional<std::string> TemporalSamplerConfig::validate(int T) const {
    if (S < 1 || S > T) throw std::invalid_argument("sampler config: need 1 <= S <= T");
    if (tau < 1 || tau > S) throw std::invalid_argument("sampler config: need 1 <= tau <= S");
    if (w_c < 0.0 || w_p < 0.0 || w_n < 0.0) {
        throw std::invalid_argument("sampler config: blend weights must be >= 0");
    }
    if (guidance_scale < 0.0) throw std::invalid_argument("sampler config: guidance scale must be >= 0");
    if (strength < 0.0 || strength > 1.0) {
        throw std::invalid_argument("sampler config: control strength must be in [0,1]");
    }
    const double sum = w_c + w_p + w_n;
    if (std::fabs(sum - 1.0) > 0.25) {
        return "blend weights sum to " + std::to_string(sum) +
               ", more than 0.25 away from 1; output scale may drift";
    }
    return std::nullopt;
}

NoisyState ddpm_step(const NoisePredictor& predictor, const NoisyState& state,
                     const VarianceSchedule& schedule, const Tensor& noise) {
    const int t = state.timestep;
    if (t < 1 || t > schedule.T) {
        throw std::invalid_argument("ddpm_step: timestep " + std::to_string(t) +
                                    " outside [1, T]");
    }
    require_same_shape(state.values, noise, "ddpm_step noise");
    const Tensor eps = predictor(state.values, t);
    require_same_shape(state.values, eps, "ddpm_step eps prediction");

    const double beta = schedule.beta(t);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha(t));
    const double eps_coef = beta / std::sqrt(1.0 - schedule.alpha_bar(t));
    const double sigma = std::sqrt(beta);

    NoisyState out;
    out.timestep = t - 1;
    out.values = Tensor::zeros_like(state.values);
    for (size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = inv_sqrt_alpha * (state.values[i] - eps_coef * eps[i]) + sigma * noise[i];
    }
    return out;
}

NoisyState ddim_step(const NoisePredictor& predictor, const NoisyState& state, int next_t,
                     const VarianceSchedule& schedule) {
    const int t = state.timestep;
    if (t < 1 || t > schedule.T) {
        throw std::invalid_argument("ddim_step: timestep " + std::to_string(t) + " outside [1, T]");
    }
    if (next_t >= t || next_t < 0) {
        throw std::invalid_argument("ddim_step: next timestep " + std::to_string(next_t) +
                                    " must be in [0, " + std::to_string(t) + ")");
    }
    const Tensor eps = predictor(state.values, t);
    require_same_shape(state.values, eps, "ddim_step eps prediction");

    const double ab_t = schedule.alpha_bar(t);
    const double ab_n = schedule.alpha_bar(next_t);
    const double inv_sqrt_ab_t = 1.0 / std::sqrt(ab_t);
    const double sq_1m_ab_t = std::sqrt(1.0 - ab_t);
    const double sq_ab_n = std::sqrt(ab_n);
    const double sq_1m_ab_n = std::sqrt(1.0 - ab_n);

    NoisyState out;
    out.timestep = next_t;
    out.values = Tensor::zeros_like(state.values);
    for (size_t i = 0; i < out.values.size(); ++i) {
        const double x0_hat = (state.values[i] - sq_1m_ab_t * eps[i]) * inv_sqrt_ab_t;
        out.values[i] = sq_ab_n * x0_hat + sq_1m_ab_n * eps[i];
    }
    return out;
}

std::vector<int> ddim_timestep_plan(int T, int S) {
    if (S < 1 || S > T) throw std::invalid_argument("ddim_timestep_plan: need 1 <= S <= T");
    std::vector<int> plan(static_cast<size_t>(S));
    for (int i = 0; i < S; ++i) {
        // uniform stride from T down; entry i is the timestep before update i+1
        plan[static_cast<size_t>(i)] =
            T - static_cast<int>((static_cast<int64_t>(i) * T) / S);
    }
    return plan;
}

NoisyState temporal_blend(const NoisyState& current, const FramePrediction& previous,
                          const TemporalSamplerConfig& config, const Tensor& noise) {
    require_same_shape(current.values, previous.final_state, "temporal_blend previous");
    require_same_shape(current.values, noise, "temporal_blend noise");
    NoisyState out;
    out.timestep = current.timestep;
    out.values = Tensor::zeros_like(current.values);
    // accumulate only nonzero-weight terms so degenerate weights reproduce
    // their input bit-for-bit
    for (size_t i = 0; i < out.values.size(); ++i) {
        double v = 0.0;
        if (config.w_c != 0.0) v += config.w_c * current.values[i];
        if (config.w_p != 0.0) v += config.w_p * previous.final_state[i];
        if (config.w_n != 0.0) v += config.w_n * noise[i];
        out.values[i] = v;
    }
    return out;
}

FramePrediction sample_frame(const NoisePredictor& predictor, const TemporalSamplerConfig& config,
                             const VarianceSchedule& schedule, const Tensor& init_noise,
                             const FramePrediction* previous, const Tensor& blend_noise,
                             int frame_index, const StepObserver* observer) {
    const std::vector<int> plan = ddim_timestep_plan(schedule.T, config.S);
    NoisyState state{init_noise, plan[0]};
    for (int step = 1; step <= config.S; ++step) {
        state.timestep = plan[static_cast<size_t>(step - 1)];
        if (step == config.tau && previous != nullptr) {
            state = temporal_blend(state, *previous, config, blend_noise);
        }
        if (observer != nullptr) (*observer)(step, state);
        const int next_t = (step == config.S) ? 0 : plan[static_cast<size_t>(step)];
        state = ddim_step(predictor, state, next_t, schedule);
    }
    return FramePrediction{state.values, frame_index};
}

std::vector<FramePrediction> generate_sequence(const FramePredictorFactory& predictor_for_frame,
                                               int num_frames, const std::vector<int>& shape,
                                               const TemporalSamplerConfig& config,
                                               const VarianceSchedule& schedule,
                                               const StepObserver* observer) {
    if (num_frames < 1) throw std::invalid_argument("generate_sequence: empty control sequence");
    if (auto warning = config.validate(schedule.T)) {
        std::fprintf(stderr, "warning: %s\n", warning->c_str());
    }

    Rng init_rng = Rng::derive(config.seed, 0);
    const Tensor init_noise = init_rng.normal_tensor(shape);

    std::vector<FramePrediction> frames;
    frames.reserve(static_cast<size_t>(num_frames));
    for (int n = 0; n < num_frames; ++n) {
        Tensor blend_noise = init_noise;
        if (config.fresh_blend_noise && n > 0 && config.w_n != 0.0) {
            Rng frame_rng = Rng::derive(config.seed, 1000 + static_cast<uint64_t>(n));
            blend_noise = frame_rng.normal_tensor(shape);
        }
        const NoisePredictor predictor = predictor_for_frame(n);
        const FramePrediction* prev = (n == 0) ? nullptr : &frames.back();
        frames.push_back(sample_frame(predictor, config, schedule, init_noise, prev, blend_noise,
                                      n, observer));
    }
    return frames;
}

}  // namespace tcdiff
