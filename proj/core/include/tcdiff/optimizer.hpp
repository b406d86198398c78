#ifndef TCDIFF_OPTIMIZER_HPP
#define TCDIFF_OPTIMIZER_HPP

#include <vector>

#include "tcdiff/denoiser.hpp"

namespace tcdiff {

// Adam with global-norm gradient clipping. Moment buffers are keyed by the
// parameter registration order, which is fixed for a given architecture.
class Adam {
public:
    struct Options {
        double lr = 1e-4;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
        double clip_norm = 1.0;  // <= 0 disables clipping
    };

    explicit Adam(Options opts = {}) : opts_(opts) {}

    const Options& options() const { return opts_; }
    void set_lr(double lr) { opts_.lr = lr; }

    // applies one update to every parameter whose group the mask allows;
    // gradients of masked groups are left untouched and not stepped
    void step(std::vector<ParamRef>& params, const TrainMask& mask);

private:
    Options opts_;
    int t_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace tcdiff

#endif
