#ifndef TCDIFF_NN_HPP
#define TCDIFF_NN_HPP

#include <cstddef>

#include "tcdiff/rng.hpp"
#include "tcdiff/tensor.hpp"

namespace tcdiff {
namespace nn {

// Minimal layer set with explicit forward/backward. Layers own their weights
// and gradient accumulators; backward() takes the cached forward input and
// accumulates into the gradients (call zero_grad() between optimizer steps).
// All loops write disjoint outputs, so the OpenMP parallel regions leave
// results independent of thread count.

struct Conv2d {
    int in_ch = 0, out_ch = 0, ksize = 3, stride = 1;
    Tensor w, b;    // w flat (oc, ic, k, k); b (oc)
    Tensor gw, gb;

    Conv2d() = default;
    Conv2d(int in_ch, int out_ch, int ksize, int stride);

    void init_kaiming(Rng& rng);
    void init_zero();

    Tensor forward(const Tensor& x) const;
    // returns dx; accumulates gw, gb
    Tensor backward(const Tensor& x, const Tensor& dy);

    void zero_grad();
    size_t param_count() const { return w.size() + b.size(); }
    double& wat(int oc, int ic, int ky, int kx) {
        return w[((static_cast<size_t>(oc) * in_ch + ic) * ksize + ky) * ksize + kx];
    }
    double wat(int oc, int ic, int ky, int kx) const {
        return w[((static_cast<size_t>(oc) * in_ch + ic) * ksize + ky) * ksize + kx];
    }
};

struct Linear {
    int in_dim = 0, out_dim = 0;
    Tensor w, b;  // w (out, in); b (out)
    Tensor gw, gb;

    Linear() = default;
    Linear(int in_dim, int out_dim);

    void init_kaiming(Rng& rng);
    Tensor forward(const Tensor& x) const;
    Tensor backward(const Tensor& x, const Tensor& dy);
    void zero_grad();
    size_t param_count() const { return w.size() + b.size(); }
};

struct Embedding {
    int num = 0, dim = 0;
    Tensor table;  // (num, dim)
    Tensor gtable;

    Embedding() = default;
    Embedding(int num, int dim);

    void init_normal(Rng& rng, double std);
    Tensor forward(int id) const;
    void backward(int id, const Tensor& dy);
    void zero_grad();
    size_t param_count() const { return table.size(); }
};

// y = x * sigmoid(x), elementwise
Tensor silu(const Tensor& x);
// dx given the forward INPUT x
Tensor silu_backward(const Tensor& x, const Tensor& dy);

// broadcast-add a per-channel bias vector over (C,H,W)
void add_channel_bias(Tensor& fmap, const Tensor& bias);
// reduce a (C,H,W) gradient to a per-channel vector
Tensor channel_bias_backward(const Tensor& dfmap);

Tensor upsample_nearest2x(const Tensor& x);
Tensor upsample_nearest2x_backward(const Tensor& dy);

Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels_backward(const Tensor& dcat, Tensor& da, Tensor& db);

// transformer-style sinusoidal embedding of an integer timestep
Tensor sinusoidal_embedding(int t, int dim);

}  // namespace nn
}  // namespace tcdiff

#endif
