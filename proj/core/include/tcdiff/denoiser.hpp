#ifndef TCDIFF_DENOISER_HPP
#define TCDIFF_DENOISER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tcdiff/conditioning.hpp"
#include "tcdiff/nn.hpp"
#include "tcdiff/schedule.hpp"
#include "tcdiff/tensor.hpp"

namespace tcdiff {

// Two-level convolutional encoder-decoder with skip connections, sinusoidal
// timestep embedding and a learned style-token embedding injected as
// per-channel biases at each level. The optional control branch duplicates
// the encoder (ControlNet-style): it is initialized as a copy of the base
// encoder, receives the hint-encoded conditioning image, and feeds back into
// the base trunk through zero-initialized 1x1 connectors at three blend
// points (both levels plus the bottleneck), scaled by the control strength.
struct DenoiserConfig {
    int img_channels = 3;
    int base_width = 32;
    int emb_dim = 32;
    int num_tokens = 8;       // token 0 is the null/unconditional token
    int control_channels = 0; // 0 = no control branch

    bool operator==(const DenoiserConfig&) const = default;
};

enum class ParamGroup { base, control, connector };

struct ParamRef {
    std::string name;
    ParamGroup group;
    Tensor* value;
    Tensor* grad;
};

enum class TrainMode { unlocked, locked };

struct TrainMask {
    bool base = true;
    bool control = true;
    bool connector = true;

    bool allows(ParamGroup g) const {
        switch (g) {
            case ParamGroup::base: return base;
            case ParamGroup::control: return control;
            case ParamGroup::connector: return connector;
        }
        return true;
    }
};

// unlocked: all groups trainable; locked: base frozen
TrainMask set_train_mode(TrainMode mode);

class DenoiserNet {
public:
    DenoiserNet() = default;
    DenoiserNet(const DenoiserConfig& cfg, uint64_t seed);

    // ControlNet-style duplication: control encoder weights start as a copy
    // of the (possibly pretrained) base encoder, hint encoder fresh, all
    // connectors exactly zero.
    void attach_control(int control_channels, uint64_t seed);
    bool has_control() const { return cfg_.control_channels > 0; }
    const DenoiserConfig& config() const { return cfg_; }

    // Cached activations of one forward pass, consumed by backward().
    struct Workspace;

    Tensor predict_noise(const NoisyState& state, int token_id, const ControlStack* control,
                         double strength) const;
    Tensor forward(Workspace& ws, const NoisyState& state, int token_id,
                   const ControlStack* control, double strength) const;
    // accumulates parameter gradients for the pass recorded in ws
    void backward(const Workspace& ws, const Tensor& d_out);

    // hint-encoder output consumed by the control branch input
    Tensor encode_control(const ControlStack& control) const;
    std::vector<int> control_feature_shape(int height, int width) const;

    std::vector<ParamRef> params();
    std::vector<ParamRef> params() const;  // const values, null grads
    void zero_grad();
    size_t param_count(ParamGroup group) const;
    // encoder portion duplicated into the control branch
    size_t duplicated_base_param_count() const;
    size_t duplicated_control_param_count() const;

private:
    void register_params();
    Tensor embed(Workspace& ws, int t, int token_id) const;

    DenoiserConfig cfg_;

    // base group
    nn::Embedding token_table_;
    nn::Linear time_fc_;
    nn::Conv2d in_conv_, down_conv_, mid_conv_, up_conv_, skip_conv_, out_conv_;
    nn::Linear proj_in_, proj_down_, proj_mid_;

    // control group
    nn::Conv2d hint1_, hint2_, hint3_;
    nn::Conv2d in_conv_c_, down_conv_c_, mid_conv_c_;
    nn::Linear proj_in_c_, proj_down_c_, proj_mid_c_;

    // connector group (zero-initialized 1x1)
    nn::Conv2d zc1_, zc2_, zcb_;

    std::vector<ParamRef> param_refs_;
};

struct DenoiserNet::Workspace {
    // embedding path
    Tensor sin_emb, t_pre, emb;
    int token_id = 0;
    int timestep = 0;
    double strength = 0.0;
    bool used_control = false;

    // base trunk pre-activations and blend results
    Tensor x, z1, f1, b1, z2, f2, b2, zb, fb, bb, u, zu, d1, m, zs, d2;

    // control branch
    Tensor hint_in, hz1, ha1, hz2, ha2, hz3, hint;
    Tensor cz1, g1, cz2, g2, czb, gb;
};

}  // namespace tcdiff

#endif
