#include "tcdiff/denoiser.hpp"

#include <stdexcept>
#include <string>

namespace tcdiff {

using nn::add_channel_bias;
using nn::channel_bias_backward;
using nn::concat_channels;
using nn::silu;
using nn::silu_backward;
using nn::sinusoidal_embedding;
using nn::split_channels_backward;
using nn::upsample_nearest2x;
using nn::upsample_nearest2x_backward;

TrainMask set_train_mode(TrainMode mode) {
    TrainMask mask;
    if (mode == TrainMode::locked) mask.base = false;
    return mask;
}

DenoiserNet::DenoiserNet(const DenoiserConfig& cfg, uint64_t seed) {
    DenoiserConfig base_cfg = cfg;
    const int control_channels = cfg.control_channels;
    base_cfg.control_channels = 0;
    cfg_ = base_cfg;

    const int w0 = cfg_.base_width;
    const int w1 = 2 * w0;
    const int e = cfg_.emb_dim;

    token_table_ = nn::Embedding(cfg_.num_tokens, e);
    time_fc_ = nn::Linear(e, e);
    in_conv_ = nn::Conv2d(cfg_.img_channels, w0, 3, 1);
    down_conv_ = nn::Conv2d(w0, w1, 3, 2);
    mid_conv_ = nn::Conv2d(w1, w1, 3, 1);
    up_conv_ = nn::Conv2d(w1, w0, 3, 1);
    skip_conv_ = nn::Conv2d(w1, w0, 3, 1);
    out_conv_ = nn::Conv2d(w0, cfg_.img_channels, 3, 1);
    proj_in_ = nn::Linear(e, w0);
    proj_down_ = nn::Linear(e, w1);
    proj_mid_ = nn::Linear(e, w1);

    Rng r0 = Rng::derive(seed, 0);
    token_table_.init_normal(r0, 1.0);
    Rng r1 = Rng::derive(seed, 1);
    time_fc_.init_kaiming(r1);
    Rng r2 = Rng::derive(seed, 2);
    in_conv_.init_kaiming(r2);
    Rng r3 = Rng::derive(seed, 3);
    down_conv_.init_kaiming(r3);
    Rng r4 = Rng::derive(seed, 4);
    mid_conv_.init_kaiming(r4);
    Rng r5 = Rng::derive(seed, 5);
    up_conv_.init_kaiming(r5);
    Rng r6 = Rng::derive(seed, 6);
    skip_conv_.init_kaiming(r6);
    Rng r7 = Rng::derive(seed, 7);
    out_conv_.init_kaiming(r7);
    Rng r8 = Rng::derive(seed, 8);
    proj_in_.init_kaiming(r8);
    Rng r9 = Rng::derive(seed, 9);
    proj_down_.init_kaiming(r9);
    Rng r10 = Rng::derive(seed, 10);
    proj_mid_.init_kaiming(r10);

    register_params();
    if (control_channels > 0) attach_control(control_channels, splitmix64(seed ^ 0xc0117201ULL));
}

void DenoiserNet::attach_control(int control_channels, uint64_t seed) {
    if (control_channels != 5 && control_channels != 3) {
        throw std::invalid_argument("attach_control: control channels must be 5 (stage I) or 3 (stage II)");
    }
    cfg_.control_channels = control_channels;

    const int w0 = cfg_.base_width;

    hint1_ = nn::Conv2d(control_channels, 16, 3, 1);
    hint2_ = nn::Conv2d(16, w0, 3, 1);
    hint3_ = nn::Conv2d(w0, w0, 3, 1);
    Rng h0 = Rng::derive(seed, 100);
    hint1_.init_kaiming(h0);
    Rng h1 = Rng::derive(seed, 101);
    hint2_.init_kaiming(h1);
    Rng h2 = Rng::derive(seed, 102);
    hint3_.init_kaiming(h2);

    // duplicate the base encoder into the control branch
    in_conv_c_ = in_conv_;
    down_conv_c_ = down_conv_;
    mid_conv_c_ = mid_conv_;
    proj_in_c_ = proj_in_;
    proj_down_c_ = proj_down_;
    proj_mid_c_ = proj_mid_;

    zc1_ = nn::Conv2d(w0, w0, 1, 1);
    zc2_ = nn::Conv2d(2 * w0, 2 * w0, 1, 1);
    zcb_ = nn::Conv2d(2 * w0, 2 * w0, 1, 1);
    zc1_.init_zero();
    zc2_.init_zero();
    zcb_.init_zero();

    register_params();
}

void DenoiserNet::register_params() {
    param_refs_.clear();
    auto add_conv = [&](const char* name, ParamGroup g, nn::Conv2d& c) {
        param_refs_.push_back({std::string(name) + ".w", g, &c.w, &c.gw});
        param_refs_.push_back({std::string(name) + ".b", g, &c.b, &c.gb});
    };
    auto add_linear = [&](const char* name, ParamGroup g, nn::Linear& l) {
        param_refs_.push_back({std::string(name) + ".w", g, &l.w, &l.gw});
        param_refs_.push_back({std::string(name) + ".b", g, &l.b, &l.gb});
    };
    param_refs_.push_back({"base.token_table", ParamGroup::base, &token_table_.table,
                           &token_table_.gtable});
    add_linear("base.time_fc", ParamGroup::base, time_fc_);
    add_conv("base.in_conv", ParamGroup::base, in_conv_);
    add_linear("base.proj_in", ParamGroup::base, proj_in_);
    add_conv("base.down_conv", ParamGroup::base, down_conv_);
    add_linear("base.proj_down", ParamGroup::base, proj_down_);
    add_conv("base.mid_conv", ParamGroup::base, mid_conv_);
    add_linear("base.proj_mid", ParamGroup::base, proj_mid_);
    add_conv("base.up_conv", ParamGroup::base, up_conv_);
    add_conv("base.skip_conv", ParamGroup::base, skip_conv_);
    add_conv("base.out_conv", ParamGroup::base, out_conv_);
    if (has_control()) {
        add_conv("control.hint1", ParamGroup::control, hint1_);
        add_conv("control.hint2", ParamGroup::control, hint2_);
        add_conv("control.hint3", ParamGroup::control, hint3_);
        add_conv("control.in_conv", ParamGroup::control, in_conv_c_);
        add_linear("control.proj_in", ParamGroup::control, proj_in_c_);
        add_conv("control.down_conv", ParamGroup::control, down_conv_c_);
        add_linear("control.proj_down", ParamGroup::control, proj_down_c_);
        add_conv("control.mid_conv", ParamGroup::control, mid_conv_c_);
        add_linear("control.proj_mid", ParamGroup::control, proj_mid_c_);
        add_conv("connector.zc1", ParamGroup::connector, zc1_);
        add_conv("connector.zc2", ParamGroup::connector, zc2_);
        add_conv("connector.zcb", ParamGroup::connector, zcb_);
    }
}

std::vector<ParamRef> DenoiserNet::params() {
    return param_refs_;
}

std::vector<ParamRef> DenoiserNet::params() const {
    return param_refs_;
}

void DenoiserNet::zero_grad() {
    for (ParamRef& p : param_refs_) p.grad->fill(0.0);
}

size_t DenoiserNet::param_count(ParamGroup group) const {
    size_t n = 0;
    for (const ParamRef& p : param_refs_) {
        if (p.group == group) n += p.value->size();
    }
    return n;
}

size_t DenoiserNet::duplicated_base_param_count() const {
    return in_conv_.param_count() + down_conv_.param_count() + mid_conv_.param_count() +
           proj_in_.param_count() + proj_down_.param_count() + proj_mid_.param_count();
}

size_t DenoiserNet::duplicated_control_param_count() const {
    if (!has_control()) return 0;
    return in_conv_c_.param_count() + down_conv_c_.param_count() + mid_conv_c_.param_count() +
           proj_in_c_.param_count() + proj_down_c_.param_count() + proj_mid_c_.param_count();
}

Tensor DenoiserNet::embed(Workspace& ws, int t, int token_id) const {
    ws.sin_emb = sinusoidal_embedding(t, cfg_.emb_dim);
    ws.t_pre = time_fc_.forward(ws.sin_emb);
    Tensor e = silu(ws.t_pre);
    add_inplace(e, token_table_.forward(token_id));
    ws.emb = e;
    return e;
}

Tensor DenoiserNet::encode_control(const ControlStack& control) const {
    if (!has_control()) {
        throw std::invalid_argument("encode_control: model has no control branch");
    }
    if (control.channel_count() != cfg_.control_channels) {
        throw std::invalid_argument("encode_control: expected " +
                                    std::to_string(cfg_.control_channels) + " channels, got " +
                                    std::to_string(control.channel_count()));
    }
    Tensor h = silu(hint1_.forward(control.channels));
    h = silu(hint2_.forward(h));
    return silu(hint3_.forward(h));
}

std::vector<int> DenoiserNet::control_feature_shape(int height, int width) const {
    return {cfg_.base_width, height, width};
}

Tensor DenoiserNet::predict_noise(const NoisyState& state, int token_id,
                                  const ControlStack* control, double strength) const {
    Workspace ws;
    return forward(ws, state, token_id, control, strength);
}

Tensor DenoiserNet::forward(Workspace& ws, const NoisyState& state, int token_id,
                            const ControlStack* control, double strength) const {
    if (strength < 0.0 || strength > 1.0) {
        throw std::invalid_argument("predict_noise: strength must be in [0,1]");
    }
    if (state.values.ndim() != 3 || state.values.dim(0) != cfg_.img_channels) {
        throw std::invalid_argument("predict_noise: expected (" +
                                    std::to_string(cfg_.img_channels) + ",H,W) state, got " +
                                    state.values.shape_str());
    }
    if (control != nullptr && !has_control()) {
        throw std::invalid_argument("predict_noise: control given but model has no control branch");
    }
    if (control != nullptr && control->channel_count() != cfg_.control_channels) {
        throw std::invalid_argument("predict_noise: control channel count " +
                                    std::to_string(control->channel_count()) +
                                    " does not match configured " +
                                    std::to_string(cfg_.control_channels));
    }
    if (control != nullptr && (control->channels.dim(1) != state.values.dim(1) ||
                               control->channels.dim(2) != state.values.dim(2))) {
        throw std::invalid_argument("predict_noise: control spatial size must match the state");
    }

    ws.token_id = token_id;
    ws.timestep = state.timestep;
    ws.strength = strength;
    ws.used_control = control != nullptr;
    ws.x = state.values;

    const Tensor e = embed(ws, state.timestep, token_id);

    // control branch first (feeds the blend points)
    if (ws.used_control) {
        ws.hint_in = control->channels;
        ws.hz1 = hint1_.forward(ws.hint_in);
        ws.ha1 = silu(ws.hz1);
        ws.hz2 = hint2_.forward(ws.ha1);
        ws.ha2 = silu(ws.hz2);
        ws.hz3 = hint3_.forward(ws.ha2);
        ws.hint = silu(ws.hz3);

        ws.cz1 = in_conv_c_.forward(ws.x);
        add_channel_bias(ws.cz1, proj_in_c_.forward(e));
        add_inplace(ws.cz1, ws.hint);
        ws.g1 = silu(ws.cz1);

        ws.cz2 = down_conv_c_.forward(ws.g1);
        add_channel_bias(ws.cz2, proj_down_c_.forward(e));
        ws.g2 = silu(ws.cz2);

        ws.czb = mid_conv_c_.forward(ws.g2);
        add_channel_bias(ws.czb, proj_mid_c_.forward(e));
        ws.gb = silu(ws.czb);
    }

    // base trunk; blend points add strength * connector(control feature).
    // strength == 0 skips the add so the base path stays bit-identical.
    ws.z1 = in_conv_.forward(ws.x);
    add_channel_bias(ws.z1, proj_in_.forward(e));
    ws.f1 = silu(ws.z1);
    ws.b1 = ws.f1;
    if (ws.used_control && strength != 0.0) axpy(ws.b1, strength, zc1_.forward(ws.g1));

    ws.z2 = down_conv_.forward(ws.b1);
    add_channel_bias(ws.z2, proj_down_.forward(e));
    ws.f2 = silu(ws.z2);
    ws.b2 = ws.f2;
    if (ws.used_control && strength != 0.0) axpy(ws.b2, strength, zc2_.forward(ws.g2));

    ws.zb = mid_conv_.forward(ws.b2);
    add_channel_bias(ws.zb, proj_mid_.forward(e));
    ws.fb = silu(ws.zb);
    ws.bb = ws.fb;
    if (ws.used_control && strength != 0.0) axpy(ws.bb, strength, zcb_.forward(ws.gb));

    ws.u = upsample_nearest2x(ws.bb);
    ws.zu = up_conv_.forward(ws.u);
    ws.d1 = silu(ws.zu);
    ws.m = concat_channels(ws.b1, ws.d1);
    ws.zs = skip_conv_.forward(ws.m);
    ws.d2 = silu(ws.zs);
    return out_conv_.forward(ws.d2);
}

void DenoiserNet::backward(const Workspace& ws, const Tensor& d_out) {
    const double c = ws.strength;
    const bool ctl = ws.used_control && c != 0.0;

    Tensor d_e({cfg_.emb_dim});

    Tensor d_d2 = out_conv_.backward(ws.d2, d_out);
    Tensor d_zs = silu_backward(ws.zs, d_d2);
    Tensor d_m = skip_conv_.backward(ws.m, d_zs);

    Tensor d_b1 = Tensor({ws.b1.dim(0), ws.b1.dim(1), ws.b1.dim(2)});
    Tensor d_d1 = Tensor({ws.d1.dim(0), ws.d1.dim(1), ws.d1.dim(2)});
    split_channels_backward(d_m, d_b1, d_d1);

    Tensor d_zu = silu_backward(ws.zu, d_d1);
    Tensor d_u = up_conv_.backward(ws.u, d_zu);
    Tensor d_bb = upsample_nearest2x_backward(d_u);

    // bottleneck blend
    Tensor d_gb;
    if (ctl) {
        Tensor d_qb = d_bb * c;
        d_gb = zcb_.backward(ws.gb, d_qb);
    }
    Tensor d_zb = silu_backward(ws.zb, d_bb);
    add_inplace(d_e, proj_mid_.backward(ws.emb, channel_bias_backward(d_zb)));
    Tensor d_b2 = mid_conv_.backward(ws.b2, d_zb);

    // level-2 blend
    Tensor d_g2;
    if (ctl) {
        Tensor d_q2 = d_b2 * c;
        d_g2 = zc2_.backward(ws.g2, d_q2);
    }
    Tensor d_z2 = silu_backward(ws.z2, d_b2);
    add_inplace(d_e, proj_down_.backward(ws.emb, channel_bias_backward(d_z2)));
    add_inplace(d_b1, down_conv_.backward(ws.b1, d_z2));

    // level-1 blend
    Tensor d_g1;
    if (ctl) {
        Tensor d_q1 = d_b1 * c;
        d_g1 = zc1_.backward(ws.g1, d_q1);
    }
    Tensor d_z1 = silu_backward(ws.z1, d_b1);
    add_inplace(d_e, proj_in_.backward(ws.emb, channel_bias_backward(d_z1)));
    in_conv_.backward(ws.x, d_z1);

    // control branch
    if (ctl) {
        Tensor d_czb = silu_backward(ws.czb, d_gb);
        add_inplace(d_e, proj_mid_c_.backward(ws.emb, channel_bias_backward(d_czb)));
        add_inplace(d_g2, mid_conv_c_.backward(ws.g2, d_czb));

        Tensor d_cz2 = silu_backward(ws.cz2, d_g2);
        add_inplace(d_e, proj_down_c_.backward(ws.emb, channel_bias_backward(d_cz2)));
        add_inplace(d_g1, down_conv_c_.backward(ws.g1, d_cz2));

        Tensor d_cz1 = silu_backward(ws.cz1, d_g1);
        add_inplace(d_e, proj_in_c_.backward(ws.emb, channel_bias_backward(d_cz1)));
        in_conv_c_.backward(ws.x, d_cz1);

        // hint path: d_hint equals d_cz1
        Tensor d_hz3 = silu_backward(ws.hz3, d_cz1);
        Tensor d_ha2 = hint3_.backward(ws.ha2, d_hz3);
        Tensor d_hz2 = silu_backward(ws.hz2, d_ha2);
        Tensor d_ha1 = hint2_.backward(ws.ha1, d_hz2);
        Tensor d_hz1 = silu_backward(ws.hz1, d_ha1);
        hint1_.backward(ws.hint_in, d_hz1);
    }

    // embedding path
    token_table_.backward(ws.token_id, d_e);
    Tensor d_tpre = silu_backward(ws.t_pre, d_e);
    time_fc_.backward(ws.sin_emb, d_tpre);
}

}  // namespace tcdiff
