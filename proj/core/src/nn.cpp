#include "tcdiff/nn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tcdiff {
namespace nn {

static int out_size(int in, int k, int stride) {
    const int pad = k / 2;
    return (in + 2 * pad - k) / stride + 1;
}

Conv2d::Conv2d(int in_ch_, int out_ch_, int ksize_, int stride_)
    : in_ch(in_ch_), out_ch(out_ch_), ksize(ksize_), stride(stride_) {
    w = Tensor({out_ch, in_ch, ksize, ksize});
    b = Tensor({out_ch});
    gw = Tensor::zeros_like(w);
    gb = Tensor::zeros_like(b);
}

void Conv2d::init_kaiming(Rng& rng) {
    const double std = std::sqrt(2.0 / (static_cast<double>(in_ch) * ksize * ksize));
    for (size_t i = 0; i < w.size(); ++i) w[i] = rng.normal() * std;
    b.fill(0.0);
}

void Conv2d::init_zero() {
    w.fill(0.0);
    b.fill(0.0);
}

Tensor Conv2d::forward(const Tensor& x) const {
    if (x.ndim() != 3 || x.dim(0) != in_ch) {
        throw std::invalid_argument("Conv2d: expected (" + std::to_string(in_ch) +
                                    ",H,W), got " + x.shape_str());
    }
    const int H = x.dim(1), W = x.dim(2);
    const int Ho = out_size(H, ksize, stride), Wo = out_size(W, ksize, stride);
    const int pad = ksize / 2;
    Tensor y({out_ch, Ho, Wo});
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < out_ch; ++oc) {
        double* yc = y.data() + static_cast<size_t>(oc) * Ho * Wo;
        const double bias = b[static_cast<size_t>(oc)];
        for (int i = 0; i < Ho * Wo; ++i) yc[i] = bias;
        for (int ic = 0; ic < in_ch; ++ic) {
            const double* xc = x.data() + static_cast<size_t>(ic) * H * W;
            for (int ky = 0; ky < ksize; ++ky) {
                for (int kx = 0; kx < ksize; ++kx) {
                    const double wv = wat(oc, ic, ky, kx);
                    if (wv == 0.0) continue;
                    for (int oy = 0; oy < Ho; ++oy) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= H) continue;
                        double* yrow = yc + static_cast<size_t>(oy) * Wo;
                        const double* xrow = xc + static_cast<size_t>(iy) * W;
                        for (int ox = 0; ox < Wo; ++ox) {
                            const int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= W) continue;
                            yrow[ox] += wv * xrow[ix];
                        }
                    }
                }
            }
        }
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& x, const Tensor& dy) {
    const int H = x.dim(1), W = x.dim(2);
    const int Ho = dy.dim(1), Wo = dy.dim(2);
    const int pad = ksize / 2;

    // weight and bias gradients, parallel over output channels
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < out_ch; ++oc) {
        const double* dyc = dy.data() + static_cast<size_t>(oc) * Ho * Wo;
        double bsum = 0.0;
        for (int i = 0; i < Ho * Wo; ++i) bsum += dyc[i];
        gb[static_cast<size_t>(oc)] += bsum;
        for (int ic = 0; ic < in_ch; ++ic) {
            const double* xc = x.data() + static_cast<size_t>(ic) * H * W;
            for (int ky = 0; ky < ksize; ++ky) {
                for (int kx = 0; kx < ksize; ++kx) {
                    double acc = 0.0;
                    for (int oy = 0; oy < Ho; ++oy) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= H) continue;
                        const double* dyrow = dyc + static_cast<size_t>(oy) * Wo;
                        const double* xrow = xc + static_cast<size_t>(iy) * W;
                        for (int ox = 0; ox < Wo; ++ox) {
                            const int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= W) continue;
                            acc += dyrow[ox] * xrow[ix];
                        }
                    }
                    gw[((static_cast<size_t>(oc) * in_ch + ic) * ksize + ky) * ksize + kx] += acc;
                }
            }
        }
    }

    // input gradient, parallel over input channels
    Tensor dx({in_ch, H, W});
#pragma omp parallel for schedule(static)
    for (int ic = 0; ic < in_ch; ++ic) {
        double* dxc = dx.data() + static_cast<size_t>(ic) * H * W;
        for (int oc = 0; oc < out_ch; ++oc) {
            const double* dyc = dy.data() + static_cast<size_t>(oc) * Ho * Wo;
            for (int ky = 0; ky < ksize; ++ky) {
                for (int kx = 0; kx < ksize; ++kx) {
                    const double wv = wat(oc, ic, ky, kx);
                    if (wv == 0.0) continue;
                    for (int oy = 0; oy < Ho; ++oy) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= H) continue;
                        const double* dyrow = dyc + static_cast<size_t>(oy) * Wo;
                        double* dxrow = dxc + static_cast<size_t>(iy) * W;
                        for (int ox = 0; ox < Wo; ++ox) {
                            const int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= W) continue;
                            dxrow[ix] += wv * dyrow[ox];
                        }
                    }
                }
            }
        }
    }
    return dx;
}

void Conv2d::zero_grad() {
    gw.fill(0.0);
    gb.fill(0.0);
}

Linear::Linear(int in_dim_, int out_dim_) : in_dim(in_dim_), out_dim(out_dim_) {
    w = Tensor({out_dim, in_dim});
    b = Tensor({out_dim});
    gw = Tensor::zeros_like(w);
    gb = Tensor::zeros_like(b);
}

void Linear::init_kaiming(Rng& rng) {
    const double std = std::sqrt(2.0 / static_cast<double>(in_dim));
    for (size_t i = 0; i < w.size(); ++i) w[i] = rng.normal() * std;
    b.fill(0.0);
}

Tensor Linear::forward(const Tensor& x) const {
    if (static_cast<int>(x.size()) != in_dim) {
        throw std::invalid_argument("Linear: expected " + std::to_string(in_dim) +
                                    " inputs, got " + x.shape_str());
    }
    Tensor y({out_dim});
    for (int o = 0; o < out_dim; ++o) {
        const double* wrow = w.data() + static_cast<size_t>(o) * in_dim;
        double acc = b[static_cast<size_t>(o)];
        for (int i = 0; i < in_dim; ++i) acc += wrow[i] * x[static_cast<size_t>(i)];
        y[static_cast<size_t>(o)] = acc;
    }
    return y;
}

Tensor Linear::backward(const Tensor& x, const Tensor& dy) {
    Tensor dx({in_dim});
    for (int o = 0; o < out_dim; ++o) {
        const double d = dy[static_cast<size_t>(o)];
        gb[static_cast<size_t>(o)] += d;
        const double* wrow = w.data() + static_cast<size_t>(o) * in_dim;
        double* gwrow = gw.data() + static_cast<size_t>(o) * in_dim;
        for (int i = 0; i < in_dim; ++i) {
            gwrow[i] += d * x[static_cast<size_t>(i)];
            dx[static_cast<size_t>(i)] += d * wrow[i];
        }
    }
    return dx;
}

void Linear::zero_grad() {
    gw.fill(0.0);
    gb.fill(0.0);
}

Embedding::Embedding(int num_, int dim_) : num(num_), dim(dim_) {
    table = Tensor({num, dim});
    gtable = Tensor::zeros_like(table);
}

void Embedding::init_normal(Rng& rng, double std) {
    for (size_t i = 0; i < table.size(); ++i) table[i] = rng.normal() * std;
}

Tensor Embedding::forward(int id) const {
    if (id < 0 || id >= num) {
        throw std::invalid_argument("Embedding: id " + std::to_string(id) + " out of range [0, " +
                                    std::to_string(num) + ")");
    }
    Tensor y({dim});
    const double* row = table.data() + static_cast<size_t>(id) * dim;
    for (int i = 0; i < dim; ++i) y[static_cast<size_t>(i)] = row[i];
    return y;
}

void Embedding::backward(int id, const Tensor& dy) {
    double* row = gtable.data() + static_cast<size_t>(id) * dim;
    for (int i = 0; i < dim; ++i) row[i] += dy[static_cast<size_t>(i)];
}

void Embedding::zero_grad() {
    gtable.fill(0.0);
}

Tensor silu(const Tensor& x) {
    Tensor y = x;
    for (size_t i = 0; i < y.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-y[i]));
        y[i] = y[i] * s;
    }
    return y;
}

Tensor silu_backward(const Tensor& x, const Tensor& dy) {
    Tensor dx = x;
    for (size_t i = 0; i < dx.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-x[i]));
        dx[i] = dy[i] * s * (1.0 + x[i] * (1.0 - s));
    }
    return dx;
}

void add_channel_bias(Tensor& fmap, const Tensor& bias) {
    const int C = fmap.dim(0), HW = fmap.dim(1) * fmap.dim(2);
    for (int c = 0; c < C; ++c) {
        double* p = fmap.data() + static_cast<size_t>(c) * HW;
        const double bv = bias[static_cast<size_t>(c)];
        for (int i = 0; i < HW; ++i) p[i] += bv;
    }
}

Tensor channel_bias_backward(const Tensor& dfmap) {
    const int C = dfmap.dim(0), HW = dfmap.dim(1) * dfmap.dim(2);
    Tensor db({C});
    for (int c = 0; c < C; ++c) {
        const double* p = dfmap.data() + static_cast<size_t>(c) * HW;
        double acc = 0.0;
        for (int i = 0; i < HW; ++i) acc += p[i];
        db[static_cast<size_t>(c)] = acc;
    }
    return db;
}

Tensor upsample_nearest2x(const Tensor& x) {
    const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
    Tensor y({C, 2 * H, 2 * W});
    for (int c = 0; c < C; ++c) {
        for (int yy = 0; yy < 2 * H; ++yy) {
            const double* xrow = x.data() + (static_cast<size_t>(c) * H + yy / 2) * W;
            double* yrow = y.data() + (static_cast<size_t>(c) * 2 * H + yy) * 2 * W;
            for (int xx = 0; xx < 2 * W; ++xx) yrow[xx] = xrow[xx / 2];
        }
    }
    return y;
}

Tensor upsample_nearest2x_backward(const Tensor& dy) {
    const int C = dy.dim(0), H2 = dy.dim(1), W2 = dy.dim(2);
    const int H = H2 / 2, W = W2 / 2;
    Tensor dx({C, H, W});
    for (int c = 0; c < C; ++c) {
        for (int yy = 0; yy < H2; ++yy) {
            const double* dyrow = dy.data() + (static_cast<size_t>(c) * H2 + yy) * W2;
            double* dxrow = dx.data() + (static_cast<size_t>(c) * H + yy / 2) * W;
            for (int xx = 0; xx < W2; ++xx) dxrow[xx / 2] += dyrow[xx];
        }
    }
    return dx;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
        throw std::invalid_argument("concat_channels: spatial mismatch " + a.shape_str() + " vs " +
                                    b.shape_str());
    }
    Tensor y({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
    const size_t na = a.size();
    for (size_t i = 0; i < na; ++i) y[i] = a[i];
    for (size_t i = 0; i < b.size(); ++i) y[na + i] = b[i];
    return y;
}

void split_channels_backward(const Tensor& dcat, Tensor& da, Tensor& db) {
    const size_t na = da.size();
    for (size_t i = 0; i < na; ++i) da[i] = dcat[i];
    for (size_t i = 0; i < db.size(); ++i) db[i] = dcat[na + i];
}

Tensor sinusoidal_embedding(int t, int dim) {
    const int half = dim / 2;
    Tensor e({dim});
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) /
                                     static_cast<double>(half));
        e[static_cast<size_t>(i)] = std::sin(t * freq);
        e[static_cast<size_t>(half + i)] = std::cos(t * freq);
    }
    return e;
}

}  // namespace nn
}  // namespace tcdiff
