#ifndef TCDIFF_CODEC_HPP
#define TCDIFF_CODEC_HPP

#include <functional>
#include <string>

#include "tcdiff/tensor.hpp"

namespace tcdiff {

// Pluggable representation codec between pixel space and the space the
// diffusion runs in. The default is the identity (pixel-space diffusion); an
// affine codec is provided as the swap-in demonstration. A learned VAE would
// slot in behind the same pair.
struct RepresentationCodec {
    std::string name = "identity";
    std::function<Tensor(const Tensor&)> encode = [](const Tensor& t) { return t; };
    std::function<Tensor(const Tensor&)> decode = [](const Tensor& t) { return t; };
};

inline RepresentationCodec identity_codec() { return RepresentationCodec{}; }

// encode: x -> scale*x + offset, decode inverts
inline RepresentationCodec affine_codec(double scale, double offset) {
    RepresentationCodec c;
    c.name = "affine";
    c.encode = [scale, offset](const Tensor& t) {
        Tensor out = t;
        for (size_t i = 0; i < out.size(); ++i) out[i] = scale * out[i] + offset;
        return out;
    };
    c.decode = [scale, offset](const Tensor& t) {
        Tensor out = t;
        for (size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - offset) / scale;
        return out;
    };
    return c;
}

}  // namespace tcdiff

#endif
