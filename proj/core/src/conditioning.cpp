#include "tcdiff/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tcdiff/image_io.hpp"

namespace tcdiff {

void draw_disc(Tensor& gray, double cx, double cy, double radius, double intensity) {
    const int H = gray.dim(0), W = gray.dim(1);
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
    const int y1 = std::min(H - 1, static_cast<int>(std::ceil(cy + radius)));
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
    const int x1 = std::min(W - 1, static_cast<int>(std::ceil(cx + radius)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy < radius * radius) {
                gray[static_cast<size_t>(y) * W + x] = intensity;
            }
        }
    }
}

ControlStack build_stage1_stack(const std::vector<Tensor>& renderings,
                                const std::vector<std::optional<PupilPair>>& pupils,
                                int frame_index, double pupil_radius) {
    if (renderings.size() != 5) {
        throw std::invalid_argument("build_stage1_stack: expected 5 renderings, got " +
                                    std::to_string(renderings.size()));
    }
    if (!pupils.empty() && pupils.size() != 5) {
        throw std::invalid_argument("build_stage1_stack: pupils must be absent or one per rendering");
    }
    const int H = renderings[0].dim(0), W = renderings[0].dim(1);
    for (const Tensor& r : renderings) {
        if (r.ndim() != 2 || r.dim(0) != H || r.dim(1) != W) {
            throw std::invalid_argument("build_stage1_stack: rendering shape mismatch");
        }
    }
    ControlStack stack;
    stack.stage = Stage::stage1;
    stack.frame_index = frame_index;
    stack.channels = Tensor({5, H, W});
    for (int c = 0; c < 5; ++c) {
        Tensor chan = renderings[static_cast<size_t>(c)];
        if (!pupils.empty() && pupils[static_cast<size_t>(c)].has_value()) {
            for (const PupilPoint& p : *pupils[static_cast<size_t>(c)]) {
                if (p.x < 0 || p.x >= W || p.y < 0 || p.y >= H) {
                    throw std::invalid_argument("build_stage1_stack: pupil outside image bounds");
                }
                draw_disc(chan, p.x, p.y, pupil_radius, 1.0);
            }
        }
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                stack.channels.at(c, y, x) = clamp01(chan[static_cast<size_t>(y) * W + x]);
            }
        }
    }
    return stack;
}

MotionMap build_motion_map(const Tensor& r_nm2, const Tensor& r_nm1, const Tensor& r_np1,
                           const Tensor& r_np2) {
    require_same_shape(r_nm2, r_nm1, "build_motion_map");
    require_same_shape(r_nm2, r_np1, "build_motion_map");
    require_same_shape(r_nm2, r_np2, "build_motion_map");
    MotionMap m;
    m.values = Tensor::zeros_like(r_nm2);
    for (size_t i = 0; i < m.values.size(); ++i) {
        const double v = r_nm2[i] / 6.0 + r_nm1[i] / 3.0 + r_np1[i] / 3.0 + r_np2[i] / 6.0;
        m.values[i] = clamp01(v);
    }
    return m;
}

ControlStack build_stage2_stack(const ParsingMap& parsing, const Tensor& rendering,
                                const MotionMap& motion, int frame_index) {
    require_same_shape(parsing.mask, rendering, "build_stage2_stack");
    require_same_shape(parsing.mask, motion.values, "build_stage2_stack");
    const int H = rendering.dim(0), W = rendering.dim(1);
    ControlStack stack;
    stack.stage = Stage::stage2;
    stack.frame_index = frame_index;
    stack.channels = Tensor({3, H, W});
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            stack.channels.at(0, y, x) = parsing.mask[static_cast<size_t>(y) * W + x];
            stack.channels.at(1, y, x) = clamp01(rendering[static_cast<size_t>(y) * W + x]);
            stack.channels.at(2, y, x) = motion.values[static_cast<size_t>(y) * W + x];
        }
    }
    return stack;
}

static double luminance(double r, double g, double b) {
    return 0.299 * r + 0.587 * g + 0.114 * b;
}

// 3x3 max/min with the window clipped at the image border
static Tensor morph3x3(const Tensor& m, bool dilate) {
    const int H = m.dim(0), W = m.dim(1);
    Tensor out({H, W});
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            double v = dilate ? 0.0 : 1.0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
                    const double nv = m[static_cast<size_t>(yy) * W + xx];
                    v = dilate ? std::max(v, nv) : std::min(v, nv);
                }
            }
            out[static_cast<size_t>(y) * W + x] = v;
        }
    }
    return out;
}

ParsingMap extract_parsing_map(const Tensor& rgb, const std::array<double, 3>& background_rgb,
                               double threshold) {
    if (rgb.ndim() != 3 || rgb.dim(0) != 3) {
        throw std::invalid_argument("extract_parsing_map: expected (3,H,W), got " + rgb.shape_str());
    }
    const int H = rgb.dim(1), W = rgb.dim(2);
    const double bg_lum = luminance(background_rgb[0], background_rgb[1], background_rgb[2]);
    Tensor mask({H, W});
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const double lum = luminance(rgb.at(0, y, x), rgb.at(1, y, x), rgb.at(2, y, x));
            mask[static_cast<size_t>(y) * W + x] = std::fabs(lum - bg_lum) > threshold ? 1.0 : 0.0;
        }
    }
    ParsingMap p;
    p.mask = morph3x3(morph3x3(mask, true), false);  // one closing pass
    return p;
}

std::vector<int> clamped_neighbor_indices(int frame_index, int sequence_length,
                                          const std::vector<int>& offsets) {
    if (frame_index < 0 || frame_index >= sequence_length) {
        throw std::invalid_argument("clamped_neighbor_indices: frame index out of range");
    }
    std::vector<int> out;
    out.reserve(offsets.size());
    for (int off : offsets) {
        out.push_back(std::clamp(frame_index + off, 0, sequence_length - 1));
    }
    return out;
}

std::vector<int> stage1_neighbor_indices(int frame_index, int sequence_length) {
    return clamped_neighbor_indices(frame_index, sequence_length, {-2, -1, 0, 1, 2});
}

std::vector<int> stage2_motion_indices(int frame_index, int sequence_length) {
    return clamped_neighbor_indices(frame_index, sequence_length, {-2, -1, 1, 2});
}

double mask_iou(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mask_iou");
    double inter = 0.0, uni = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const bool av = a[i] > 0.5, bv = b[i] > 0.5;
        inter += (av && bv) ? 1.0 : 0.0;
        uni += (av || bv) ? 1.0 : 0.0;
    }
    return uni == 0.0 ? 1.0 : inter / uni;
}

}  // namespace tcdiff
