#ifndef TCDIFF_CONDITIONING_HPP
#define TCDIFF_CONDITIONING_HPP

#include <array>
#include <optional>
#include <vector>

#include "tcdiff/tensor.hpp"

namespace tcdiff {

enum class Stage { stage1, stage2 };

// Multi-channel conditioning image. Stage I stacks five temporally ordered
// grayscale renderings; Stage II stacks (parsing map, rendering, motion map).
struct ControlStack {
    Tensor channels;  // (k, H, W), values in [0,1]
    Stage stage = Stage::stage1;
    int frame_index = 0;

    int channel_count() const { return channels.empty() ? 0 : channels.dim(0); }
};

// Weighted accumulation of the four neighboring renderings, clamped to [0,1].
struct MotionMap {
    Tensor values;  // (H, W)
};

// Binary foreground mask.
struct ParsingMap {
    Tensor mask;  // (H, W), values in {0,1}
};

struct PupilPoint {
    double x = 0.0;  // pixel coordinates
    double y = 0.0;
};
using PupilPair = std::array<PupilPoint, 2>;

// Five consecutive grayscale renderings (frames n-2..n+2), each optionally
// overlaid with its frame's two pupils as filled discs of intensity 1.
ControlStack build_stage1_stack(const std::vector<Tensor>& renderings,
                                const std::vector<std::optional<PupilPair>>& pupils,
                                int frame_index, double pupil_radius = 2.0);

// values = clamp(1/6 r_{n-2} + 1/3 r_{n-1} + 1/3 r_{n+1} + 1/6 r_{n+2}, 0, 1)
MotionMap build_motion_map(const Tensor& r_nm2, const Tensor& r_nm1, const Tensor& r_np1,
                           const Tensor& r_np2);

// channels ordered (parsing, rendering, motion)
ControlStack build_stage2_stack(const ParsingMap& parsing, const Tensor& rendering,
                                const MotionMap& motion, int frame_index);

// Foreground = luminance differing from the background color's luminance by
// more than `threshold`, followed by one 3x3 morphological closing pass.
// Out-of-range neighborhood pixels are ignored by the closing, so masks
// touching the border survive unchanged.
ParsingMap extract_parsing_map(const Tensor& rgb, const std::array<double, 3>& background_rgb,
                               double threshold = 0.15);

// draw a filled disc of the given intensity; pixels with distance < radius
void draw_disc(Tensor& gray, double cx, double cy, double radius, double intensity);

// Temporal neighbor indices with out-of-range entries clamped to the nearest
// valid frame. offsets are relative to frame_index.
std::vector<int> clamped_neighbor_indices(int frame_index, int sequence_length,
                                          const std::vector<int>& offsets);
// stage-I stack neighbors: offsets {-2,-1,0,1,2}
std::vector<int> stage1_neighbor_indices(int frame_index, int sequence_length);
// stage-II motion-map neighbors: offsets {-2,-1,1,2}
std::vector<int> stage2_motion_indices(int frame_index, int sequence_length);

double mask_iou(const Tensor& a, const Tensor& b);

}  // namespace tcdiff

#endif
