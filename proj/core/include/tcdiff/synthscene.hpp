#ifndef TCDIFF_SYNTHSCENE_HPP
#define TCDIFF_SYNTHSCENE_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tcdiff/conditioning.hpp"
#include "tcdiff/tensor.hpp"

namespace tcdiff {

// Procedural "head proxy": an animated shaded ellipse with mouth, eyes and
// pupils, taking the place of a tracked 3DMM. Ground truth frames carry a
// per-style fill color and texture; control renderings are geometry-only
// grayscale, like a rasterized mesh would be.

struct HeadParams {
    double yaw = 0.0;         // [-0.5, 0.5] rad
    double mouth_open = 0.0;  // [0, 1]
    std::array<double, 2> pupil_offset = {0.0, 0.0};  // [-1, 1]^2
    int style_id = 0;
};

struct SceneStyle {
    std::array<double, 3> fill;
    enum class Texture { stripes, dots } texture = Texture::stripes;
};

const std::vector<SceneStyle>& style_table();
std::array<double, 3> scene_background_color();
// style tokens: 0 is reserved for the null token, so style s maps to s+1
int style_token(int style_id);

struct FrameRecord {
    Tensor ground_truth_rgb;   // (3,H,W)
    Tensor control_rendering;  // (H,W), shaded ellipse + mouth aperture
    Tensor true_mask;          // (H,W), exact silhouette raster
    PupilPair pupil_points;
    HeadParams params;
    int frame_index = 0;
};

struct SequenceManifest {
    uint64_t seed = 0;
    int length = 0;
    int resolution = 0;
    int style_id = 0;
    int generator_version = 1;
    std::vector<std::string> gt_paths, ctrl_paths, mask_paths;  // relative to the sequence dir
};

struct SyntheticSequence {
    SequenceManifest manifest;
    std::vector<FrameRecord> frames;
};

inline constexpr int kGeneratorVersion = 1;
inline constexpr double kYawVelocityCap = 0.05;  // rad per frame

FrameRecord render_frame(const HeadParams& params, int resolution, int frame_index);

// Smooth parameter trajectories: two sinusoids plus Gaussian-smoothed noise
// (window 9), increment-capped and range-clamped. amplitude_scale 0 gives a
// static sequence.
std::vector<HeadParams> generate_trajectory(uint64_t seed, int length, int style_id,
                                            double amplitude_scale = 1.0);

SyntheticSequence generate_sequence_data(uint64_t seed, int length, int resolution, int style_id,
                                         double amplitude_scale = 1.0);

// layout: <dir>/frame_%05d_{gt,ctrl,mask}.{ppm,pgm} + manifest.json
void save_sequence(const std::filesystem::path& dir, const SyntheticSequence& seq);
SyntheticSequence load_sequence(const std::filesystem::path& dir);
// checks the manifest invariants (paths exist, count == length)
void validate_sequence_dir(const std::filesystem::path& dir);

struct CorpusEntry {
    std::string dir;  // relative to the corpus root
    int style_id = 0;
    int token = 0;
    uint64_t seed = 0;
};

struct CorpusManifest {
    uint64_t seed = 0;
    int resolution = 0;
    int sequence_length = 0;
    std::vector<CorpusEntry> sequences;
};

// balanced multi-style corpus for prior pretraining; styles round-robin
CorpusManifest generate_prior_corpus(const std::filesystem::path& dir, uint64_t seed,
                                     int n_sequences, const std::vector<int>& styles,
                                     int sequence_length = 48, int resolution = 32);
CorpusManifest load_corpus_manifest(const std::filesystem::path& dir);

// mean masked ground-truth color of a style over a deterministic probe set
std::array<double, 3> style_palette_reference(int style_id, int resolution);
// L2 distance between the mean masked color of `frame` and the reference
double palette_distance(const Tensor& frame_rgb, const Tensor& mask,
                        const std::array<double, 3>& reference);

}  // namespace tcdiff

#endif
