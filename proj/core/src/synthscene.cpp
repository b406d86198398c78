#include "tcdiff/synthscene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "tcdiff/image_io.hpp"
#include "tcdiff/rng.hpp"

namespace tcdiff {

using nlohmann::json;

const std::vector<SceneStyle>& style_table() {
    static const std::vector<SceneStyle> table = {
        {{0.82, 0.30, 0.25}, SceneStyle::Texture::stripes},
        {{0.25, 0.45, 0.85}, SceneStyle::Texture::dots},
        {{0.30, 0.72, 0.35}, SceneStyle::Texture::stripes},
        {{0.85, 0.75, 0.30}, SceneStyle::Texture::dots},
    };
    return table;
}

std::array<double, 3> scene_background_color() {
    return {0.06, 0.07, 0.10};
}

int style_token(int style_id) {
    return style_id + 1;
}

static const SceneStyle& style_of(int style_id) {
    const auto& table = style_table();
    if (style_id < 0 || style_id >= static_cast<int>(table.size())) {
        throw std::invalid_argument("unknown style id " + std::to_string(style_id));
    }
    return table[static_cast<size_t>(style_id)];
}

namespace {

struct HeadGeometry {
    double cx, cy, ax, ay;           // head ellipse
    double mouth_cx, mouth_cy, mouth_ax, mouth_ay;
    double eye_y, eye_dx, eye_r;
    double pupil_r, pupil_range;
};

HeadGeometry head_geometry(const HeadParams& p, int R) {
    HeadGeometry g{};
    g.cx = 0.5 * R + p.yaw * 0.5 * R;
    g.cy = 0.5 * R;
    g.ax = 0.28 * R * (1.0 - 0.15 * std::fabs(p.yaw));
    g.ay = 0.38 * R;
    g.mouth_cx = g.cx;
    g.mouth_cy = g.cy + 0.45 * g.ay;
    g.mouth_ax = 0.35 * g.ax;
    g.mouth_ay = (0.04 + 0.16 * p.mouth_open) * g.ay;
    g.eye_y = g.cy - 0.25 * g.ay;
    g.eye_dx = 0.38 * g.ax;
    g.eye_r = 0.14 * g.ax + 0.6;
    g.pupil_r = 0.07 * g.ax + 0.4;
    g.pupil_range = 0.05 * g.ax;
    return g;
}

inline double ellipse_q(double x, double y, double cx, double cy, double ax, double ay) {
    const double dx = (x - cx) / ax, dy = (y - cy) / ay;
    return dx * dx + dy * dy;
}

}  // namespace

FrameRecord render_frame(const HeadParams& params, int resolution, int frame_index) {
    const int R = resolution;
    const HeadGeometry g = head_geometry(params, R);
    const SceneStyle& style = style_of(params.style_id);
    const std::array<double, 3> bg = scene_background_color();

    FrameRecord rec;
    rec.params = params;
    rec.frame_index = frame_index;
    rec.ground_truth_rgb = Tensor({3, R, R});
    rec.control_rendering = Tensor({R, R});
    rec.true_mask = Tensor({R, R});

    const double pupil_lx = g.cx - g.eye_dx + params.pupil_offset[0] * g.pupil_range;
    const double pupil_rx = g.cx + g.eye_dx + params.pupil_offset[0] * g.pupil_range;
    const double pupil_y = g.eye_y + params.pupil_offset[1] * g.pupil_range;
    rec.pupil_points = {PupilPoint{pupil_lx, pupil_y}, PupilPoint{pupil_rx, pupil_y}};

    for (int y = 0; y < R; ++y) {
        for (int x = 0; x < R; ++x) {
            const double q = ellipse_q(x, y, g.cx, g.cy, g.ax, g.ay);
            const bool inside = q <= 1.0;
            rec.true_mask[static_cast<size_t>(y) * R + x] = inside ? 1.0 : 0.0;

            // geometry-only control rendering: spherical shading + mouth
            double ctrl = 0.0;
            if (inside) {
                const double shade = std::sqrt(std::max(0.0, 1.0 - q));
                ctrl = 0.35 + 0.55 * shade;
                if (ellipse_q(x, y, g.mouth_cx, g.mouth_cy, g.mouth_ax, g.mouth_ay) <= 1.0) {
                    ctrl = 0.10;
                }
            }
            rec.control_rendering[static_cast<size_t>(y) * R + x] = ctrl;

            double r = bg[0], gch = bg[1], b = bg[2];
            if (inside) {
                const double shade = 0.55 + 0.45 * std::sqrt(std::max(0.0, 1.0 - q));
                double tex = 1.0;
                if (style.texture == SceneStyle::Texture::stripes) {
                    tex = 1.0 + 0.22 * std::sin(2.0 * M_PI * (y - g.cy) / (0.22 * R));
                } else {
                    const double gx = std::fmod(std::fabs(x - g.cx), 0.18 * R) - 0.09 * R;
                    const double gy = std::fmod(std::fabs(y - g.cy), 0.18 * R) - 0.09 * R;
                    tex = (gx * gx + gy * gy < 0.003 * R * R) ? 1.35 : 0.92;
                }
                r = clamp01(style.fill[0] * shade * tex);
                gch = clamp01(style.fill[1] * shade * tex);
                b = clamp01(style.fill[2] * shade * tex);

                // eyes and pupils
                const double ql = ellipse_q(x, y, g.cx - g.eye_dx, g.eye_y, g.eye_r, g.eye_r);
                const double qr = ellipse_q(x, y, g.cx + g.eye_dx, g.eye_y, g.eye_r, g.eye_r);
                if (ql <= 1.0 || qr <= 1.0) {
                    r = gch = b = 0.95;
                    const double dl = ellipse_q(x, y, pupil_lx, pupil_y, g.pupil_r, g.pupil_r);
                    const double dr = ellipse_q(x, y, pupil_rx, pupil_y, g.pupil_r, g.pupil_r);
                    if (dl <= 1.0 || dr <= 1.0) r = gch = b = 0.05;
                }
                // mouth interior
                if (ellipse_q(x, y, g.mouth_cx, g.mouth_cy, g.mouth_ax, g.mouth_ay) <= 1.0) {
                    r = 0.45;
                    gch = 0.12;
                    b = 0.12;
                }
            }
            rec.ground_truth_rgb.at(0, y, x) = r;
            rec.ground_truth_rgb.at(1, y, x) = gch;
            rec.ground_truth_rgb.at(2, y, x) = b;
        }
    }
    return rec;
}

namespace {

// iid normals convolved with a 9-tap Gaussian window (sigma 2), edge-normalized
std::vector<double> smoothed_noise(Rng& rng, int length, double std) {
    std::vector<double> raw(static_cast<size_t>(length));
    for (double& v : raw) v = rng.normal() * std;
    std::array<double, 9> w{};
    for (int k = -4; k <= 4; ++k) w[static_cast<size_t>(k + 4)] = std::exp(-k * k / 8.0);
    std::vector<double> out(static_cast<size_t>(length));
    for (int i = 0; i < length; ++i) {
        double acc = 0.0, wsum = 0.0;
        for (int k = -4; k <= 4; ++k) {
            const int j = i + k;
            if (j < 0 || j >= length) continue;
            acc += w[static_cast<size_t>(k + 4)] * raw[static_cast<size_t>(j)];
            wsum += w[static_cast<size_t>(k + 4)];
        }
        out[static_cast<size_t>(i)] = acc / wsum;
    }
    return out;
}

std::vector<double> sinusoid_series(Rng& rng, int length, double amp) {
    const double f1 = 1.0 / (40.0 + rng.uniform() * 40.0);
    const double f2 = 1.0 / (13.0 + rng.uniform() * 14.0);
    const double p1 = rng.uniform() * 2.0 * M_PI;
    const double p2 = rng.uniform() * 2.0 * M_PI;
    std::vector<double> out(static_cast<size_t>(length));
    for (int i = 0; i < length; ++i) {
        out[static_cast<size_t>(i)] = amp * (0.7 * std::sin(2.0 * M_PI * f1 * i + p1) +
                                             0.3 * std::sin(2.0 * M_PI * f2 * i + p2));
    }
    return out;
}

void cap_increments(std::vector<double>& v, double cap) {
    for (size_t i = 1; i < v.size(); ++i) {
        const double d = std::clamp(v[i] - v[i - 1], -cap, cap);
        v[i] = v[i - 1] + d;
    }
}

}  // namespace

std::vector<HeadParams> generate_trajectory(uint64_t seed, int length, int style_id,
                                            double amplitude_scale) {
    style_of(style_id);  // range check
    Rng yaw_rng = Rng::derive(seed, 11);
    Rng mouth_rng = Rng::derive(seed, 12);
    Rng px_rng = Rng::derive(seed, 13);
    Rng py_rng = Rng::derive(seed, 14);

    std::vector<double> yaw = sinusoid_series(yaw_rng, length, 0.30 * amplitude_scale);
    {
        std::vector<double> n = smoothed_noise(yaw_rng, length, 0.05 * amplitude_scale);
        for (int i = 0; i < length; ++i) yaw[static_cast<size_t>(i)] += n[static_cast<size_t>(i)];
    }
    cap_increments(yaw, kYawVelocityCap);

    std::vector<double> mouth = sinusoid_series(mouth_rng, length, 0.45 * amplitude_scale);
    {
        std::vector<double> n = smoothed_noise(mouth_rng, length, 0.08 * amplitude_scale);
        for (int i = 0; i < length; ++i) mouth[static_cast<size_t>(i)] += n[static_cast<size_t>(i)];
    }
    std::vector<double> pdx = sinusoid_series(px_rng, length, 0.6 * amplitude_scale);
    std::vector<double> pdy = sinusoid_series(py_rng, length, 0.6 * amplitude_scale);

    std::vector<HeadParams> out(static_cast<size_t>(length));
    for (int i = 0; i < length; ++i) {
        HeadParams& p = out[static_cast<size_t>(i)];
        p.style_id = style_id;
        p.yaw = std::clamp(yaw[static_cast<size_t>(i)], -0.5, 0.5);
        p.mouth_open = std::clamp(0.5 + mouth[static_cast<size_t>(i)], 0.0, 1.0);
        p.pupil_offset = {std::clamp(pdx[static_cast<size_t>(i)], -1.0, 1.0),
                          std::clamp(pdy[static_cast<size_t>(i)], -1.0, 1.0)};
    }
    return out;
}

SyntheticSequence generate_sequence_data(uint64_t seed, int length, int resolution, int style_id,
                                         double amplitude_scale) {
    if (length < 5) {
        throw std::invalid_argument("generate_sequence_data: length must be >= 5 "
                                    "(the temporal stack needs 5 frames)");
    }
    if (resolution != 32 && resolution != 64) {
        throw std::invalid_argument("generate_sequence_data: resolution must be 32 or 64");
    }
    SyntheticSequence seq;
    seq.manifest.seed = seed;
    seq.manifest.length = length;
    seq.manifest.resolution = resolution;
    seq.manifest.style_id = style_id;
    seq.manifest.generator_version = kGeneratorVersion;

    const std::vector<HeadParams> traj = generate_trajectory(seed, length, style_id, amplitude_scale);
    seq.frames.reserve(static_cast<size_t>(length));
    for (int i = 0; i < length; ++i) {
        seq.frames.push_back(render_frame(traj[static_cast<size_t>(i)], resolution, i));
    }
    return seq;
}

namespace {

std::string frame_name(int index, const char* role, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "frame_%05d_%s.%s", index, role, ext);
    return buf;
}

json params_to_json(const FrameRecord& rec) {
    return json{{"yaw", rec.params.yaw},
                {"mouth_open", rec.params.mouth_open},
                {"pupil_offset", rec.params.pupil_offset},
                {"pupils",
                 {{rec.pupil_points[0].x, rec.pupil_points[0].y},
                  {rec.pupil_points[1].x, rec.pupil_points[1].y}}}};
}

}  // namespace

void save_sequence(const std::filesystem::path& dir, const SyntheticSequence& seq) {
    std::filesystem::create_directories(dir);
    json frames = json::array();
    for (const FrameRecord& rec : seq.frames) {
        const std::string gt = frame_name(rec.frame_index, "gt", "ppm");
        const std::string ctrl = frame_name(rec.frame_index, "ctrl", "pgm");
        const std::string mask = frame_name(rec.frame_index, "mask", "pgm");
        write_image(dir / gt, rec.ground_truth_rgb);
        Tensor ctrl3({1, rec.control_rendering.dim(0), rec.control_rendering.dim(1)});
        for (size_t i = 0; i < rec.control_rendering.size(); ++i) ctrl3[i] = rec.control_rendering[i];
        write_image(dir / ctrl, ctrl3);
        Tensor mask3({1, rec.true_mask.dim(0), rec.true_mask.dim(1)});
        for (size_t i = 0; i < rec.true_mask.size(); ++i) mask3[i] = rec.true_mask[i];
        write_mask(dir / mask, mask3);
        json f = params_to_json(rec);
        f["index"] = rec.frame_index;
        f["gt"] = gt;
        f["ctrl"] = ctrl;
        f["mask"] = mask;
        frames.push_back(f);
    }
    json m{{"generator_version", seq.manifest.generator_version},
           {"seed", seq.manifest.seed},
           {"length", seq.manifest.length},
           {"resolution", seq.manifest.resolution},
           {"style_id", seq.manifest.style_id},
           {"frames", frames}};
    std::ofstream f(dir / "manifest.json");
    f << m.dump(2) << "\n";
    if (!f) throw std::runtime_error("save_sequence: cannot write manifest under " + dir.string());
}

static Tensor squeeze_gray(const Tensor& img) {
    Tensor out({img.dim(1), img.dim(2)});
    for (size_t i = 0; i < out.size(); ++i) out[i] = img[i];
    return out;
}

SyntheticSequence load_sequence(const std::filesystem::path& dir) {
    std::ifstream f(dir / "manifest.json");
    if (!f) throw std::runtime_error("load_sequence: missing manifest in " + dir.string());
    json m = json::parse(f);
    SyntheticSequence seq;
    seq.manifest.seed = m.at("seed").get<uint64_t>();
    seq.manifest.length = m.at("length").get<int>();
    seq.manifest.resolution = m.at("resolution").get<int>();
    seq.manifest.style_id = m.at("style_id").get<int>();
    seq.manifest.generator_version = m.at("generator_version").get<int>();
    for (const json& fr : m.at("frames")) {
        FrameRecord rec;
        rec.frame_index = fr.at("index").get<int>();
        rec.params.yaw = fr.at("yaw").get<double>();
        rec.params.mouth_open = fr.at("mouth_open").get<double>();
        rec.params.pupil_offset = fr.at("pupil_offset").get<std::array<double, 2>>();
        rec.params.style_id = seq.manifest.style_id;
        const auto pupils = fr.at("pupils");
        rec.pupil_points = {PupilPoint{pupils[0][0].get<double>(), pupils[0][1].get<double>()},
                            PupilPoint{pupils[1][0].get<double>(), pupils[1][1].get<double>()}};
        rec.ground_truth_rgb = read_image(dir / fr.at("gt").get<std::string>());
        rec.control_rendering = squeeze_gray(read_image(dir / fr.at("ctrl").get<std::string>()));
        rec.true_mask = squeeze_gray(read_mask(dir / fr.at("mask").get<std::string>()));
        seq.manifest.gt_paths.push_back(fr.at("gt").get<std::string>());
        seq.manifest.ctrl_paths.push_back(fr.at("ctrl").get<std::string>());
        seq.manifest.mask_paths.push_back(fr.at("mask").get<std::string>());
        seq.frames.push_back(std::move(rec));
    }
    return seq;
}

void validate_sequence_dir(const std::filesystem::path& dir) {
    std::ifstream f(dir / "manifest.json");
    if (!f) throw std::runtime_error("validate_sequence_dir: missing manifest in " + dir.string());
    json m = json::parse(f);
    const int length = m.at("length").get<int>();
    const json& frames = m.at("frames");
    if (static_cast<int>(frames.size()) != length) {
        throw std::runtime_error("validate_sequence_dir: frame count does not match length");
    }
    for (const json& fr : frames) {
        for (const char* key : {"gt", "ctrl", "mask"}) {
            const std::filesystem::path p = dir / fr.at(key).get<std::string>();
            if (!std::filesystem::exists(p)) {
                throw std::runtime_error("validate_sequence_dir: missing file " + p.string());
            }
        }
    }
}

CorpusManifest generate_prior_corpus(const std::filesystem::path& dir, uint64_t seed,
                                     int n_sequences, const std::vector<int>& styles,
                                     int sequence_length, int resolution) {
    std::vector<int> unique = styles;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    if (unique.size() < 2) {
        throw std::invalid_argument("generate_prior_corpus: need at least 2 distinct styles");
    }
    if (n_sequences < 1) throw std::invalid_argument("generate_prior_corpus: need n_sequences >= 1");

    CorpusManifest corpus;
    corpus.seed = seed;
    corpus.resolution = resolution;
    corpus.sequence_length = sequence_length;

    std::filesystem::create_directories(dir);
    json seqs = json::array();
    for (int i = 0; i < n_sequences; ++i) {
        const int style = styles[static_cast<size_t>(i) % styles.size()];
        const uint64_t sseed = splitmix64(seed ^ (0x5eedULL + static_cast<uint64_t>(i)));
        char name[32];
        std::snprintf(name, sizeof(name), "seq_%03d", i);
        SyntheticSequence seq = generate_sequence_data(sseed, sequence_length, resolution, style);
        save_sequence(dir / name, seq);
        CorpusEntry entry{name, style, style_token(style), sseed};
        corpus.sequences.push_back(entry);
        seqs.push_back(json{{"dir", entry.dir},
                            {"style_id", entry.style_id},
                            {"token", entry.token},
                            {"seed", entry.seed}});
    }
    json m{{"seed", seed},
           {"resolution", resolution},
           {"sequence_length", sequence_length},
           {"sequences", seqs}};
    std::ofstream f(dir / "corpus.json");
    f << m.dump(2) << "\n";
    if (!f) throw std::runtime_error("generate_prior_corpus: cannot write corpus manifest");
    return corpus;
}

CorpusManifest load_corpus_manifest(const std::filesystem::path& dir) {
    std::ifstream f(dir / "corpus.json");
    if (!f) throw std::runtime_error("load_corpus_manifest: missing corpus.json in " + dir.string());
    json m = json::parse(f);
    CorpusManifest corpus;
    corpus.seed = m.at("seed").get<uint64_t>();
    corpus.resolution = m.at("resolution").get<int>();
    corpus.sequence_length = m.at("sequence_length").get<int>();
    for (const json& s : m.at("sequences")) {
        corpus.sequences.push_back(CorpusEntry{s.at("dir").get<std::string>(),
                                               s.at("style_id").get<int>(),
                                               s.at("token").get<int>(),
                                               s.at("seed").get<uint64_t>()});
    }
    return corpus;
}

std::array<double, 3> style_palette_reference(int style_id, int resolution) {
    // deterministic probe poses spanning the parameter ranges
    double acc[3] = {0.0, 0.0, 0.0};
    double count = 0.0;
    for (int i = 0; i < 9; ++i) {
        HeadParams p;
        p.style_id = style_id;
        p.yaw = -0.4 + 0.1 * i;
        p.mouth_open = (i % 3) * 0.5;
        const FrameRecord rec = render_frame(p, resolution, i);
        for (int y = 0; y < resolution; ++y) {
            for (int x = 0; x < resolution; ++x) {
                if (rec.true_mask[static_cast<size_t>(y) * resolution + x] > 0.5) {
                    for (int c = 0; c < 3; ++c) acc[c] += rec.ground_truth_rgb.at(c, y, x);
                    count += 1.0;
                }
            }
        }
    }
    return {acc[0] / count, acc[1] / count, acc[2] / count};
}

double palette_distance(const Tensor& frame_rgb, const Tensor& mask,
                        const std::array<double, 3>& reference) {
    const int H = frame_rgb.dim(1), W = frame_rgb.dim(2);
    double acc[3] = {0.0, 0.0, 0.0};
    double count = 0.0;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            if (mask[static_cast<size_t>(y) * W + x] > 0.5) {
                for (int c = 0; c < 3; ++c) acc[c] += frame_rgb.at(c, y, x);
                count += 1.0;
            }
        }
    }
    if (count == 0.0) throw std::invalid_argument("palette_distance: empty mask");
    double d2 = 0.0;
    for (int c = 0; c < 3; ++c) {
        const double d = acc[c] / count - reference[c];
        d2 += d * d;
    }
    return std::sqrt(d2);
}

}  // namespace tcdiff
