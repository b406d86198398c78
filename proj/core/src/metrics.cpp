#include "tcdiff/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace tcdiff {

using nlohmann::json;

static void check_mask(const Tensor& img, const Tensor* mask) {
    if (mask == nullptr) return;
    if (mask->ndim() != 2 || mask->dim(0) != img.dim(1) || mask->dim(1) != img.dim(2)) {
        throw std::invalid_argument("metrics: mask shape does not match image");
    }
    for (size_t i = 0; i < mask->size(); ++i) {
        if ((*mask)[i] > 0.5) return;
    }
    throw std::invalid_argument("metrics: empty mask");
}

double mse(const Tensor& pred, const Tensor& target, const Tensor* mask) {
    require_same_shape(pred, target, "mse");
    check_mask(pred, mask);
    const int C = pred.dim(0), H = pred.dim(1), W = pred.dim(2);
    double acc = 0.0, count = 0.0;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            if (mask != nullptr && (*mask)[static_cast<size_t>(y) * W + x] <= 0.5) continue;
            for (int c = 0; c < C; ++c) {
                const double d = pred.at(c, y, x) - target.at(c, y, x);
                acc += d * d;
            }
            count += C;
        }
    }
    return acc / count;
}

double psnr(const Tensor& pred, const Tensor& target, const Tensor* mask) {
    const double m = mse(pred, target, mask);
    if (m < 1e-10) return 100.0;
    return std::min(100.0, 10.0 * std::log10(1.0 / m));
}

namespace {

// per-pixel SSIM map for one channel, uniform 7x7 window clipped at borders
double ssim_channel(const Tensor& a, const Tensor& b, int ch, const Tensor* mask) {
    constexpr int kHalf = 3;
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;
    const int H = a.dim(1), W = a.dim(2);
    double acc = 0.0, count = 0.0;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            if (mask != nullptr && (*mask)[static_cast<size_t>(y) * W + x] <= 0.5) continue;
            double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0, n = 0.0;
            for (int dy = -kHalf; dy <= kHalf; ++dy) {
                const int yy = y + dy;
                if (yy < 0 || yy >= H) continue;
                for (int dx = -kHalf; dx <= kHalf; ++dx) {
                    const int xx = x + dx;
                    if (xx < 0 || xx >= W) continue;
                    const double va = a.at(ch, yy, xx), vb = b.at(ch, yy, xx);
                    sa += va;
                    sb += vb;
                    saa += va * va;
                    sbb += vb * vb;
                    sab += va * vb;
                    n += 1.0;
                }
            }
            const double ma = sa / n, mb = sb / n;
            const double va = saa / n - ma * ma;
            const double vb = sbb / n - mb * mb;
            const double cov = sab / n - ma * mb;
            const double s = ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
                             ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
            acc += s;
            count += 1.0;
        }
    }
    return acc / count;
}

}  // namespace

double ssim(const Tensor& pred, const Tensor& target, const Tensor* mask) {
    require_same_shape(pred, target, "ssim");
    check_mask(pred, mask);
    const int C = pred.dim(0);
    double acc = 0.0;
    for (int c = 0; c < C; ++c) acc += ssim_channel(pred, target, c, mask);
    return acc / C;
}

double smoothness(const std::vector<Tensor>& frames) {
    if (frames.size() < 2) {
        throw std::invalid_argument("smoothness: need at least 2 frames");
    }
    double acc = 0.0;
    for (size_t i = 0; i + 1 < frames.size(); ++i) {
        acc += mse(frames[i], frames[i + 1]);
    }
    return acc;
}

MetricReport evaluate_frames(const std::vector<Tensor>& pred, const std::vector<Tensor>& target,
                             const std::vector<Tensor>* masks, const std::string& config_ref) {
    if (pred.size() != target.size()) {
        throw std::invalid_argument("evaluate_frames: frame count mismatch");
    }
    if (masks != nullptr && masks->size() != pred.size()) {
        throw std::invalid_argument("evaluate_frames: mask count mismatch");
    }
    MetricReport rep;
    rep.config_ref = config_ref;
    for (size_t i = 0; i < pred.size(); ++i) {
        FrameMetrics fm;
        fm.frame = static_cast<int>(i);
        fm.mse = mse(pred[i], target[i]);
        fm.psnr = psnr(pred[i], target[i]);
        fm.ssim = ssim(pred[i], target[i]);
        rep.per_frame.push_back(fm);
        rep.mean_mse += fm.mse;
        rep.mean_psnr += fm.psnr;
        rep.mean_ssim += fm.ssim;
        if (masks != nullptr) {
            FrameMetrics mm;
            mm.frame = fm.frame;
            const Tensor* mask = &(*masks)[i];
            mm.mse = mse(pred[i], target[i], mask);
            mm.psnr = psnr(pred[i], target[i], mask);
            mm.ssim = ssim(pred[i], target[i], mask);
            rep.per_frame_masked.push_back(mm);
            rep.mean_mse_masked += mm.mse;
            rep.mean_psnr_masked += mm.psnr;
            rep.mean_ssim_masked += mm.ssim;
        }
    }
    const double n = static_cast<double>(pred.size());
    rep.mean_mse /= n;
    rep.mean_psnr /= n;
    rep.mean_ssim /= n;
    if (masks != nullptr) {
        rep.mean_mse_masked /= n;
        rep.mean_psnr_masked /= n;
        rep.mean_ssim_masked /= n;
    }
    if (pred.size() >= 2) rep.smoothness = smoothness(pred);
    return rep;
}

static json frame_to_json(const FrameMetrics& fm, bool masked) {
    return json{{"frame", fm.frame},
                {"masked", masked},
                {"mse", fm.mse},
                {"psnr", fm.psnr},
                {"ssim", fm.ssim}};
}

void write_report(const std::filesystem::path& reports_dir, const std::string& name,
                  const MetricReport& report) {
    std::filesystem::create_directories(reports_dir);
    {
        std::ofstream f(reports_dir / (name + ".jsonl"));
        for (const FrameMetrics& fm : report.per_frame) f << frame_to_json(fm, false).dump() << "\n";
        for (const FrameMetrics& fm : report.per_frame_masked) {
            f << frame_to_json(fm, true).dump() << "\n";
        }
        json summary{{"summary", true},
                     {"config", report.config_ref},
                     {"mean_mse", report.mean_mse},
                     {"mean_psnr", report.mean_psnr},
                     {"mean_ssim", report.mean_ssim},
                     {"smoothness", report.smoothness}};
        if (!report.per_frame_masked.empty()) {
            summary["mean_mse_masked"] = report.mean_mse_masked;
            summary["mean_psnr_masked"] = report.mean_psnr_masked;
            summary["mean_ssim_masked"] = report.mean_ssim_masked;
        }
        f << summary.dump() << "\n";
        if (!f) throw std::runtime_error("write_report: write failed");
    }
    std::ofstream t(reports_dir / (name + ".txt"));
    t << render_report_text(report);
}

std::string render_report_text(const MetricReport& report) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "config: %s\n", report.config_ref.c_str());
    out += line;
    std::snprintf(line, sizeof(line), "%-8s %-8s %12s %10s %8s\n", "frame", "masked", "mse",
                  "psnr", "ssim");
    out += line;
    auto emit = [&](const FrameMetrics& fm, const char* masked) {
        std::snprintf(line, sizeof(line), "%-8d %-8s %12.6f %10.3f %8.4f\n", fm.frame, masked,
                      fm.mse, fm.psnr, fm.ssim);
        out += line;
    };
    for (const FrameMetrics& fm : report.per_frame) emit(fm, "no");
    for (const FrameMetrics& fm : report.per_frame_masked) emit(fm, "yes");
    std::snprintf(line, sizeof(line), "mean     %-8s %12.6f %10.3f %8.4f\n", "no",
                  report.mean_mse, report.mean_psnr, report.mean_ssim);
    out += line;
    if (!report.per_frame_masked.empty()) {
        std::snprintf(line, sizeof(line), "mean     %-8s %12.6f %10.3f %8.4f\n", "yes",
                      report.mean_mse_masked, report.mean_psnr_masked, report.mean_ssim_masked);
        out += line;
    }
    std::snprintf(line, sizeof(line), "smoothness %.8f\n", report.smoothness);
    out += line;
    return out;
}

}  // namespace tcdiff
