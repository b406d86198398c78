#ifndef TCDIFF_METRICS_HPP
#define TCDIFF_METRICS_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tcdiff/tensor.hpp"

namespace tcdiff {

// Standard image metrics on [0,1] tensors (C,H,W). Masked variants average
// only where mask = 1; the mask is (H,W) and applies to every channel.

double mse(const Tensor& pred, const Tensor& target, const Tensor* mask = nullptr);
// 10*log10(1/MSE), capped at 100 dB when MSE < 1e-10
double psnr(const Tensor& pred, const Tensor& target, const Tensor* mask = nullptr);
// uniform 7x7 window, k1=0.01, k2=0.03, L=1; channel-averaged
double ssim(const Tensor& pred, const Tensor& target, const Tensor* mask = nullptr);

// sum over consecutive pairs of their MSE; lower is smoother
double smoothness(const std::vector<Tensor>& frames);

struct FrameMetrics {
    int frame = 0;
    double mse = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
};

struct MetricReport {
    std::vector<FrameMetrics> per_frame;         // unmasked
    std::vector<FrameMetrics> per_frame_masked;  // empty when no masks given
    double mean_mse = 0.0, mean_psnr = 0.0, mean_ssim = 0.0;
    double mean_mse_masked = 0.0, mean_psnr_masked = 0.0, mean_ssim_masked = 0.0;
    double smoothness = 0.0;
    std::string config_ref;
};

MetricReport evaluate_frames(const std::vector<Tensor>& pred, const std::vector<Tensor>& target,
                             const std::vector<Tensor>* masks, const std::string& config_ref);

// reports/<name>.jsonl (one object per frame + a summary line) and
// reports/<name>.txt (aligned table)
void write_report(const std::filesystem::path& reports_dir, const std::string& name,
                  const MetricReport& report);

std::string render_report_text(const MetricReport& report);

}  // namespace tcdiff

#endif
