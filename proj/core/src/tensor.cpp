#include "tcdiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tcdiff {

Tensor::Tensor(std::vector<int> shape, double fill) : shape_(std::move(shape)) {
    size_t n = 1;
    for (int d : shape_) {
        if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
        n *= static_cast<size_t>(d);
    }
    data_.assign(n, fill);
}

Tensor Tensor::zeros_like(const Tensor& other) {
    return Tensor(other.shape_, 0.0);
}

std::string Tensor::shape_str() const {
    std::string s = "(";
    for (size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape_[i]);
    }
    return s + ")";
}

void Tensor::fill(double v) {
    std::fill(data_.begin(), data_.end(), v);
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double Tensor::min_value() const {
    return *std::min_element(data_.begin(), data_.end());
}

double Tensor::max_value() const {
    return *std::max_element(data_.begin(), data_.end());
}

double Tensor::mean() const {
    if (data_.empty()) return 0.0;
    double s = 0.0;
    for (double v : data_) s += v;
    return s / static_cast<double>(data_.size());
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.shape_str() +
                                    " vs " + b.shape_str());
    }
}

Tensor operator+(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "tensor add");
    Tensor out = a;
    for (size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "tensor sub");
    Tensor out = a;
    for (size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

Tensor operator*(const Tensor& a, double s) {
    Tensor out = a;
    for (size_t i = 0; i < out.size(); ++i) out[i] *= s;
    return out;
}

void add_inplace(Tensor& dst, const Tensor& src) {
    require_same_shape(dst, src, "tensor add_inplace");
    for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void axpy(Tensor& dst, double a, const Tensor& x) {
    require_same_shape(dst, x, "tensor axpy");
    for (size_t i = 0; i < dst.size(); ++i) dst[i] += a * x[i];
}

void scale_inplace(Tensor& t, double s) {
    for (size_t i = 0; i < t.size(); ++i) t[i] *= s;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

double mean_sq_diff(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mean_sq_diff");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return a.size() ? s / static_cast<double>(a.size()) : 0.0;
}

}  // namespace tcdiff
