#ifndef TCDIFF_TENSOR_HPP
#define TCDIFF_TENSOR_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace tcdiff {

// Dense row-major double tensor. Images and feature maps use (channels, height,
// width); flat parameter vectors use a single dimension.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape, double fill = 0.0);

    static Tensor zeros_like(const Tensor& other);

    int ndim() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    const std::vector<int>& shape() const { return shape_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](size_t i) { return data_[i]; }
    double operator[](size_t i) const { return data_[i]; }

    // (c, y, x) accessor for 3-d tensors
    double& at(int c, int y, int x) {
        return data_[(static_cast<size_t>(c) * shape_[1] + y) * shape_[2] + x];
    }
    double at(int c, int y, int x) const {
        return data_[(static_cast<size_t>(c) * shape_[1] + y) * shape_[2] + x];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    std::string shape_str() const;

    void fill(double v);
    bool all_finite() const;
    double min_value() const;
    double max_value() const;
    double mean() const;

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

// elementwise helpers, all shape-checked
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(const Tensor& a, double s);
void add_inplace(Tensor& dst, const Tensor& src);
void axpy(Tensor& dst, double a, const Tensor& x);  // dst += a * x
void scale_inplace(Tensor& t, double s);
double max_abs_diff(const Tensor& a, const Tensor& b);
double mean_sq_diff(const Tensor& a, const Tensor& b);
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace tcdiff

#endif
