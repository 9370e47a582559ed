// Dense row-major tensors (rank 1 and 2) with the handful of BLAS-like
// kernels the network needs.
#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace dtcn {

class Tensor {
public:
    Tensor() = default;
    // 1-D of zeros
    explicit Tensor(std::size_t n) : shape_{n}, data_(n, 0.0) {}
    // 2-D of zeros
    Tensor(std::size_t rows, std::size_t cols)
        : shape_{rows, cols}, data_(rows * cols, 0.0) {}

    static Tensor from_vector(std::vector<double> v);
    static Tensor scalar(double v);

    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t cols() const { return rank() == 2 ? shape_[1] : (rank() == 1 ? shape_[0] : 0); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool all_finite() const;
    void fill(double v);

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// C += A * B           (A: m x k, B: k x n)
void gemm_acc(const Tensor& a, const Tensor& b, Tensor& c);
// C += A * B^T         (A: m x n, B: k x n -> C: m x k)
void gemm_nt_acc(const Tensor& a, const Tensor& b, Tensor& c);
// C += A^T * B         (A: m x k, B: m x n -> C: k x n)
void gemm_tn_acc(const Tensor& a, const Tensor& b, Tensor& c);

}  // namespace dtcn
