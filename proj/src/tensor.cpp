#include "dtcn/tensor.hpp"

#include <cmath>
#include <utility>

namespace dtcn {

Tensor Tensor::from_vector(std::vector<double> v) {
    Tensor t;
    t.shape_ = {v.size()};
    t.data_ = std::move(v);
    return t;
}

Tensor Tensor::scalar(double v) {
    Tensor t(std::size_t{1});
    t[0] = v;
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor::fill(double v) {
    for (double& x : data_) x = v;
}

void gemm_acc(const Tensor& a, const Tensor& b, Tensor& c) {
    const std::size_t m = a.rows() == 0 ? 1 : (a.rank() == 1 ? 1 : a.rows());
    const std::size_t k = a.rank() == 1 ? a.cols() : a.shape()[1];
    const std::size_t n = b.shape()[1];
    const double* ap = a.data();
    const double* bp = b.data();
    double* cp = c.data();
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = cp + i * n;
        const double* arow = ap + i * k;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            const double* brow = bp + kk * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void gemm_nt_acc(const Tensor& a, const Tensor& b, Tensor& c) {
    const std::size_t m = a.rank() == 1 ? 1 : a.rows();
    const std::size_t n = a.rank() == 1 ? a.cols() : a.shape()[1];
    const std::size_t k = b.rows();
    const double* ap = a.data();
    const double* bp = b.data();
    double* cp = c.data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = ap + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double* brow = bp + kk * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
            cp[i * k + kk] += acc;
        }
    }
}

void gemm_tn_acc(const Tensor& a, const Tensor& b, Tensor& c) {
    const std::size_t m = a.rank() == 1 ? 1 : a.rows();
    const std::size_t k = a.rank() == 1 ? a.cols() : a.shape()[1];
    const std::size_t n = b.rank() == 1 ? b.cols() : b.shape()[1];
    const double* ap = a.data();
    const double* bp = b.data();
    double* cp = c.data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = ap + i * k;
        const double* brow = bp + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            double* crow = cp + kk * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

}  // namespace dtcn
