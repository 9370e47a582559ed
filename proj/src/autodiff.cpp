#include "dtcn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dtcn {

namespace {

void check_finite(const Tensor& t, const char* op_name) {
    if (!t.all_finite()) {
        throw std::runtime_error(std::string("non-finite result in ") + op_name);
    }
}

bool needs_grad(const std::vector<Var>& parents) {
    for (const auto& p : parents) {
        if (p->requires_grad) return true;
    }
    return false;
}

Tensor zeros_like(const Tensor& t) {
    Tensor z;
    if (t.rank() == 1) z = Tensor(t.size());
    else z = Tensor(t.rows(), t.shape()[1]);
    return z;
}

}  // namespace

Var make_param(Tensor value) {
    auto n = std::make_shared<TapeNode>();
    n->grad = zeros_like(value);
    n->value = std::move(value);
    n->requires_grad = true;
    return n;
}

Var make_const(Tensor value) {
    auto n = std::make_shared<TapeNode>();
    n->value = std::move(value);
    return n;
}

double hard_sigmoid_scalar(double x) {
    return std::clamp(0.2 * x + 0.5, 0.0, 1.0);
}

Var Tape::emit(Tensor value, std::vector<Var> parents,
               std::function<void(TapeNode&)> bp, const char* op_name) {
    check_finite(value, op_name);
    auto n = std::make_shared<TapeNode>();
    if (recording_ && needs_grad(parents)) {
        n->grad = zeros_like(value);
        n->requires_grad = true;
        n->parents = std::move(parents);
        n->backprop = std::move(bp);
        n->value = std::move(value);
        order_.push_back(n);
    } else {
        n->value = std::move(value);
    }
    return n;
}

Var Tape::matmul(Var a, Var b) {
    if (b->value.rank() != 2) throw std::invalid_argument("matmul: rhs must be 2-D");
    const std::size_t k = a->value.rank() == 1 ? a->value.size() : a->value.shape()[1];
    if (k != b->value.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
    const std::size_t n = b->value.shape()[1];
    Tensor out = a->value.rank() == 1 ? Tensor(n) : Tensor(a->value.rows(), n);
    gemm_acc(a->value, b->value, out);
    auto bp = [](TapeNode& self) {
        const Var& a = self.parents[0];
        const Var& b = self.parents[1];
        if (a->requires_grad) gemm_nt_acc(self.grad, b->value, a->grad);
        if (b->requires_grad) gemm_tn_acc(a->value, self.grad, b->grad);
    };
    return emit(std::move(out), {std::move(a), std::move(b)}, bp, "matmul");
}

Var Tape::add(Var a, Var b) {
    const bool bias = a->value.rank() == 2 && b->value.rank() == 1 &&
                      a->value.shape()[1] == b->value.size();
    if (!bias && !a->value.same_shape(b->value)) {
        throw std::invalid_argument("add: shape mismatch");
    }
    Tensor out = a->value;
    if (bias) {
        const std::size_t n = b->value.size();
        for (std::size_t i = 0; i < out.rows(); ++i) {
            for (std::size_t j = 0; j < n; ++j) out.at(i, j) += b->value[j];
        }
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += b->value[i];
    }
    auto bp = [bias](TapeNode& self) {
        const Var& a = self.parents[0];
        const Var& b = self.parents[1];
        if (a->requires_grad) {
            for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad[i] += self.grad[i];
        }
        if (b->requires_grad) {
            if (bias) {
                const std::size_t n = b->grad.size();
                for (std::size_t i = 0; i < self.grad.rows(); ++i) {
                    for (std::size_t j = 0; j < n; ++j) b->grad[j] += self.grad.at(i, j);
                }
            } else {
                for (std::size_t i = 0; i < b->grad.size(); ++i) b->grad[i] += self.grad[i];
            }
        }
    };
    return emit(std::move(out), {std::move(a), std::move(b)}, bp, "add");
}

Var Tape::sub(Var a, Var b) {
    if (!a->value.same_shape(b->value)) throw std::invalid_argument("sub: shape mismatch");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b->value[i];
    auto bp = [](TapeNode& self) {
        const Var& a = self.parents[0];
        const Var& b = self.parents[1];
        if (a->requires_grad) {
            for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad[i] += self.grad[i];
        }
        if (b->requires_grad) {
            for (std::size_t i = 0; i < b->grad.size(); ++i) b->grad[i] -= self.grad[i];
        }
    };
    return emit(std::move(out), {std::move(a), std::move(b)}, bp, "sub");
}

Var Tape::mul(Var a, Var b) {
    if (!a->value.same_shape(b->value)) throw std::invalid_argument("mul: shape mismatch");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b->value[i];
    auto bp = [](TapeNode& self) {
        const Var& a = self.parents[0];
        const Var& b = self.parents[1];
        if (a->requires_grad) {
            for (std::size_t i = 0; i < a->grad.size(); ++i)
                a->grad[i] += self.grad[i] * b->value[i];
        }
        if (b->requires_grad) {
            for (std::size_t i = 0; i < b->grad.size(); ++i)
                b->grad[i] += self.grad[i] * a->value[i];
        }
    };
    return emit(std::move(out), {std::move(a), std::move(b)}, bp, "mul");
}

Var Tape::scale(Var a, double s) {
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
    auto bp = [s](TapeNode& self) {
        const Var& a = self.parents[0];
        if (a->requires_grad) {
            for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad[i] += s * self.grad[i];
        }
    };
    return emit(std::move(out), {std::move(a)}, bp, "scale");
}

Var Tape::tanh_(Var a) {
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
    auto bp = [](TapeNode& self) {
        const Var& a = self.parents[0];
        if (!a->requires_grad) return;
        for (std::size_t i = 0; i < a->grad.size(); ++i) {
            const double y = self.value[i];
            a->grad[i] += self.grad[i] * (1.0 - y * y);
        }
    };
    return emit(std::move(out), {std::move(a)}, bp, "tanh");
}

Var Tape::sigmoid_(Var a) {
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
    auto bp = [](TapeNode& self) {
        const Var& a = self.parents[0];
        if (!a->requires_grad) return;
        for (std::size_t i = 0; i < a->grad.size(); ++i) {
            const double y = self.value[i];
            a->grad[i] += self.grad[i] * y * (1.0 - y);
        }
    };
    return emit(std::move(out), {std::move(a)}, bp, "sigmoid");
}

Var Tape::hard_sigmoid_(Var a) {
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = hard_sigmoid_scalar(out[i]);
    auto bp = [](TapeNode& self) {
        const Var& a = self.parents[0];
        if (!a->requires_grad) return;
        for (std::size_t i = 0; i < a->grad.size(); ++i) {
            const double x = a->value[i];
            const double z = 0.2 * x + 0.5;
            if (z > 0.0 && z < 1.0) a->grad[i] += 0.2 * self.grad[i];
        }
    };
    return emit(std::move(out), {std::move(a)}, bp, "hard_sigmoid");
}

Var Tape::softmax(Var a) {
    Tensor out = a->value;
    const std::size_t rows = out.rank() == 2 ? out.rows() : 1;
    const std::size_t n = out.rank() == 2 ? out.shape()[1] : out.size();
    if (n == 0) throw std::invalid_argument("softmax: empty axis");
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = out.data() + r * n;
        double mx = row[0];
        for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
    }
    auto bp = [rows, n](TapeNode& self) {
        const Var& a = self.parents[0];
        if (!a->requires_grad) return;
        for (std::size_t r = 0; r < rows; ++r) {
            const double* y = self.value.data() + r * n;
            const double* dy = self.grad.data() + r * n;
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += y[j] * dy[j];
            double* da = a->grad.data() + r * n;
            for (std::size_t j = 0; j < n; ++j) da[j] += y[j] * (dy[j] - dot);
        }
    };
    return emit(std::move(out), {std::move(a)}, bp, "softmax");
}

Var Tape::concat(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat: no inputs");
    std::size_t total = 0;
    for (const auto& p : parts) {
        if (p->value.rank() != 1) throw std::invalid_argument("concat: 1-D inputs only");
        total += p->value.size();
    }
    Tensor out(total);
    std::size_t off = 0;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < p->value.size(); ++i) out[off + i] = p->value[i];
        off += p->value.size();
    }
    auto bp = [](TapeNode& self) {
        std::size_t off = 0;
        for (const auto& p : self.parents) {
            if (p->requires_grad) {
                for (std::size_t i = 0; i < p->grad.size(); ++i)
                    p->grad[i] += self.grad[off + i];
            }
            off += p->value.size();
        }
    };
    return emit(std::move(out), parts, bp, "concat");
}

Var Tape::row(Var a, std::size_t i) {
    if (a->value.rank() != 2 || i >= a->value.rows()) {
        throw std::invalid_argument("row: bad index or rank");
    }
    const std::size_t n = a->value.shape()[1];
    Tensor out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = a->value.at(i, j);
    auto bp = [i, n](TapeNode& self) {
        const Var& a = self.parents[0];
        if (!a->requires_grad) return;
        for (std::size_t j = 0; j < n; ++j) a->grad.at(i, j) += self.grad[j];
    };
    return emit(std::move(out), {std::move(a)}, bp, "row");
}

Var Tape::slice(Var a, std::size_t start, std::size_t len) {
    if (a->value.rank() != 1 || start + len > a->value.size()) {
        throw std::invalid_argument("slice: out of range");
    }
    Tensor out(len);
    for (std::size_t j = 0; j < len; ++j) out[j] = a->value[start + j];
    auto bp = [start, len](TapeNode& self) {
        const Var& a = self.parents[0];
        if (!a->requires_grad) return;
        for (std::size_t j = 0; j < len; ++j) a->grad[start + j] += self.grad[j];
    };
    return emit(std::move(out), {std::move(a)}, bp, "slice");
}

Var Tape::sum(Var a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a->value.size(); ++i) s += a->value[i];
    auto bp = [](TapeNode& self) {
        const Var& a = self.parents[0];
        if (!a->requires_grad) return;
        const double g = self.grad[0];
        for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad[i] += g;
    };
    return emit(Tensor::scalar(s), {std::move(a)}, bp, "sum");
}

Var Tape::mean_squared_error(Var a, Var b) {
    if (!a->value.same_shape(b->value)) throw std::invalid_argument("mse: shape mismatch");
    const std::size_t n = a->value.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a->value[i] - b->value[i];
        s += d * d;
    }
    auto bp = [n](TapeNode& self) {
        const Var& a = self.parents[0];
        const Var& b = self.parents[1];
        const double g = self.grad[0] * 2.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = a->value[i] - b->value[i];
            if (a->requires_grad) a->grad[i] += g * d;
            if (b->requires_grad) b->grad[i] -= g * d;
        }
    };
    return emit(Tensor::scalar(s / static_cast<double>(n)),
                {std::move(a), std::move(b)}, bp, "mean_squared_error");
}

Var Tape::weighted_sum(const std::vector<Var>& items, const std::vector<double>& w) {
    if (items.empty() || items.size() != w.size()) {
        throw std::invalid_argument("weighted_sum: bad arity");
    }
    const std::size_t n = items[0]->value.size();
    Tensor out(n);
    for (std::size_t j = 0; j < items.size(); ++j) {
        if (!items[j]->value.same_shape(items[0]->value)) {
            throw std::invalid_argument("weighted_sum: shape mismatch");
        }
        for (std::size_t i = 0; i < n; ++i) out[i] += w[j] * items[j]->value[i];
    }
    auto weights = w;
    auto bp = [weights](TapeNode& self) {
        for (std::size_t j = 0; j < self.parents.size(); ++j) {
            const Var& p = self.parents[j];
            if (!p->requires_grad) continue;
            for (std::size_t i = 0; i < p->grad.size(); ++i)
                p->grad[i] += weights[j] * self.grad[i];
        }
    };
    return emit(std::move(out), items, bp, "weighted_sum");
}

Var Tape::dropout(Var a, double rate, bool training, std::mt19937_64& rng) {
    if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
    if (!training || rate == 0.0) return a;
    const double keep = 1.0 - rate;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    auto mask = std::make_shared<std::vector<double>>(a->value.size());
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double m = uni(rng) < rate ? 0.0 : 1.0 / keep;
        (*mask)[i] = m;
        out[i] *= m;
    }
    auto bp = [mask](TapeNode& self) {
        const Var& a = self.parents[0];
        if (!a->requires_grad) return;
        for (std::size_t i = 0; i < a->grad.size(); ++i)
            a->grad[i] += self.grad[i] * (*mask)[i];
    };
    return emit(std::move(out), {std::move(a)}, bp, "dropout");
}

void Tape::backward(const Var& loss) {
    if (loss->value.size() != 1) {
        throw std::invalid_argument("backward: loss must be scalar");
    }
    if (backward_done_) throw std::logic_error("backward: already run on this tape");
    backward_done_ = true;
    if (!loss->requires_grad) return;  // loss unreachable from any parameter
    loss->grad[0] = 1.0;
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        TapeNode& n = **it;
        if (n.requires_grad && n.backprop) n.backprop(n);
    }
}

}  // namespace dtcn
