#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace octo {

/// Row-major dense matrix of doubles. All kernels in this module accumulate
/// in a fixed ascending order, and every output row depends only on the
/// matching input rows, so per-row results do not change with the number of
/// rows in the batch. The sampler relies on this to reproduce teacher-forced
/// values bit for bit.
struct Matrix {
    size_t rows = 0, cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(size_t r, size_t c) { return data[r * cols + c]; }
    double at(size_t r, size_t c) const { return data[r * cols + c]; }
    double* row_ptr(size_t r) { return data.data() + r * cols; }
    const double* row_ptr(size_t r) const { return data.data() + r * cols; }
    size_t size() const { return rows * cols; }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

/// A named learnable tensor with gradient and optimizer slots.
struct Param {
    std::string name;
    Matrix value;
    Matrix grad;
    Matrix adam_m;
    Matrix adam_v;

    Param(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)) {
        grad = Matrix(value.rows, value.cols);
    }
    void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

class Tape;

struct Node {
    Matrix value;
    Matrix grad; // allocated on demand
    std::function<void()> back;
    bool needs_grad = false;

    void ensure_grad() {
        if (grad.rows != value.rows || grad.cols != value.cols) grad = Matrix(value.rows, value.cols);
    }
};

using Var = Node*;

/// Reverse-mode tape. Creation order is a topological order, so backward is a
/// single reverse sweep. With gradients disabled the same kernels run and only
/// the closures are skipped.
class Tape {
public:
    explicit Tape(bool grad_enabled = true) : grad_(grad_enabled) {}

    bool grad_enabled() const noexcept { return grad_; }
    size_t node_count() const noexcept { return nodes_.size(); }
    void clear() { nodes_.clear(); }

    Var constant(Matrix v);
    Var param(Param& p);

    Var add(Var a, Var b);
    Var scale(Var a, double s);
    Var matmul(Var a, Var b);    // a (m x k) * b (k x n)
    Var matmul_nt(Var a, Var b); // a (m x k) * b^T (n x k) -> m x n
    Var linear(Var x, Var w, Var b); // x*w + row-broadcast bias (1 x n)

    Var flatten_row(Var a);               // r x c -> 1 x (r*c)
    Var unflatten(Var a, size_t r, size_t c); // 1 x (r*c) -> r x c
    Var slice_rows(Var a, size_t r0, size_t r1);
    Var row(Var a, size_t r) { return slice_rows(a, r, r + 1); }
    Var slice_cols(Var a, size_t c0, size_t c1);
    Var concat_rows(const std::vector<Var>& parts);
    Var concat_cols(const std::vector<Var>& parts);
    Var gather_rows(Var table, std::vector<int> idx);

    Var layer_norm(Var x, Var gain, Var bias, double eps);
    Var gelu(Var x);
    Var dropout(Var x, const Matrix& keep_mask); // mask entries are 0 or 1/(1-rate)
    Var causal_softmax(Var scores);              // row t normalizes over columns <= t
    Var nll_row(Var logits, int target);         // 1 x n logits -> 1 x 1 loss
    Var sum_scaled(const std::vector<Var>& xs, const std::vector<double>& ws); // 1x1 terms

    void backward(Var root);

private:
    Var make(Matrix v);

    std::vector<std::unique_ptr<Node>> nodes_;
    bool grad_;
};

// Value-level helpers shared by tape ops and plain evaluation.
void softmax_inplace(double* x, size_t n);
double log_sum_exp(const double* x, size_t n);

} // namespace octo
