#include "tensor.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>

namespace octo {

namespace {

// out (m x n) += a (m x k) * b (k x n); accumulation over k is ascending.
void mm_acc(const Matrix& a, const Matrix& b, Matrix& out) {
    for (size_t i = 0; i < a.rows; ++i) {
        double* o = out.row_ptr(i);
        const double* ar = a.row_ptr(i);
        for (size_t k = 0; k < a.cols; ++k) {
            double av = ar[k];
            const double* br = b.row_ptr(k);
            for (size_t j = 0; j < b.cols; ++j) o[j] += av * br[j];
        }
    }
}

// out (m x n) += a (m x k) * b^T with b (n x k).
void mm_nt_acc(const Matrix& a, const Matrix& b, Matrix& out) {
    for (size_t i = 0; i < a.rows; ++i) {
        const double* ar = a.row_ptr(i);
        double* o = out.row_ptr(i);
        for (size_t j = 0; j < b.rows; ++j) {
            const double* br = b.row_ptr(j);
            double s = 0.0;
            for (size_t k = 0; k < a.cols; ++k) s += ar[k] * br[k];
            o[j] += s;
        }
    }
}

// out (k x n) += a^T * c with a (m x k), c (m x n).
void mm_tn_acc(const Matrix& a, const Matrix& c, Matrix& out) {
    for (size_t i = 0; i < a.rows; ++i) {
        const double* ar = a.row_ptr(i);
        const double* cr = c.row_ptr(i);
        for (size_t k = 0; k < a.cols; ++k) {
            double av = ar[k];
            double* o = out.row_ptr(k);
            for (size_t j = 0; j < c.cols; ++j) o[j] += av * cr[j];
        }
    }
}

void add_acc(const Matrix& src, Matrix& dst) {
    for (size_t i = 0; i < src.data.size(); ++i) dst.data[i] += src.data[i];
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

} // namespace

void softmax_inplace(double* x, size_t n) {
    double m = x[0];
    for (size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) {
        x[i] = std::exp(x[i] - m);
        s += x[i];
    }
    for (size_t i = 0; i < n; ++i) x[i] /= s;
}

double log_sum_exp(const double* x, size_t n) {
    double m = x[0];
    for (size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += std::exp(x[i] - m);
    return m + std::log(s);
}

Var Tape::make(Matrix v) {
    nodes_.push_back(std::make_unique<Node>());
    Node* n = nodes_.back().get();
    n->value = std::move(v);
    return n;
}

Var Tape::constant(Matrix v) { return make(std::move(v)); }

Var Tape::param(Param& p) {
    Var n = make(p.value);
    if (grad_) {
        n->needs_grad = true;
        Param* pp = &p;
        n->back = [n, pp]() { add_acc(n->grad, pp->grad); };
    }
    return n;
}

Var Tape::add(Var a, Var b) {
    if (!a->value.same_shape(b->value)) throw_invalid("add: shape mismatch");
    Matrix v = a->value;
    add_acc(b->value, v);
    Var n = make(std::move(v));
    if (grad_ && (a->needs_grad || b->needs_grad)) {
        n->needs_grad = true;
        n->back = [n, a, b]() {
            if (a->needs_grad) { a->ensure_grad(); add_acc(n->grad, a->grad); }
            if (b->needs_grad) { b->ensure_grad(); add_acc(n->grad, b->grad); }
        };
    }
    return n;
}

Var Tape::scale(Var a, double s) {
    Matrix v = a->value;
    for (double& x : v.data) x *= s;
    Var n = make(std::move(v));
    if (grad_ && a->needs_grad) {
        n->needs_grad = true;
        n->back = [n, a, s]() {
            a->ensure_grad();
            for (size_t i = 0; i < n->grad.data.size(); ++i) a->grad.data[i] += s * n->grad.data[i];
        };
    }
    return n;
}

Var Tape::matmul(Var a, Var b) {
    if (a->value.cols != b->value.rows) throw_invalid("matmul: inner dimension mismatch");
    Matrix v(a->value.rows, b->value.cols);
    mm_acc(a->value, b->value, v);
    Var n = make(std::move(v));
    if (grad_ && (a->needs_grad || b->needs_grad)) {
        n->needs_grad = true;
        n->back = [n, a, b]() {
            if (a->needs_grad) { a->ensure_grad(); mm_nt_acc(n->grad, b->value, a->grad); }
            if (b->needs_grad) { b->ensure_grad(); mm_tn_acc(a->value, n->grad, b->grad); }
        };
    }
    return n;
}

Var Tape::matmul_nt(Var a, Var b) {
    if (a->value.cols != b->value.cols) throw_invalid("matmul_nt: inner dimension mismatch");
    Matrix v(a->value.rows, b->value.rows);
    mm_nt_acc(a->value, b->value, v);
    Var n = make(std::move(v));
    if (grad_ && (a->needs_grad || b->needs_grad)) {
        n->needs_grad = true;
        n->back = [n, a, b]() {
            if (a->needs_grad) { a->ensure_grad(); mm_acc(n->grad, b->value, a->grad); }
            if (b->needs_grad) { b->ensure_grad(); mm_tn_acc(n->grad, a->value, b->grad); }
        };
    }
    return n;
}

Var Tape::linear(Var x, Var w, Var b) {
    if (x->value.cols != w->value.rows || b->value.rows != 1 || b->value.cols != w->value.cols)
        throw_invalid("linear: shape mismatch");
    Matrix v(x->value.rows, w->value.cols);
    for (size_t i = 0; i < v.rows; ++i)
        for (size_t j = 0; j < v.cols; ++j) v.at(i, j) = b->value.at(0, j);
    mm_acc(x->value, w->value, v);
    Var n = make(std::move(v));
    if (grad_ && (x->needs_grad || w->needs_grad || b->needs_grad)) {
        n->needs_grad = true;
        n->back = [n, x, w, b]() {
            if (x->needs_grad) { x->ensure_grad(); mm_nt_acc(n->grad, w->value, x->grad); }
            if (w->needs_grad) { w->ensure_grad(); mm_tn_acc(x->value, n->grad, w->grad); }
            if (b->needs_grad) {
                b->ensure_grad();
                for (size_t i = 0; i < n->grad.rows; ++i)
                    for (size_t j = 0; j < n->grad.cols; ++j) b->grad.at(0, j) += n->grad.at(i, j);
            }
        };
    }
    return n;
}

Var Tape::flatten_row(Var a) {
    Matrix v(1, a->value.size());
    v.data = a->value.data;
    Var n = make(std::move(v));
    if (grad_ && a->needs_grad) {
        n->needs_grad = true;
        n->back = [n, a]() {
            a->ensure_grad();
            for (size_t i = 0; i < n->grad.data.size(); ++i) a->grad.data[i] += n->grad.data[i];
        };
    }
    return n;
}

Var Tape::unflatten(Var a, size_t r, size_t c) {
    if (a->value.size() != r * c) throw_invalid("unflatten: element count mismatch");
    Matrix v(r, c);
    v.data = a->value.data;
    Var n = make(std::move(v));
    if (grad_ && a->needs_grad) {
        n->needs_grad = true;
        n->back = [n, a]() {
            a->ensure_grad();
            for (size_t i = 0; i < n->grad.data.size(); ++i) a->grad.data[i] += n->grad.data[i];
        };
    }
    return n;
}

Var Tape::slice_rows(Var a, size_t r0, size_t r1) {
    if (r0 > r1 || r1 > a->value.rows) throw_invalid("slice_rows: bad range");
    Matrix v(r1 - r0, a->value.cols);
    std::copy(a->value.row_ptr(r0), a->value.row_ptr(r0) + v.size(), v.data.begin());
    Var n = make(std::move(v));
    if (grad_ && a->needs_grad) {
        n->needs_grad = true;
        n->back = [n, a, r0]() {
            a->ensure_grad();
            double* dst = a->grad.row_ptr(r0);
            for (size_t i = 0; i < n->grad.data.size(); ++i) dst[i] += n->grad.data[i];
        };
    }
    return n;
}

Var Tape::slice_cols(Var a, size_t c0, size_t c1) {
    if (c0 > c1 || c1 > a->value.cols) throw_invalid("slice_cols: bad range");
    Matrix v(a->value.rows, c1 - c0);
    for (size_t i = 0; i < v.rows; ++i)
        std::copy(a->value.row_ptr(i) + c0, a->value.row_ptr(i) + c1, v.row_ptr(i));
    Var n = make(std::move(v));
    if (grad_ && a->needs_grad) {
        n->needs_grad = true;
        n->back = [n, a, c0]() {
            a->ensure_grad();
            for (size_t i = 0; i < n->grad.rows; ++i) {
                const double* src = n->grad.row_ptr(i);
                double* dst = a->grad.row_ptr(i) + c0;
                for (size_t j = 0; j < n->grad.cols; ++j) dst[j] += src[j];
            }
        };
    }
    return n;
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw_invalid("concat_rows: no parts");
    size_t rows = 0;
    size_t cols = parts[0]->value.cols;
    for (Var p : parts) {
        if (p->value.cols != cols) throw_invalid("concat_rows: column mismatch");
        rows += p->value.rows;
    }
    Matrix v(rows, cols);
    size_t r = 0;
    for (Var p : parts) {
        std::copy(p->value.data.begin(), p->value.data.end(), v.row_ptr(r));
        r += p->value.rows;
    }
    Var n = make(std::move(v));
    bool any = false;
    for (Var p : parts) any = any || p->needs_grad;
    if (grad_ && any) {
        n->needs_grad = true;
        std::vector<Var> ps = parts;
        n->back = [n, ps]() {
            size_t r = 0;
            for (Var p : ps) {
                if (p->needs_grad) {
                    p->ensure_grad();
                    const double* src = n->grad.row_ptr(r);
                    for (size_t i = 0; i < p->grad.data.size(); ++i) p->grad.data[i] += src[i];
                }
                r += p->value.rows;
            }
        };
    }
    return n;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw_invalid("concat_cols: no parts");
    size_t rows = parts[0]->value.rows;
    size_t cols = 0;
    for (Var p : parts) {
        if (p->value.rows != rows) throw_invalid("concat_cols: row mismatch");
        cols += p->value.cols;
    }
    Matrix v(rows, cols);
    size_t c = 0;
    for (Var p : parts) {
        for (size_t i = 0; i < rows; ++i)
            std::copy(p->value.row_ptr(i), p->value.row_ptr(i) + p->value.cols, v.row_ptr(i) + c);
        c += p->value.cols;
    }
    Var n = make(std::move(v));
    bool any = false;
    for (Var p : parts) any = any || p->needs_grad;
    if (grad_ && any) {
        n->needs_grad = true;
        std::vector<Var> ps = parts;
        n->back = [n, ps]() {
            size_t c = 0;
            for (Var p : ps) {
                if (p->needs_grad) {
                    p->ensure_grad();
                    for (size_t i = 0; i < p->grad.rows; ++i) {
                        const double* src = n->grad.row_ptr(i) + c;
                        double* dst = p->grad.row_ptr(i);
                        for (size_t j = 0; j < p->grad.cols; ++j) dst[j] += src[j];
                    }
                }
                c += p->value.cols;
            }
        };
    }
    return n;
}

Var Tape::gather_rows(Var table, std::vector<int> idx) {
    Matrix v(idx.size(), table->value.cols);
    for (size_t i = 0; i < idx.size(); ++i) {
        int r = idx[i];
        if (r < 0 || size_t(r) >= table->value.rows) throw_invalid("gather_rows: index out of range");
        std::copy(table->value.row_ptr(size_t(r)), table->value.row_ptr(size_t(r)) + v.cols, v.row_ptr(i));
    }
    Var n = make(std::move(v));
    if (grad_ && table->needs_grad) {
        n->needs_grad = true;
        n->back = [n, table, idx = std::move(idx)]() {
            table->ensure_grad();
            for (size_t i = 0; i < idx.size(); ++i) {
                const double* src = n->grad.row_ptr(i);
                double* dst = table->grad.row_ptr(size_t(idx[i]));
                for (size_t j = 0; j < n->grad.cols; ++j) dst[j] += src[j];
            }
        };
    }
    return n;
}

Var Tape::layer_norm(Var x, Var gain, Var bias, double eps) {
    size_t cols = x->value.cols;
    if (gain->value.cols != cols || bias->value.cols != cols || gain->value.rows != 1 || bias->value.rows != 1)
        throw_invalid("layer_norm: shape mismatch");
    Matrix v(x->value.rows, cols);
    Matrix xhat(x->value.rows, cols);
    std::vector<double> inv_std(x->value.rows);
    for (size_t i = 0; i < v.rows; ++i) {
        const double* xr = x->value.row_ptr(i);
        double mean = 0.0;
        for (size_t j = 0; j < cols; ++j) mean += xr[j];
        mean /= double(cols);
        double var = 0.0;
        for (size_t j = 0; j < cols; ++j) {
            double d = xr[j] - mean;
            var += d * d;
        }
        var /= double(cols);
        double is = 1.0 / std::sqrt(var + eps);
        inv_std[i] = is;
        double* hr = xhat.row_ptr(i);
        double* vr = v.row_ptr(i);
        for (size_t j = 0; j < cols; ++j) {
            hr[j] = (xr[j] - mean) * is;
            vr[j] = hr[j] * gain->value.at(0, j) + bias->value.at(0, j);
        }
    }
    Var n = make(std::move(v));
    if (grad_ && (x->needs_grad || gain->needs_grad || bias->needs_grad)) {
        n->needs_grad = true;
        n->back = [n, x, gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std)]() {
            size_t cols = n->value.cols;
            for (size_t i = 0; i < n->grad.rows; ++i) {
                const double* go = n->grad.row_ptr(i);
                const double* hr = xhat.row_ptr(i);
                if (gain->needs_grad) {
                    gain->ensure_grad();
                    for (size_t j = 0; j < cols; ++j) gain->grad.at(0, j) += go[j] * hr[j];
                }
                if (bias->needs_grad) {
                    bias->ensure_grad();
                    for (size_t j = 0; j < cols; ++j) bias->grad.at(0, j) += go[j];
                }
                if (x->needs_grad) {
                    x->ensure_grad();
                    double sum_g = 0.0, sum_gh = 0.0;
                    for (size_t j = 0; j < cols; ++j) {
                        double gj = go[j] * gain->value.at(0, j);
                        sum_g += gj;
                        sum_gh += gj * hr[j];
                    }
                    double* xg = x->grad.row_ptr(i);
                    double inv_n = 1.0 / double(cols);
                    for (size_t j = 0; j < cols; ++j) {
                        double gj = go[j] * gain->value.at(0, j);
                        xg[j] += inv_std[i] * (gj - inv_n * sum_g - hr[j] * inv_n * sum_gh);
                    }
                }
            }
        };
    }
    return n;
}

Var Tape::gelu(Var x) {
    Matrix v = x->value;
    for (double& t : v.data) t = 0.5 * t * (1.0 + std::erf(t * kInvSqrt2));
    Var n = make(std::move(v));
    if (grad_ && x->needs_grad) {
        n->needs_grad = true;
        n->back = [n, x]() {
            x->ensure_grad();
            for (size_t i = 0; i < n->grad.data.size(); ++i) {
                double t = x->value.data[i];
                double d = 0.5 * (1.0 + std::erf(t * kInvSqrt2)) + t * kInvSqrt2Pi * std::exp(-0.5 * t * t);
                x->grad.data[i] += n->grad.data[i] * d;
            }
        };
    }
    return n;
}

Var Tape::dropout(Var x, const Matrix& keep_mask) {
    if (!x->value.same_shape(keep_mask)) throw_invalid("dropout: mask shape mismatch");
    Matrix v = x->value;
    for (size_t i = 0; i < v.data.size(); ++i) v.data[i] *= keep_mask.data[i];
    Var n = make(std::move(v));
    if (grad_ && x->needs_grad) {
        n->needs_grad = true;
        n->back = [n, x, mask = keep_mask]() {
            x->ensure_grad();
            for (size_t i = 0; i < n->grad.data.size(); ++i) x->grad.data[i] += n->grad.data[i] * mask.data[i];
        };
    }
    return n;
}

Var Tape::causal_softmax(Var scores) {
    if (scores->value.rows != scores->value.cols) throw_invalid("causal_softmax: matrix must be square");
    size_t nrows = scores->value.rows;
    Matrix v(nrows, nrows);
    for (size_t t = 0; t < nrows; ++t) {
        const double* sr = scores->value.row_ptr(t);
        double* vr = v.row_ptr(t);
        double m = sr[0];
        for (size_t k = 1; k <= t; ++k) m = std::max(m, sr[k]);
        double sum = 0.0;
        for (size_t k = 0; k <= t; ++k) {
            vr[k] = std::exp(sr[k] - m);
            sum += vr[k];
        }
        for (size_t k = 0; k <= t; ++k) vr[k] /= sum;
        // columns past t stay exactly zero
    }
    Var n = make(std::move(v));
    if (grad_ && scores->needs_grad) {
        n->needs_grad = true;
        n->back = [n, scores]() {
            scores->ensure_grad();
            size_t nrows = n->value.rows;
            for (size_t t = 0; t < nrows; ++t) {
                const double* p = n->value.row_ptr(t);
                const double* go = n->grad.row_ptr(t);
                double dot = 0.0;
                for (size_t k = 0; k <= t; ++k) dot += p[k] * go[k];
                double* sg = scores->grad.row_ptr(t);
                for (size_t k = 0; k <= t; ++k) sg[k] += p[k] * (go[k] - dot);
            }
        };
    }
    return n;
}

Var Tape::nll_row(Var logits, int target) {
    if (logits->value.rows != 1) throw_invalid("nll_row: expected a single row");
    size_t ncls = logits->value.cols;
    if (target < 0 || size_t(target) >= ncls) throw_invalid("nll_row: target out of range");
    Matrix v(1, 1);
    v.at(0, 0) = log_sum_exp(logits->value.row_ptr(0), ncls) - logits->value.at(0, size_t(target));
    Var n = make(std::move(v));
    if (grad_ && logits->needs_grad) {
        n->needs_grad = true;
        n->back = [n, logits, target]() {
            logits->ensure_grad();
            size_t ncls = logits->value.cols;
            std::vector<double> p(logits->value.row_ptr(0), logits->value.row_ptr(0) + ncls);
            softmax_inplace(p.data(), ncls);
            double g = n->grad.at(0, 0);
            for (size_t j = 0; j < ncls; ++j)
                logits->grad.at(0, j) += g * (p[j] - (j == size_t(target) ? 1.0 : 0.0));
        };
    }
    return n;
}

Var Tape::sum_scaled(const std::vector<Var>& xs, const std::vector<double>& ws) {
    if (xs.size() != ws.size()) throw_invalid("sum_scaled: length mismatch");
    Matrix v(1, 1);
    double s = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (xs[i]->value.rows != 1 || xs[i]->value.cols != 1) throw_invalid("sum_scaled: terms must be scalars");
        s += ws[i] * xs[i]->value.at(0, 0);
    }
    v.at(0, 0) = s;
    Var n = make(std::move(v));
    bool any = false;
    for (Var x : xs) any = any || x->needs_grad;
    if (grad_ && any) {
        n->needs_grad = true;
        std::vector<Var> terms = xs;
        std::vector<double> weights = ws;
        n->back = [n, terms, weights]() {
            double g = n->grad.at(0, 0);
            for (size_t i = 0; i < terms.size(); ++i) {
                if (!terms[i]->needs_grad) continue;
                terms[i]->ensure_grad();
                terms[i]->grad.at(0, 0) += g * weights[i];
            }
        };
    }
    return n;
}

void Tape::backward(Var root) {
    if (!grad_) throw_invalid("backward called on a gradient-disabled tape");
    if (root->value.rows != 1 || root->value.cols != 1) throw_invalid("backward root must be scalar");
    root->ensure_grad();
    root->grad.at(0, 0) = 1.0;
    for (size_t i = nodes_.size(); i-- > 0;) {
        Node* n = nodes_[i].get();
        if (n->needs_grad && n->back && n->grad.size() != 0) n->back();
    }
}

} // namespace octo
