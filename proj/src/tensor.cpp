#include "s2g/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

namespace s2g {

namespace {

thread_local Tape* g_active_tape = nullptr;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

void require_rank(const Tensor& x, std::size_t rank, const char* op) {
  if (x.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_str(x.shape()));
  }
}

// Adds `g` into the gradient of `t` when `t` is tracked.
void accumulate(Tensor& t, std::span<const double> g) {
  if (!t.requires_grad()) return;
  auto dst = t.grad_mut();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

template <class F, class D>
Tensor unary(const Tensor& x, F f, D df_from_xy) {
  std::vector<double> out(x.size());
  auto xs = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(xs[i]);
  Tensor captured = x;
  // df_from_xy(x_i, y_i) gives the local derivative; y is recovered from the output copy.
  auto y = std::make_shared<std::vector<double>>(out);
  return make_result(x.shape(), std::move(out), {x},
                     [captured, y, df_from_xy](std::span<const double> g) mutable {
                       if (!captured.requires_grad()) return;
                       auto xs = captured.data();
                       auto dst = captured.grad_mut();
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         dst[i] += g[i] * df_from_xy(xs[i], (*y)[i]);
                       }
                     });
}

}  // namespace

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

// ---- Tensor ----------------------------------------------------------------------

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : impl_(std::make_shared<TensorImpl>()) {
  for (auto e : shape) {
    if (e == 0) throw DimensionError("tensor extents must be positive: " + shape_str(shape));
  }
  if (numel(shape) != data.size()) {
    throw DimensionError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto n = numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::filled(Shape shape, double value) {
  auto n = numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  std::size_t cols = rows.size() ? rows.begin()->size() : 0;
  std::vector<double> data;
  for (const auto& r : rows) {
    if (r.size() != cols) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({rows.size(), cols}, std::move(data));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

std::size_t Tensor::extent(std::size_t axis) const {
  if (axis >= rank()) throw DimensionError("axis " + std::to_string(axis) + " out of range");
  return impl_->shape[axis];
}

std::span<double> Tensor::grad_mut() {
  if (impl_->grad.size() != impl_->data.size()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() {
  if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on non-scalar " + shape_str(shape()));
  return impl_->data[0];
}

std::size_t Tensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != rank()) throw DimensionError("index rank mismatch for " + shape_str(shape()));
  std::size_t flat = 0;
  for (std::size_t a = 0; a < index.size(); ++a) {
    if (index[a] >= impl_->shape[a]) throw DimensionError("index out of range");
    flat = flat * impl_->shape[a] + index[a];
  }
  return flat;
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  return impl_->data[flat_index(std::span<const std::size_t>(index.begin(), index.size()))];
}

Tensor Tensor::clone() const { return Tensor(shape(), impl_->data); }

// ---- Tape --------------------------------------------------------------------------

Tape::Tape() : previous_(g_active_tape) { g_active_tape = this; }

Tape::~Tape() { g_active_tape = previous_; }

Tape* Tape::active() { return g_active_tape; }

void Tape::record(std::vector<Tensor> inputs, Tensor output, BackwardFn fn) {
  if (consumed_) throw TapeError("record on a consumed tape");
  entries_.push_back(Entry{std::move(inputs), std::move(output), std::move(fn)});
}

void Tape::backward(const Tensor& root) {
  if (consumed_) throw TapeError("backward called twice on a consumed tape");
  if (!root.defined() || root.size() != 1) {
    throw TapeError("backward root must be a scalar, got " +
                    (root.defined() ? shape_str(root.shape()) : std::string("undefined")));
  }
  if (!root.requires_grad()) throw TapeError("backward root is not tracked");

  auto root_it = std::find_if(entries_.begin(), entries_.end(),
                              [&](const Entry& e) { return e.output.impl() == root.impl(); });
  if (root_it == entries_.end()) throw TapeError("backward root was not recorded on this tape");

  // Intermediate outputs start from zero; leaves keep what they hold.
  for (auto& e : entries_) {
    auto g = e.output.grad_mut();
    std::fill(g.begin(), g.end(), 0.0);
    for (auto& in : e.inputs) {
      if (in.requires_grad()) in.grad_mut();
    }
  }
  Tensor seed = root;
  seed.grad_mut()[0] = 1.0;

  for (auto it = std::make_reverse_iterator(root_it + 1); it != entries_.rend(); ++it) {
    it->fn(it->output.grad());
  }
  consumed_ = true;
  entries_.clear();
}

Tensor make_result(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                   BackwardFn fn) {
  Tape* tape = Tape::active();
  bool track = tape != nullptr &&
               std::any_of(inputs.begin(), inputs.end(),
                           [](const Tensor& t) { return t.requires_grad(); });
  Tensor out(std::move(shape), std::move(data), track);
  if (track) tape->record(std::move(inputs), out, std::move(fn));
  return out;
}

// ---- linear algebra --------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(0)) {
    throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  }
  const std::size_t m = a.extent(0), k = a.extent(1), p = b.extent(1);
  std::vector<double> c(m * p, 0.0);
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c.data() + i * p;
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = A[i * k + l];
      const double* bl = B.data() + l * p;
      for (std::size_t j = 0; j < p; ++j) ci[j] += ail * bl[j];
    }
  }
  Tensor ca = a, cb = b;
  return make_result({m, p}, std::move(c), {a, b},
                     [ca, cb, m, k, p](std::span<const double> g) mutable {
                       auto A = ca.data();
                       auto B = cb.data();
                       if (ca.requires_grad()) {
                         auto dA = ca.grad_mut();
                         for (std::size_t i = 0; i < m; ++i) {
                           const double* gi = g.data() + i * p;
                           for (std::size_t l = 0; l < k; ++l) {
                             const double* bl = B.data() + l * p;
                             double s = 0.0;
                             for (std::size_t j = 0; j < p; ++j) s += gi[j] * bl[j];
                             dA[i * k + l] += s;
                           }
                         }
                       }
                       if (cb.requires_grad()) {
                         auto dB = cb.grad_mut();
                         for (std::size_t i = 0; i < m; ++i) {
                           const double* gi = g.data() + i * p;
                           for (std::size_t l = 0; l < k; ++l) {
                             const double ail = A[i * k + l];
                             double* dbl = dB.data() + l * p;
                             for (std::size_t j = 0; j < p; ++j) dbl[j] += ail * gi[j];
                           }
                         }
                       }
                     });
}

Tensor transpose(const Tensor& x) {
  require_rank(x, 2, "transpose");
  const std::size_t r = x.extent(0), c = x.extent(1);
  std::vector<double> out(r * c);
  auto xs = x.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = xs[i * c + j];
  Tensor cx = x;
  return make_result({c, r}, std::move(out), {x}, [cx, r, c](std::span<const double> g) mutable {
    if (!cx.requires_grad()) return;
    auto d = cx.grad_mut();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) d[i * c + j] += g[j * r + i];
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw DimensionError("reshape: " + shape_str(x.shape()) + " to " + shape_str(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  Tensor cx = x;
  return make_result(std::move(shape), std::move(out), {x},
                     [cx](std::span<const double> g) mutable { accumulate(cx, g); });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> idx) {
  require_rank(x, 2, "gather_rows");
  const std::size_t n = x.extent(0), d = x.extent(1);
  if (idx.empty()) throw DimensionError("gather_rows: empty index list");
  std::vector<double> out(idx.size() * d);
  auto xs = x.data();
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= n) throw DimensionError("gather_rows: row index out of range");
    std::copy_n(xs.begin() + idx[r] * d, d, out.begin() + r * d);
  }
  Tensor cx = x;
  std::vector<std::size_t> rows(idx.begin(), idx.end());
  return make_result({idx.size(), d}, std::move(out), {x},
                     [cx, rows = std::move(rows), d](std::span<const double> g) mutable {
                       if (!cx.requires_grad()) return;
                       auto dst = cx.grad_mut();
                       for (std::size_t r = 0; r < rows.size(); ++r) {
                         double* drow = dst.data() + rows[r] * d;
                         const double* grow = g.data() + r * d;
                         for (std::size_t c = 0; c < d; ++c) drow[c] += grow[c];
                       }
                     });
}

Tensor repeat_rows(const Tensor& row, std::size_t n) {
  const bool ok = (row.rank() == 1) || (row.rank() == 2 && row.extent(0) == 1);
  if (!ok) throw DimensionError("repeat_rows: expected 1xd or d, got " + shape_str(row.shape()));
  if (n == 0) throw DimensionError("repeat_rows: n must be positive");
  const std::size_t d = row.size();
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) std::copy(row.data().begin(), row.data().end(), out.begin() + i * d);
  Tensor cr = row;
  return make_result({n, d}, std::move(out), {row}, [cr, n, d](std::span<const double> g) mutable {
    if (!cr.requires_grad()) return;
    auto dst = cr.grad_mut();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) dst[c] += g[i * d + c];
  });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  if (x.rank() != 2 || bias.size() != x.extent(1)) {
    throw DimensionError("add_bias: " + shape_str(x.shape()) + " with bias " +
                         shape_str(bias.shape()));
  }
  const std::size_t m = x.extent(0), d = x.extent(1);
  std::vector<double> out(x.data().begin(), x.data().end());
  auto b = bias.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < d; ++c) out[i * d + c] += b[c];
  Tensor cx = x, cb = bias;
  return make_result({m, d}, std::move(out), {x, bias},
                     [cx, cb, m, d](std::span<const double> g) mutable {
                       accumulate(cx, g);
                       if (!cb.requires_grad()) return;
                       auto db = cb.grad_mut();
                       for (std::size_t i = 0; i < m; ++i)
                         for (std::size_t c = 0; c < d; ++c) db[c] += g[i * d + c];
                     });
}

Tensor concat_features(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_features: no parts");
  const Shape& first = parts[0].shape();
  Shape lead(first.begin(), first.end() - 1);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    Shape pl(p.shape().begin(), p.shape().end() - 1);
    if (pl != lead) {
      throw DimensionError("concat_features: leading extents differ " + shape_str(first) + " vs " +
                           shape_str(p.shape()));
    }
    widths.push_back(p.shape().back());
    total += p.shape().back();
  }
  const std::size_t rows = numel(lead);
  std::vector<double> out(rows * total);
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto src = parts[k].data();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(src.begin() + r * widths[k], widths[k], out.begin() + r * total + off);
    off += widths[k];
  }
  Shape shape = lead;
  shape.push_back(total);
  std::vector<Tensor> ins(parts.begin(), parts.end());
  return make_result(std::move(shape), std::move(out), ins,
                     [ins, widths, rows, total](std::span<const double> g) mutable {
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < ins.size(); ++k) {
                         if (ins[k].requires_grad()) {
                           auto dst = ins[k].grad_mut();
                           for (std::size_t r = 0; r < rows; ++r)
                             for (std::size_t c = 0; c < widths[k]; ++c)
                               dst[r * widths[k] + c] += g[r * total + off + c];
                         }
                         off += widths[k];
                       }
                     });
}

Tensor stack(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("stack: no parts");
  const Shape& s = parts[0].shape();
  for (const auto& p : parts) require_same_shape(parts[0], p, "stack");
  const std::size_t each = parts[0].size();
  std::vector<double> out(each * parts.size());
  for (std::size_t k = 0; k < parts.size(); ++k)
    std::copy(parts[k].data().begin(), parts[k].data().end(), out.begin() + k * each);
  Shape shape{parts.size()};
  shape.insert(shape.end(), s.begin(), s.end());
  std::vector<Tensor> ins(parts.begin(), parts.end());
  return make_result(std::move(shape), std::move(out), ins,
                     [ins, each](std::span<const double> g) mutable {
                       for (std::size_t k = 0; k < ins.size(); ++k)
                         accumulate(ins[k], g.subspan(k * each, each));
                     });
}

// ---- elementwise -------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  Tensor ca = a, cb = b;
  return make_result(a.shape(), std::move(out), {a, b},
                     [ca, cb](std::span<const double> g) mutable {
                       accumulate(ca, g);
                       accumulate(cb, g);
                     });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  Tensor ca = a, cb = b;
  return make_result(a.shape(), std::move(out), {a, b},
                     [ca, cb](std::span<const double> g) mutable {
                       accumulate(ca, g);
                       if (!cb.requires_grad()) return;
                       auto d = cb.grad_mut();
                       for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i];
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  Tensor ca = a, cb = b;
  return make_result(a.shape(), std::move(out), {a, b},
                     [ca, cb](std::span<const double> g) mutable {
                       if (ca.requires_grad()) {
                         auto d = ca.grad_mut();
                         auto bs = cb.data();
                         for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * bs[i];
                       }
                       if (cb.requires_grad()) {
                         auto d = cb.grad_mut();
                         auto as = ca.data();
                         for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * as[i];
                       }
                     });
}

Tensor scale(const Tensor& x, double c) {
  return unary(
      x, [c](double v) { return c * v; }, [c](double, double) { return c; });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

// ---- reductions ----------------------------------------------------------------------

Tensor reduce(Reduce op, const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw DimensionError("reduce: axis " + std::to_string(axis) + " out of range for " +
                         shape_str(x.shape()));
  }
  const Shape& s = x.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= s[a];
  for (std::size_t a = axis + 1; a < s.size(); ++a) inner *= s[a];
  const std::size_t len = s[axis];

  Shape out_shape;
  for (std::size_t a = 0; a < s.size(); ++a)
    if (a != axis) out_shape.push_back(s[a]);
  if (out_shape.empty()) out_shape.push_back(1);

  std::vector<double> out(outer * inner, 0.0);
  std::vector<std::size_t> argmax;
  auto xs = x.data();
  if (op == Reduce::max) {
    argmax.assign(outer * inner, 0);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t i = 0; i < inner; ++i) {
        std::size_t best = 0;
        double bv = xs[o * len * inner + i];
        for (std::size_t k = 1; k < len; ++k) {
          const double v = xs[(o * len + k) * inner + i];
          if (v > bv) {
            bv = v;
            best = k;
          }
        }
        out[o * inner + i] = bv;
        argmax[o * inner + i] = best;
      }
  } else {
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t k = 0; k < len; ++k)
        for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] += xs[(o * len + k) * inner + i];
    if (op == Reduce::mean) {
      const double inv = 1.0 / static_cast<double>(len);
      for (auto& v : out) v *= inv;
    }
  }

  Tensor cx = x;
  return make_result(std::move(out_shape), std::move(out), {x},
                     [cx, op, outer, inner, len, argmax = std::move(argmax)](
                         std::span<const double> g) mutable {
                       if (!cx.requires_grad()) return;
                       auto d = cx.grad_mut();
                       const double w = op == Reduce::mean ? 1.0 / static_cast<double>(len) : 1.0;
                       for (std::size_t o = 0; o < outer; ++o)
                         for (std::size_t i = 0; i < inner; ++i) {
                           const double gi = g[o * inner + i];
                           if (op == Reduce::max) {
                             d[(o * len + argmax[o * inner + i]) * inner + i] += gi;
                           } else {
                             for (std::size_t k = 0; k < len; ++k) d[(o * len + k) * inner + i] += w * gi;
                           }
                         }
                     });
}

Tensor sum_all(const Tensor& x) { return reduce(Reduce::sum, reshape(x, {x.size()}), 0); }

Tensor mean_all(const Tensor& x) { return reduce(Reduce::mean, reshape(x, {x.size()}), 0); }

Tensor softmax_rows(const Tensor& x) {
  require_rank(x, 2, "softmax_rows");
  const std::size_t n = x.extent(0), m = x.extent(1);
  auto xs = x.data();
  for (double v : xs) {
    if (std::isnan(v)) throw NumericError("softmax_rows: NaN input");
  }
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = xs.data() + i * m;
    const double mx = *std::max_element(row, row + m);
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      out[i * m + j] = std::exp(row[j] - mx);
      z += out[i * m + j];
    }
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] /= z;
  }
  auto y = std::make_shared<std::vector<double>>(out);
  Tensor cx = x;
  return make_result({n, m}, std::move(out), {x}, [cx, y, n, m](std::span<const double> g) mutable {
    if (!cx.requires_grad()) return;
    auto d = cx.grad_mut();
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += g[i * m + j] * (*y)[i * m + j];
      for (std::size_t j = 0; j < m; ++j) d[i * m + j] += (*y)[i * m + j] * (g[i * m + j] - dot);
    }
  });
}

// ---- verification ---------------------------------------------------------------------

double finite_difference_check(const std::function<Tensor()>& f, std::span<Tensor> params,
                               double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite_difference_check: eps must be positive");

  std::vector<bool> tracked;
  for (auto& p : params) {
    tracked.push_back(p.requires_grad());
    p.set_requires_grad(true);
    p.zero_grad();
  }
  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    Tensor y = f();
    tape.backward(y);
  }
  for (auto& p : params) {
    auto g = p.grad_mut();
    analytic.emplace_back(g.begin(), g.end());
    p.zero_grad();
    p.set_requires_grad(false);
  }

  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto data = params[k].data_mut();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double orig = data[i];
      data[i] = orig + eps;
      const double fp = f().item();
      data[i] = orig - eps;
      const double fm = f().item();
      data[i] = orig;
      const double fd = (fp - fm) / (2.0 * eps);
      const double rel = std::abs(analytic[k][i] - fd) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, rel);
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) params[k].set_requires_grad(tracked[k]);
  return worst;
}

double finite_difference_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                               double eps) {
  Tensor probe = x.clone();
  Tensor params[] = {probe};
  return finite_difference_check([&] { return f(probe); }, params, eps);
}

}  // namespace s2g
