#pragma once

// Dense row-major tensors of doubles with tape-based reverse-mode autodiff.
//
// Operations record onto the calling thread's active Tape only when one
// exists and at least one input requires a gradient. Without an active tape
// every op is a plain forward computation.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "s2g/errors.hpp"

namespace s2g {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a backward pass touches it
  bool requires_grad = false;
};

/// Shared handle: copies alias the same storage.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value);
  static Tensor scalar(double value);
  /// 2-D tensor from nested rows; all rows must have equal length.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor vector(std::initializer_list<double> values);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t extent(std::size_t axis) const;
  std::size_t size() const { return impl_->data.size(); }

  std::span<const double> data() const { return impl_->data; }
  /// Direct write access. Do not mutate a tensor an unconsumed tape still references.
  std::span<double> data_mut() { return impl_->data; }
  std::span<const double> grad() const { return impl_->grad; }
  bool has_grad() const { return !impl_->grad.empty(); }
  /// Allocates a zero gradient buffer on first use.
  std::span<double> grad_mut();
  void zero_grad();

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool value) { impl_->requires_grad = value; }

  double item() const;
  double at(std::initializer_list<std::size_t> index) const;
  std::size_t flat_index(std::span<const std::size_t> index) const;

  /// Deep copy of data and shape; no gradient, not tracked.
  Tensor clone() const;

  const TensorImpl* impl() const { return impl_.get(); }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

/// Receives the output gradient and accumulates into the op's inputs.
using BackwardFn = std::function<void(std::span<const double> out_grad)>;

/// Single-use record of differentiable operations for one forward/backward pass.
///
/// Constructing a Tape makes it the active tape of the current thread until it
/// is destroyed (tapes nest like scopes). Entries are appended in execution
/// order, so reverse traversal is a valid topological order.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* active();

  void record(std::vector<Tensor> inputs, Tensor output, BackwardFn fn);

  /// Seeds d root/d root = 1 and propagates to every tracked input.
  /// Leaf gradients accumulate (+=) onto whatever they already hold.
  void backward(const Tensor& root);

  std::size_t size() const { return entries_.size(); }
  bool consumed() const { return consumed_; }

 private:
  struct Entry {
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn fn;
  };
  std::vector<Entry> entries_;
  bool consumed_ = false;
  Tape* previous_ = nullptr;
};

/// Builds an op result and records it when differentiation is live.
Tensor make_result(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                   BackwardFn fn);

// ---- linear algebra and shape ops -------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);
/// Rows x[idx[0]], x[idx[1]], ... of a 2-D tensor.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> idx);
/// Replicates a 1×d (or length-d) tensor into n×d.
Tensor repeat_rows(const Tensor& row, std::size_t n);
/// Adds a length-d bias to every row of an m×d tensor.
Tensor add_bias(const Tensor& x, const Tensor& bias);
/// Concatenation along the last axis; leading extents must agree.
Tensor concat_features(std::span<const Tensor> parts);
/// Stacks equal-shaped tensors along a new leading axis.
Tensor stack(std::span<const Tensor> parts);

// ---- elementwise -------------------------------------------------------------

enum class Elementwise { add, sub, mul, relu, tanh, sigmoid, scale };

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double c);
Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);

// ---- reductions ----------------------------------------------------------------

enum class Reduce { sum, mean, max };

/// Removes `axis`. Max ties resolve to the lowest index.
Tensor reduce(Reduce op, const Tensor& x, std::size_t axis);
Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);

/// Row-wise softmax of a 2-D tensor, max-subtracted.
Tensor softmax_rows(const Tensor& x);

// ---- verification --------------------------------------------------------------

/// Max over coordinates of |g_ad - g_fd| / max(1, |g_fd|), central differences.
/// `f` is evaluated once under a tape and 2·size(params) times without one.
/// Parameter values are restored before returning.
double finite_difference_check(const std::function<Tensor()>& f, std::span<Tensor> params,
                               double eps);
double finite_difference_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                               double eps);

}  // namespace s2g
