#include <doctest.h>

#include <cmath>
#include <random>

#include "s2g/tensor.hpp"

using namespace s2g;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, bool grad = false) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = g(rng);
  return Tensor(std::move(shape), std::move(v), grad);
}

std::vector<double> naive_matmul(const Tensor& a, const Tensor& b) {
  const auto m = a.extent(0), k = a.extent(1), p = b.extent(1);
  std::vector<double> c(m * p, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t l = 0; l < k; ++l) c[i * p + j] += a.at({i, l}) * b.at({l, j});
  return c;
}

}  // namespace

TEST_CASE("tensor construction checks shape against data") {
  CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), DimensionError);
  CHECK_THROWS_AS(Tensor::zeros({0, 2}), DimensionError);
  Tensor t({2, 3}, {0, 1, 2, 3, 4, 5});
  CHECK(t.at({1, 2}) == 5);
  std::size_t idx[] = {1, 0};
  CHECK(t.flat_index(idx) == 3);
}

TEST_CASE("row-major index is a bijection over valid multi-indices") {
  Tensor t = Tensor::zeros({3, 4, 2});
  std::vector<bool> hit(t.size(), false);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t c = 0; c < 2; ++c) {
        std::size_t idx[] = {a, b, c};
        auto f = t.flat_index(idx);
        REQUIRE(f < t.size());
        CHECK_FALSE(hit[f]);
        hit[f] = true;
      }
}

TEST_CASE("matmul") {
  auto eye = Tensor::matrix({{1, 0}, {0, 1}});
  auto col = Tensor::matrix({{3}, {7}});
  auto r = matmul(eye, col);
  CHECK(r.shape() == Shape{2, 1});
  CHECK(r.at({0, 0}) == 3);
  CHECK(r.at({1, 0}) == 7);

  auto r2 = matmul(Tensor::matrix({{1, 2}, {3, 4}}), Tensor::matrix({{1}, {1}}));
  CHECK(r2.at({0, 0}) == 3);
  CHECK(r2.at({1, 0}) == 7);

  auto a = Tensor::zeros({2, 3});
  try {
    matmul(a, a);
    FAIL("expected a dimension error");
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("[2x3]") != std::string::npos);
  }
}

TEST_CASE("matmul matches the triple-loop oracle exactly on random 4x4") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_tensor({4, 4}, rng), b = random_tensor({4, 4}, rng);
    auto c = matmul(a, b);
    auto oracle = naive_matmul(a, b);
    for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(c.data()[i] == oracle[i]);
  }
}

TEST_CASE("elementwise activations") {
  auto r = relu(Tensor::vector({-1, 0, 2}));
  CHECK(r.data()[0] == 0);
  CHECK(r.data()[1] == 0);
  CHECK(r.data()[2] == 2);
  CHECK(tanh(Tensor::vector({0})).item() == 0);
  CHECK(sigmoid(Tensor::vector({0})).item() == 0.5);
  CHECK(sigmoid(Tensor::vector({-800})).item() == doctest::Approx(0.0));
  CHECK_THROWS_AS(add(Tensor::zeros({2}), Tensor::zeros({3})), DimensionError);
  CHECK_THROWS_AS(mul(Tensor::zeros({2, 1}), Tensor::zeros({1, 2})), DimensionError);
}

TEST_CASE("relu subgradient at zero is zero") {
  Tensor x({3}, {-1, 0, 2}, true);
  Tape tape;
  tape.backward(sum_all(relu(x)));
  CHECK(x.grad()[0] == 0);
  CHECK(x.grad()[1] == 0);
  CHECK(x.grad()[2] == 1);
}

TEST_CASE("reductions") {
  auto m = Tensor::matrix({{1, 2}, {3, 4}});
  auto s = reduce(Reduce::sum, m, 0);
  CHECK(s.data()[0] == 4);
  CHECK(s.data()[1] == 6);
  CHECK(reduce(Reduce::mean, Tensor::matrix({{2, 4}}), 1).item() == 3);
  auto mx = reduce(Reduce::max, Tensor::matrix({{1, 5}, {7, 2}}), 1);
  CHECK(mx.data()[0] == 5);
  CHECK(mx.data()[1] == 7);
  CHECK_THROWS_AS(reduce(Reduce::sum, m, 2), DimensionError);
}

TEST_CASE("max reduction routes the gradient to the lowest tied index") {
  Tensor x({1, 3}, {4, 4, 1}, true);
  Tape tape;
  tape.backward(sum_all(reduce(Reduce::max, x, 1)));
  CHECK(x.grad()[0] == 1);
  CHECK(x.grad()[1] == 0);
  CHECK(x.grad()[2] == 0);
}

TEST_CASE("concat_features") {
  Tensor a = Tensor::matrix({{1, 2}}), b = Tensor::matrix({{3}});
  Tensor parts[] = {a, b};
  auto c = concat_features(parts);
  CHECK(c.shape() == Shape{1, 3});
  CHECK(c.data()[2] == 3);

  Tensor single[] = {a};
  CHECK(concat_features(single).data()[1] == 2);

  Tensor bad[] = {Tensor::zeros({2, 2}), Tensor::zeros({3, 1})};
  CHECK_THROWS_AS(concat_features(bad), DimensionError);
}

TEST_CASE("concat slices are recoverable bit-exactly") {
  std::mt19937_64 rng(3);
  auto a = random_tensor({3, 2}, rng), b = random_tensor({3, 5}, rng);
  Tensor parts[] = {a, b};
  auto c = concat_features(parts);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t k = 0; k < 2; ++k) CHECK(c.at({r, k}) == a.at({r, k}));
    for (std::size_t k = 0; k < 5; ++k) CHECK(c.at({r, 2 + k}) == b.at({r, k}));
  }
}

TEST_CASE("softmax_rows") {
  auto s = softmax_rows(Tensor::matrix({{0, 0}}));
  CHECK(s.data()[0] == 0.5);
  auto big = softmax_rows(Tensor::matrix({{1000, 1000}}));
  CHECK(big.data()[0] == 0.5);
  CHECK(big.data()[1] == 0.5);
  // exp(ln 3) / (1 + exp(ln 3)) = 3/4
  auto l3 = softmax_rows(Tensor::matrix({{0, std::log(3.0)}}));
  CHECK(l3.data()[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(l3.data()[1] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK_THROWS_AS(softmax_rows(Tensor::matrix({{0, std::nan("")}})), NumericError);
}

TEST_CASE("softmax rows sum to one and ignore per-row shifts") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shift(-50, 50);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = random_tensor({4, 6}, rng);
    auto s = softmax_rows(x);
    std::vector<double> shifted(x.data().begin(), x.data().end());
    for (std::size_t r = 0; r < 4; ++r) {
      const double c = shift(rng);
      for (std::size_t j = 0; j < 6; ++j) shifted[r * 6 + j] += c;
    }
    auto s2 = softmax_rows(Tensor({4, 6}, shifted));
    for (std::size_t r = 0; r < 4; ++r) {
      double total = 0;
      for (std::size_t j = 0; j < 6; ++j) {
        total += s.at({r, j});
        CHECK(std::abs(s.at({r, j}) - s2.at({r, j})) < 1e-12);
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("backward on sum of squares") {
  Tensor x({2}, {1, 2}, true);
  Tape tape;
  tape.backward(sum_all(mul(x, x)));
  CHECK(x.grad()[0] == 2);
  CHECK(x.grad()[1] == 4);
}

TEST_CASE("unused leaf receives a zero gradient") {
  Tensor x({2}, {1, 2}, true), y({2}, {3, 4}, true);
  Tape tape;
  auto side = scale(y, 2.0);  // recorded but not on the path to the root
  (void)side;
  tape.backward(sum_all(x));
  REQUIRE(y.has_grad());
  CHECK(y.grad()[0] == 0);
  CHECK(y.grad()[1] == 0);
}

TEST_CASE("tape misuse") {
  Tensor x({2}, {1, 2}, true);
  {
    Tape tape;
    auto y = scale(x, 3.0);
    CHECK_THROWS_AS(tape.backward(y), TapeError);  // non-scalar
  }
  {
    Tape tape;
    auto y = sum_all(x);
    tape.backward(y);
    CHECK(tape.consumed());
    CHECK_THROWS_AS(tape.backward(y), TapeError);
  }
  {
    Tape tape;
    CHECK_THROWS_AS(tape.backward(Tensor::scalar(1.0)), TapeError);
  }
}

TEST_CASE("without an active tape nothing is recorded") {
  Tensor x({2}, {1, 2}, true);
  auto y = sum_all(x);
  CHECK_FALSE(y.requires_grad());
}

TEST_CASE("sum(A·B) gradients match central finite differences") {
  std::mt19937_64 rng(21);
  auto a = random_tensor({3, 4}, rng), b = random_tensor({4, 2}, rng);
  Tensor params[] = {a, b};
  const double err = finite_difference_check([&] { return sum_all(matmul(a, b)); }, params, 1e-5);
  CHECK(err < 1e-8);
}

TEST_CASE("diamond graph accumulates both paths") {
  Tensor x({3}, {0.3, -1.2, 0.7}, true);
  auto f = [](const Tensor& v) { return sum_all(add(mul(tanh(v), v), sigmoid(scale(v, 2.0)))); };
  CHECK(finite_difference_check(f, x, 1e-5) < 1e-8);

  Tape tape;
  tape.backward(f(x));
  // analytic: d/dv [v·tanh v + σ(2v)] = tanh v + v(1 - tanh²v) + 2σ(2v)(1 - σ(2v))
  for (std::size_t i = 0; i < 3; ++i) {
    const double v = x.data()[i], t = std::tanh(v), s = 1.0 / (1.0 + std::exp(-2 * v));
    CHECK(x.grad()[i] == doctest::Approx(t + v * (1 - t * t) + 2 * s * (1 - s)).epsilon(1e-12));
  }
}

TEST_CASE("finite_difference_check") {
  std::mt19937_64 rng(1);
  auto x = random_tensor({5}, rng);
  CHECK(finite_difference_check([](const Tensor& v) { return sum_all(v); }, x, 1e-5) < 1e-10);
  CHECK_THROWS_AS(finite_difference_check([](const Tensor& v) { return sum_all(v); }, x, 0.0),
                  std::invalid_argument);
}

TEST_CASE("every differentiable op passes the gradient check on 100 seeded inputs") {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto a = random_tensor({3, 4}, rng), b = random_tensor({4, 3}, rng), c = random_tensor({3, 4}, rng);
    auto bias = random_tensor({4}, rng);
    auto row = random_tensor({1, 4}, rng);
    Tensor params[] = {a, b, c, bias, row};
    std::vector<std::size_t> idx{2, 0, 2, 1};
    auto weights = random_tensor({3, 3}, rng);
    const double err = finite_difference_check(
        [&] {
          auto h = add_bias(sub(mul(a, c), scale(a, 0.5)), bias);
          auto s = softmax_rows(matmul(tanh(h), b));
          auto g = gather_rows(sigmoid(relu(add(h, repeat_rows(row, 3)))), idx);
          Tensor cat_parts[] = {s, reshape(transpose(matmul(b, s)), {3, 4})};
          auto cat = concat_features(cat_parts);
          Tensor stacked_parts[] = {reduce(Reduce::mean, g, 0), reduce(Reduce::sum, h, 0)};
          auto stacked = reduce(Reduce::max, stack(stacked_parts), 0);
          return add(sum_all(mul(s, weights)),
                     add(sum_all(mul(cat, cat)), mean_all(mul(stacked, stacked))));
        },
        params, 1e-5);
    worst = std::max(worst, err);
  }
  CHECK(worst < 1e-4);
}
