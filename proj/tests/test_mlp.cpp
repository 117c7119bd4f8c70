#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mecoff/mlp.hpp"
#include "mecoff/rng.hpp"

using namespace mecoff;

namespace {

std::vector<std::uint8_t> random_bits(Prng& rng, int n) {
  std::vector<std::uint8_t> v(static_cast<std::size_t>(n));
  for (auto& b : v) b = rng.uniform01() < 0.5 ? 1 : 0;
  return v;
}

std::vector<double> random_vec(Prng& rng, int n, double lo, double hi) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("zero parameters give 0.5 outputs", "[mlp]") {
  Mlp net({3, 4, 2});
  const std::vector<double> out = net.forward(std::vector<double>{0.3, -1.0, 2.0});
  REQUIRE(out.size() == 2);
  for (double o : out) REQUIRE(o == Catch::Approx(0.5));
}

TEST_CASE("outputs stay strictly inside the unit interval", "[mlp]") {
  Prng rng(101);
  for (int round = 0; round < 200; ++round) {
    Mlp net({5, 7, 3});
    net.init_weights(rng);
    for (int k = 0; k < 50; ++k) {
      const std::vector<double> out = net.forward(random_vec(rng, 5, -3.0, 3.0));
      for (double o : out) {
        REQUIRE(o > 0.0);
        REQUIRE(o < 1.0);
      }
    }
  }
}

TEST_CASE("dimension mismatches are rejected", "[mlp]") {
  Mlp net({3, 2});
  REQUIRE_THROWS_AS(net.forward(std::vector<double>{1.0}), DimensionMismatch);
}

TEST_CASE("uniform 0.5 output costs M ln 2 per sample", "[mlp]") {
  Mlp net({2, 4});  // zero weights: every output is exactly 0.5
  std::vector<double> grad;
  const double loss = net.loss_and_gradient({{0.1, -0.2}}, {{1, 0, 1, 1}}, grad);
  REQUIRE(loss == Catch::Approx(4.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("perfect predictions drive the loss to zero", "[mlp]") {
  Mlp net({1, 2});
  // Huge weights saturate the logistic at the clamp boundary.
  net.params() = {50.0, -50.0, 0.0, 0.0};
  std::vector<double> grad;
  const double loss = net.loss_and_gradient({{1.0}}, {{1, 0}}, grad);
  REQUIRE(loss < 1e-8);
}

TEST_CASE("analytic gradients match central differences", "[mlp]") {
  Prng rng(77);
  const std::vector<int> sizes = {3, 4, 2};  // 26 parameters
  Mlp net(sizes);
  const double h = 1e-6;
  for (int round = 0; round < 100; ++round) {
    net.init_weights(rng);
    const std::vector<std::vector<double>> inputs = {random_vec(rng, 3, -1.5, 1.5),
                                                     random_vec(rng, 3, -1.5, 1.5)};
    const std::vector<std::vector<std::uint8_t>> targets = {random_bits(rng, 2),
                                                            random_bits(rng, 2)};
    std::vector<double> grad;
    net.loss_and_gradient(inputs, targets, grad);

    std::vector<double> scratch;
    for (std::size_t i = 0; i < net.parameter_count(); ++i) {
      const double saved = net.params()[i];
      net.params()[i] = saved + h;
      const double hi = net.loss_and_gradient(inputs, targets, scratch);
      net.params()[i] = saved - h;
      const double lo = net.loss_and_gradient(inputs, targets, scratch);
      net.params()[i] = saved;
      const double fd = (hi - lo) / (2.0 * h);
      const double denom = std::max({std::abs(grad[i]), std::abs(fd), 1e-8});
      REQUIRE(std::abs(grad[i] - fd) / denom <= 1e-4);
    }
  }
}

TEST_CASE("adam with zero gradient leaves fresh parameters unchanged", "[mlp]") {
  Mlp net({2, 3});
  Prng rng(5);
  net.init_weights(rng);
  const std::vector<double> before = net.params();
  Adam adam(net.parameter_count(), 0.01);
  const std::vector<double> zero(net.parameter_count(), 0.0);
  adam.step(net.params(), zero);
  REQUIRE(net.params() == before);
}

TEST_CASE("adam reduces a simple quadratic", "[mlp]") {
  // Minimize (p - 3)^2 by feeding its gradient.
  std::vector<double> p = {10.0};
  Adam adam(1, 0.1);
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> g = {2.0 * (p[0] - 3.0)};
    adam.step(p, g);
  }
  REQUIRE(p[0] == Catch::Approx(3.0).margin(1e-3));
}
