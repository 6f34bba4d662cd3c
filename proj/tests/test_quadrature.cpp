#include <doctest.h>

#include <cmath>

#include "fshawkes/math_util.hpp"
#include "fshawkes/quadrature.hpp"

using namespace fshawkes;

namespace {

Realization three_interval_data() {
  Realization data;
  data.num_dims = 1;
  data.num_states = 2;
  data.horizon = 10.0;
  data.events = {{2.0, 1}, {6.0, 1}};
  data.states = StatePath(1, {{2.0, 2}}, 10.0);
  return data;
}

}  // namespace

TEST_CASE("gauss-legendre rules hit machine precision on polynomials") {
  Eigen::VectorXd x, w;
  for (int n : {1, 2, 3, 5, 8, 20, 64}) {
    gauss_legendre_rule(n, x, w);
    CHECK(w.sum() == doctest::Approx(2.0).epsilon(1e-14));
    // Exact for x^{2n-1} (odd => 0) and x^{2n-2}.
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += w[j] * std::pow(x[j], 2 * n - 2);
    CHECK(acc == doctest::Approx(2.0 / (2.0 * n - 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("piecewise quadrature over a realization") {
  const Realization data = three_interval_data();
  const PiecewiseQuadrature quad = PiecewiseQuadrature::build(data, 5);

  SUBCASE("constants integrate to the horizon exactly") {
    CHECK(quad.integrate(Eigen::VectorXd::Ones(quad.nodes.size())) ==
          doctest::Approx(10.0).epsilon(1e-12));
  }
  SUBCASE("node states follow the left-continuous path") {
    for (Eigen::Index q = 0; q < quad.nodes.size(); ++q) {
      const int expect = quad.nodes[q] <= 2.0 ? 1 : 2;
      CHECK(quad.node_state[static_cast<std::size_t>(q)] == expect);
    }
  }
  SUBCASE("constant-activation sigmoid integral has a closed form") {
    const double h = -0.8;
    Eigen::VectorXd vals =
        Eigen::VectorXd::Constant(quad.nodes.size(), sigmoid(-h));
    CHECK(quad.integrate(vals) ==
          doctest::Approx(10.0 * sigmoid(-h)).epsilon(1e-10));
  }
  SUBCASE("degree 2n-1 polynomials are exact per interval") {
    const int n = 5;
    Eigen::VectorXd vals(quad.nodes.size());
    for (Eigen::Index q = 0; q < quad.nodes.size(); ++q) {
      vals[q] = std::pow(quad.nodes[q], 2 * n - 1);
    }
    CHECK(quad.integrate(vals) ==
          doctest::Approx(std::pow(10.0, 2 * n) / (2 * n)).epsilon(1e-12));
  }
  SUBCASE("boundaries are the event times") {
    REQUIRE(quad.boundaries.size() == 4);
    CHECK(quad.boundaries[1] == 2.0);
    CHECK(quad.boundaries[2] == 6.0);
  }
}
