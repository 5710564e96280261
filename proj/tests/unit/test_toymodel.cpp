#include <doctest.h>

#include <cmath>

#include "emopanel/common.hpp"
#include "emopanel/toymodel.hpp"
#include "test_support.hpp"

using namespace emopanel;
using namespace emopanel::toy;

namespace {

ToyParams unit_params() {
  ToyParams p;
  p.m = 0;
  p.rho = 1;
  p.n = 1;
  p.sigma_i2 = p.sigma_a2 = p.sigma_1_2 = p.sigma_2_2 = 1;
  return p;
}

ToyParams random_params(Rng& rng) {
  ToyParams p;
  p.m = rng.uniform(-3, 3);
  p.m_tilde = rng.uniform(-3, 3);
  p.n = static_cast<int>(rng.uniform_int(1, 500));
  p.rho = rng.uniform(0, 5);
  p.sigma_i2 = rng.uniform(0.001, 2);
  p.sigma_a2 = rng.uniform(0.001, 2);
  p.sigma_1_2 = rng.uniform(0, 2);
  p.sigma_2_2 = rng.uniform(0, 2);
  p.eta = rng.uniform(-0.99, 0.99);
  return p;
}

}  // namespace

TEST_CASE("gamma: fully revealing, hand ratio, uninformative limit") {
  ToyParams p;
  p.sigma_1_2 = 0;
  CHECK(gamma(p).g1 == 1.0);
  p.sigma_i2 = 0.1;
  p.sigma_1_2 = 0.3;
  CHECK(gamma(p).g1 == doctest::Approx(0.25).epsilon(1e-15));
  p.sigma_2_2 = 1e12;
  CHECK(gamma(p).g2 < 1e-12);
  p.sigma_i2 = 0;
  p.sigma_1_2 = 0;
  CHECK_THROWS_AS(gamma(p), InvalidArgument);
}

TEST_CASE("posterior mean and variance") {
  ToyParams p;
  CHECK(posterior(p, {0, 0}).mean == 0.0);
  p.sigma_1_2 = p.sigma_2_2 = 0;
  CHECK(posterior(p, {0.3, -0.2}).var == 0.0);
  CHECK(posterior(p, {0.3, -0.2}).mean == doctest::Approx(0.1));
}

TEST_CASE("posterior variance never exceeds the prior variance") {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    auto p = random_params(rng);
    double prior = p.sigma_i2 + p.sigma_a2;
    auto post = posterior(p, {rng.normal(), rng.normal()});
    CHECK(post.var <= prior + 1e-15);
    CHECK(post.var >= 0);
  }
  ToyParams p;
  p.sigma_1_2 = p.sigma_2_2 = 1e300;
  CHECK(posterior(p, {}).var == doctest::Approx(p.sigma_i2 + p.sigma_a2));
}

TEST_CASE("q0 Bayesian price") {
  ToyParams p;
  p.m = 1;
  p.rho = 0;
  CHECK(price_q0_bayes(p) == 1.0);
  p.rho = 2;
  p.n = 2;
  p.sigma_i2 = 0.04;
  p.sigma_a2 = 0.02;
  CHECK(price_q0_bayes(p) == doctest::Approx(0.92).epsilon(1e-15));
  p.n = 1000000;
  CHECK(price_q0_bayes(p) == doctest::Approx(p.m - p.rho * p.sigma_a2).epsilon(1e-6));
}

TEST_CASE("q1 Bayesian price") {
  ToyParams p;
  p.sigma_1_2 = p.sigma_2_2 = 1e300;
  CHECK(price_q1_bayes(p, {0, 0}) == doctest::Approx(price_q0_bayes(p)).epsilon(1e-15));
  ToyParams r;
  r.rho = 7;
  r.sigma_1_2 = r.sigma_2_2 = 0;
  CHECK(price_q1_bayes(r, {0.3, 0.4}) == doctest::Approx(r.m + 0.7).epsilon(1e-15));
  CHECK(price_q1_bayes(unit_params(), {1, 1}) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("q0 emotional price") {
  ToyParams p;
  CHECK(price_q0_em(p) == price_q0_bayes(p));
  p.eta = 0.1;
  p.m = 2;
  p.rho = 0;
  CHECK(price_q0_em(p) == doctest::Approx(2.2).epsilon(1e-15));
  p.eta = -0.5;
  p.rho = 1;
  CHECK(price_q0_em(p) - price_q0_bayes(p) == doctest::Approx(-0.5 * p.m).epsilon(1e-15));
}

TEST_CASE("q0 emotional price increases with eta when m > 0") {
  ToyParams p;
  p.m = 1.5;
  double prev = -1e300;
  for (double eta : eta_grid(-0.9, 0.9, 37)) {
    p.eta = eta;
    double q = price_q0_em(p);
    CHECK(q > prev);
    prev = q;
  }
}

TEST_CASE("comparative static equals -eta m") {
  ToyParams p;
  CHECK(delta_comparative(p, {0.2, 0.1}) == 0.0);
  p.eta = 0.1;
  p.m = 2;
  CHECK(delta_comparative(p, {0.2, 0.1}) == doctest::Approx(-0.2).epsilon(1e-14));
  CHECK(delta_comparative(p, {-5, 3}) == doctest::Approx(-0.2).epsilon(1e-14));
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    auto q = random_params(rng);
    Signals s{rng.normal(0, 2), rng.normal(0, 2)};
    double direct = (price_q0_bayes(q) - price_q1_bayes(q, s)) - (price_q0_em(q) - price_q1_bayes(q, s));
    CHECK(std::abs(delta_comparative(q, s) - (-q.eta * q.m)) <= 1e-12);
    CHECK(std::abs(direct - (-q.eta * q.m)) <= 1e-12);
  }
}

TEST_CASE("Monte Carlo posterior mean agrees with the closed form") {
  ToyParams p;
  p.sigma_i2 = 0.3;
  p.sigma_a2 = 0.2;
  p.sigma_1_2 = 0.1;
  p.sigma_2_2 = 0.4;
  Signals s{0.5, -0.3};
  auto mc = monte_carlo_posterior(p, s, 200000, 5);
  CHECK(mc.draws == 200000);
  CHECK(mc.analytic_mean == doctest::Approx(posterior(p, s).mean));
  CHECK(std::abs(mc.empirical_mean - mc.analytic_mean) < 3 * mc.se);
  auto again = monte_carlo_posterior(p, s, 200000, 5);
  CHECK(again.empirical_mean == mc.empirical_mean);
}

TEST_CASE("parameter validation") {
  ToyParams p;
  p.eta = 1;
  CHECK_THROWS_AS(price_q0_em(p), InvalidArgument);
  p.eta = 0;
  p.n = 0;
  CHECK_THROWS_AS(price_q0_bayes(p), InvalidArgument);
  p.n = 1;
  p.sigma_a2 = -1;
  CHECK_THROWS_AS(price_q0_bayes(p), InvalidArgument);
}

TEST_CASE("eta sweep: grid, zero row and CSV") {
  auto g = eta_grid(-0.5, 0.5, 11);
  REQUIRE(g.size() == 11);
  CHECK(g.front() == -0.5);
  CHECK(g.back() == 0.5);
  CHECK(g[5] == doctest::Approx(0.0).epsilon(1e-15));
  ToyParams p;
  auto rows = sweep_eta(p, {0.1, 0.05}, {0.0, 0.2});
  CHECK(rows[0].q0_em == rows[0].q0_bayes);
  CHECK(rows[1].delta == doctest::Approx(-0.2 * p.m));
  emopanel::testing::TempDir dir("toy");
  write_sweep_csv(dir.file("s.csv"), rows);
  auto t = read_csv(dir.file("s.csv"));
  CHECK(t.header == std::vector<std::string>{"eta", "q0_bayes", "q1_bayes", "q0_em", "delta"});
  CHECK(t.rows.size() == 2);
}
