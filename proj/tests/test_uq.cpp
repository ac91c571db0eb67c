#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "ettkit/ett.hpp"
#include "ettkit/polyalg.hpp"
#include "ettkit/uq.hpp"
#include "oracles.hpp"

using namespace ettkit;

namespace {

TruncatedPoly var(std::size_t n, std::size_t k, std::size_t i) { return TruncatedPoly::variable(n, k, i); }

DistributionSpec gaussian(double s) { return {{Marginal::gaussian(s)}}; }
DistributionSpec uniform(double a) { return {{Marginal::uniform(a)}}; }

EttResult free_fall_ett(std::size_t k) {
  ExprGraph g(2, 1);
  g.set_roots({g.var(1), -g.param(0)});
  OdeSystem sys(std::move(g), {1.0}, {"x", "v"}, {"g"});
  auto e = make_expression(2, 0, [](ExprGraph& h) { return h.var(0); });
  return compute_ett(sys, e, {1.0, 0.0}, std::vector<double>{1.0}, VarySpec{{0}, {}}, k);
}

}  // namespace

TEST(RawMoments, Examples) {
  const auto g = raw_moments(gaussian(2.0), 4);
  EXPECT_EQ(g.marginal(0, 2), 4.0);
  EXPECT_EQ(g.marginal(0, 4), 48.0);
  EXPECT_EQ(g.marginal(0, 3), 0.0);
  const auto u = raw_moments(uniform(3.0), 4);
  EXPECT_DOUBLE_EQ(u.marginal(0, 2), 3.0);
  const DistributionSpec mixed{{Marginal::gaussian(1.0), Marginal::uniform(1.0)}};
  const auto m = raw_moments(mixed, 4);
  const std::vector<int> a = {2, 2};
  EXPECT_DOUBLE_EQ(m(std::span<const int>(a)), 1.0 / 3.0);
  EXPECT_THROW((void)raw_moments(gaussian(1.0), 65), BudgetError);
  EXPECT_THROW((void)raw_moments(gaussian(-1.0), 4), ConfigError);
  EXPECT_EQ(m.expect(TruncatedPoly::constant(2, 3, 5.0)), 5.0);
}

TEST(PropagateMoments, Examples) {
  const double s = 0.7;
  const auto d = var(1, 2, 0);
  auto r1 = propagate_moments(d, gaussian(s), 2);
  EXPECT_NEAR(r1.mean[0], 0.0, 1e-15);
  EXPECT_NEAR(r1.central[0][2], s * s, 1e-15);
  auto r2 = propagate_moments(d * d, gaussian(s), 2);
  EXPECT_NEAR(r2.mean[0], s * s, 1e-15);
  EXPECT_NEAR(r2.central[0][2], 2 * std::pow(s, 4), 1e-15);
  const double a = 1.3;
  auto r3 = propagate_moments(d, uniform(a), 4);
  EXPECT_NEAR(r3.central[0][2], a * a / 3, 1e-15);
  EXPECT_NEAR(r3.central[0][4], std::pow(a, 4) / 5, 1e-14);
  EXPECT_NEAR(r3.central[0][4] / std::pow(r3.central[0][2], 2) - 3.0, -1.2, 1e-12);
}

TEST(PropagateMoments, LinearGaussianCovariance) {
  const std::size_t n = 3;
  Eigen::MatrixXd jac(2, 3);
  jac << 1.0, -2.0, 0.5, 0.3, 0.0, 4.0;
  const std::vector<double> sig = {0.1, 0.2, 0.05};
  std::vector<TruncatedPoly> outs;
  for (int r = 0; r < 2; ++r) {
    TruncatedPoly p = TruncatedPoly::constant(n, 1, 1.0 + r);
    for (std::size_t c = 0; c < n; ++c) {
      p += jac(r, static_cast<Eigen::Index>(c)) * var(n, 1, c);
    }
    outs.push_back(p);
  }
  DistributionSpec d;
  for (double s : sig) {
    d.marginals.push_back(Marginal::gaussian(s));
  }
  const auto rep = propagate_moments(PolyMap(outs), d, 3);
  Eigen::MatrixXd cov_in = Eigen::MatrixXd::Zero(3, 3);
  for (int i = 0; i < 3; ++i) {
    cov_in(i, i) = sig[i] * sig[i];
  }
  const Eigen::MatrixXd ref = jac * cov_in * jac.transpose();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(rep.covariance[i][j], ref(i, j), 1e-12);
    }
    EXPECT_NEAR(rep.central[i][3], 0.0, 1e-15);
  }
  SurrogateOptions opt;
  opt.n = 200000;
  opt.seed = 5;
  const auto sur = surrogate_quantiles(PolyMap(outs), d, opt);
  for (int i = 0; i < 2; ++i) {
    // standard error of the sample third moment of a Gaussian: sqrt(15 s^6 / n)
    const double s2 = ref(i, i);
    EXPECT_LT(std::abs(sur.outputs[i].m3), 4.0 * std::sqrt(15.0 * s2 * s2 * s2 / opt.n));
  }
}

TEST(PropagateMoments, ScalingEquivariance) {
  const auto p = 2.0 * var(2, 3, 0) - 0.5 * var(2, 3, 1);
  const DistributionSpec d{{Marginal::gaussian(0.3), Marginal::uniform(0.8)}};
  const double base = propagate_moments(p, d, 2).central[0][2];
  for (double s : {0.5, 2.0, 3.0}) {
    EXPECT_NEAR(propagate_moments(p, d.scaled(s), 2).central[0][2], s * s * base, 1e-13 * s * s);
  }
}

TEST(PropagateMoments, ProductsAreNotTruncated) {
  // P = d0 + d0 d1 at order 2: E[(P - m1)^2] needs the degree-4 term (d0 d1)^2
  const auto p = var(2, 2, 0) + var(2, 2, 0) * var(2, 2, 1);
  const DistributionSpec d{{Marginal::gaussian(0.5), Marginal::gaussian(0.4)}};
  const double exact = propagate_moments(p, d, 2).central[0][2];
  EXPECT_NEAR(exact, 0.25 + 0.25 * 0.16, 1e-15);
  const auto table = raw_moments(d, 2);
  const double mu = table.expect(p);
  const double truncated = table.expect((p - mu) * (p - mu));
  EXPECT_GT(std::abs(exact - truncated), 1e-3);
}

TEST(PropagateMoments, BudgetAndArity) {
  EXPECT_THROW((void)propagate_moments(var(1, 20, 0), gaussian(1.0), 4), BudgetError);
  EXPECT_THROW((void)propagate_moments(var(2, 2, 0), gaussian(1.0), 2), DimensionError);
}

TEST(ComposeObservable, Examples) {
  const auto r = free_fall_ett(4);
  auto first = make_expression(2, 0, [](ExprGraph& g) { return g.var(0); });
  const auto p0 = compose_observable(first, r);
  EXPECT_TRUE(std::ranges::equal(p0.coeffs(), r.ett_map[0].coeffs()));

  auto speed = make_expression(2, 0, [](ExprGraph& g) { return sqrt(g.var(1) * g.var(1)); });
  const auto s = compose_observable(speed, r);
  const auto ref = test::binomial_series(0.5, 4);
  for (int j = 0; j <= 4; ++j) {
    EXPECT_LT(test::rel_err(s.coeff({j}), std::sqrt(2.0) * ref[j]), 1e-9) << j;
  }

  // x^2 on a map pinned to 1 is the constant 1
  ExprGraph g(1, 0);
  g.set_roots({-g.var(0)});
  OdeSystem decay(std::move(g), {});
  auto ev = make_expression(1, 0, [](ExprGraph& h) { return h.var(0) - 1.0; });
  const auto lin = compute_ett(decay, ev, {2.0}, {}, VarySpec{{0}, {}}, 3);
  auto sq = make_expression(1, 0, [](ExprGraph& h) { return h.var(0) * h.var(0); });
  const auto c = compose_observable(sq, lin);
  EXPECT_NEAR(c.constant_term(), 1.0, 1e-12);
  EXPECT_LT(c.nilpotent_part().max_abs(), 1e-11);

  auto negative = make_expression(2, 0, [](ExprGraph& h) { return sqrt(h.var(0) - 1.0); });
  EXPECT_THROW((void)compose_observable(negative, r), DomainError);
}

TEST(Surrogate, Examples) {
  SurrogateOptions opt;
  opt.n = 100000;
  opt.seed = 42;
  opt.thresholds = {0.0};
  const auto a = surrogate_quantiles(var(1, 1, 0), uniform(1.0), opt);
  const auto& e = a.outputs[0].exceedance[0];
  EXPECT_LE(e.ci_lo, 0.5);
  EXPECT_GE(e.ci_hi, 0.5);

  opt.thresholds = {1.0};
  const auto b = surrogate_quantiles(var(1, 2, 0) * var(1, 2, 0), gaussian(1.0), opt);
  const auto& f = b.outputs[0].exceedance[0];
  const double chi2 = std::erf(1.0 / std::sqrt(2.0));  // P[|Z| < 1]
  EXPECT_LE(f.ci_lo, chi2);
  EXPECT_GE(f.ci_hi, chi2);

  const auto c = surrogate_quantiles(TruncatedPoly::constant(1, 2, 3.5), gaussian(1.0), opt);
  for (double q : c.outputs[0].quantiles) {
    EXPECT_EQ(q, 3.5);
  }
}

TEST(Surrogate, SampleMomentsAgreeWithExactMoments) {
  const auto r = free_fall_ett(4);
  for (const auto& d : {gaussian(0.05), uniform(0.1)}) {
    const auto exact = propagate_moments(r.ett_map[1], d, 6);
    SurrogateOptions opt;
    opt.n = 100000;
    opt.seed = 9;
    const auto s = surrogate_quantiles(r.ett_map[1], d, opt);
    const auto& m = exact.central[0];
    const double n = static_cast<double>(opt.n);
    EXPECT_LT(std::abs(s.outputs[0].mean - exact.mean[0]), 4.0 * std::sqrt(m[2] / n));
    EXPECT_LT(std::abs(s.outputs[0].m2 - m[2]), 4.0 * std::sqrt((m[4] - m[2] * m[2]) / n));
    const double var3 = m[6] - m[3] * m[3] - 6.0 * m[4] * m[2] + 9.0 * m[2] * m[2] * m[2];
    EXPECT_LT(std::abs(s.outputs[0].m3 - m[3]), 4.0 * std::sqrt(var3 / n));
  }
}

TEST(Surrogate, QuantilesMonotoneAndThreadIndependent) {
  const auto p = var(2, 2, 0) + 0.5 * var(2, 2, 1) * var(2, 2, 1);
  const DistributionSpec d{{Marginal::gaussian(1.0), Marginal::uniform(2.0)}};
  SurrogateOptions opt;
  opt.n = 20000;
  opt.seed = 3;
  opt.histogram_bins = 10;
  opt.thresholds = {0.0, 1.0};
  const auto a = surrogate_quantiles(p, d, opt);
  opt.threads = 3;
  const auto b = surrogate_quantiles(p, d, opt);
  EXPECT_TRUE(std::is_sorted(a.outputs[0].quantiles.begin(), a.outputs[0].quantiles.end()));
  const auto moments = propagate_moments(p, d, 3);
  EXPECT_EQ(uq_report_to_json(moments, &a).dump(), uq_report_to_json(moments, &b).dump());
  std::size_t total = 0;
  for (auto c : a.outputs[0].histogram.counts) {
    total += c;
  }
  EXPECT_EQ(total, opt.n);
}

TEST(Surrogate, WilsonInterval) {
  const auto [lo, hi] = wilson95(50, 100);
  EXPECT_NEAR(lo, 0.4038, 1e-4);
  EXPECT_NEAR(hi, 0.5962, 1e-4);
  const auto [lo0, hi0] = wilson95(0, 100);
  EXPECT_NEAR(lo0, 0.0, 1e-15);
  EXPECT_GT(hi0, 0.0);
}

TEST(UqJson, DistributionParsingNamesField) {
  const auto good = nlohmann::json::parse(R"([{"kind":"gaussian","sigma":0.1},{"kind":"uniform","half_width":2}])");
  const auto d = distribution_from_json(good, "distribution");
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(distribution_to_json(d), good);
  try {
    (void)distribution_from_json(nlohmann::json::parse(R"([{"kind":"uniform","half_width":-1}])"), "distribution");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("distribution"), std::string::npos);
  }
  try {
    (void)distribution_from_json(nlohmann::json::parse(R"([{"kind":"cauchy"}])"), "distribution");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("distribution[0].kind"), std::string::npos);
  }
}
