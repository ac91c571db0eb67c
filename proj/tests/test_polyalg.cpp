#include <cmath>
#include <functional>
#include <random>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "ettkit/polyalg.hpp"
#include "oracles.hpp"

using namespace ettkit;
using ettkit::test::loglog_slope;

namespace {

TruncatedPoly x1(std::size_t order) { return TruncatedPoly::variable(1, order, 0); }

TruncatedPoly random_poly(std::mt19937_64& rng, std::size_t nvars, std::size_t order, bool zero_constant = false,
                          double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  TruncatedPoly p(nvars, order);
  for (std::size_t i = zero_constant ? 1 : 0; i < p.size(); ++i) {
    p[i] = u(rng);
  }
  return p;
}

void expect_coeffs_near(const TruncatedPoly& a, const TruncatedPoly& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i], b[i], tol * std::max(1.0, std::abs(b[i]))) << "coefficient " << i;
  }
}

}  // namespace

TEST(MonomialBasis, GradedLexOrderAndRankBijection) {
  const auto b = MonomialBasis::get(3, 4);
  ASSERT_EQ(b->size(), monomial_count(3, 4));
  EXPECT_EQ(b->size(), 35u);
  // degree-1 block lists x0, x1, x2
  EXPECT_EQ(b->exponents(1)[0], 1);
  EXPECT_EQ(b->exponents(3)[2], 1);
  for (std::size_t i = 0; i < b->size(); ++i) {
    EXPECT_EQ(b->rank(b->exponents(i)), i);
    if (i > 0) {
      EXPECT_GE(b->degree(i), b->degree(i - 1));
    }
  }
}

TEST(MonomialBasis, CoefficientCountMatchesBinomial) {
  for (std::size_t n = 1; n <= 5; ++n) {
    for (std::size_t k = 1; k <= 6; ++k) {
      TruncatedPoly p(n, k);
      EXPECT_EQ(p.size(), static_cast<std::size_t>(ettkit::test::choose(static_cast<int>(n + k), static_cast<int>(k))));
    }
  }
}

TEST(MonomialBasis, ConcurrentProductTableInitialisation) {
  const auto b = MonomialBasis::get(4, 7);
  std::vector<std::thread> threads;
  std::vector<std::size_t> got(8);
  for (std::size_t t = 0; t < got.size(); ++t) {
    threads.emplace_back([&, t] { got[t] = b->product_index(2, 3); });
  }
  for (auto& th : threads) {
    th.join();
  }
  const std::vector<int> e = {0, 1, 1, 0};
  for (auto g : got) {
    EXPECT_EQ(g, b->rank(std::span<const int>(e)));
  }
}

TEST(PolyAdd, Examples) {
  auto x = x1(3);
  auto s = (1.0 + x) + (1.0 - x);
  EXPECT_EQ(s[0], 2.0);
  EXPECT_TRUE(s.is_constant());

  auto p = 3.0 * x * x + 2.0;
  auto z = TruncatedPoly::zero(1, 3);
  expect_coeffs_near(p + z, p, 0.0);

  auto xv = TruncatedPoly::variable(2, 2, 0);
  auto yv = TruncatedPoly::variable(2, 2, 1);
  auto xy = xv + yv;
  EXPECT_EQ(xy.coeff({1, 0}), 1.0);
  EXPECT_EQ(xy.coeff({0, 1}), 1.0);
}

TEST(PolyAdd, DimensionMismatchThrows) {
  EXPECT_THROW((void)(TruncatedPoly(1, 2) + TruncatedPoly(2, 2)), DimensionError);
  EXPECT_THROW((void)(TruncatedPoly(1, 2) + TruncatedPoly(1, 3)), DimensionError);
}

TEST(PolyMul, Examples) {
  auto x = x1(2);
  auto sq = mul(1.0 + x, 1.0 + x, 2);
  EXPECT_EQ(sq.coeff({0}), 1.0);
  EXPECT_EQ(sq.coeff({1}), 2.0);
  EXPECT_EQ(sq.coeff({2}), 1.0);

  auto lin = x1(1);
  EXPECT_TRUE(mul(lin, lin, 1).max_abs() == 0.0);

  // (1+x+y)(1-x) = 1 + y - x^2 - xy, by hand expansion
  auto xv = TruncatedPoly::variable(2, 2, 0);
  auto yv = TruncatedPoly::variable(2, 2, 1);
  auto prod = mul(1.0 + xv + yv, 1.0 - xv, 2);
  EXPECT_EQ(prod.coeff({0, 0}), 1.0);
  EXPECT_EQ(prod.coeff({1, 0}), 0.0);
  EXPECT_EQ(prod.coeff({0, 1}), 1.0);
  EXPECT_EQ(prod.coeff({2, 0}), -1.0);
  EXPECT_EQ(prod.coeff({1, 1}), -1.0);
  EXPECT_EQ(prod.coeff({0, 2}), 0.0);
}

TEST(PolyMul, ExactWhenOutOrderCoversBothDegrees) {
  std::mt19937_64 rng(7);
  auto a = random_poly(rng, 2, 3);
  auto b = random_poly(rng, 2, 3);
  auto p = mul(a, b, 6);
  const std::vector<double> pt = {0.3, -0.7};
  EXPECT_NEAR(p.evaluate(pt), a.evaluate(pt) * b.evaluate(pt), 1e-13);
}

TEST(PolyMul, RingAxiomsOnRandomPolys) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_poly(rng, 3, 4);
    auto b = random_poly(rng, 3, 4);
    auto c = random_poly(rng, 3, 4);
    expect_coeffs_near(a * b, b * a, 1e-13);
    expect_coeffs_near((a * b) * c, a * (b * c), 1e-13);
    expect_coeffs_near(a * (b + c), a * b + a * c, 1e-13);
    expect_coeffs_near((a + b) + c, a + (b + c), 1e-13);
  }
}

TEST(PolyCompose, Examples) {
  auto x = x1(3);
  auto outer = x * x;
  PolyMap inner({x + x * x});
  auto r = compose(outer, inner);
  EXPECT_EQ(r.coeff({2}), 1.0);
  EXPECT_EQ(r.coeff({3}), 2.0);
  EXPECT_EQ(r.coeff({1}), 0.0);

  std::mt19937_64 rng(3);
  std::vector<TruncatedPoly> outs = {random_poly(rng, 2, 3, true), random_poly(rng, 2, 3, true)};
  PolyMap m(outs);
  auto first = compose(TruncatedPoly::variable(2, 3, 0), m);
  expect_coeffs_near(first, m[0], 0.0);

  auto u = TruncatedPoly::variable(2, 2, 0);
  auto v = TruncatedPoly::variable(2, 2, 1);
  auto outer2 = 1.0 + TruncatedPoly::variable(2, 2, 0) + TruncatedPoly::variable(2, 2, 1);
  auto r2 = compose(outer2, PolyMap({u * u, v * v}));
  EXPECT_EQ(r2.coeff({0, 0}), 1.0);
  EXPECT_EQ(r2.coeff({2, 0}), 1.0);
  EXPECT_EQ(r2.coeff({0, 2}), 1.0);
  EXPECT_EQ(r2.coeff({1, 1}), 0.0);
}

TEST(PolyCompose, Errors) {
  auto x = x1(2);
  EXPECT_THROW((void)compose(x, PolyMap({1.0 + x})), DimensionError);
  EXPECT_THROW((void)compose(TruncatedPoly::variable(2, 2, 0), PolyMap({x})), DimensionError);
}

TEST(PolyCompose, Associativity) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = random_poly(rng, 3, 3);
    std::vector<TruncatedPoly> a, b;
    for (int i = 0; i < 3; ++i) {
      a.push_back(random_poly(rng, 3, 3, true));
      b.push_back(random_poly(rng, 3, 3, true));
    }
    PolyMap m1(a), m2(b);
    auto lhs = compose(compose(p, m1), m2);
    auto rhs = compose(p, compose(m1, m2));
    expect_coeffs_near(lhs, rhs, 1e-12);
  }
}

TEST(ElemFn, MaclaurinExamples) {
  auto s = sin(x1(3));
  EXPECT_DOUBLE_EQ(s.coeff({1}), 1.0);
  EXPECT_DOUBLE_EQ(s.coeff({2}), 0.0);
  EXPECT_DOUBLE_EQ(s.coeff({3}), -1.0 / 6.0);

  auto e = exp(x1(2));
  EXPECT_DOUBLE_EQ(e.coeff({0}), 1.0);
  EXPECT_DOUBLE_EQ(e.coeff({1}), 1.0);
  EXPECT_DOUBLE_EQ(e.coeff({2}), 0.5);

  auto l = log(1.0 + x1(3));
  EXPECT_DOUBLE_EQ(l.coeff({0}), 0.0);
  EXPECT_DOUBLE_EQ(l.coeff({1}), 1.0);
  EXPECT_DOUBLE_EQ(l.coeff({2}), -0.5);
  EXPECT_DOUBLE_EQ(l.coeff({3}), 1.0 / 3.0);

  auto c = cos(x1(4));
  EXPECT_DOUBLE_EQ(c.coeff({2}), -0.5);
  EXPECT_DOUBLE_EQ(c.coeff({4}), 1.0 / 24.0);

  auto sq = sqrt(1.0 + x1(4));
  const auto ref = ettkit::test::binomial_series(0.5, 4);
  for (int j = 0; j <= 4; ++j) {
    EXPECT_NEAR(sq.coeff({j}), ref[j], 1e-15);
  }
  auto inv3 = powi(2.0 + x1(4), -3);
  const auto ref3 = ettkit::test::binomial_series(-3.0, 4);
  for (int j = 0; j <= 4; ++j) {
    EXPECT_NEAR(inv3.coeff({j}), ref3[j] / 8.0 / std::pow(2.0, j), 1e-15);
  }
}

TEST(ElemFn, DomainErrors) {
  EXPECT_THROW((void)sqrt(-1.0 + x1(2)), DomainError);
  EXPECT_THROW((void)log(0.0 + x1(2)), DomainError);
  EXPECT_THROW((void)reciprocal(x1(2)), DomainError);
  EXPECT_THROW((void)powi(x1(2), -2), DomainError);
  EXPECT_NO_THROW((void)powi(x1(2), 3));
  EXPECT_EQ(sqrt(TruncatedPoly::zero(1, 2)).max_abs(), 0.0);
}

TEST(ElemFn, TruncationErrorConvergenceOrder) {
  struct Case {
    const char* name;
    std::function<TruncatedPoly(const TruncatedPoly&)> poly_fn;
    std::function<double(double)> real_fn;
    double center;
  };
  const std::vector<Case> cases = {
      {"sin", [](const TruncatedPoly& p) { return sin(p); }, [](double v) { return std::sin(v); }, 0.7},
      {"cos", [](const TruncatedPoly& p) { return cos(p); }, [](double v) { return std::cos(v); }, 0.7},
      {"exp", [](const TruncatedPoly& p) { return exp(p); }, [](double v) { return std::exp(v); }, 0.3},
      {"log", [](const TruncatedPoly& p) { return log(p); }, [](double v) { return std::log(v); }, 1.3},
      {"sqrt", [](const TruncatedPoly& p) { return sqrt(p); }, [](double v) { return std::sqrt(v); }, 1.3},
      {"reciprocal", [](const TruncatedPoly& p) { return reciprocal(p); }, [](double v) { return 1.0 / v; }, 1.3},
      {"powi-3", [](const TruncatedPoly& p) { return powi(p, -3); }, [](double v) { return std::pow(v, -3); }, 1.3},
  };
  const std::size_t k = 3;
  for (const auto& c : cases) {
    auto dx = TruncatedPoly::variable(2, k, 0);
    auto dy = TruncatedPoly::variable(2, k, 1);
    auto p = c.center + 0.8 * dx - 0.5 * dy + 0.3 * dx * dy + 0.2 * dy * dy;
    auto fp = c.poly_fn(p);
    std::vector<double> hs, errs;
    for (int j = 3; j <= 6; ++j) {
      const double h = std::ldexp(1.0, -j);
      const std::vector<double> pt = {h, -0.6 * h};
      hs.push_back(h);
      errs.push_back(std::abs(fp.evaluate(pt) - c.real_fn(p.evaluate(pt))));
    }
    EXPECT_GE(loglog_slope(hs, errs), k + 0.5) << c.name;
  }
}

TEST(ElemFn, OrderOneEqualsValueAndDerivative) {
  auto p = 0.4 + TruncatedPoly::variable(1, 1, 0);
  auto s = sin(p);
  EXPECT_EQ(s[0], std::sin(0.4));
  EXPECT_EQ(s[1], std::cos(0.4));
}

TEST(Partial, Examples) {
  auto x = TruncatedPoly::variable(2, 3, 0);
  auto y = TruncatedPoly::variable(2, 3, 1);
  auto d = (x * x * y).partial(0);
  EXPECT_EQ(d.coeff({1, 1}), 2.0);
  EXPECT_EQ(d.max_abs(), 2.0);
  EXPECT_EQ((x * x).partial(1).max_abs(), 0.0);
  auto ds = sin(x1(3)).partial(0);
  EXPECT_DOUBLE_EQ(ds.coeff({0}), 1.0);
  EXPECT_DOUBLE_EQ(ds.coeff({2}), -0.5);
  EXPECT_EQ(ds.coeff({3}), 0.0);
}

TEST(InvertMap, Examples) {
  PolyMap id = PolyMap::identity(1, 3);
  auto inv = invert_map(id);
  EXPECT_EQ(inv[0].coeff({1}), 1.0);
  EXPECT_EQ(inv[0].nonlinear_part().max_abs(), 0.0);

  auto x = x1(4);
  auto r = invert_map(PolyMap({x + x * x}));
  for (int n = 1; n <= 4; ++n) {
    EXPECT_NEAR(r[0].coeff({n}), ettkit::test::reversion_x_plus_x2(n), 1e-14) << n;
  }

  auto u = TruncatedPoly::variable(2, 2, 0);
  auto v = TruncatedPoly::variable(2, 2, 1);
  auto r2 = invert_map(PolyMap({2.0 * u, v + u * u}));
  EXPECT_NEAR(r2[0].coeff({1, 0}), 0.5, 1e-15);
  EXPECT_NEAR(r2[0].nonlinear_part().max_abs(), 0.0, 1e-15);
  EXPECT_NEAR(r2[1].coeff({0, 1}), 1.0, 1e-15);
  EXPECT_NEAR(r2[1].coeff({2, 0}), -0.25, 1e-15);
  EXPECT_NEAR(r2[1].coeff({1, 1}), 0.0, 1e-15);
}

TEST(InvertMap, SingularLinearPartThrows) {
  auto u = TruncatedPoly::variable(2, 2, 0);
  auto v = TruncatedPoly::variable(2, 2, 1);
  EXPECT_THROW((void)invert_map(PolyMap({u + v, 2.0 * u + 2.0 * v})), NumericalError);
  EXPECT_THROW((void)invert_map(PolyMap({1.0 + u, v})), DimensionError);
  EXPECT_THROW((void)invert_map(PolyMap({u})), DimensionError);
}

TEST(InvertMap, RoundTripIsIdentity) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TruncatedPoly> outs;
    for (std::size_t i = 0; i < 3; ++i) {
      auto p = random_poly(rng, 3, 4, true, 0.5);
      p[1 + i] += 2.0;
      outs.push_back(p);
    }
    PolyMap m(outs);
    auto inv = invert_map(m);
    auto left = compose(m, inv);
    auto right = compose(inv, m);
    auto id = PolyMap::identity(3, 4);
    for (std::size_t i = 0; i < 3; ++i) {
      expect_coeffs_near(left[i], id[i], 1e-12);
      expect_coeffs_near(right[i], id[i], 1e-12);
    }
  }
}

TEST(PartialInvert, Examples) {
  auto dt = x1(2);
  auto r = partial_invert(PolyMap({2.0 * dt}), 0, 0);
  EXPECT_NEAR(r[0].coeff({1}), 0.5, 1e-15);

  auto dx = TruncatedPoly::variable(2, 2, 0);
  auto dT = TruncatedPoly::variable(2, 2, 1);
  auto r2 = partial_invert(PolyMap({dT + dx * dT}), 1, 0);
  // delta T = eps - dx * eps, with eps in slot 1
  EXPECT_NEAR(r2[0].coeff({0, 1}), 1.0, 1e-15);
  EXPECT_NEAR(r2[0].coeff({1, 1}), -1.0, 1e-15);
  EXPECT_NEAR(r2[0].coeff({1, 0}), 0.0, 1e-15);
  EXPECT_NEAR(r2[0].coeff({2, 0}), 0.0, 1e-15);
  EXPECT_NEAR(r2[0].coeff({0, 2}), 0.0, 1e-15);

  EXPECT_THROW((void)partial_invert(PolyMap({dt * dt}), 0, 0), EventError);
}

TEST(PartialInvert, OtherOutputsReexpressed) {
  // y = a + 3 dT, e = 5 + 2 dT  ->  in (eps) variables: y = a + 1.5 eps
  auto dT = x1(3);
  auto r = partial_invert(PolyMap({4.0 + 3.0 * dT, 5.0 + 2.0 * dT + dT * dT}), 0, 1);
  EXPECT_NEAR(r[0].coeff({0}), 4.0, 1e-15);
  EXPECT_NEAR(r[0].coeff({1}), 1.5, 1e-15);
  // dT = (-2 + sqrt(4 + 4 eps)) / 2 = sqrt(1+eps) - 1
  const auto ref = ettkit::test::binomial_series(0.5, 3);
  for (int j = 1; j <= 3; ++j) {
    EXPECT_NEAR(r[1].coeff({j}), ref[j], 1e-14);
    EXPECT_NEAR(r[0].coeff({j}), 3.0 * ref[j], 1e-14);
  }
}

TEST(PolyJson, RoundTripAndConventions) {
  std::mt19937_64 rng(23);
  auto p = random_poly(rng, 3, 3);
  const auto j = poly_to_json(p);
  EXPECT_EQ(j["terms"].size(), p.size());
  auto q = poly_from_json(nlohmann::json::parse(j.dump()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(q[i], p[i]);
  }
  auto x = x1(3);
  auto c = x * x * x;  // 1/3! d^3 = 1  ->  derivative convention 6
  const auto jd = poly_to_json(c, CoeffConvention::derivative);
  EXPECT_EQ(jd["terms"][3]["coeff"].get<double>(), 6.0);
  EXPECT_EQ(poly_from_json(jd)[3], 1.0);
  EXPECT_THROW((void)poly_from_json(nlohmann::json::parse(R"({"nvars": 1})")), ConfigError);
}
