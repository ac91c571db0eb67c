// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion ...]

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ettkit/app/commands.hpp"
#include "oracles.hpp"

using namespace ettkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// every ETT computed below, for the dimensionality audit
std::vector<const EttResult*> g_audit;
std::deque<EttResult> g_keep;

const EttResult& keep(EttResult r) {
  g_keep.push_back(std::move(r));
  return g_keep.back();
}

ExprGraph state_level(std::size_t n, std::size_t i, double level) {
  return make_expression(n, 0, [&](ExprGraph& g) { return g.var(i) - level; });
}

// ---- 1 -------------------------------------------------------------------

Outcome closed_form() {
  double worst = 0.0;
  auto check = [&](double got, double ref) {
    const double err = std::abs(got - ref) / std::max(std::abs(ref), 1.0);
    worst = std::max(worst, ref == 0.0 ? err : std::max(err, test::rel_err(got, ref)));
  };
  const std::size_t k = 4;

  // linear decay x' = -x from 2 + d to x = 1: x_e = 1, t* = ln 2 + ln(1 + d/2)
  const auto lin = make_scenario("linear_decay");
  const auto& rl = keep(compute_ett(lin.sys, state_level(1, 0, 1.0), {2.0}, lin.sys.param_defaults(),
                                    VarySpec{{0}, {}}, k));
  check(rl.t_star, std::log(2.0));
  check(rl.ett_map[0].constant_term(), 1.0);
  for (int j = 1; j <= static_cast<int>(k); ++j) {
    check(rl.dT_poly.coeff({j}), ((j % 2 == 1) ? 1.0 : -1.0) / (j * std::pow(2.0, j)));
    check(rl.ett_map[0].coeff({j}), 0.0);
  }

  // free fall from (1 + a, b) with g = 1 to x = 0:
  //   v_e = -sqrt(2) (1 + u)^(1/2), t* = b + sqrt(2) (1 + u)^(1/2), u = a + b^2 / 2
  const auto ff = make_scenario("free_fall");
  const auto& rf = keep(compute_ett(ff.sys, state_level(2, 0, 0.0), {1.0, 0.0}, ff.sys.param_defaults(),
                                    VarySpec{{0, 1}, {}}, k));
  const auto c = test::binomial_series(0.5, static_cast<int>(k));
  check(rf.t_star, std::sqrt(2.0));
  for (int i = 0; i <= 4; ++i) {
    for (int b = 0; i + b <= 4; ++b) {
      double s = 0.0;
      if (b % 2 == 0) {
        const int l = b / 2;
        s = std::sqrt(2.0) * c[i + l] * test::choose(i + l, l) * std::pow(0.5, l);
      }
      check(rf.ett_map[1].coeff({i, b}), -s);
      check(rf.ett_map[0].coeff({i, b}), 0.0);
      if (i + b > 0) {
        check(rf.dT_poly.coeff({i, b}), s + (i == 0 && b == 1 ? 1.0 : 0.0));
      }
    }
  }
  g_audit.push_back(&rl);
  g_audit.push_back(&rf);
  return {worst < 1e-8, "max relative coefficient error " + fmt("%.3g", worst) + " (< 1e-8)"};
}

// ---- 2 -------------------------------------------------------------------

Outcome stt_collapse() {
  const auto s = make_scenario("lotka_volterra_siren", {NetChoice::Kind::siren, 3, 1.0, {}});
  const double t_fixed = 1.5;
  auto e = make_expression(2, 0, [&](ExprGraph& g) { return g.time() - t_fixed; });
  const VarySpec vary{{0, 1}, {0, 2}};
  const std::size_t k = 3;
  const auto& r = keep(compute_ett(s.sys, e, s.x0, s.sys.param_defaults(), vary, k));
  const auto stt = jet_transport(s.sys, s.x0, s.sys.param_defaults(), vary, k, 0.0, t_fixed);
  double worst = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t c = 0; c < stt[i].size(); ++c) {
      worst = std::max(worst, std::abs(r.ett_map[i][c] - stt[i][c]));
    }
  }
  const double dT = r.dT_poly.max_abs();
  g_audit.push_back(&r);
  return {worst < 1e-12 && dT < 1e-12 && std::abs(r.t_star - t_fixed) < 1e-12,
          "max |ETT - STT| " + fmt("%.3g", worst) + ", max |dT| " + fmt("%.3g", dT) + " (< 1e-12)"};
}

// ---- 3 -------------------------------------------------------------------

Outcome mc_order() {
  struct Case {
    std::string name;
    Scenario s;
    ExprGraph event;
    VarySpec vary;
    std::vector<double> radii;
  };
  std::vector<Case> cases;
  auto ff = make_scenario("free_fall");
  auto ff_event = ff.event;
  cases.push_back({"free_fall", std::move(ff), std::move(ff_event), VarySpec{{0, 1}, {}}, {0.2, 0.1, 0.05}});
  auto cr = make_scenario("cr3bp_siren");
  auto cr_event = cr.event;
  cases.push_back({"cr3bp_siren", std::move(cr), std::move(cr_event), VarySpec{{0, 1}, {}}, {4e-3, 2e-3, 1e-3}});

  bool pass = true;
  std::ostringstream detail;
  detail << "slopes";
  for (const auto& cs : cases) {
    detail << " " << cs.name << " [";
    for (std::size_t k = 1; k <= 4; ++k) {
      const auto& r = keep(compute_ett(cs.s.sys, cs.event, cs.s.x0, cs.s.sys.param_defaults(), cs.vary, k));
      g_audit.push_back(&r);
      std::vector<double> errs;
      for (double rad : cs.radii) {
        const auto rep =
            validate_mc(r, cs.s.sys, cs.event, box_sampler(std::vector<double>(cs.vary.size(), rad), 100 + k), 1000);
        if (rep.succeeded != 1000) pass = false;
        errs.push_back(rep.max_abs_state);
      }
      const double slope = test::loglog_slope(cs.radii, errs);
      pass = pass && slope >= static_cast<double>(k) + 0.5;
      detail << (k > 1 ? " " : "") << fmt("%.2f", slope);
    }
    detail << "]";
  }
  detail << " (>= k + 0.5, k = 1..4)";
  return {pass, detail.str()};
}

// ---- 4 -------------------------------------------------------------------

Outcome inversion() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const std::size_t n = 3, k = 4;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TruncatedPoly> outs;
    for (std::size_t i = 0; i < n; ++i) {
      auto p = TruncatedPoly::zero(n, k);
      for (std::size_t c = 1; c < p.size(); ++c) {
        p[c] = u(rng);
      }
      p[1 + i] += 2.0;  // diagonally dominant linear part
      outs.push_back(p);
    }
    const PolyMap m(outs);
    const auto id = PolyMap::identity(n, k);
    const auto back = compose(m, invert_map(m));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < back[i].size(); ++c) {
        worst = std::max(worst, std::abs(back[i][c] - id[i][c]));
      }
    }
  }
  const auto x = TruncatedPoly::variable(1, 4, 0);
  const auto r = invert_map(PolyMap({x + x * x}));
  const double want[] = {1.0, -1.0, 2.0, -5.0};
  double rev = 0.0;
  for (int j = 1; j <= 4; ++j) {
    rev = std::max(rev, std::abs(r[0].coeff({j}) - want[j - 1]));
  }
  return {worst < 1e-12 && rev < 1e-12,
          "max residual " + fmt("%.3g", worst) + " over 100 maps, reversion error " + fmt("%.3g", rev)};
}

// ---- 5 -------------------------------------------------------------------

Outcome moments() {
  const std::size_t n_samples = 1000000;
  bool pass = true;
  double worst_z = 0.0;

  // linear, 3 inputs, 2 outputs
  const std::vector<std::vector<double>> jac = {{1.0, -2.0, 0.5}, {0.3, 0.0, 4.0}};
  std::vector<TruncatedPoly> lin_out;
  for (std::size_t r = 0; r < 2; ++r) {
    auto p = TruncatedPoly::constant(3, 1, 1.0 + static_cast<double>(r));
    for (std::size_t c = 0; c < 3; ++c) {
      p += jac[r][c] * TruncatedPoly::variable(3, 1, c);
    }
    lin_out.push_back(p);
  }
  // quadratic, 2 inputs
  const auto a = TruncatedPoly::variable(2, 2, 0);
  const auto b = TruncatedPoly::variable(2, 2, 1);
  const PolyMap quad({0.5 + a + 0.8 * b * b - 0.3 * a * b, b - a * a});
  // free-fall event map in the initial height
  const auto ff = make_scenario("free_fall");
  const auto& ett = keep(compute_ett(ff.sys, ff.event, ff.x0, ff.sys.param_defaults(), VarySpec{{0}, {}}, 4));
  g_audit.push_back(&ett);
  const PolyMap ff_map({ett.ett_map[1], ett.dT_poly});

  struct Case {
    const PolyMap* map;
    DistributionSpec gauss, unif;
  };
  const PolyMap lin_map(lin_out);
  const std::vector<double> lin_sig = {0.1, 0.2, 0.05};
  const Case cases[] = {
      {&lin_map,
       {{Marginal::gaussian(0.1), Marginal::gaussian(0.2), Marginal::gaussian(0.05)}},
       {{Marginal::uniform(0.1), Marginal::uniform(0.2), Marginal::uniform(0.05)}}},
      {&quad, {{Marginal::gaussian(0.3), Marginal::gaussian(0.4)}}, {{Marginal::uniform(0.5), Marginal::uniform(0.7)}}},
      {&ff_map, {{Marginal::gaussian(0.05)}}, {{Marginal::uniform(0.1)}}},
  };
  std::uint64_t seed = 71;
  for (const auto& cs : cases) {
    for (const auto* d : {&cs.gauss, &cs.unif}) {
      const auto exact = propagate_moments(*cs.map, *d, 6);
      SurrogateOptions opt;
      opt.n = n_samples;
      opt.seed = seed++;
      const auto s = surrogate_quantiles(*cs.map, *d, opt);
      const double nn = static_cast<double>(n_samples);
      for (std::size_t i = 0; i < cs.map->size(); ++i) {
        const auto& m = exact.central[i];
        const double se1 = std::sqrt(m[2] / nn);
        const double se2 = std::sqrt((m[4] - m[2] * m[2]) / nn);
        const double se3 = std::sqrt((m[6] - m[3] * m[3] - 6.0 * m[4] * m[2] + 9.0 * m[2] * m[2] * m[2]) / nn);
        const double z[] = {std::abs(s.outputs[i].mean - exact.mean[i]) / se1,
                            std::abs(s.outputs[i].m2 - m[2]) / se2, std::abs(s.outputs[i].m3 - m[3]) / se3};
        for (double zi : z) {
          worst_z = std::max(worst_z, zi);
          pass = pass && zi < 4.0;
        }
      }
    }
  }

  // J Sigma J^T
  const auto rep = propagate_moments(lin_map, cases[0].gauss, 2);
  double cov_err = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double ref = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        ref += jac[i][c] * lin_sig[c] * lin_sig[c] * jac[j][c];
      }
      cov_err = std::max(cov_err, std::abs(rep.covariance[i][j] - ref));
    }
  }
  pass = pass && cov_err < 1e-12;
  return {pass, "worst |sample - exact| " + fmt("%.2f", worst_z) + " SE (< 4), covariance error " +
                    fmt("%.3g", cov_err) + " (< 1e-12)"};
}

// ---- 6 -------------------------------------------------------------------

Outcome adjoint_fd() {
  const auto s = make_scenario("lotka_volterra_siren", {NetChoice::Kind::siren, 7, 1.0, {}});
  auto truth = s.sys.param_defaults();
  truth[0] = 1.1;
  truth[3] = 0.2;
  TaylorOptions topt;
  topt.tol = 1e-15;
  const auto data = synthesize_dataset(s.sys, truth, s.x0, 0.5, 4, topt);
  std::vector<std::size_t> all(s.sys.n_params());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const AdjointModel m(s.sys, all, topt);
  const auto theta = s.sys.param_defaults();
  const auto lg = m.loss_and_grad(theta, data);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double fd = test::central_difference(
        [&](double v) {
          auto t = theta;
          t[k] = v;
          return m.loss(t, data);
        },
        theta[k], h);
    worst = std::max(worst, std::abs(lg.grad[k] - fd) / std::abs(fd));
  }
  return {theta.size() >= 18 && worst < 1e-5, std::to_string(theta.size()) + " parameters, max relative error " +
                                                  fmt("%.3g", worst) + " (< 1e-5)"};
}

// ---- 7 -------------------------------------------------------------------

Outcome hamiltonian() {
  // near-circular orbit of radius 0.5 about the primary, at rest in the inertial frame's sense
  const double mu = kCr3bpMu;
  const std::vector<double> x0 = {0.5 - mu, 0.0, 0.0, std::sqrt((1.0 - mu) / 0.5)};
  double worst = 0.0;
  bool pass = true;
  for (const auto& net : {NetChoice{NetChoice::Kind::zero, 0, 1.0, {}}, NetChoice{NetChoice::Kind::siren, 5, 0.01, {}}}) {
    const auto s = make_scenario("cr3bp_siren", net);
    if (!s.hamiltonian) return {false, "scenario has no Hamiltonian"};
    const auto theta = s.sys.param_defaults();
    auto H = [&](const std::vector<double>& x) { return s.hamiltonian->eval(x, theta)[0]; };
    const double h0 = H(x0);
    TaylorOptions opt;
    opt.tol = 1e-15;
    opt.keep_dense = false;
    auto x = x0;
    for (int i = 1; i <= 200; ++i) {
      x = propagate(s.sys, x, theta, 0.1 * (i - 1), 0.1 * i, opt).terminal;
      worst = std::max(worst, std::abs(H(x) - h0) / std::abs(h0));
    }
    pass = pass && worst < 1e-10;
  }
  return {pass, "max relative drift over 20 TU " + fmt("%.3g", worst) + " (< 1e-10, zero and random net)"};
}

// ---- 8 -------------------------------------------------------------------

Outcome dimensions() {
  const auto ff = make_scenario("free_fall");
  const auto& r = keep(compute_ett(ff.sys, ff.event, ff.x0, ff.sys.param_defaults(), VarySpec{{0, 1}, {0}}, 4));
  g_audit.push_back(&r);
  bool pass = true;
  for (const auto* e : g_audit) {
    const int m = static_cast<int>(e->dT_poly.nvars());
    const int k = static_cast<int>(e->dT_poly.order());
    double want = 0.0;
    for (int i = 1; i <= k; ++i) {
      want += test::choose(m + i - 1, i);
    }
    for (const auto& out : e->ett_map.outputs()) {
      pass = pass && static_cast<double>(out.size() - 1) == want;
    }
    pass = pass && static_cast<double>(e->dT_poly.size() - 1) == want;
  }
  const auto n34 = r.ett_map[0].size() - 1;
  return {pass && n34 == 34, std::to_string(g_audit.size()) + " expansions audited, (m = 3, k = 4) gives " +
                                 std::to_string(n34)};
}

// ---- 9 -------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome reproducible() {
  const fs::path root = fs::temp_directory_path() / "ettkit_acceptance_9";
  fs::remove_all(root);
  const std::string cfg = std::string(" --config ") + ETTKIT_DEMO_CONFIG;
  for (const char* run : {"a", "b"}) {
    const auto dir = root / run;
    const std::string out = " --out " + dir.string() + " > " + (root / "log.txt").string() + " 2>&1";
    fs::create_directories(dir);
    const std::string ett = " --ett " + (dir / "ett.json").string();
    for (const std::string args : {"ett" + cfg, "uq" + cfg + ett, "mc-validate" + cfg + ett}) {
      const int status = std::system((std::string(ETTKIT_CLI_PATH) + " " + args + out).c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        return {false, "command failed: " + args};
      }
    }
  }
  std::size_t bytes = 0;
  for (const char* f : {"ett.json", "uq.json", "mc.json"}) {
    const auto a = slurp(root / "a" / f);
    if (a.empty() || a != slurp(root / "b" / f)) return {false, std::string(f) + " differs"};
    bytes += a.size();
  }
  return {true, "ett.json, uq.json, mc.json identical (" + std::to_string(bytes) + " bytes)"};
}

// ---- 10 ------------------------------------------------------------------

Outcome training() {
  // data from the classical model (net at zero), fitted by the full neural ODE from a SIREN start
  const auto s = make_scenario("lotka_volterra_siren", {NetChoice::Kind::siren, 5, 1.0, {}});
  auto truth = s.sys.param_defaults();
  for (std::size_t i = s.net_offset; i < truth.size(); ++i) truth[i] = 0.0;
  const auto data = synthesize_dataset(s.sys, truth, s.x0, 0.5, 10, {});
  auto theta = s.sys.param_defaults();
  theta[0] = 1.2;
  theta[1] = 0.45;
  theta[2] = 0.6;
  theta[3] = 0.3;
  std::vector<std::size_t> all(theta.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const AdjointModel m(s.sys, all);
  TrainOptions opt;
  opt.steps = 200;
  opt.lr = 0.02;
  const auto r = train(m, theta, data, opt);
  const double ratio = r.history.back().loss / r.history.front().loss;
  std::size_t rises = 0;
  for (std::size_t i = 11; i < r.history.size(); ++i) {
    if (r.history[i].loss > r.history[i - 1].loss) ++rises;
  }
  return {r.history.size() == 201 && ratio < 1e-2 && rises == 0,
          std::to_string(theta.size()) + " parameters, final/initial loss " + fmt("%.3g", ratio) + " (< 1e-2), increases after step 10: " + std::to_string(rises)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "closed-form ETT match", 10, closed_form},
      {2, "fixed-time collapse to flow expansion", 10, stt_collapse},
      {3, "MC convergence order", 300, mc_order},
      {4, "map inversion identity", 5, inversion},
      {5, "moments vs surrogate sampling", 120, moments},
      {6, "adjoint gradient check", 60, adjoint_fd},
      {7, "Hamiltonian conservation", 30, hamiltonian},
      {8, "dimensionality audit", 1, dimensions},
      {9, "end-to-end reproducibility", 120, reproducible},
      {10, "training smoke", 180, training},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    only.insert(std::atoi(argv[i]));
  }
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.contains(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = o.pass && secs < c.limit_s;
    failed += ok ? 0 : 1;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << "; "
              << fmt("%.2f", secs) << " s (limit " << c.limit_s << " s)" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
