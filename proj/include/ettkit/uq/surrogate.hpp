/**
 * @file surrogate.hpp
 * @brief Seeded sampling of polynomial surrogates: sample moments, empirical
 *        quantiles, exceedance probabilities with Wilson intervals, histograms.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "ettkit/polyalg/poly_map.hpp"
#include "ettkit/uq/distribution.hpp"

namespace ettkit {

struct SurrogateOptions {
  std::size_t n = 1000000;
  std::uint64_t seed = 0;
  std::vector<double> probabilities = {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99};
  std::vector<double> thresholds;  ///< applied to every output
  std::vector<std::vector<double>> output_thresholds;  ///< per output, used where non-empty
  std::size_t threads = 1;
  std::size_t histogram_bins = 0;
};

struct Exceedance {
  double threshold = 0.0;
  double p = 0.0;  ///< fraction of samples with obs < threshold
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

struct SurrogateOutput {
  std::string label;
  double mean = 0.0;
  double m2 = 0.0;  ///< central sample moments (1/n normalisation)
  double m3 = 0.0;
  double m4 = 0.0;
  std::vector<double> quantiles;  ///< aligned with SurrogateOptions::probabilities
  std::vector<Exceedance> exceedance;
  Histogram histogram;
};

struct SurrogateReport {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<double> probabilities;
  std::vector<SurrogateOutput> outputs;
};

/// Wilson score interval at 95% for k successes out of n.
[[nodiscard]] inline std::pair<double, double> wilson95(std::size_t k, std::size_t n) {
  constexpr double z = 1.959963984540054;
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(k) / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (ph + z * z / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(ph * (1.0 - ph) / nn + z * z / (4.0 * nn * nn));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Linear-interpolation quantile of sorted data.
[[nodiscard]] inline double sorted_quantile(const std::vector<double>& s, double p) {
  if (s.empty()) {
    return 0.0;
  }
  const double h = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

/// Input deviations of sample i.
[[nodiscard]] inline std::vector<double> draw_deviation(const DistributionSpec& d, std::uint64_t seed,
                                                        std::uint64_t i) {
  const CounterRng rng(seed, i);
  std::vector<double> x(d.size());
  for (std::size_t j = 0; j < d.size(); ++j) {
    x[j] = d.marginals[j].sample(rng, j);
  }
  return x;
}

/// samples[o][i] = output o of the map at deviation sample i.
[[nodiscard]] inline std::vector<std::vector<double>> surrogate_samples(const PolyMap& map, const DistributionSpec& d,
                                                                        std::size_t n, std::uint64_t seed,
                                                                        std::size_t threads = 1) {
  d.validate();
  if (map.nvars() != d.size()) {
    throw DimensionError("surrogate sampling: map has " + std::to_string(map.nvars()) + " inputs, distribution " +
                         std::to_string(d.size()));
  }
  const auto& b = map[0].basis();
  const std::size_t terms = map[0].size();
  std::vector<std::vector<double>> out(map.size(), std::vector<double>(n));
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> mono(terms);
    for (std::size_t i = begin; i < end; ++i) {
      const auto x = draw_deviation(d, seed, i);
      mono[0] = 1.0;
      for (std::size_t t = 1; t < terms; ++t) {
        mono[t] = mono[b.parent(t)] * x[b.parent_var(t)];
      }
      for (std::size_t o = 0; o < map.size(); ++o) {
        const auto& c = map[o].coeffs();
        double acc = 0.0;
        for (std::size_t t = 0; t < terms; ++t) {
          acc += c[t] * mono[t];
        }
        out[o][i] = acc;
      }
    }
  };
  const std::size_t nt = std::max<std::size_t>(1, std::min(threads, n));
  if (nt == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + nt - 1) / nt;
    for (std::size_t t = 0; t < nt; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(n, lo + chunk);
      if (lo < hi) {
        pool.emplace_back(work, lo, hi);
      }
    }
    for (auto& th : pool) {
      th.join();
    }
  }
  return out;
}

[[nodiscard]] inline SurrogateReport surrogate_quantiles(const PolyMap& map, const DistributionSpec& d,
                                                         const SurrogateOptions& opt) {
  if (opt.n < 1) {
    throw ConfigError("surrogate sampling: n must be positive");
  }
  for (double p : opt.probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("surrogate sampling: quantile probability " + std::to_string(p) + " outside [0, 1]");
    }
  }
  auto samples = surrogate_samples(map, d, opt.n, opt.seed, opt.threads);
  SurrogateReport rep;
  rep.n = opt.n;
  rep.seed = opt.seed;
  rep.probabilities = opt.probabilities;
  const double nn = static_cast<double>(opt.n);
  for (std::size_t o = 0; o < map.size(); ++o) {
    auto& s = samples[o];
    SurrogateOutput so;
    so.label = map.labels()[o];
    double sum = 0.0;
    for (double v : s) {
      sum += v;
    }
    so.mean = sum / nn;
    double s2 = 0.0, s3 = 0.0, s4 = 0.0;
    for (double v : s) {
      const double c = v - so.mean;
      const double c2 = c * c;
      s2 += c2;
      s3 += c2 * c;
      s4 += c2 * c2;
    }
    so.m2 = s2 / nn;
    so.m3 = s3 / nn;
    so.m4 = s4 / nn;
    std::sort(s.begin(), s.end());
    for (double p : opt.probabilities) {
      so.quantiles.push_back(sorted_quantile(s, p));
    }
    const bool own = o < opt.output_thresholds.size() && !opt.output_thresholds[o].empty();
    for (double thr : own ? opt.output_thresholds[o] : opt.thresholds) {
      const auto k = static_cast<std::size_t>(std::lower_bound(s.begin(), s.end(), thr) - s.begin());
      const auto [lo, hi] = wilson95(k, opt.n);
      so.exceedance.push_back({thr, static_cast<double>(k) / nn, lo, hi});
    }
    if (opt.histogram_bins > 0) {
      const double lo = s.front();
      const double hi = s.back();
      const double w = hi > lo ? (hi - lo) / static_cast<double>(opt.histogram_bins) : 1.0;
      for (std::size_t bi = 0; bi <= opt.histogram_bins; ++bi) {
        so.histogram.edges.push_back(lo + w * static_cast<double>(bi));
      }
      so.histogram.counts.assign(opt.histogram_bins, 0);
      for (double v : s) {
        auto bin = static_cast<std::size_t>((v - lo) / w);
        so.histogram.counts[std::min(bin, opt.histogram_bins - 1)]++;
      }
    }
    rep.outputs.push_back(std::move(so));
  }
  return rep;
}

[[nodiscard]] inline SurrogateReport surrogate_quantiles(const TruncatedPoly& p, const DistributionSpec& d,
                                                         const SurrogateOptions& opt) {
  return surrogate_quantiles(PolyMap({p}), d, opt);
}

/// CSV of input deviations and outputs for the first n samples.
inline void write_samples_csv(std::ostream& os, const PolyMap& map, const DistributionSpec& d, std::size_t n,
                              std::uint64_t seed) {
  const auto outs = surrogate_samples(map, d, n, seed);
  os.precision(17);
  for (std::size_t j = 0; j < d.size(); ++j) {
    os << (j ? "," : "") << "d" << j;
  }
  for (const auto& l : map.labels()) {
    os << ',' << l;
  }
  os << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = draw_deviation(d, seed, i);
    for (std::size_t j = 0; j < x.size(); ++j) {
      os << (j ? "," : "") << x[j];
    }
    for (const auto& o : outs) {
      os << ',' << o[i];
    }
    os << '\n';
  }
}

}  // namespace ettkit
