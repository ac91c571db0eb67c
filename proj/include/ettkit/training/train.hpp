/**
 * @file train.hpp
 * @brief Full-batch gradient descent with norm clipping over an AdjointModel.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ettkit/error.hpp"
#include "ettkit/rng.hpp"
#include "ettkit/training/adjoint.hpp"

namespace ettkit {

struct TrainOptions {
  std::size_t steps = 100;
  double lr = 1e-2;
  double clip = 10.0;
  std::uint64_t seed = 0;
  std::size_t batch_segments = 0;  ///< 0 uses every segment each step
  std::size_t start_step = 0;      ///< step number of the first logged entry
  double divergence_factor = 1e6;
};

struct TrainLogEntry {
  std::size_t step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
};

struct TrainResult {
  std::vector<double> theta;
  std::vector<TrainLogEntry> history;
};

/// Raised when the loss exceeds divergence_factor times its initial value.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, TrainResult partial) : NumericalError(what), result(std::move(partial)) {}
  TrainResult result;
};

/**
 * Runs `steps` updates theta <- theta - lr * clip(g).  The history holds the
 * loss and gradient norm before each update plus one entry for the final
 * parameters, so it has steps + 1 entries.
 */
inline TrainResult train(const AdjointModel& model, std::vector<double> theta, const Dataset& data,
                         const TrainOptions& opt,
                         const std::function<void(const TrainLogEntry&)>& on_step = nullptr) {
  if (!(opt.lr > 0.0) || !std::isfinite(opt.lr)) {
    throw ConfigError("learning rate must be positive and finite");
  }
  if (!(opt.clip > 0.0)) {
    throw ConfigError("gradient clip must be positive");
  }
  TrainResult res;
  double initial = 0.0;
  for (std::size_t s = 0; s <= opt.steps; ++s) {
    std::vector<std::size_t> segs;
    if (opt.batch_segments > 0 && opt.batch_segments < data.segments()) {
      const CounterRng rng(opt.seed, opt.start_step + s);
      for (std::size_t b = 0; b < opt.batch_segments; ++b) {
        segs.push_back(static_cast<std::size_t>(rng.bits(b) % data.segments()));
      }
    }
    const auto lg = model.loss_and_grad(theta, data, segs);
    double norm2 = 0.0;
    for (double g : lg.grad) {
      norm2 += g * g;
    }
    const TrainLogEntry entry{opt.start_step + s, lg.loss, std::sqrt(norm2)};
    res.history.push_back(entry);
    if (on_step) {
      on_step(entry);
    }
    if (s == 0) {
      initial = lg.loss;
    }
    if (!std::isfinite(lg.loss) || lg.loss > opt.divergence_factor * initial) {
      res.theta = theta;
      throw DivergenceError("training diverged at step " + std::to_string(entry.step) + " (loss " +
                                std::to_string(lg.loss) + ")",
                            std::move(res));
    }
    if (s == opt.steps) {
      break;
    }
    const double scale = entry.grad_norm > opt.clip ? opt.clip / entry.grad_norm : 1.0;
    const auto& idx = model.trainable();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      theta[idx[k]] -= opt.lr * scale * lg.grad[k];
    }
  }
  res.theta = std::move(theta);
  return res;
}

inline void write_train_log_header(std::ostream& os) { os << "step,loss,grad_norm\n"; }

inline void write_train_log_row(std::ostream& os, const TrainLogEntry& e) {
  std::ostringstream ss;
  ss.precision(17);
  ss << e.step << ',' << e.loss << ',' << e.grad_norm << '\n';
  os << ss.str();
}

[[nodiscard]] inline std::vector<TrainLogEntry> read_train_log(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw ConfigError("cannot read training log " + path);
  }
  std::vector<TrainLogEntry> out;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) {
      continue;
    }
    std::stringstream ss(line);
    TrainLogEntry e;
    char c1 = 0, c2 = 0;
    if (!(ss >> e.step >> c1 >> e.loss >> c2 >> e.grad_norm) || c1 != ',' || c2 != ',') {
      throw ConfigError(path + ": malformed log row '" + line + "'");
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace ettkit
