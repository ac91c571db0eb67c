// ettkit command line: simulate | ett | uq | train | mc-validate.
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ettkit/app/commands.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> ett;
};

void add_common(CLI::App* sub, CommonFlags& f, bool with_ett) {
  sub->add_option("--config", f.config, "Scenario configuration (JSON)")->required();
  sub->add_option("--out", f.out, "Output directory (created if missing)");
  sub->add_option("--seed", f.seed, "Sampling seed, overrides the configuration");
  sub->add_option("--threads", f.threads, "Worker threads, overrides the configuration")->check(CLI::PositiveNumber);
  if (with_ett) {
    sub->add_option("--ett", f.ett, "Previously computed ett.json (recomputed when omitted)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event Transition Tensors of (neural) ODEs"};
  app.require_subcommand(1);
  CommonFlags flags;
  auto* simulate = app.add_subcommand("simulate", "Propagate the nominal state, optionally stopping at the event");
  auto* ett = app.add_subcommand("ett", "Expand the event map and write ett.json");
  auto* uq = app.add_subcommand("uq", "Moments, quantiles and exceedance of observables at the event");
  auto* train = app.add_subcommand("train", "Fit parameters to observations with adjoint gradients");
  auto* mc = app.add_subcommand("mc-validate", "Compare the expansion with re-integrated samples");
  add_common(simulate, flags, false);
  add_common(ett, flags, false);
  add_common(uq, flags, true);
  add_common(train, flags, false);
  add_common(mc, flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    auto cfg = ettkit::load_config(flags.config);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.threads) cfg.threads = *flags.threads;
    const std::filesystem::path out(flags.out);
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) {
      throw ettkit::ConfigError("--out: cannot create " + out.string() + ": " + ec.message());
    }
    std::string summary;
    if (simulate->parsed()) {
      summary = ettkit::run_simulate(cfg, out);
    } else if (ett->parsed()) {
      summary = ettkit::run_ett(cfg, out);
    } else if (uq->parsed()) {
      summary = ettkit::run_uq(cfg, out, flags.ett);
    } else if (train->parsed()) {
      summary = ettkit::run_train(cfg, out);
    } else {
      summary = ettkit::run_mc_validate(cfg, out, flags.ett);
    }
    std::cout << summary;
    return 0;
  } catch (const ettkit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ettkit::BudgetError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ettkit::DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ettkit::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}
