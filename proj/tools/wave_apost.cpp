#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "wave_apost/errors.hpp"
#include "wave_apost/experiment.hpp"

using namespace wave_apost;

namespace {

struct Overrides {
  std::string config;
  std::optional<double> H;
  std::optional<double> T;
  std::optional<double> cfl;
  std::optional<std::string> out;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "flat key = value config file");
  sub->add_option("--H", o.H, "macro mesh width");
  sub->add_option("--T", o.T, "final time");
  sub->add_option("--cfl", o.cfl, "tau / H");
  sub->add_option("--out", o.out, "output directory");
}

AppConfig resolve(const Overrides& o) {
  AppConfig cfg;
  if (!o.config.empty()) cfg = load_config(o.config, cfg);
  if (o.H) cfg.run.H = *o.H;
  if (o.T) cfg.run.T = *o.T;
  if (o.cfl) cfg.run.cfl = *o.cfl;
  if (o.out) cfg.out_dir = *o.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1D wave equation: leapfrog with local time stepping and a posteriori bounds"};
  app.require_subcommand(1);

  Overrides run_o, conv_o;
  auto* run_cmd = app.add_subcommand("run", "single run, writes indicators, mesh, solution");
  add_common(run_cmd, run_o);
  auto* conv_cmd = app.add_subcommand("convergence", "sweep over h_list, writes convergence.csv");
  add_common(conv_cmd, conv_o);
  auto* verify_cmd = app.add_subcommand("verify", "self-checks; exit 1 on failure");
  std::string mutate;
  verify_cmd->add_option("--mutate", mutate)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(resolve(run_o), std::cout);
    if (conv_cmd->parsed()) return cmd_convergence(resolve(conv_o), std::cout);
    if (verify_cmd->parsed()) {
      VerifyMutations m;
      if (mutate == "flip_bubble_sign") m.flip_bubble_sign = true;
      else if (mutate == "wrong_lumping") m.wrong_lumping = true;
      else if (!mutate.empty()) throw ConfigError("unknown mutation: " + mutate);
      return cmd_verify(m, std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return 3;
  } catch (const IncompatibleMeshError& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
