#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "winfree/config.hpp"
#include "winfree/error.hpp"
#include "winfree/kernels.hpp"
#include "winfree/runners.hpp"

namespace {

constexpr int kConfigFailure = 2;
constexpr int kNumericFailure = 3;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::vector<std::string> overrides;
  std::string isa = "auto";
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random Winfree model: experiments and solvers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(winfree::kVersion));

  Options opt;
  const char* names[] = {"mean-field", "bands",       "spectral-error",   "death-sweep",
                         "sensitivity", "trapping",   "influence-profile"};
  for (const char* name : names) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", opt.config, "YAML config file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "RNG seed");
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--override", opt.overrides, "dotted key=value, repeatable")
        ->take_all()
        ->allow_extra_args(false);
    sub->add_option("--isa", opt.isa, "kernel variant")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigFailure;
  }

  const auto* sub = app.get_subcommands().front();
  try {
    using namespace winfree;
    if (opt.isa != "auto") {
      const auto isa = opt.isa == "avx2" ? kernels::Isa::avx2 : kernels::Isa::scalar;
      if (!kernels::set_isa(isa)) throw ConfigError("isa: " + opt.isa + " not supported here");
    }
    const Experiment e = parse_experiment(sub->get_name());
    auto ov = opt.overrides;
    if (opt.seed) ov.push_back("seed=" + std::to_string(*opt.seed));
    if (opt.threads) ov.push_back("threads=" + std::to_string(*opt.threads));
    if (!opt.out.empty()) ov.push_back("output=" + opt.out);
    const ExperimentConfig cfg =
        opt.config.empty() ? load_config(e, "", ov) : load_config_file(e, opt.config, ov);

    const auto t0 = std::chrono::steady_clock::now();
    const RunResult r = run_experiment(cfg);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    for (const auto& f : r.files) std::cout << f.string() << '\n';
    std::cerr << sub->get_name() << ": " << r.files.size() << " files in " << dt.count()
              << " s\n";
    return 0;
  } catch (const winfree::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const winfree::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const winfree::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
}
