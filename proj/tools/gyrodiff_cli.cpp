#include <CLI11.hpp>
#include <iostream>
#include <thread>

#include "gyrodiff/commands.hpp"
#include "gyrodiff/errors.hpp"
#include "gyrodiff/parallel.hpp"

namespace {

constexpr int kValidation = 2;
constexpr int kSolver = 3;

struct Flags {
  std::string config;
  std::string out;
  int workers = 0;
  long long seed = -1;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion and guiding-center limits of a magnetized linear Boltzmann equation"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"cell-problem", "solve the cell problems chi^eta and dump them"},
      {"diffusion-matrix", "assemble D^eta for each eta"},
      {"expansion-study", "remainders of the small-eta expansion and their fitted orders"},
      {"kinetic", "run the kinetic solver"},
      {"macro", "run the drift-diffusion or guiding-center solver"},
      {"convergence", "kinetic against macro over the eps list"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON config file (defaults for every missing key)");
    sub->add_option("--out", flags.out, "output directory")->default_str("results/<command>");
    sub->add_option("--workers", flags.workers, "worker threads (0: config value, else hardware)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", flags.seed, "seed for randomized checks")->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    gyrodiff::RunConfig cfg =
        flags.config.empty() ? gyrodiff::parse_config(nlohmann::json::object()) : gyrodiff::load_config(flags.config);
    if (flags.workers > 0) cfg.workers = flags.workers;
    if (flags.seed >= 0) cfg.seed = static_cast<unsigned long long>(flags.seed);
    if (cfg.workers == 0) cfg.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    gyrodiff::set_default_workers(cfg.workers);
    const std::string out = flags.out.empty() ? "results/" + name : flags.out;
    const auto report = gyrodiff::run_command(name, cfg, out);
    std::cout << report.dump(2) << '\n';
    std::cerr << "wrote " << out << "/report.json\n";
    return 0;
  } catch (const gyrodiff::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const gyrodiff::ConvergenceError& e) {
    std::cerr << "solver failure: " << e.what() << " (contraction estimate " << e.contraction() << ")\n";
    return kSolver;
  } catch (const gyrodiff::SolvabilityError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const gyrodiff::StabilityError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
