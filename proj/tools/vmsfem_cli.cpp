#include "vmsfem/output.hpp"
#include "vmsfem/scenario_config.hpp"
#include "vmsfem/simulation.hpp"

#include <CLI11/CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return (v != nullptr && *v != '\0') ? std::string(v) : fallback;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void print_summary(const vmsfem::RunSummary& s) {
  std::cout << s.id << ": steps=" << s.steps << " wall=" << s.wall_seconds << "s N_steady=" << s.steady.mean
            << " (sd " << s.steady.stddev << ", n=" << s.steady.count << ") fallbacks=" << s.transport_fallbacks
            << " max_violation=" << s.max_constraint_violation << " backend=" << s.backend << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eulerian VMS finite elements for soil, water and rigid bodies"};
  app.require_subcommand(1);

  std::string target;
  std::string scale_name = "desk";
  std::string out_dir;
  int steps = -1;
  bool seed_check = false;
  auto* run_cmd = app.add_subcommand("run", "Run a preset or an INI configuration");
  run_cmd->add_option("config", target, "Preset name or INI path")->required();
  run_cmd->add_option("--scale", scale_name, "desk or full")->check(CLI::IsMember({"desk", "full"}));
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--steps", steps, "Override the number of steps")->check(CLI::NonNegativeNumber);
  run_cmd->add_flag("--seed-check", seed_check, "Run twice and require identical force output");

  auto* presets_cmd = app.add_subcommand("presets", "List built-in presets");

  std::string verify_target;
  auto* verify_cmd = app.add_subcommand("verify", "Run a preset and check its steady-state band");
  verify_cmd->add_option("preset", verify_target, "Preset name")->required();
  verify_cmd->add_option("--scale", scale_name, "desk or full")->check(CLI::IsMember({"desk", "full"}));
  verify_cmd->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  const int threads = std::atoi(env_or("VMS_THREADS", "0").c_str());
  if (threads > 0) Eigen::setNbThreads(threads);

  try {
    if (*presets_cmd) {
      for (const std::string& n : vmsfem::preset_names()) std::cout << n << "\n";
      return 0;
    }
    const vmsfem::Scale scale = vmsfem::parse_scale(scale_name);

    if (*verify_cmd) {
      const auto band = vmsfem::acceptance_band(verify_target);
      if (!band) {
        std::cerr << "no steady-state band is defined for '" << verify_target << "'\n";
        return 2;
      }
      const vmsfem::ScenarioConfig cfg = vmsfem::load_preset(verify_target, scale);
      vmsfem::RunOptions opt;
      opt.out_dir = out_dir.empty() ? env_or("VMS_OUT_DIR", "out") + "/" + cfg.id : out_dir;
      const vmsfem::RunSummary s = vmsfem::run(cfg, opt);
      print_summary(s);
      const bool ok = s.steady.count > 0 && s.steady.mean >= band->first && s.steady.mean <= band->second;
      std::cout << (ok ? "PASS" : "FAIL") << " " << cfg.id << " N=" << s.steady.mean << " band [" << band->first
                << ", " << band->second << "]\n";
      return ok ? 0 : 1;
    }

    const vmsfem::ScenarioConfig cfg = vmsfem::resolve_config(target, scale);
    vmsfem::RunOptions opt;
    opt.out_dir = out_dir.empty() ? env_or("VMS_OUT_DIR", cfg.out_dir) + "/" + cfg.id : out_dir;
    opt.steps_override = steps;
    const vmsfem::RunSummary s = vmsfem::run(cfg, opt);
    print_summary(s);
    if (seed_check) {
      vmsfem::RunOptions again = opt;
      again.out_dir = opt.out_dir + "/seed_check";
      vmsfem::run(cfg, again);
      const auto a = slurp(std::filesystem::path(opt.out_dir) / "forces.csv");
      const auto b = slurp(std::filesystem::path(again.out_dir) / "forces.csv");
      if (a.empty() || a != b) {
        std::cerr << "seed check failed: force output differs between identical runs\n";
        return 1;
      }
      std::cout << "seed check passed: " << a.size() << " identical bytes\n";
    }
    return 0;
  } catch (const vmsfem::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
