#include "tpl/errors.hpp"
#include "tpl/runner.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCapacity = 3;

int run_command(const std::string& config_path, const tpl::RunOverrides& overrides) {
  try {
    tpl::ExperimentConfig cfg = tpl::load_config(config_path);
    tpl::apply_overrides(cfg, overrides);
    const tpl::RunResult result = tpl::run_experiments(cfg);
    for (const auto& path : tpl::write_reports(result, cfg.output)) std::cout << "wrote " << path << '\n';
    const auto& s = result.summary;
    std::cout << "PASS " << s.pass << "  FAIL " << s.fail << "  INCONCLUSIVE " << s.inconclusive << "  SKIPPED "
              << s.skipped << '\n';
    return tpl::exit_code(s);
  } catch (const tpl::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const tpl::CapacityError& e) {
    std::cerr << config_path << ": capacity exceeded: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const tpl::RefusalError& e) {
    std::cerr << config_path << ": refused: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << config_path << ": invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << config_path << ": invalid parameter: " << e.what() << '\n';
    return kExitConfig;
  }
}

void list_fixtures() {
  for (const auto& f : tpl::fixture_catalog()) {
    std::cout << f.name << "\t" << f.description << "\t[" << f.citation << "]\n";
  }
  std::cout << "\nfield fixtures (finite chains):";
  for (const auto& name : tpl::named_field_names()) std::cout << ' ' << name;
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix concentration inequality laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  tpl::RunOverrides overrides;
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
  std::string out_dir;
  std::string format;

  auto* run = app.add_subcommand("run", "run the suites of an experiment config");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the sampling seed");
  auto* samples_opt = run->add_option("--samples", samples, "override the Monte Carlo sample count");
  auto* out_opt = run->add_option("--out", out_dir, "output directory");
  run->add_option("--suite", overrides.suites, "run only this suite (repeatable)");
  auto* format_opt = run->add_option("--format", format, "csv, json, or both")->check(CLI::IsMember({"csv", "json", "both"}));

  auto* fixtures = app.add_subcommand("fixtures", "list built-in fixtures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*fixtures) {
    list_fixtures();
    return 0;
  }
  if (*seed_opt) overrides.seed = seed;
  if (*samples_opt) overrides.samples = samples;
  if (*out_opt) overrides.out_dir = out_dir;
  if (*format_opt) overrides.format = format;
  return run_command(config_path, overrides);
}
