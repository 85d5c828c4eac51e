// Command-line front end: trip synthesis, fleet building, scenario runs,
// comparisons and report generation. Exit codes: 0 ok, 2 infeasible model,
// 3 configuration error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "evflex/errors.hpp"
#include "evflex/scenario.hpp"

namespace fs = std::filesystem;
using namespace evflex;

namespace {

int run_synth_trips(const std::string& config_path, const std::string& out,
                    std::uint64_t seed_override) {
  RunConfig cfg = load_run_config(config_path);
  std::uint64_t seed = seed_override ? seed_override : cfg.seed;
  TripLibrary lib = synth_trip_library(seed, cfg.trip_synthesis);
  write_trip_library(out, lib);
  std::cout << "wrote " << lib.trips.size() << " trips to " << out << "\n";
  return 0;
}

int run_build_fleet(const std::string& config_path, const std::string& out_dir) {
  RunConfig cfg = load_run_config(config_path);
  fs::create_directories(out_dir);
  FleetSet fleets = build_fleets(cfg, cfg.seed, out_dir);
  for (const auto& [key, profile] : fleets.profiles) {
    if (profile.sample_size == 0) continue;
    std::string name = profile.area + "_" + profile.vehicle_class.id();
    write_fleet_csv((fs::path(out_dir) / (name + ".csv")).string(), profile);
  }
  std::cout << "wrote " << fleets.profiles.size() << " fleet profiles to " << out_dir << "\n";
  return 0;
}

int run_run_scenario(const std::string& spec_path, std::string out_dir,
                     const std::string& dump_lp_dir) {
  ScenarioSpec spec = ScenarioSpec::from_json_file(spec_path);
  RunConfig cfg = load_run_config(spec.config_path);
  if (!spec.years.empty()) cfg.years = spec.years;
  if (spec.seed != 0) cfg.seed = spec.seed;
  FleetSet fleets = build_fleets(cfg, cfg.seed);
  ScenarioResult result =
      run_scenario(cfg, fleets, spec.scheme, spec.transmission_expansion, spec.name, dump_lp_dir);
  if (out_dir.empty()) out_dir = result.name;
  write_scenario_outputs(result, out_dir);
  std::cout << result.name << ": total cost " << result.total_cost_eur() << " EUR, outputs in "
            << out_dir << "\n";
  return 0;
}

int run_compare(const std::string& base, const std::string& other, const std::string& out) {
  auto summary_of = [](const std::string& p) {
    fs::path path(p);
    if (fs::is_directory(path)) path /= "summary.json";
    return path.string();
  };
  ScenarioResult a = read_scenario_summary(summary_of(base));
  ScenarioResult b = read_scenario_summary(summary_of(other));
  DeltaReport d = compare(a, b);
  write_delta_csv(d, out);
  std::cout << "delta " << d.other_name << " vs " << d.base_name << ": total cost "
            << d.total_cost_eur << " EUR -> " << out << "\n";
  return 0;
}

int run_report(const std::string& in_dir, const std::string& out_dir) {
  std::vector<ScenarioResult> results;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(in_dir))
    if (entry.is_directory() && fs::exists(entry.path() / "summary.json"))
      dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs)
    results.push_back(read_scenario_summary((dir / "summary.json").string()));
  if (results.empty()) throw ConfigError("no scenario summaries found under " + in_dir);
  write_report(results, out_dir);
  std::cout << "report over " << results.size() << " scenarios -> " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EV charging flexibility study: fleet synthesis, dispatch-and-investment "
               "scenarios and reports"};
  app.require_subcommand(1);

  std::string config_path, out, spec_path, dump_lp_dir, base, other, in_dir;
  std::uint64_t seed = 0;

  auto* synth = app.add_subcommand("synth-trips", "Generate a synthetic trip library CSV");
  synth->add_option("--config", config_path, "Run config JSON")->required();
  synth->add_option("--out", out, "Output CSV path")->required();
  synth->add_option("--seed", seed, "Override the config seed");

  auto* fleet = app.add_subcommand("build-fleet", "Build and cache fleet profiles");
  fleet->add_option("--config", config_path, "Run config JSON")->required();
  fleet->add_option("--out", out, "Output directory")->required();

  auto* run = app.add_subcommand("run-scenario", "Solve one scenario over all years");
  run->add_option("--spec", spec_path, "Scenario spec JSON")->required();
  run->add_option("--out", out, "Output directory (default: scenario name)");
  run->add_option("--dump-lp", dump_lp_dir, "Write each year's LP in lp-text format here");

  auto* cmp = app.add_subcommand("compare", "Differences between two scenario results");
  cmp->add_option("--base", base, "Base scenario directory or summary.json")->required();
  cmp->add_option("--other", other, "Other scenario directory or summary.json")->required();
  cmp->add_option("--out", out, "Output delta CSV")->required();

  auto* rep = app.add_subcommand("report", "Collect scenario outputs into report tables");
  rep->add_option("--in", in_dir, "Directory containing scenario output directories")->required();
  rep->add_option("--out", out, "Report output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth_trips(config_path, out, seed);
    if (fleet->parsed()) return run_build_fleet(config_path, out);
    if (run->parsed()) return run_run_scenario(spec_path, out, dump_lp_dir);
    if (cmp->parsed()) return run_compare(base, other, out);
    if (rep->parsed()) return run_report(in_dir, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
