#include "mcflow/config.hpp"
#include "mcflow/error.hpp"
#include "mcflow/run.hpp"
#include "mcflow/suites.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

mcflow::Vec parse_center(const std::string& csv) {
  const auto parts = split(csv, ',');
  if (parts.empty()) throw mcflow::ValidationError("--center", "empty coordinate list");
  mcflow::Vec c(static_cast<mcflow::Index>(parts.size()));
  for (size_t i = 0; i < parts.size(); ++i) {
    try {
      size_t used = 0;
      c(static_cast<mcflow::Index>(i)) = std::stod(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
    } catch (const std::logic_error&) {
      throw mcflow::ValidationError("--center", "not a number: '" + parts[i] + "'");
    }
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean curvature flow of closed submanifolds: runs, checks, oracles, rescaling, plot data"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "Integrate a configured flow and write its artifacts");
  run->add_option("--config", config_path, "Run configuration (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (defaults to the config's \"out\")");

  std::string suite_name, check_scene;
  auto* check = app.add_subcommand("check", "Identity or inequality suite over the scene battery");
  check->add_option("--suite", suite_name, "identities | inequalities")
      ->required()
      ->check(CLI::IsMember({"identities", "inequalities"}));
  check->add_option("--scene", check_scene, "Single scene (inline JSON or file) instead of the battery");

  std::string oracle_scene;
  double oracle_t = 0.0;
  auto* oracle = app.add_subcommand("oracle", "Closed-form state of an analytic scene");
  oracle->add_option("--scene", oracle_scene, "Scene (inline JSON or file)")->required();
  oracle->add_option("--t", oracle_t, "Time")->required();

  std::string rescale_trace, center_csv;
  std::optional<double> t_hat;
  auto* rescale = app.add_subcommand("rescale", "Parabolically rescale the snapshots of a run");
  rescale->add_option("--trace", rescale_trace, "Run directory")->required();
  rescale->add_option("--T-hat", t_hat, "Singular time (default: estimated from the trace)");
  rescale->add_option("--center", center_csv, "Comma-separated center (default: latest centroid)");

  std::string plot_trace, vars;
  auto* plot = app.add_subcommand("plot", "Write whitespace-separated columns of trace quantities");
  plot->add_option("--trace", plot_trace, "Run directory")->required();
  plot->add_option("--vars", vars, "Comma-separated quantities, e.g. t,vol,h2_max")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mcflow::exit_code::config;
  }

  try {
    if (run->parsed()) {
      const auto cfg = mcflow::load_config(config_path);
      const std::string dir = out_dir.empty() ? cfg.out : out_dir;
      if (dir.empty()) throw mcflow::ValidationError("out", "no output directory (--out or \"out\")");
      const auto result = mcflow::run(cfg, dir);
      std::cout << result.summary.dump(2) << '\n';
      return result.exit_code;
    }
    if (check->parsed()) {
      const auto suite = mcflow::suite_from_string(suite_name);
      std::vector<mcflow::LabeledScene> scenes;
      if (check_scene.empty()) {
        scenes = mcflow::default_battery();
      } else {
        const auto spec = mcflow::scene_from_argument(check_scene);
        scenes.push_back({mcflow::to_string(spec.kind), spec});
      }
      const auto results = mcflow::run_suite(suite, scenes);
      std::cout << mcflow::to_json(results).dump(2) << '\n';
      int rc = mcflow::exit_code::ok;
      for (const auto& r : results) rc = std::max(rc, mcflow::verdict_exit_code(r.reports));
      return rc;
    }
    if (oracle->parsed()) {
      std::cout << mcflow::oracle_record(mcflow::scene_from_argument(oracle_scene), oracle_t).dump() << '\n';
      return mcflow::exit_code::ok;
    }
    if (rescale->parsed()) {
      std::optional<mcflow::Vec> center;
      if (!center_csv.empty()) center = parse_center(center_csv);
      std::cout << mcflow::rescale_run(rescale_trace, t_hat, center).dump(2) << '\n';
      return mcflow::exit_code::ok;
    }
    if (plot->parsed()) {
      std::cout << mcflow::emit_plotdata(plot_trace, split(vars, ',')) << '\n';
      return mcflow::exit_code::ok;
    }
  } catch (const std::exception& e) {
    std::cerr << "mcflow: " << e.what() << '\n';
    return mcflow::exit_code_for(e);
  }
  return mcflow::exit_code::ok;
}
