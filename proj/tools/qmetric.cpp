// qmetric: experiment runner for coefficient metrics on group C*-algebra state spaces.
//
//   qmetric <experiment> --config file.json [--out path] [--format csv|json] [--plot-dir dir]
//   qmetric dist --group g.json --state-a a.json --state-b b.json --radius r [--trunc R]
//                [--support s] [--mode bracket|heuristic|both] [--out csv|json]
//
// Exit codes: 0 all assertions pass, 1 assertion failure, 2 config error, 3 resource cap.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "qmetric/error.hpp"
#include "qmetric/experiments.hpp"
#include "qmetric/io.hpp"

namespace {

using nlohmann::json;
using qmetric::ExitCode;

struct Options {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::string plot_dir;
  // dist flags
  std::string group, state_a, state_b, mode = "both";
  int radius = 0, trunc = 0, support = 0;
};

int code(ExitCode c) { return static_cast<int>(c); }

void write_curves(const qmetric::Report& rep, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, pts] : rep.curves) {
    std::ofstream os(std::filesystem::path(dir) / (rep.experiment + "_" + name + ".csv"));
    os.precision(17);
    os << "x," << name << '\n';
    for (const auto& [x, y] : pts) os << x << ',' << y << '\n';
  }
}

int run(const std::string& experiment, Options opt) {
  json config;
  std::string base_dir = ".";
  if (!opt.config.empty()) {
    config = qmetric::io::load_json_file(opt.config, "--config");
    base_dir = std::filesystem::path(opt.config).parent_path().string();
    if (base_dir.empty()) base_dir = ".";
  } else if (experiment == "dist") {
    if (opt.group.empty() || opt.state_a.empty() || opt.state_b.empty() || opt.radius < 1)
      throw qmetric::ConfigError("dist", "needs --config, or --group, --state-a, --state-b and --radius");
    config = {{"group", opt.group}, {"state_a", opt.state_a}, {"state_b", opt.state_b},
              {"radius", opt.radius}, {"mode", opt.mode}};
    if (opt.trunc > 0) config["trunc"] = opt.trunc;
    if (opt.support > 0) config["support_radius"] = opt.support;
  } else {
    throw qmetric::ConfigError("--config", "required for experiment '" + experiment + "'");
  }

  // the dist interface names the output format with --out
  if (experiment == "dist" && (opt.out == "csv" || opt.out == "json")) {
    opt.format = opt.out;
    opt.out.clear();
  }
  if (opt.format != "csv" && opt.format != "json") throw qmetric::ConfigError("--format", "expected csv or json");

  const auto rep = qmetric::run_experiment(experiment, config, base_dir);
  const std::string text = opt.format == "json" ? rep.to_json() : rep.to_csv();
  if (opt.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(opt.out, std::ios::binary);
    if (!os) throw qmetric::ConfigError("--out", "cannot write '" + opt.out + "'");
    os << text;
  }
  if (!opt.plot_dir.empty()) write_curves(rep, opt.plot_dir);
  for (const auto& f : rep.failures) std::cerr << "assertion failed: " << f << '\n';
  return code(rep.passed() ? ExitCode::ok : ExitCode::assertion_failed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qmetric: Connes-metric brackets and experiments on discrete group algebras"};
  app.require_subcommand(1);
  Options opt;

  for (const auto& name : qmetric::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
    sub->add_option("--config", opt.config, "experiment config (JSON)");
    sub->add_option("--out", opt.out, name == "dist" ? "output path, or csv|json" : "output path (default stdout)");
    sub->add_option("--format", opt.format, "csv or json");
    sub->add_option("--plot-dir", opt.plot_dir, "directory for two-column plot CSVs");
    if (name == "dist") {
      sub->add_option("--group", opt.group, "group spec file");
      sub->add_option("--state-a", opt.state_a, "first state spec file");
      sub->add_option("--state-b", opt.state_b, "second state spec file");
      sub->add_option("--radius", opt.radius, "ball radius r");
      sub->add_option("--trunc", opt.trunc, "truncation radius R for the heuristic");
      sub->add_option("--support", opt.support, "support radius of the heuristic");
      sub->add_option("--mode", opt.mode, "bracket, heuristic or both");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(ExitCode::config_error);
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    return run(experiment, opt);
  } catch (const qmetric::ResourceError& e) {
    std::cerr << "resource cap: " << e.what() << '\n';
    return code(ExitCode::resource_cap);
  } catch (const qmetric::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return code(ExitCode::config_error);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return code(ExitCode::config_error);
  }
}
