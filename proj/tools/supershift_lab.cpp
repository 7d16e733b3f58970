// supershift_lab: runs one experiment config and writes CSV + summary JSON.
//
//   supershift_lab <subcommand> --config run.json --out results/ [--precision 256] [--threads 8] [--exact]
//   supershift_lab run --config run.json ...      (subcommand read from the config)

#include <iostream>

#include <CLI11.hpp>

#include "supershift/runner.hpp"

namespace {

void add_flags(CLI::App* app, supershift::runner::Options& o, unsigned& precision, unsigned& threads) {
  app->add_option("--config", o.config, "experiment config (JSON)")->required();
  app->add_option("--out", o.out, "output directory")->capture_default_str();
  app->add_option("--precision", precision, "working precision in bits");
  app->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_flag("--exact", o.exact, "exact rational arithmetic where supported");
}

}  // namespace

int main(int argc, char** argv) {
  namespace r = supershift::runner;
  CLI::App app{"Supershift experiment runner"};
  app.require_subcommand(1);
  r::Options o;
  unsigned precision = 0, threads = 0;
  std::vector<std::string> names = r::subcommands();
  names.push_back("run");
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name, name == "run" ? "run the subcommand named in the config" : "run " + name);
    add_flags(sub, o, precision, threads);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : r::kConfigError;
  }
  const std::string chosen = app.get_subcommands().front()->get_name();
  o.subcommand = chosen == "run" ? "" : chosen;
  if (precision) o.precision = precision;
  if (threads) o.threads = threads;
  return r::run(o);
}
