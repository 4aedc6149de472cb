// Command-line front end: nlhjb <subcommand> -c run.cfg
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "nlhjb/config.hpp"
#include "nlhjb/driver.hpp"
#include "nlhjb/presets.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal HJB homogenization toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  const std::map<std::string, std::string> blurbs = {
      {"operator-check", "stencil sanity and Fourier symbol vs quadrature"},
      {"cell", "ergodic constant and corrector at (x, p) with phi = 0"},
      {"effective", "solve the effective equation on grid_n points"},
      {"homogenize", "solve the oscillatory problem for one eps"},
      {"rates", "error table across eps_list"},
      {"lp-verify", "occupational-measure LP vs vanishing discount"},
      {"bounds-check", "discount ladder diagnostics"},
  };
  for (const std::string& name : nlhjb::subcommand_names()) {
    CLI::App* sub = app.add_subcommand(name, blurbs.at(name));
    sub->add_option("-c,--config", config_path, "key = value config file")->required();
    sub->add_option("-o,--output-dir", output_dir, "overrides output_dir from the config");
  }
  CLI::App* presets = app.add_subcommand("presets", "list built-in problems");
  CLI::App* show = app.add_subcommand("show-config", "print the fully resolved config");
  show->add_option("-c,--config", config_path)->required();

  CLI11_PARSE(app, argc, argv);

  if (presets->parsed()) {
    for (const auto& n : nlhjb::preset_names()) std::cout << n << '\n';
    return 0;
  }
  try {
    nlhjb::RunConfig config = nlhjb::load_config(config_path);
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (show->parsed()) {
      nlhjb::serialize_config(config, std::cout);
      return 0;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    const nlhjb::RunOutcome outcome = nlhjb::run_subcommand(name, config);
    (outcome.status == 0 ? std::cout : std::cerr) << outcome.message << '\n';
    return outcome.status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
