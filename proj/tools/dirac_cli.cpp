#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "dirac/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dirac system solver: transformation-kernel construction, "
               "eigenvalue asymptotics and remainder diagnostics"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;
  bool print_config = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--threads", threads, "worker threads (0: keep config)");
  app.add_flag("--print-config", print_config,
               "print the normalized configuration and exit");

  for (const char* name : {"eig", "eigfun", "solve", "kernel", "remainders",
                           "verify"})
    app.add_subcommand(name)->silent();

  CLI11_PARSE(app, argc, argv);

  try {
    dirac::RunConfig cfg = config_path.empty()
                               ? dirac::RunConfig{}
                               : dirac::load_config_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads > 0) cfg.threads = threads;

    if (print_config) {
      std::fputs(dirac::normalized_config_text(cfg).c_str(), stdout);
      return 0;
    }
    const auto subs = app.get_subcommands();
    if (subs.empty()) {
      std::fputs(app.help().c_str(), stderr);
      return 2;
    }
    return dirac::run(subs.front()->get_name(), cfg);
  } catch (const dirac::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const dirac::DomainError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}
