#include <cstdint>
#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "pipeline.hpp"
#include "rmk/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"radio map construction and analysis"};
  app.require_subcommand(1);

  rmkcli::GlobalOptions opt;
  std::uint64_t seed_value = 0;
  std::vector<CLI::Option*> seed_options;

  auto add_common = [&](CLI::App* cmd, bool with_methods) {
    cmd->add_option("--config", opt.config_path, "run configuration (JSON)")
        ->required();
    cmd->add_option("--out", opt.out_dir, "output directory (default: out)");
    seed_options.push_back(
        cmd->add_option("--seed", seed_value, "override the configured seed"));
    if (with_methods)
      cmd->add_option("--methods", opt.methods,
                      "comma-separated estimator method filter");
    cmd->add_flag("--quiet", opt.quiet, "suppress progress output");
  };

  CLI::App* gen = app.add_subcommand("generate", "write ground truth rasters");
  CLI::App* est = app.add_subcommand("estimate", "run sensing and estimators");
  CLI::App* eva = app.add_subcommand("evaluate", "compare estimates against truth");
  CLI::App* apps = app.add_subcommand("apps", "coverage, storage, temporal, anomaly");
  add_common(gen, false);
  add_common(est, true);
  add_common(eva, true);
  add_common(apps, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  for (const CLI::Option* o : seed_options)
    if (o->count() > 0) opt.seed = seed_value;

  try {
    if (gen->parsed()) return rmkcli::run_generate(opt);
    if (est->parsed()) return rmkcli::run_estimate(opt);
    if (eva->parsed()) return rmkcli::run_evaluate(opt);
    if (apps->parsed()) return rmkcli::run_apps(opt);
    std::cerr << "error: no subcommand selected\n";
    return 2;
  } catch (const rmk::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rmk::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const rmk::ConditioningError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
