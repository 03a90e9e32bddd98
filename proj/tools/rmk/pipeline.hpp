#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmk/config.hpp"
#include "rmk/estimate.hpp"
#include "rmk/grid.hpp"
#include "rmk/sensing.hpp"

namespace rmkcli {

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::string methods; // comma-separated filter, empty keeps all
  bool quiet = false;
};

// Config with the seed override and --methods filter applied. Estimator
// names get a numeric suffix when one method appears twice, so output
// directories never collide.
struct ResolvedRun {
  rmk::RunConfig config;
  std::vector<std::string> estimator_names;
};

ResolvedRun resolve_run(const GlobalOptions& opt);

// Deterministic sensing chain: placement, synthesis at the given epoch,
// then optional quantization and bad-data filtering.
rmk::MeasurementSet sense_epoch(const rmk::RunConfig& rc, const rmk::BandGrid& truth,
                                long time_index);

void ensure_dir(const std::string& path);
void save_band(const rmk::BandGrid& map_db, const std::string& dir,
               const std::string& stem);

int run_generate(const GlobalOptions& opt);
int run_estimate(const GlobalOptions& opt);
int run_evaluate(const GlobalOptions& opt);
int run_apps(const GlobalOptions& opt);

} // namespace rmkcli
