#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace copfl {

// Exit codes shared by every subcommand: 0 success, 1 runtime failure,
// 2 configuration/usage error. Failures print one machine-readable JSON
// object to stderr.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;                  // --out; falls back to config, then $COPFL_OUT
    std::vector<std::string> overrides;   // --set key=value
    std::vector<std::uint64_t> seeds;     // --seeds a,b,c
    int jobs = 0;                         // --jobs; 0 leaves the OpenMP default
};

// Where run artifacts go: --out, else config.output_dir, else $COPFL_OUT,
// else ./copfl_out.
std::string resolve_output_dir(const std::string& cli_out, const std::string& config_out);

// Executes one run; writes rounds.csv, summary.json, config_resolved.json.
int cmd_run(const CommonArgs& args);

// Cartesian sweep over grid assignments ("p=0.01,0.05") and seeds; writes
// sweep.csv (one row per point and seed) and heatmap.csv (seed-averaged).
int cmd_sweep(const CommonArgs& args, const std::vector<std::string>& grid_specs);

// The 2x2 contribution-score grid {use_grad, use_data} under shared seeds;
// writes ablation.csv.
int cmd_ablate(const CommonArgs& args);

// Parses + validates; prints the resolved config to stdout.
int cmd_validate(const CommonArgs& args);

}  // namespace copfl
