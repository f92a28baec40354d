#include <cstdint>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "copfl/commands.hpp"
#include "copfl/errors.hpp"

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        const std::size_t comma = text.find(',', begin);
        const std::string token = text.substr(begin, comma - begin);
        if (!token.empty()) {
            seeds.push_back(std::stoull(token));
        }
        if (comma == std::string::npos) break;
        begin = comma + 1;
    }
    if (seeds.empty()) {
        throw copfl::ConfigError("--seeds lists no seeds");
    }
    return seeds;
}

void add_common_options(CLI::App* cmd, copfl::CommonArgs& args, std::string& seeds_text,
                        bool with_seeds) {
    cmd->add_option("--config", args.config_path, "Path to the experiment config (JSON)")
        ->required();
    cmd->add_option("--out", args.out_dir, "Output directory (overrides config and $COPFL_OUT)");
    cmd->add_option("--set", args.overrides, "Override a config key, e.g. --set p=0.1")
        ->take_all();
    cmd->add_option("--jobs", args.jobs, "Worker threads (default: OpenMP runtime)");
    if (with_seeds) {
        cmd->add_option("--seeds", seeds_text, "Comma-separated seeds, e.g. 1,2,3");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated-learning simulator with contribution-weighted aggregation"};
    app.require_subcommand(1);

    copfl::CommonArgs args;
    std::string seeds_text;
    std::vector<std::string> grid_specs;

    CLI::App* run = app.add_subcommand("run", "Execute one experiment");
    add_common_options(run, args, seeds_text, false);

    CLI::App* sweep = app.add_subcommand("sweep", "Grid sweep over config fields and seeds");
    add_common_options(sweep, args, seeds_text, true);
    sweep->add_option("--grid", grid_specs, "Axis spec, e.g. --grid p=0.01,0.25 (repeatable)")
        ->take_all();

    CLI::App* ablate = app.add_subcommand("ablate", "2x2 contribution-score component grid");
    add_common_options(ablate, args, seeds_text, true);

    CLI::App* validate = app.add_subcommand("validate", "Parse and print the resolved config");
    add_common_options(validate, args, seeds_text, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!seeds_text.empty()) {
            args.seeds = parse_seed_list(seeds_text);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "{\"error\":{\"type\":\"config\",\"message\":\"%s\"}}\n", e.what());
        return copfl::kExitConfig;
    }

    if (run->parsed()) return copfl::cmd_run(args);
    if (sweep->parsed()) return copfl::cmd_sweep(args, grid_specs);
    if (ablate->parsed()) return copfl::cmd_ablate(args);
    if (validate->parsed()) return copfl::cmd_validate(args);
    return copfl::kExitConfig;
}
