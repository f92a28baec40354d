#include "copfl/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "copfl/metrics.hpp"
#include "copfl/runner.hpp"

namespace copfl {

namespace {

using Json = nlohmann::ordered_json;

void report_error(const std::string& kind, const std::string& message) {
    Json err;
    err["error"] = {{"type", kind}, {"message", message}};
    std::cerr << err.dump() << "\n";
}

void set_jobs(int jobs) {
#ifdef _OPENMP
    if (jobs > 0) omp_set_num_threads(jobs);
#else
    (void)jobs;
#endif
}

std::string summary_json(const ExperimentConfig& config, const ExperimentResult& result) {
    Json doc;
    double final_mean = 0.0;
    double final_std = 0.0;
    Json per_client = Json::array();
    if (!result.records.empty()) {
        const RoundRecord& last = result.records.back();
        final_mean = last.mean_acc;
        final_std = last.std_acc;
        for (const ClientRoundMetrics& c : last.clients) per_client.push_back(c.test_acc);
    }
    doc["final_mean_acc"] = final_mean;
    doc["final_std_acc"] = final_std;
    doc["per_client_acc"] = per_client;
    doc["rounds"] = config.rounds;
    doc["wall_ms"] = result.wall_ms;
    doc["config_hash"] = config_hash(config);
    doc["algorithm"] = algorithm_name(config.algorithm);
    doc["seed"] = config.seed;
    doc["classes_overlap"] = result.classes_overlap;
    return doc.dump(2) + "\n";
}

// One sweep/ablation execution; returns final mean/std accuracy.
struct PointResult {
    bool ok = false;
    double mean_acc = 0.0;
    double std_acc = 0.0;
    std::string error;
};

PointResult run_point(const ExperimentConfig& config) {
    PointResult point;
    try {
        const ExperimentResult result = run_experiment(config);
        if (!result.records.empty()) {
            point.mean_acc = result.records.back().mean_acc;
            point.std_acc = result.records.back().std_acc;
        }
        point.ok = true;
    } catch (const std::exception& e) {
        point.error = e.what();
    }
    return point;
}

struct GridAxis {
    std::string field;
    std::vector<std::string> values;  // raw override texts, kept in flag order
};

GridAxis parse_grid_axis(const std::string& spec) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= spec.size()) {
        throw ConfigError("grid '" + spec + "' is not of the form field=v1,v2,...");
    }
    GridAxis axis;
    axis.field = spec.substr(0, eq);
    std::stringstream values(spec.substr(eq + 1));
    std::string token;
    while (std::getline(values, token, ',')) {
        if (!token.empty()) axis.values.push_back(token);
    }
    if (axis.values.empty()) {
        throw ConfigError("grid '" + spec + "' lists no values");
    }
    return axis;
}

}  // namespace

std::string resolve_output_dir(const std::string& cli_out, const std::string& config_out) {
    if (!cli_out.empty()) return cli_out;
    if (!config_out.empty()) return config_out;
    if (const char* env = std::getenv("COPFL_OUT"); env && *env) return env;
    return "copfl_out";
}

int cmd_run(const CommonArgs& args) {
    set_jobs(args.jobs);
    ExperimentConfig config;
    try {
        config = load_config(args.config_path, args.overrides);
    } catch (const std::exception& e) {
        report_error("config", e.what());
        return kExitConfig;
    }
    try {
        const std::string out_dir = resolve_output_dir(args.out_dir, config.output_dir);
        std::filesystem::create_directories(out_dir);
        const ExperimentResult result = run_experiment(config);
        write_text_file(out_dir + "/rounds.csv", rounds_csv(result.records));
        write_text_file(out_dir + "/summary.json", summary_json(config, result));
        write_text_file(out_dir + "/config_resolved.json", config_to_json(config));
        return kExitOk;
    } catch (const std::exception& e) {
        report_error("runtime", e.what());
        return kExitRuntime;
    }
}

int cmd_sweep(const CommonArgs& args, const std::vector<std::string>& grid_specs) {
    set_jobs(args.jobs);
    ExperimentConfig base;
    std::vector<GridAxis> axes;
    try {
        base = load_config(args.config_path, args.overrides);
        for (const std::string& spec : grid_specs) {
            axes.push_back(parse_grid_axis(spec));
        }
        if (axes.empty()) {
            // The headline sensitivity study: personalization rate x budget.
            axes.push_back(parse_grid_axis("p=0.01,0.05,0.15,0.25,0.40,0.50"));
            axes.push_back(parse_grid_axis("gamma=0.05,0.30,0.50,0.80"));
        }
    } catch (const std::exception& e) {
        report_error("config", e.what());
        return kExitConfig;
    }

    std::vector<std::uint64_t> seeds = args.seeds;
    if (seeds.empty()) seeds.push_back(base.seed);

    try {
        const std::string out_dir = resolve_output_dir(args.out_dir, base.output_dir);
        std::filesystem::create_directories(out_dir);

        // Row-major walk of the grid, seeds innermost, all in declared order.
        std::vector<std::size_t> shape;
        std::size_t num_points = 1;
        for (const GridAxis& axis : axes) {
            shape.push_back(axis.values.size());
            num_points *= axis.values.size();
        }

        std::string header;
        for (const GridAxis& axis : axes) header += axis.field + ",";
        std::string sweep_csv = header + "seed,final_mean_acc,final_std_acc,status\n";
        std::string heatmap_csv = header + "mean_acc,num_seeds\n";

        for (std::size_t point = 0; point < num_points; ++point) {
            std::vector<std::size_t> index(axes.size());
            std::size_t rest = point;
            for (std::size_t a = axes.size(); a-- > 0;) {
                index[a] = rest % shape[a];
                rest /= shape[a];
            }
            std::vector<std::string> point_overrides = args.overrides;
            std::string point_prefix;
            for (std::size_t a = 0; a < axes.size(); ++a) {
                point_overrides.push_back(axes[a].field + "=" + axes[a].values[index[a]]);
                point_prefix += axes[a].values[index[a]] + ",";
            }

            double acc_sum = 0.0;
            std::size_t acc_count = 0;
            for (std::uint64_t seed : seeds) {
                std::vector<std::string> overrides = point_overrides;
                overrides.push_back("seed=" + std::to_string(seed));
                PointResult result;
                try {
                    const ExperimentConfig config = load_config(args.config_path, overrides);
                    result = run_point(config);
                } catch (const std::exception& e) {
                    result.error = e.what();
                }
                sweep_csv += point_prefix + std::to_string(seed) + ",";
                if (result.ok) {
                    sweep_csv += format_g9(result.mean_acc) + "," +
                                 format_g9(result.std_acc) + ",ok\n";
                    acc_sum += result.mean_acc;
                    ++acc_count;
                } else {
                    sweep_csv += ",,error\n";
                }
            }
            const double mean = acc_count > 0 ? acc_sum / static_cast<double>(acc_count) : 0.0;
            heatmap_csv += point_prefix + format_g9(mean) + "," + std::to_string(acc_count) + "\n";
        }

        write_text_file(out_dir + "/sweep.csv", sweep_csv);
        write_text_file(out_dir + "/heatmap.csv", heatmap_csv);
        return kExitOk;
    } catch (const std::exception& e) {
        report_error("runtime", e.what());
        return kExitRuntime;
    }
}

int cmd_ablate(const CommonArgs& args) {
    set_jobs(args.jobs);
    ExperimentConfig base;
    try {
        base = load_config(args.config_path, args.overrides);
        if (base.algorithm != AlgorithmKind::co_pfl) {
            throw ConfigError("ablate requires algorithm co_pfl");
        }
    } catch (const std::exception& e) {
        report_error("config", e.what());
        return kExitConfig;
    }

    std::vector<std::uint64_t> seeds = args.seeds;
    if (seeds.empty()) seeds.push_back(base.seed);

    try {
        const std::string out_dir = resolve_output_dir(args.out_dir, base.output_dir);
        std::filesystem::create_directories(out_dir);

        std::string csv = "use_grad,use_data,seed,final_mean_acc,final_std_acc,status\n";
        const bool variants[4][2] = {{false, false}, {false, true}, {true, false}, {true, true}};
        for (const auto& variant : variants) {
            for (std::uint64_t seed : seeds) {
                std::vector<std::string> overrides = args.overrides;
                overrides.push_back(std::string("cowa.use_grad=") +
                                    (variant[0] ? "true" : "false"));
                overrides.push_back(std::string("cowa.use_data=") +
                                    (variant[1] ? "true" : "false"));
                overrides.push_back("seed=" + std::to_string(seed));
                PointResult result;
                try {
                    const ExperimentConfig config = load_config(args.config_path, overrides);
                    result = run_point(config);
                } catch (const std::exception& e) {
                    result.error = e.what();
                }
                csv += std::string(variant[0] ? "1" : "0") + "," + (variant[1] ? "1" : "0") +
                       "," + std::to_string(seed) + ",";
                if (result.ok) {
                    csv += format_g9(result.mean_acc) + "," + format_g9(result.std_acc) + ",ok\n";
                } else {
                    csv += ",,error\n";
                }
            }
        }
        write_text_file(out_dir + "/ablation.csv", csv);
        return kExitOk;
    } catch (const std::exception& e) {
        report_error("runtime", e.what());
        return kExitRuntime;
    }
}

int cmd_validate(const CommonArgs& args) {
    try {
        const ExperimentConfig config = load_config(args.config_path, args.overrides);
        std::cout << config_to_json(config);
        return kExitOk;
    } catch (const std::exception& e) {
        report_error("config", e.what());
        return kExitConfig;
    }
}

}  // namespace copfl
