#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "jcbeat/error.hpp"
#include "jcbeat/experiment.hpp"

namespace {

constexpr int exit_invalid = 2;
constexpr int exit_numerical = 3;

std::filesystem::path output_dir(const std::string& flag, const jcbeat::ExperimentConfig& c, const std::string& leaf) {
    if (!flag.empty()) return flag;
    if (!c.output.empty()) return c.output;
    if (const char* root = std::getenv("JCBEAT_OUT"); root && *root) return std::filesystem::path(root) / leaf;
    throw jcbeat::InvalidArgument("no output directory: pass --out or set JCBEAT_OUT");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conditional transients of a two-photon resonance in cavity QED"};
    app.set_version_flag("--version", std::string(jcbeat::version));
    app.require_subcommand(1);

    std::string config_path, out, preset_name;
    std::optional<std::uint64_t> seed;
    int workers = 0;
    bool print_config = false;

    std::vector<std::pair<CLI::App*, jcbeat::ExperimentKind>> experiments;
    for (auto k : {jcbeat::ExperimentKind::steady, jcbeat::ExperimentKind::transient,
                   jcbeat::ExperimentKind::wigner_grid, jcbeat::ExperimentKind::wigner_origin,
                   jcbeat::ExperimentKind::g2, jcbeat::ExperimentKind::trajectory, jcbeat::ExperimentKind::ensemble,
                   jcbeat::ExperimentKind::figure_preset}) {
        auto* sub = app.add_subcommand(jcbeat::to_string(k), "run a " + jcbeat::to_string(k) + " experiment");
        sub->add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (default $JCBEAT_OUT/<experiment>)");
        sub->add_option("--seed", seed, "override the configured seed");
        sub->add_option("--workers", workers, "OpenMP threads (default: runtime choice)")->check(CLI::NonNegativeNumber);
        experiments.emplace_back(sub, k);
    }
    auto* preset = app.add_subcommand("preset", "run a figure preset");
    preset->add_option("name", preset_name, "fig2, fig3a, fig3b, fig3c, fig4a or fig4b")->required();
    preset->add_option("--out", out, "output directory (default $JCBEAT_OUT/<name>)");
    preset->add_option("--seed", seed, "override the preset seed");
    preset->add_option("--workers", workers, "OpenMP threads")->check(CLI::NonNegativeNumber);
    preset->add_flag("--print-config", print_config, "print the preset configuration and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_invalid;
    }

    try {
        jcbeat::ExperimentConfig config;
        std::string leaf;
        if (preset->parsed()) {
            config = jcbeat::figure_preset(preset_name);
            leaf = preset_name;
        } else {
            for (auto& [sub, kind] : experiments) {
                if (!sub->parsed()) continue;
                config = jcbeat::load_config(config_path);
                if (config.experiment != kind) {
                    throw jcbeat::InvalidArgument("config describes a " + jcbeat::to_string(config.experiment) +
                                                  " experiment, not " + jcbeat::to_string(kind));
                }
                leaf = kind == jcbeat::ExperimentKind::figure_preset ? config.preset : jcbeat::to_string(kind);
            }
        }
        if (seed) config.seed = *seed;
        if (print_config) {
            std::cout << jcbeat::to_json(config).dump(2) << '\n';
            return 0;
        }
        if (workers > 0) omp_set_num_threads(workers);

        const auto dir = output_dir(out, config, leaf);
        const auto result = jcbeat::run_experiment(config, dir);
        std::cout << dir.string() << ": " << result.files.size() << " files in " << result.wall_time << " s\n";
        return 0;
    } catch (const jcbeat::InvalidArgument& e) {
        std::cerr << "jcbeat: " << e.what() << '\n';
        return exit_invalid;
    } catch (const jcbeat::NumericalError& e) {
        std::cerr << "jcbeat: numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "jcbeat: " << e.what() << '\n';
        return exit_numerical;
    }
}
