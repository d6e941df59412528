#include <CLI11.hpp>
#include <iostream>

#include "longnbt/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"longnbt: bipartite non-backtracking spectral completion of long matrices"};
    std::string config_path;
    std::string mode_override;
    std::string out_override;
    long long seed_override = -1;
    long long threads_override = 0;
    app.add_option("--config", config_path, "configuration file (key = value with [sections])");
    app.add_option("--mode", mode_override,
                   "selftest | synth-run | estimate | sweep-d | compare-svd | gw-check "
                   "(overrides the config)");
    app.add_option("--out", out_override, "output directory (overrides the config)");
    app.add_option("--seed", seed_override, "seed (overrides the config)");
    app.add_option("--threads", threads_override, "parallel jobs for sweeps");
    CLI11_PARSE(app, argc, argv);

    longnbt::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = longnbt::parse_config_file(config_path);
        if (!mode_override.empty()) cfg.mode = mode_override;
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (seed_override >= 0) cfg.seed = std::uint64_t(seed_override);
        if (threads_override > 0) cfg.threads = longnbt::index_t(threads_override);
        if (cfg.mode.empty()) {
            std::cerr << "config error: no mode given (use --mode or a config file)\n";
            return longnbt::kExitConfigError;
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return longnbt::kExitConfigError;
    }
    return longnbt::run(cfg, std::cout);
}
