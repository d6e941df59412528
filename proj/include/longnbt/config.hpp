#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "longnbt/common.hpp"

namespace longnbt {

/// Parsed run configuration. File format: flat `key = value` lines with
/// optional `[section]` headers (keys become section.key); '#' comments.
struct RunConfig {
    std::string mode;  // selftest | synth-run | estimate | sweep-d | compare-svd | gw-check

    // [instance]
    index_t n = 0;
    index_t m = 0;
    index_t r = 1;
    index_t k_order = 0;  // > 0 selects a tensor unfolding instance, m = n^(k_order-1)
    std::vector<double> nu = {1.0};
    std::string vector_mode = "uniform-sign";
    double kappa_target = 0.0;
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> seeds;

    // [sample]
    double d = 0.0;
    std::vector<double> d_list;

    // [solver]
    index_t k = 5;
    index_t krylov_dim = 0;
    double tol = 1e-8;
    index_t max_restarts = 200;
    double epsilon = 0.0;  // 0 = the default ((eta/2) ^ 1) / 25

    // [oracle]
    index_t trials = 10000;
    index_t t_max = 2;
    index_t gw_depth = 4;

    // [output] / flags
    std::string out_dir = "out";
    std::string observed_path;
    index_t threads = 1;
};

RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

/// Mode-specific validation; throws invalid_input naming the offending key.
void validate_config(const RunConfig& cfg);

std::vector<double> parse_double_list(const std::string& s);
std::vector<std::uint64_t> parse_u64_list(const std::string& s);

}  // namespace longnbt
