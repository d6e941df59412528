#include "longnbt/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace longnbt {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw invalid_input("config: bad numeric value for key '" + key + "': " + v);
    }
}

index_t to_index(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return index_t(x);
    } catch (const std::exception&) {
        throw invalid_input("config: bad integer value for key '" + key + "': " + v);
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return std::uint64_t(x);
    } catch (const std::exception&) {
        throw invalid_input("config: bad unsigned value for key '" + key + "': " + v);
    }
}

}  // namespace

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double("list", item));
    }
    return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_u64("list", item));
    }
    return out;
}

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::map<std::string, std::string> kv;
    std::string section;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw invalid_input("config: malformed section line: " + line);
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw invalid_input("config: expected key = value: " + line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw invalid_input("config: empty key in line: " + line);
        std::string full = section.empty() ? key : section + "." + key;
        if (kv.count(full)) throw invalid_input("config: duplicate key '" + full + "'");
        kv[full] = value;
    }

    auto take = [&kv](const std::string& key) -> std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (auto* v = take("mode")) cfg.mode = *v;
    if (auto* v = take("instance.n")) cfg.n = to_index("instance.n", *v);
    if (auto* v = take("instance.m")) cfg.m = to_index("instance.m", *v);
    if (auto* v = take("instance.r")) cfg.r = to_index("instance.r", *v);
    if (auto* v = take("instance.k_order")) cfg.k_order = to_index("instance.k_order", *v);
    if (auto* v = take("instance.nu")) cfg.nu = parse_double_list(*v);
    if (auto* v = take("instance.vector_mode")) cfg.vector_mode = *v;
    if (auto* v = take("instance.kappa_target"))
        cfg.kappa_target = to_double("instance.kappa_target", *v);
    if (auto* v = take("instance.seed")) cfg.seed = to_u64("instance.seed", *v);
    if (auto* v = take("instance.seeds")) cfg.seeds = parse_u64_list(*v);
    if (auto* v = take("sample.d")) cfg.d = to_double("sample.d", *v);
    if (auto* v = take("sample.d_list")) cfg.d_list = parse_double_list(*v);
    if (auto* v = take("solver.k")) cfg.k = to_index("solver.k", *v);
    if (auto* v = take("solver.krylov_dim")) cfg.krylov_dim = to_index("solver.krylov_dim", *v);
    if (auto* v = take("solver.tol")) cfg.tol = to_double("solver.tol", *v);
    if (auto* v = take("solver.max_restarts"))
        cfg.max_restarts = to_index("solver.max_restarts", *v);
    if (auto* v = take("solver.epsilon")) cfg.epsilon = to_double("solver.epsilon", *v);
    if (auto* v = take("oracle.trials")) cfg.trials = to_index("oracle.trials", *v);
    if (auto* v = take("oracle.t_max")) cfg.t_max = to_index("oracle.t_max", *v);
    if (auto* v = take("oracle.gw_depth")) cfg.gw_depth = to_index("oracle.gw_depth", *v);
    if (auto* v = take("output.out_dir")) cfg.out_dir = *v;
    if (auto* v = take("input.observed_path")) cfg.observed_path = *v;
    if (auto* v = take("output.threads")) cfg.threads = to_index("output.threads", *v);

    // reject unknown keys so typos fail loudly
    static const std::vector<std::string> allowed = {
        "mode",          "instance.n",         "instance.m",        "instance.r",
        "instance.k_order", "instance.nu",     "instance.vector_mode", "instance.kappa_target",
        "instance.seed", "instance.seeds",     "sample.d",          "sample.d_list",
        "solver.k",      "solver.krylov_dim",  "solver.tol",        "solver.max_restarts",
        "solver.epsilon",
        "oracle.trials", "oracle.t_max",       "oracle.gw_depth",   "output.out_dir",
        "input.observed_path", "output.threads"};
    for (const auto& [key, value] : kv) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw invalid_input("config: unknown key '" + key + "'");
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("config: cannot open " + path);
    return parse_config(in);
}

void validate_config(const RunConfig& cfg) {
    static const std::vector<std::string> modes = {"selftest",  "synth-run",   "estimate",
                                                   "sweep-d",   "compare-svd", "gw-check"};
    if (std::find(modes.begin(), modes.end(), cfg.mode) == modes.end())
        throw invalid_input("config: unknown or missing key 'mode' (got '" + cfg.mode + "')");
    if (cfg.mode == "selftest") return;
    if (cfg.mode == "estimate") {
        if (cfg.observed_path.empty())
            throw invalid_input("config: mode estimate requires key 'input.observed_path'");
        return;
    }

    if (cfg.n < 2) throw invalid_input("config: key 'instance.n' must be >= 2");
    if (cfg.k_order > 0) {
        if (cfg.k_order < 3 || cfg.k_order % 2 == 0)
            throw invalid_input("config: key 'instance.k_order' must be odd and >= 3");
    } else if (cfg.m < cfg.n) {
        throw invalid_input("config: key 'instance.m' must be >= n");
    }
    if (cfg.r < 1 || index_t(cfg.nu.size()) != cfg.r)
        throw invalid_input("config: key 'instance.nu' must list exactly r values");
    if (cfg.vector_mode != "uniform-sign" && cfg.vector_mode != "random-orthonormal" &&
        cfg.vector_mode != "localized")
        throw invalid_input("config: key 'instance.vector_mode' must be one of uniform-sign, "
                            "random-orthonormal, localized");

    if (cfg.mode == "sweep-d") {
        if (cfg.d_list.size() < 1)
            throw invalid_input("config: mode sweep-d requires key 'sample.d_list'");
        for (std::size_t i = 1; i < cfg.d_list.size(); ++i)
            if (cfg.d_list[i] <= cfg.d_list[i - 1])
                throw invalid_input("config: key 'sample.d_list' must be strictly increasing");
        if (cfg.seeds.empty())
            throw invalid_input("config: mode sweep-d requires key 'instance.seeds'");
    } else if (cfg.mode == "gw-check") {
        if (!(cfg.d > 1.0)) throw invalid_input("config: key 'sample.d' must be > 1");
        if (cfg.trials < 100) throw invalid_input("config: key 'oracle.trials' must be >= 100");
    } else {
        if (!(cfg.d > 1.0)) throw invalid_input("config: key 'sample.d' must be > 1");
    }
    if (cfg.k < 1) throw invalid_input("config: key 'solver.k' must be >= 1");
    if (!(cfg.tol > 0)) throw invalid_input("config: key 'solver.tol' must be > 0");
    if (cfg.threads < 1) throw invalid_input("config: key 'output.threads' must be >= 1");
}

}  // namespace longnbt
