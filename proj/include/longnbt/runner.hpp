#pragma once

#include <iosfwd>
#include <string>

#include "longnbt/config.hpp"
#include "longnbt/estimator.hpp"
#include "longnbt/ground_truth.hpp"
#include "longnbt/spectral.hpp"

namespace longnbt {

// process exit codes
constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitSolverWarning = 2;
constexpr int kExitInternalError = 3;

/// One full synthesize -> sample -> enumerate -> solve -> estimate pass.
struct PipelineResult {
    GroundTruth gt;
    ModelParams params;
    index_t path_count = 0;
    std::vector<EigenPair> pairs;
    SpectrumSummary summary;
    RecoveryEstimate estimate;
    RecoveryReport report;
    bool solver_warning = false;
};

GroundTruth make_ground_truth(const RunConfig& cfg, std::uint64_t seed);
PipelineResult run_pipeline(const RunConfig& cfg, std::uint64_t seed, double d);

/// Executes the configured mode, writing artifacts under cfg.out_dir.
/// Returns a process exit code; log receives progress lines.
int run(const RunConfig& cfg, std::ostream& log);

/// Fast definitional checks over every module; prints one line per check.
/// Returns true when everything passes.
bool selftest(std::ostream& log);

/// 17-significant-digit decimal formatting used by every CSV writer.
std::string format_g17(double x);

}  // namespace longnbt
