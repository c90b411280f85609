#ifndef MMALIGN_TOOLS_COMMANDS_H_
#define MMALIGN_TOOLS_COMMANDS_H_

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "mmalign/eval.h"
#include "mmalign/synthetic.h"
#include "run_config.h"

namespace mmalign::cli {

namespace fs = std::filesystem;

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

int ExitCodeFor(ErrorKind kind);

// Writes a synthetic pair directory. The directory appears only once it is
// complete; an existing target is replaced only with `force`.
void Generate(const GeneratorConfig& cfg, uint64_t seed, const fs::path& out,
              bool force, std::ostream& log);

// Trains and fills `out` with the resolved config, split, per-epoch log,
// tidy curves, parameter dump and final report. On a numerical abort the
// last finite parameters are written as a snapshot before rethrowing.
void TrainRun(const RunConfig& cfg, const fs::path& out, bool force,
              std::ostream& log);

// Re-evaluates a run directory's parameters on its test split.
MetricsReport EvalRun(const fs::path& run, const std::optional<fs::path>& data);

// Per-entity meta-weight table and distribution summary. `highlight` lists
// KG1 ids (one per line) whose weights, and their counterparts', are
// summarised separately.
void WeightsRun(const fs::path& run, const std::optional<fs::path>& data,
                const fs::path& out, const std::optional<fs::path>& highlight,
                std::ostream& log);

}  // namespace mmalign::cli

#endif  // MMALIGN_TOOLS_COMMANDS_H_
