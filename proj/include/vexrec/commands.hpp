#pragma once

// Subcommand bodies of the `vexrec` tool. Each returns the process exit code:
// 0 success, 2 usage or configuration error, 3 numerical failure.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vexrec/checkpoint.hpp"
#include "vexrec/dataset.hpp"
#include "vexrec/feature_store.hpp"
#include "vexrec/objective.hpp"
#include "vexrec/run_config.hpp"
#include "vexrec/synthetic.hpp"

namespace vexrec {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

// Everything a command needs from the data files named in a RunConfig.
struct Workspace {
  InteractionSet interactions;
  SplitPlan split;
  std::optional<Vocabulary> vocabulary;
  ReviewTable reviews;
  std::optional<RegionalFeatureStore> features;
  std::vector<RegionLabelSet> labels;

  ModelInputs inputs(Variant variant) const;
  ModelDims dims(const RunConfig& config) const;
};

// Checks that every configured path exists, then loads what `variant`
// needs. Throws ConfigError on anything missing or inconsistent.
Workspace load_workspace(const RunConfig& config, Variant variant, bool with_labels,
                         std::ostream& err);

// Throws ConfigError when the checkpoint does not fit the workspace.
void check_compatible(const Checkpoint& ckpt, const Workspace& ws);

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_recommend(const RunConfig& config, const std::vector<std::string>& users, std::size_t n,
                  std::ostream& out, std::ostream& err);
int cmd_explain(const RunConfig& config, const std::string& user, const std::string& item,
                std::filesystem::path out_prefix, std::size_t top_k, std::ostream& out,
                std::ostream& err);
int cmd_generate_review(const RunConfig& config, const std::string& user, const std::string& item,
                        std::size_t max_len, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& config, const std::filesystem::path& report_path,
                 std::ostream& out, std::ostream& err);

struct GradcheckOptions {
  std::size_t seeds = 50;
  std::uint64_t first_seed = 0;
  double tolerance = 1e-4;
  std::optional<std::string> inject_fault;  // parameter group to sign-flip
};
int cmd_gradcheck(const GradcheckOptions& options, std::ostream& out, std::ostream& err);

// Writes the dataset files plus a run.cfg pointing at them.
int cmd_synth(const SynthConfig& config, const std::filesystem::path& dir, std::ostream& out,
              std::ostream& err);

}  // namespace vexrec
