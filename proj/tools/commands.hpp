#pragma once

#include <string>
#include <vector>

#include "delirisk/config.hpp"

namespace delirisk::cli {

/// Paths written by the currently running command, so a failing stage can
/// be rolled back instead of leaving partial artifacts.
std::vector<std::string>& artifact_log();
void remove_logged_artifacts();

/// One pipeline stage. Each writes its documented artifacts into
/// cfg.out_dir and throws on failure (partial artifacts are cleaned up by
/// the caller via remove_logged_artifacts()).
void cmd_synth(const RunConfig& cfg);
void cmd_ingest(const RunConfig& cfg);
void cmd_cohort(const RunConfig& cfg);
void cmd_comorbidity(const RunConfig& cfg);
void cmd_comorbidity_stats(const RunConfig& cfg);
void cmd_km(const RunConfig& cfg);
void cmd_features(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

}  // namespace delirisk::cli
