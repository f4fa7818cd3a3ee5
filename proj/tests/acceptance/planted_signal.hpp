#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace finsent::acceptance {

struct PlantedSignalResult {
    double baseline_rmse = 0.0;
    double sentiment_rmse = 0.0;
    double rmse_reduction_pct = 0.0;       // from improvement.csv
    double expected_reduction_pct = 0.0;   // noise-only floor vs full variance
    std::filesystem::path features_dir;
};

/// Writes a 600-day corpus whose daily confidence score drives the next
/// close, runs score and predict on it and reads back the reports.
PlantedSignalResult run_planted_signal(const std::filesystem::path& workdir);

struct LeakageAudit {
    std::size_t rows = 0;
    std::vector<std::string> violations;
};

/// Checks every feature CSV under `dir`: inputs_through <= feature_date <
/// target_date on every row.
LeakageAudit audit_features(const std::filesystem::path& dir);

}  // namespace finsent::acceptance
