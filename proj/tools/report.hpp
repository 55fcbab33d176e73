#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kbnn/trainer.hpp"

namespace kbnn::cli {

inline constexpr const char* kReportFormat = "kbnn-report-v1";

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

struct Summary {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and sample standard deviation (0 for a single value).
Summary summarize(const std::vector<double>& values);

nlohmann::json eval_to_json(const EvalResult& e);
nlohmann::json report_to_json(const TrainReport& r, bool timing);
nlohmann::json summary_to_json(const std::vector<TrainReport>& runs, bool timing);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Runs jobs 0..count-1 on up to `threads` workers. Results are placed by index.
void run_pool(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job);

/// KBNN_THREADS if set, otherwise the hardware concurrency.
std::size_t default_threads();

}  // namespace kbnn::cli
