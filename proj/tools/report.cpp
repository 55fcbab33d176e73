#include "report.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "kbnn/error.hpp"

namespace kbnn::cli {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

nlohmann::json eval_to_json(const EvalResult& e) {
  nlohmann::json j{{"rmse", e.rmse}, {"nll", e.nll}, {"n", e.n}};
  j["accuracy"] = e.accuracy ? nlohmann::json(*e.accuracy) : nlohmann::json(nullptr);
  j["floored_variances"] = e.floored_variances;
  return j;
}

nlohmann::json report_to_json(const TrainReport& r, bool timing) {
  nlohmann::json j;
  j["instances"] = r.instances_processed;
  j["failed_updates"] = r.failed_updates;
  j["errors"] = r.errors;
  if (timing) {
    j["train_seconds"] = r.train_seconds;
    j["mean_update_ms"] = r.mean_update_ms();
  }
  j["eval"] = r.final_eval ? eval_to_json(*r.final_eval) : nlohmann::json(nullptr);
  nlohmann::json cps = nlohmann::json::array();
  for (const auto& c : r.checkpoints) {
    nlohmann::json cj = eval_to_json(c.eval);
    cj["instances"] = c.instances;
    cj["epoch"] = c.epoch;
    if (timing) cj["train_seconds"] = c.train_seconds;
    cps.push_back(std::move(cj));
  }
  j["checkpoints"] = std::move(cps);
  return j;
}

nlohmann::json summary_to_json(const std::vector<TrainReport>& runs, bool timing) {
  std::vector<double> rmse, nll, acc, secs;
  for (const auto& r : runs) {
    if (r.final_eval) {
      rmse.push_back(r.final_eval->rmse);
      nll.push_back(r.final_eval->nll);
      if (r.final_eval->accuracy) acc.push_back(*r.final_eval->accuracy);
    }
    secs.push_back(r.train_seconds);
  }
  auto pack = [](const std::vector<double>& v) -> nlohmann::json {
    if (v.empty()) return nullptr;
    const Summary s = summarize(v);
    return {{"mean", s.mean}, {"std", s.std}};
  };
  nlohmann::json j{{"repeats", runs.size()}, {"rmse", pack(rmse)}, {"nll", pack(nll)}, {"accuracy", pack(acc)}};
  if (timing) j["train_seconds"] = pack(secs);
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void run_pool(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

std::size_t default_threads() {
  if (const char* env = std::getenv("KBNN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    throw ConfigError(std::string("KBNN_THREADS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace kbnn::cli
