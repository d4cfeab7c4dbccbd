#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <sys/types.h>

#include "textmarker/error.hpp"
#include "textmarker/model.hpp"

namespace textmarker {

struct ExternalOptions {
  std::chrono::milliseconds timeout{30'000};  // per query
  bool probabilities = false;                 // child promises a `probs` array
};

/// A classifier living in a child process, spoken to over JSON lines.
///
///   request  (child stdin):  {"id":<int>,"text":<string>}\n
///   response (child stdout): {"id":<int>,"label":<int>,"probs":[<float>...]}\n
///
/// `probs` is optional unless ExternalOptions::probabilities is set. Queries
/// are serialized; after a protocol error or timeout the adapter refuses
/// further queries because the stream position is unknown.
class ExternalModel : public BlackBoxModel {
 public:
  ExternalModel(const std::string& command_line, ExternalOptions options);
  ~ExternalModel() override;

  ExternalModel(const ExternalModel&) = delete;
  ExternalModel& operator=(const ExternalModel&) = delete;

  int predict(std::string_view text) const override;
  bool has_proba() const override { return options_.probabilities; }
  std::vector<double> predict_proba(std::string_view text) const override;

 private:
  struct Reply {
    int label = 0;
    std::optional<std::vector<double>> probs;
  };

  Reply query(std::string_view text) const;
  std::string read_line(std::chrono::steady_clock::time_point deadline) const;
  [[noreturn]] void fail(ErrorCode code, const std::string& message) const;

  ExternalOptions options_;
  mutable pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;

  mutable std::mutex mutex_;
  mutable std::string pending_;
  mutable std::int64_t next_id_ = 0;
  mutable bool broken_ = false;
};

/// Spawns `command_line` through /bin/sh. Throws SpawnError.
std::unique_ptr<BlackBoxModel> connect_external(const std::string& command_line,
                                                ExternalOptions options = {});

}  // namespace textmarker
