#include "textmarker/external_model.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "textmarker/error.hpp"

namespace textmarker {

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

ExternalModel::ExternalModel(const std::string& command_line, ExternalOptions options)
    : options_(options) {
  ignore_sigpipe();
  int in_pipe[2];   // parent -> child
  int out_pipe[2];  // child -> parent
  if (pipe2(in_pipe, O_CLOEXEC) != 0) throw Error(ErrorCode::SpawnError, "pipe: " + errno_text());
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw Error(ErrorCode::SpawnError, "pipe: " + errno_text());
  }
  pid_ = fork();
  if (pid_ < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    throw Error(ErrorCode::SpawnError, "fork: " + errno_text());
  }
  if (pid_ == 0) {
    setpgid(0, 0);  // own group, so the shell and its children are killed together
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    execl("/bin/sh", "sh", "-c", command_line.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid_, pid_);
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ExternalModel::~ExternalModel() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ <= 0) return;
  // Closing stdin asks the child to finish; give it a moment, then kill.
  for (int i = 0; i < 50; ++i) {
    if (waitpid(pid_, nullptr, WNOHANG) == pid_) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  kill(-pid_, SIGKILL);
  waitpid(pid_, nullptr, 0);
}

void ExternalModel::fail(ErrorCode code, const std::string& message) const {
  broken_ = true;
  throw Error(code, message);
}

std::string ExternalModel::read_line(std::chrono::steady_clock::time_point deadline) const {
  for (;;) {
    if (auto nl = pending_.find('\n'); nl != std::string::npos) {
      std::string line = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) fail(ErrorCode::Timeout, "no reply from external model in time");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::ProtocolViolation, "poll: " + errno_text());
    }
    if (ready == 0) continue;
    char buf[4096];
    const ssize_t got = read(from_child_, buf, sizeof(buf));
    if (got < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::ProtocolViolation, "read: " + errno_text());
    }
    if (got == 0) {
      int status = 0;
      // The child closes its pipes slightly before it becomes reapable.
      pid_t reaped = 0;
      for (int i = 0; i < 50 && reaped == 0; ++i) {
        reaped = waitpid(pid_, &status, WNOHANG);
        if (reaped == 0) std::this_thread::sleep_for(std::chrono::milliseconds(2));
      }
      if (reaped == pid_) {
        pid_ = -1;
        if (WIFEXITED(status) && WEXITSTATUS(status) == 127) {
          fail(ErrorCode::SpawnError, "external command could not be started");
        }
      }
      fail(ErrorCode::ProtocolViolation, "external model closed its output");
    }
    pending_.append(buf, static_cast<std::size_t>(got));
  }
}

ExternalModel::Reply ExternalModel::query(std::string_view text) const {
  std::lock_guard lock(mutex_);
  if (broken_) throw Error(ErrorCode::ProtocolViolation, "external model stream is unusable");

  const std::int64_t id = next_id_++;
  const std::string request =
      nlohmann::json{{"id", id}, {"text", std::string(text)}}.dump() + "\n";
  const auto deadline = std::chrono::steady_clock::now() + options_.timeout;

  std::size_t sent = 0;
  while (sent < request.size()) {
    const ssize_t n = write(to_child_, request.data() + sent, request.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::ProtocolViolation, "write to external model: " + errno_text());
    }
    sent += static_cast<std::size_t>(n);
  }

  const std::string line = read_line(deadline);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    fail(ErrorCode::ProtocolViolation, "malformed reply: " + line);
  }
  if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer() ||
      !j.contains("label") || !j["label"].is_number_integer()) {
    fail(ErrorCode::ProtocolViolation, "reply lacks integer id/label: " + line);
  }
  if (j["id"].get<std::int64_t>() != id) {
    fail(ErrorCode::ProtocolViolation,
         "reply id " + j["id"].dump() + " does not match request id " + std::to_string(id));
  }
  Reply reply;
  reply.label = j["label"].get<int>();
  if (reply.label < 0) fail(ErrorCode::ProtocolViolation, "negative label in reply");
  if (j.contains("probs") && !j["probs"].is_null()) {
    const auto& probs = j["probs"];
    if (!probs.is_array() || probs.empty()) fail(ErrorCode::ProtocolViolation, "bad probs: " + line);
    std::vector<double> p;
    for (const auto& v : probs) {
      if (!v.is_number()) fail(ErrorCode::ProtocolViolation, "non-numeric probability");
      p.push_back(v.get<double>());
    }
    if (static_cast<std::size_t>(reply.label) >= p.size() ||
        p[static_cast<std::size_t>(reply.label)] < *std::max_element(p.begin(), p.end())) {
      fail(ErrorCode::ProtocolViolation, "label is not the argmax of probs: " + line);
    }
    reply.probs = std::move(p);
  }
  if (options_.probabilities && !reply.probs) {
    fail(ErrorCode::ProtocolViolation, "reply lacks the promised probs: " + line);
  }
  return reply;
}

int ExternalModel::predict(std::string_view text) const { return query(text).label; }

std::vector<double> ExternalModel::predict_proba(std::string_view text) const {
  if (!options_.probabilities) {
    throw Error(ErrorCode::NoProbaCapability, "external model was connected without probs");
  }
  return *query(text).probs;
}

std::unique_ptr<BlackBoxModel> connect_external(const std::string& command_line,
                                                ExternalOptions options) {
  if (command_line.empty()) throw Error(ErrorCode::SpawnError, "empty command line");
  return std::make_unique<ExternalModel>(command_line, options);
}

}  // namespace textmarker
