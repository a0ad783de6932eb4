#pragma once

// External SMT solver processes talking SMT-LIB2 over pipes.

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <sys/types.h>

namespace fjv {

inline constexpr const char* kDefaultSolverCommand = "z3 -in";
inline constexpr int kDefaultSolverTimeout = 300;

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolverStatus { Sat, Unsat, Unknown };

struct SolverResult {
  SolverStatus status = SolverStatus::Unknown;
  std::string model;  // output after the verdict line, SAT only
  bool timed_out = false;
  double seconds = 0.0;
};

struct SolverOptions {
  std::string command = kDefaultSolverCommand;
  int timeout_s = kDefaultSolverTimeout;
};

/// Runs `command` (split on whitespace, looked up on PATH), writes the
/// script to its stdin and reads the verdict. Timeouts kill the process and
/// report Unknown.
SolverResult run_solver(const std::string& script, const SolverOptions& options = {});

/// A long-lived solver process for incremental queries.
class SolverSession {
 public:
  explicit SolverSession(const SolverOptions& options = {});
  ~SolverSession();
  SolverSession(const SolverSession&) = delete;
  SolverSession& operator=(const SolverSession&) = delete;

  /// Sends commands that produce no output.
  void send(const std::string& commands);
  /// (check-sat); Unknown on timeout, after which the session is dead.
  SolverStatus check_sat();
  /// (get-value (...)) and returns the raw s-expression.
  std::string get_value(const std::string& terms);
  bool alive() const { return pid_ > 0; }
  double solve_seconds() const { return solve_seconds_; }

 private:
  std::string read_sexpr(std::chrono::steady_clock::time_point deadline);
  std::optional<std::string> read_line(std::chrono::steady_clock::time_point deadline);
  bool fill(std::chrono::steady_clock::time_point deadline);
  void terminate();

  SolverOptions options_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  double solve_seconds_ = 0.0;
};

}  // namespace fjv
