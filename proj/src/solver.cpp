#include "fjv/solver.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <sstream>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace fjv {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::string> split_command(const std::string& command) {
  std::istringstream in(command);
  std::vector<std::string> parts;
  std::string part;
  while (in >> part) parts.push_back(part);
  if (parts.empty()) throw SolverError("empty solver command");
  return parts;
}

struct Child {
  pid_t pid = -1;
  int in = -1;   // parent writes
  int out = -1;  // parent reads
};

Child spawn(const std::string& command) {
  const auto parts = split_command(command);
  int to_child[2], from_child[2], status_pipe[2];
  if (pipe(to_child) != 0 || pipe(from_child) != 0 || pipe(status_pipe) != 0) {
    throw SolverError(std::string("pipe failed: ") + std::strerror(errno));
  }
  fcntl(status_pipe[1], F_SETFD, FD_CLOEXEC);
  const pid_t pid = fork();
  if (pid < 0) throw SolverError(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    const int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, STDERR_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    close(status_pipe[0]);
    std::vector<char*> argv;
    for (const auto& p : parts) argv.push_back(const_cast<char*>(p.c_str()));
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());
    const int err = errno;
    (void)!write(status_pipe[1], &err, sizeof(err));
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  close(status_pipe[1]);
  int err = 0;
  const ssize_t got = read(status_pipe[0], &err, sizeof(err));
  close(status_pipe[0]);
  if (got == static_cast<ssize_t>(sizeof(err))) {
    close(to_child[1]);
    close(from_child[0]);
    waitpid(pid, nullptr, 0);
    throw SolverError("cannot start solver '" + parts[0] + "': " + std::strerror(err));
  }
  signal(SIGPIPE, SIG_IGN);
  return {pid, to_child[1], from_child[0]};
}

void kill_child(pid_t pid) {
  if (pid <= 0) return;
  kill(pid, SIGKILL);
  waitpid(pid, nullptr, 0);
}

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return left.count() < 0 ? 0 : static_cast<int>(std::min<long long>(left.count(), 1 << 30));
}

SolverStatus parse_status(const std::string& word) {
  if (word == "sat") return SolverStatus::Sat;
  if (word == "unsat") return SolverStatus::Unsat;
  if (word == "unknown") return SolverStatus::Unknown;
  throw SolverError("malformed solver output: '" + word + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

SolverResult run_solver(const std::string& script, const SolverOptions& options) {
  const auto start = Clock::now();
  const auto deadline = start + std::chrono::seconds(options.timeout_s);
  Child child = spawn(options.command);

  std::string output;
  std::size_t written = 0;
  bool timed_out = false;
  int in_fd = child.in;
  char buf[65536];
  while (true) {
    pollfd fds[2];
    int count = 0;
    fds[count++] = {child.out, POLLIN, 0};
    if (in_fd >= 0) fds[count++] = {in_fd, POLLOUT, 0};
    const int ready = poll(fds, static_cast<nfds_t>(count), remaining_ms(deadline));
    if (ready < 0 && errno == EINTR) continue;
    if (ready == 0) {
      timed_out = true;
      break;
    }
    if (count == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t n = write(in_fd, script.data() + written, script.size() - written);
      if (n > 0) written += static_cast<std::size_t>(n);
      if (n < 0 || written == script.size()) {
        close(in_fd);
        in_fd = -1;
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      const ssize_t n = read(child.out, buf, sizeof(buf));
      if (n > 0) output.append(buf, static_cast<std::size_t>(n));
      if (n == 0) break;
    }
  }
  if (in_fd >= 0) close(in_fd);
  close(child.out);
  SolverResult result;
  if (timed_out) {
    kill_child(child.pid);
    result.timed_out = true;
    result.status = SolverStatus::Unknown;
  } else {
    int wstatus = 0;
    waitpid(child.pid, &wstatus, 0);
    const std::string text = trim(output);
    const auto eol = text.find('\n');
    const std::string first = trim(text.substr(0, eol));
    // After unsat, get-model legitimately answers with an error.
    if (first.rfind("(error", 0) == 0) {
      throw SolverError("solver reported an error: " + text.substr(0, 500));
    }
    result.status = parse_status(first);
    if (result.status == SolverStatus::Sat && eol != std::string::npos) {
      result.model = text.substr(eol + 1);
      if (result.model.find("(error") != std::string::npos) {
        throw SolverError("solver reported an error: " + result.model.substr(0, 500));
      }
    }
  }
  result.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

SolverSession::SolverSession(const SolverOptions& options) : options_(options) {
  const Child child = spawn(options.command);
  pid_ = child.pid;
  to_child_ = child.in;
  from_child_ = child.out;
}

SolverSession::~SolverSession() { terminate(); }

void SolverSession::terminate() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  kill_child(pid_);
  pid_ = -1;
}

void SolverSession::send(const std::string& commands) {
  if (!alive()) throw SolverError("solver session is closed");
  std::size_t written = 0;
  while (written < commands.size()) {
    const ssize_t n = write(to_child_, commands.data() + written, commands.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      terminate();
      throw SolverError(std::string("write to solver failed: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
}

bool SolverSession::fill(Clock::time_point deadline) {
  pollfd fd{from_child_, POLLIN, 0};
  while (true) {
    const int ready = poll(&fd, 1, remaining_ms(deadline));
    if (ready < 0 && errno == EINTR) continue;
    if (ready == 0) return false;
    break;
  }
  char buf[65536];
  const ssize_t n = read(from_child_, buf, sizeof(buf));
  if (n <= 0) {
    terminate();
    throw SolverError("solver closed its output");
  }
  buffer_.append(buf, static_cast<std::size_t>(n));
  return true;
}

std::optional<std::string> SolverSession::read_line(Clock::time_point deadline) {
  while (true) {
    const auto eol = buffer_.find('\n');
    if (eol != std::string::npos) {
      std::string line = trim(buffer_.substr(0, eol));
      buffer_.erase(0, eol + 1);
      if (!line.empty()) return line;
      continue;
    }
    if (!fill(deadline)) return std::nullopt;
  }
}

std::string SolverSession::read_sexpr(Clock::time_point deadline) {
  while (true) {
    int depth = 0;
    bool started = false, in_string = false;
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
      const char c = buffer_[i];
      if (in_string) {
        if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '(') {
        ++depth;
        started = true;
      } else if (c == ')') {
        --depth;
        if (started && depth == 0) {
          std::string out = trim(buffer_.substr(0, i + 1));
          buffer_.erase(0, i + 1);
          return out;
        }
      }
    }
    if (!fill(deadline)) {
      terminate();
      throw SolverError("solver timed out while answering get-value");
    }
  }
}

SolverStatus SolverSession::check_sat() {
  send("(check-sat)\n");
  const auto start = Clock::now();
  const auto deadline = start + std::chrono::seconds(options_.timeout_s);
  const auto line = read_line(deadline);
  solve_seconds_ += std::chrono::duration<double>(Clock::now() - start).count();
  if (!line) {
    terminate();
    return SolverStatus::Unknown;
  }
  if (line->rfind("(error", 0) == 0) {
    terminate();
    throw SolverError("solver reported an error: " + *line);
  }
  return parse_status(*line);
}

std::string SolverSession::get_value(const std::string& terms) {
  send("(get-value (" + terms + "))\n");
  const std::string out =
      read_sexpr(Clock::now() + std::chrono::seconds(options_.timeout_s));
  if (out.rfind("(error", 0) == 0) throw SolverError("solver reported an error: " + out);
  return out;
}

}  // namespace fjv
