#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace testing_support {

inline const std::string kCliPath = PIPEFORGE_TEST_CLI;

struct ProcessResult {
  int exit_code = -1; // 128 + signal when killed
  std::string out;
  std::string err;
};

/// Child process with captured stdout/stderr. env entries are NAME=value;
/// a bare NAME unsets the variable.
class Process {
public:
  Process(std::vector<std::string> args, std::vector<std::string> env = {}) {
    int out_pipe[2], err_pipe[2];
    if (::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) return;
    pid_ = ::fork();
    if (pid_ == 0) {
      ::dup2(out_pipe[1], 1);
      ::dup2(err_pipe[1], 2);
      ::close(out_pipe[0]), ::close(out_pipe[1]), ::close(err_pipe[0]), ::close(err_pipe[1]);
      for (const auto& e : env) {
        const auto eq = e.find('=');
        if (eq == std::string::npos) {
          ::unsetenv(e.c_str());
        } else {
          ::setenv(e.substr(0, eq).c_str(), e.substr(eq + 1).c_str(), 1);
        }
      }
      std::vector<char*> argv;
      argv.push_back(const_cast<char*>(kCliPath.c_str()));
      for (auto& a : args) argv.push_back(a.data());
      argv.push_back(nullptr);
      ::execv(kCliPath.c_str(), argv.data());
      ::_exit(127);
    }
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    out_fd_ = out_pipe[0];
    err_fd_ = err_pipe[0];
  }
  ~Process() {
    if (pid_ > 0 && !reaped_) {
      ::kill(pid_, SIGKILL);
      wait();
    }
  }
  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;

  /// Reads available output for up to timeout; true once `needle` shows up
  /// on stdout or stderr.
  bool wait_for_output(const std::string& needle, std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
      if (result_.out.find(needle) != std::string::npos || result_.err.find(needle) != std::string::npos) return true;
      if (!pump(50)) break;
    }
    return result_.out.find(needle) != std::string::npos || result_.err.find(needle) != std::string::npos;
  }

  void signal(int sig) { ::kill(pid_, sig); }

  ProcessResult wait() {
    while (pump(-1)) {
    }
    int status = 0;
    ::waitpid(pid_, &status, 0);
    reaped_ = true;
    result_.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    return result_;
  }

private:
  // False once both pipes are closed.
  bool pump(int timeout_ms) {
    pollfd fds[2] = {{out_fd_, POLLIN, 0}, {err_fd_, POLLIN, 0}};
    int open = 0;
    for (auto& f : fds) open += f.fd >= 0;
    if (open == 0) return false;
    if (::poll(fds, 2, timeout_ms) <= 0) return true;
    char buf[4096];
    for (int i = 0; i < 2; ++i) {
      if (fds[i].fd < 0 || (fds[i].revents & (POLLIN | POLLHUP)) == 0) continue;
      const auto n = ::read(fds[i].fd, buf, sizeof buf);
      int& fd = i == 0 ? out_fd_ : err_fd_;
      if (n <= 0) {
        ::close(fd);
        fd = -1;
      } else {
        (i == 0 ? result_.out : result_.err).append(buf, static_cast<std::size_t>(n));
      }
    }
    return true;
  }

  pid_t pid_ = -1;
  int out_fd_ = -1;
  int err_fd_ = -1;
  bool reaped_ = false;
  ProcessResult result_;
};

inline ProcessResult run_cli(std::vector<std::string> args, std::vector<std::string> env = {}) {
  Process p(std::move(args), std::move(env));
  return p.wait();
}

} // namespace testing_support
