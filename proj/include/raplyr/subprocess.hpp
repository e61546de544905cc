#pragma once

#include <fcntl.h>
#include <pthread.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <string>
#include <string_view>

#include "raplyr/error.hpp"

namespace raplyr {

struct ProcessResult {
  int exit_code = 0;       // -1 when killed by a signal
  bool stopped_early = false;  // output satisfied the caller before exit
  std::string out;
  std::string err;
};

struct ProcessOptions {
  std::chrono::milliseconds timeout{30000};
  /// Return as soon as one full line is on stdout; the child is then closed
  /// and reaped without treating its exit status as an error.
  bool first_line_only = false;
};

namespace detail {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = o.fd_;
      o.fd_ = -1;
    }
    return *this;
  }
  ~Fd() { reset(); }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

inline void make_pipe(Fd& r, Fd& w) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw ProcessError(std::string("pipe: ") + std::strerror(errno));
  r = Fd(fds[0]);
  w = Fd(fds[1]);
}

inline int wait_child(pid_t pid, bool block) {
  int status = 0;
  pid_t r;
  do r = ::waitpid(pid, &status, block ? 0 : WNOHANG);
  while (r < 0 && errno == EINTR);
  if (r == 0) return -2;  // still running
  if (r < 0) return -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -1;
}

// Writes with SIGPIPE blocked for this thread and discards a pending one, so
// a child that closes stdin early yields EPIPE instead of killing us.
inline ssize_t write_no_sigpipe(int fd, std::string_view data) {
  sigset_t pipe_set, old;
  sigemptyset(&pipe_set);
  sigaddset(&pipe_set, SIGPIPE);
  pthread_sigmask(SIG_BLOCK, &pipe_set, &old);
  ssize_t put = ::write(fd, data.data(), data.size());
  if (put < 0 && errno == EPIPE) {
    timespec zero{};
    while (sigtimedwait(&pipe_set, nullptr, &zero) > 0) {
    }
    errno = EPIPE;
  }
  pthread_sigmask(SIG_SETMASK, &old, nullptr);
  return put;
}

}  // namespace detail

/// Runs `command` through /bin/sh -c, feeding `input` on stdin and capturing
/// stdout and stderr. Throws Timeout when the deadline passes (the child is
/// killed) and ProcessError when it cannot be started.
inline ProcessResult run_process(const std::string& command, std::string_view input, const ProcessOptions& opts = {}) {
  using Clock = std::chrono::steady_clock;
  detail::Fd in_r, in_w, out_r, out_w, err_r, err_w;
  detail::make_pipe(in_r, in_w);
  detail::make_pipe(out_r, out_w);
  detail::make_pipe(err_r, err_w);

  pid_t pid = ::fork();
  if (pid < 0) throw ProcessError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in_r.get(), STDIN_FILENO);
    ::dup2(out_w.get(), STDOUT_FILENO);
    ::dup2(err_w.get(), STDERR_FILENO);
    ::signal(SIGPIPE, SIG_DFL);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  in_r.reset();
  out_w.reset();
  err_w.reset();

  auto kill_child = [&](int sig) {
    ::kill(-pid, sig);
    ::kill(pid, sig);
  };

  const auto deadline = Clock::now() + opts.timeout;
  ProcessResult result;
  std::size_t written = 0;
  if (input.empty()) in_w.reset();
  bool out_open = true, err_open = true;

  while (out_open || err_open) {
    if (opts.first_line_only && result.out.find('\n') != std::string::npos) {
      result.stopped_early = true;
      break;
    }
    auto now = Clock::now();
    if (now >= deadline) {
      kill_child(SIGKILL);
      detail::wait_child(pid, true);
      throw Timeout("command timed out: " + command);
    }
    pollfd fds[3];
    int n = 0;
    int out_idx = -1, err_idx = -1, in_idx = -1;
    if (out_open) { fds[n] = {out_r.get(), POLLIN, 0}; out_idx = n++; }
    if (err_open) { fds[n] = {err_r.get(), POLLIN, 0}; err_idx = n++; }
    if (in_w.get() >= 0) { fds[n] = {in_w.get(), POLLOUT, 0}; in_idx = n++; }
    auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    int pr = ::poll(fds, static_cast<nfds_t>(n), static_cast<int>(std::min<long long>(wait_ms + 1, 1000)));
    if (pr < 0) {
      if (errno == EINTR) continue;
      kill_child(SIGKILL);
      detail::wait_child(pid, true);
      throw ProcessError(std::string("poll: ") + std::strerror(errno));
    }
    char buf[4096];
    auto drain = [&](int idx, int fd, std::string& sink, bool& open) {
      if (idx < 0 || !(fds[idx].revents & (POLLIN | POLLHUP | POLLERR))) return;
      ssize_t got = ::read(fd, buf, sizeof buf);
      if (got > 0) sink.append(buf, static_cast<std::size_t>(got));
      else if (got == 0 || errno != EINTR) open = false;
    };
    drain(out_idx, out_r.get(), result.out, out_open);
    drain(err_idx, err_r.get(), result.err, err_open);
    if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
      if (fds[in_idx].revents & (POLLERR | POLLHUP)) {
        in_w.reset();
      } else {
        ssize_t put = detail::write_no_sigpipe(in_w.get(), input.substr(written));
        if (put > 0) written += static_cast<std::size_t>(put);
        if (put < 0 && errno != EINTR && errno != EAGAIN) in_w.reset();
        if (written >= input.size()) in_w.reset();
      }
    }
  }

  in_w.reset();
  out_r.reset();
  err_r.reset();
  if (result.stopped_early) {
    // Give a well-behaved child a moment to exit on its own.
    auto grace = Clock::now() + std::chrono::milliseconds(500);
    int code;
    while ((code = detail::wait_child(pid, false)) == -2 && Clock::now() < grace)
      ::usleep(2000);
    if (code == -2) {
      kill_child(SIGKILL);
      code = detail::wait_child(pid, true);
    }
    result.exit_code = code;
    return result;
  }
  while (true) {
    int code = detail::wait_child(pid, false);
    if (code != -2) {
      result.exit_code = code;
      break;
    }
    if (Clock::now() >= deadline) {
      kill_child(SIGKILL);
      detail::wait_child(pid, true);
      throw Timeout("command timed out: " + command);
    }
    ::usleep(1000);
  }
  return result;
}

}  // namespace raplyr
