#include "subprocess.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <thread>

namespace encls {

namespace {

using Clock = std::chrono::steady_clock;

struct TempFile {
  int fd = -1;
  char path[64] = "/tmp/encls-cap-XXXXXX";

  bool open() {
    fd = mkstemp(path);
    return fd >= 0;
  }
  std::string read_all() {
    std::string out;
    if (fd < 0) return out;
    lseek(fd, 0, SEEK_SET);
    char buf[4096];
    ssize_t n;
    while ((n = ::read(fd, buf, sizeof buf)) > 0) out.append(buf, static_cast<size_t>(n));
    return out;
  }
  ~TempFile() {
    if (fd >= 0) {
      close(fd);
      unlink(path);
    }
  }
};

}  // namespace

SubprocessResult run_subprocess(const SubprocessOptions& opts) {
  SubprocessResult res;
  if (opts.argv.empty()) {
    res.spawn_failed = true;
    res.spawn_error = "empty argv";
    return res;
  }

  TempFile out_cap, err_cap;
  if (!out_cap.open() || !err_cap.open()) {
    res.spawn_failed = true;
    res.spawn_error = "cannot create capture files";
    return res;
  }

  // CLOEXEC pipe: the child reports exec failure through it, success closes it.
  int exec_pipe[2];
  if (pipe2(exec_pipe, O_CLOEXEC) != 0) {
    res.spawn_failed = true;
    res.spawn_error = "pipe2 failed";
    return res;
  }

  std::vector<char*> argv;
  argv.reserve(opts.argv.size() + 1);
  for (const auto& a : opts.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  auto t0 = Clock::now();
  pid_t pid = fork();
  if (pid < 0) {
    close(exec_pipe[0]);
    close(exec_pipe[1]);
    res.spawn_failed = true;
    res.spawn_error = std::string("fork failed: ") + std::strerror(errno);
    return res;
  }
  if (pid == 0) {
    setpgid(0, 0);
    close(exec_pipe[0]);
    dup2(out_cap.fd, STDOUT_FILENO);
    dup2(err_cap.fd, STDERR_FILENO);
    if (!opts.workdir.empty() && chdir(opts.workdir.c_str()) != 0) {
      int err = errno;
      (void)!write(exec_pipe[1], &err, sizeof err);
      _exit(127);
    }
    execvp(argv[0], argv.data());
    int err = errno;
    (void)!write(exec_pipe[1], &err, sizeof err);
    _exit(127);
  }

  close(exec_pipe[1]);
  setpgid(pid, pid);  // parent-side too, to close the race

  int exec_errno = 0;
  ssize_t got = ::read(exec_pipe[0], &exec_errno, sizeof exec_errno);
  close(exec_pipe[0]);
  if (got == sizeof exec_errno) {
    waitpid(pid, nullptr, 0);
    res.spawn_failed = true;
    res.spawn_error = std::string("cannot execute '") + opts.argv[0] +
                      "': " + std::strerror(exec_errno);
    return res;
  }

  const auto deadline =
      opts.deadline_seconds > 0
          ? t0 + std::chrono::duration_cast<Clock::duration>(
                     std::chrono::duration<double>(opts.deadline_seconds))
          : Clock::time_point::max();

  int status = 0;
  while (true) {
    pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) break;
    if (Clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      res.killed_at_deadline = true;
      waitpid(pid, &status, 0);
      break;
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(opts.poll_interval));
  }
  res.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();

  // sweep stragglers the child may have forked into its group
  kill(-pid, SIGKILL);

  if (WIFEXITED(status)) {
    res.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    res.signaled = true;
    res.term_signal = WTERMSIG(status);
  }
  res.stdout_text = out_cap.read_all();
  res.stderr_text = err_cap.read_all();
  return res;
}

}  // namespace encls
