#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>

#include "semilabel/errors.hpp"
#include "semilabel/scorer.hpp"

namespace semilabel {

namespace {

using Kind = ProtocolError::Kind;

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

class FdChannel : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}

  ~FdChannel() override { close_fds(); }

  void write_line(std::string_view line) override {
    std::string frame(line);
    frame += '\n';
    std::size_t done = 0;
    while (done < frame.size()) {
      ssize_t n = ::write(write_fd_, frame.data() + done, frame.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(errno == EPIPE ? Kind::Closed : Kind::Transport,
                            std::string("scorer write failed: ") + std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(std::chrono::milliseconds timeout) override {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw ProtocolError(Kind::Timeout, "scorer did not answer within the timeout");
      pollfd pfd{read_fd_, POLLIN, 0};
      int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(Kind::Transport, std::string("poll failed: ") + std::strerror(errno));
      }
      if (ready == 0) continue;
      char chunk[65536];
      ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw ProtocolError(Kind::Transport, std::string("scorer read failed: ") + std::strerror(errno));
      }
      if (n == 0) throw ProtocolError(Kind::Closed, "scorer closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 protected:
  void close_fds() {
    if (read_fd_ >= 0) ::close(read_fd_);
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    read_fd_ = write_fd_ = -1;
  }

 private:
  int read_fd_;
  int write_fd_;
  std::string buffer_;
};

class ProcessChannel final : public FdChannel {
 public:
  ProcessChannel(int read_fd, int write_fd, pid_t pid) : FdChannel(read_fd, write_fd), pid_(pid) {}

  ~ProcessChannel() override {
    // Closing stdin asks the scorer to exit; escalate if it lingers.
    close_fds();
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) != 0) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    ::kill(-pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }

 private:
  pid_t pid_;
};

}  // namespace

std::unique_ptr<LineChannel> spawn_process_channel(const std::string& command) {
  ignore_sigpipe();
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw ProtocolError(Kind::Transport, "pipe() failed");
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw ProtocolError(Kind::Transport, "pipe() failed");
  }
  pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
    throw ProtocolError(Kind::Transport, "fork() failed");
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<ProcessChannel>(from_child[0], to_child[1], pid);
}

std::unique_ptr<LineChannel> connect_tcp_channel(const std::string& host, std::uint16_t port) {
  ignore_sigpipe();
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0) {
    throw ProtocolError(Kind::Transport, "cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) throw ProtocolError(Kind::Transport, "cannot connect to scorer at " + host + ":" + service);
  return std::make_unique<FdChannel>(fd, fd);
}

}  // namespace semilabel
