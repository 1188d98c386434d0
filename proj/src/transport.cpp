#include "ppls/transport.hpp"

#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <thread>
#include <unordered_map>

#include "ppls/error.hpp"

namespace ppls {

namespace {

std::int64_t wall_us_now() {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

void TransportLog::append(LogEntry e) {
  std::lock_guard lk(mu_);
  e.seq = next_seq_++;
  entries_.push_back(std::move(e));
}

std::vector<LogEntry> TransportLog::snapshot() const {
  std::lock_guard lk(mu_);
  return entries_;
}

std::size_t TransportLog::size() const {
  std::lock_guard lk(mu_);
  return entries_.size();
}

std::uint8_t wire_error_code(Err e) { return static_cast<std::uint8_t>(e); }

void serve_session(Channel& ch, const SessionHandler& handler) {
  for (;;) {
    wire::Message req;
    try {
      req = ch.recv();
    } catch (const Error&) {
      return;  // peer closed or timed out; session over
    }
    wire::Message reply;
    try {
      reply = handler(req);
    } catch (const Error& err) {
      reply = wire::ErrorMsg{wire_error_code(err.code()), err.what()};
    } catch (const std::exception& ex) {
      reply = wire::ErrorMsg{wire_error_code(Err::Internal), ex.what()};
    }
    try {
      ch.send(reply);
    } catch (const Error&) {
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// In-process backend: a connection is a pair of byte-frame queues.
// ---------------------------------------------------------------------------

namespace {

struct Pipe {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::vector<std::uint8_t>> frames;
  bool closed = false;

  void push(std::vector<std::uint8_t> frame) {
    {
      std::lock_guard lk(mu);
      if (closed) throw Error(Err::PeerClosed, "pipe closed");
      frames.push_back(std::move(frame));
    }
    cv.notify_one();
  }

  std::vector<std::uint8_t> pop(std::int64_t timeout_ms) {
    std::unique_lock lk(mu);
    if (timeout_ms < 0) {
      cv.wait(lk, [&] { return !frames.empty() || closed; });
    } else if (!cv.wait_for(lk, std::chrono::milliseconds(timeout_ms),
                            [&] { return !frames.empty() || closed; })) {
      throw Error(Err::Timeout, "recv timed out");
    }
    if (frames.empty()) throw Error(Err::PeerClosed, "peer closed");
    auto f = std::move(frames.front());
    frames.pop_front();
    return f;
  }

  void close() {
    {
      std::lock_guard lk(mu);
      closed = true;
    }
    cv.notify_all();
  }
};

class InProcChannel : public Channel {
 public:
  InProcChannel(std::string local, std::string peer, std::shared_ptr<Pipe> in,
                std::shared_ptr<Pipe> out, TransportLog* log)
      : in_(std::move(in)), out_(std::move(out)), log_(log) {
    local_role_ = std::move(local);
    peer_role_ = std::move(peer);
  }
  ~InProcChannel() override { close(); }

  void send(const wire::Message& msg) override {
    auto frame = wire::encode(msg);
    if (log_) log_->append({0, local_role_, peer_role_, frame, msg, wall_us_now()});
    out_->push(std::move(frame));
  }

  wire::Message recv() override { return wire::decode(in_->pop(recv_timeout_ms_)); }

  void close() override {
    in_->close();
    out_->close();
  }

 private:
  std::shared_ptr<Pipe> in_;
  std::shared_ptr<Pipe> out_;
  TransportLog* log_;
};

class InProcNetwork : public Network {
 public:
  ~InProcNetwork() override { shutdown(); }

  void serve(const std::string& role, SessionFactory factory) override {
    std::lock_guard lk(mu_);
    factories_[role] = std::move(factory);
  }

  std::unique_ptr<Channel> connect(const std::string& from_role,
                                   const std::string& to_role) override {
    SessionFactory factory;
    {
      std::lock_guard lk(mu_);
      auto it = factories_.find(to_role);
      if (it == factories_.end()) fail(Err::PeerClosed, "no server for role " + to_role);
      factory = it->second;
    }
    auto a = std::make_shared<Pipe>();
    auto b = std::make_shared<Pipe>();
    auto client = std::make_unique<InProcChannel>(from_role, to_role, a, b, log_);
    auto server = std::make_shared<InProcChannel>(to_role, from_role, b, a, log_);
    server->set_recv_timeout_ms(-1);
    auto handler = factory();
    std::lock_guard lk(mu_);
    sessions_.emplace_back([server, handler] { serve_session(*server, handler); });
    return client;
  }

  void shutdown() override {
    std::vector<std::thread> ts;
    {
      std::lock_guard lk(mu_);
      ts.swap(sessions_);
    }
    for (auto& t : ts) t.join();
  }

 private:
  std::mutex mu_;
  std::unordered_map<std::string, SessionFactory> factories_;
  std::vector<std::thread> sessions_;
};

// ---------------------------------------------------------------------------
// TCP backend: loopback sockets, one listener per role. A connecting peer
// first sends its role name (u32 length + bytes) so both ends can label log
// entries; everything after the preamble is standard frames.
// ---------------------------------------------------------------------------

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Fd& operator=(Fd&& o) noexcept {
    reset();
    std::swap(fd_, o.fd_);
    return *this;
  }
  ~Fd() { reset(); }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
};

void write_all(int fd, const std::uint8_t* data, std::size_t len) {
  std::size_t off = 0;
  while (off < len) {
    ssize_t n = ::send(fd, data + off, len - off, MSG_NOSIGNAL);
    if (n <= 0) throw Error(Err::PeerClosed, "socket write failed");
    off += std::size_t(n);
  }
}

void read_all(int fd, std::uint8_t* data, std::size_t len, std::int64_t timeout_ms) {
  std::size_t off = 0;
  while (off < len) {
    if (timeout_ms >= 0) {
      pollfd pfd{fd, POLLIN, 0};
      int pr = ::poll(&pfd, 1, static_cast<int>(timeout_ms));
      if (pr == 0) throw Error(Err::Timeout, "recv timed out");
      if (pr < 0) throw Error(Err::PeerClosed, "poll failed");
    }
    ssize_t n = ::recv(fd, data + off, len - off, 0);
    if (n == 0) throw Error(Err::PeerClosed, "peer closed");
    if (n < 0) throw Error(Err::PeerClosed, "socket read failed");
    off += std::size_t(n);
  }
}

class SocketChannel : public Channel {
 public:
  SocketChannel(std::string local, std::string peer, Fd fd, TransportLog* log)
      : fd_(std::move(fd)), log_(log) {
    local_role_ = std::move(local);
    peer_role_ = std::move(peer);
  }
  ~SocketChannel() override { close(); }

  void send(const wire::Message& msg) override {
    auto frame = wire::encode(msg);
    if (log_) log_->append({0, local_role_, peer_role_, frame, msg, wall_us_now()});
    std::lock_guard lk(mu_);
    if (!fd_.valid()) throw Error(Err::PeerClosed, "channel closed");
    write_all(fd_.get(), frame.data(), frame.size());
  }

  wire::Message recv() override {
    std::uint8_t header[10];
    read_all(fd_.get(), header, sizeof(header), recv_timeout_ms_);
    if (std::memcmp(header, "PPLS", 4) != 0) fail(Err::MalformedFrame, "bad magic");
    std::uint32_t len = (std::uint32_t(header[6]) << 24) | (std::uint32_t(header[7]) << 16) |
                        (std::uint32_t(header[8]) << 8) | header[9];
    std::vector<std::uint8_t> frame(header, header + sizeof(header));
    frame.resize(sizeof(header) + len);
    read_all(fd_.get(), frame.data() + sizeof(header), len, recv_timeout_ms_);
    return wire::decode(frame);
  }

  void close() override {
    std::lock_guard lk(mu_);
    if (fd_.valid()) ::shutdown(fd_.get(), SHUT_RDWR);
    fd_.reset();
  }

 private:
  std::mutex mu_;
  Fd fd_;
  TransportLog* log_;
};

class TcpNetwork : public Network {
 public:
  ~TcpNetwork() override { shutdown(); }

  void serve(const std::string& role, SessionFactory factory) override {
    Fd listener(::socket(AF_INET, SOCK_STREAM, 0));
    if (!listener.valid()) fail(Err::Internal, "socket() failed");
    int one = 1;
    ::setsockopt(listener.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    if (::bind(listener.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
      fail(Err::Internal, "bind() failed");
    if (::listen(listener.get(), 64) != 0) fail(Err::Internal, "listen() failed");
    socklen_t alen = sizeof(addr);
    ::getsockname(listener.get(), reinterpret_cast<sockaddr*>(&addr), &alen);

    int lfd = listener.get();
    std::lock_guard lk(mu_);
    ports_[role] = ntohs(addr.sin_port);
    listeners_.push_back(std::move(listener));
    accept_threads_.emplace_back([this, lfd, role, factory] { accept_loop(lfd, role, factory); });
  }

  std::unique_ptr<Channel> connect(const std::string& from_role,
                                   const std::string& to_role) override {
    std::uint16_t port;
    {
      std::lock_guard lk(mu_);
      auto it = ports_.find(to_role);
      if (it == ports_.end()) fail(Err::PeerClosed, "no server for role " + to_role);
      port = it->second;
    }
    Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (!fd.valid()) fail(Err::Internal, "socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
      fail(Err::PeerClosed, "connect() failed");
    int one = 1;
    ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

    std::uint32_t len = static_cast<std::uint32_t>(from_role.size());
    std::uint8_t be[4] = {std::uint8_t(len >> 24), std::uint8_t(len >> 16), std::uint8_t(len >> 8),
                          std::uint8_t(len)};
    write_all(fd.get(), be, 4);
    write_all(fd.get(), reinterpret_cast<const std::uint8_t*>(from_role.data()), from_role.size());
    return std::make_unique<SocketChannel>(from_role, to_role, std::move(fd), log_);
  }

  void shutdown() override {
    {
      std::lock_guard lk(mu_);
      listeners_.clear();  // unblocks accept loops
    }
    std::vector<std::thread> ts;
    {
      std::lock_guard lk(mu_);
      ts.swap(accept_threads_);
    }
    for (auto& t : ts) t.join();
    ts.clear();
    {
      std::lock_guard lk(mu_);
      ts.swap(sessions_);
    }
    for (auto& t : ts) t.join();
  }

 private:
  void accept_loop(int lfd, const std::string& role, const SessionFactory& factory) {
    for (;;) {
      int cfd = ::accept(lfd, nullptr, nullptr);
      if (cfd < 0) return;
      int one = 1;
      ::setsockopt(cfd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      std::string peer;
      try {
        std::uint8_t be[4];
        read_all(cfd, be, 4, 30'000);
        std::uint32_t len = (std::uint32_t(be[0]) << 24) | (std::uint32_t(be[1]) << 16) |
                            (std::uint32_t(be[2]) << 8) | be[3];
        if (len > 256) throw Error(Err::MalformedFrame, "preamble too long");
        std::vector<std::uint8_t> name(len);
        read_all(cfd, name.data(), len, 30'000);
        peer.assign(name.begin(), name.end());
      } catch (const Error&) {
        ::close(cfd);
        continue;
      }
      auto ch = std::make_shared<SocketChannel>(role, peer, Fd(cfd), log_);
      ch->set_recv_timeout_ms(-1);
      auto handler = factory();
      std::lock_guard lk(mu_);
      sessions_.emplace_back([ch, handler] { serve_session(*ch, handler); });
    }
  }

  std::mutex mu_;
  std::unordered_map<std::string, std::uint16_t> ports_;
  std::vector<Fd> listeners_;
  std::vector<std::thread> accept_threads_;
  std::vector<std::thread> sessions_;
};

}  // namespace

std::unique_ptr<Network> make_inproc_network() { return std::make_unique<InProcNetwork>(); }
std::unique_ptr<Network> make_tcp_network() { return std::make_unique<TcpNetwork>(); }

}  // namespace ppls
