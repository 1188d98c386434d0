#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ppls/error.hpp"
#include "ppls/wire.hpp"

namespace ppls {

/// Append-only record of every frame sent in a scenario; the raw bytes feed
/// the blindness audits, the decoded copy feeds structural checks.
struct LogEntry {
  std::uint64_t seq = 0;
  std::string sender;
  std::string receiver;
  std::vector<std::uint8_t> frame;
  wire::Message message;
  std::int64_t wall_us = 0;
};

class TransportLog {
 public:
  void append(LogEntry e);
  std::vector<LogEntry> snapshot() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<LogEntry> entries_;
  std::uint64_t next_seq_ = 0;
};

/// One end of a bidirectional, in-order, reliable connection. send() frames
/// and logs the message; recv() blocks up to the configured timeout.
class Channel {
 public:
  virtual ~Channel() = default;

  virtual void send(const wire::Message& msg) = 0;
  virtual wire::Message recv() = 0;
  virtual void close() = 0;

  wire::Message request(const wire::Message& msg) {
    send(msg);
    return recv();
  }

  void set_recv_timeout_ms(std::int64_t ms) { recv_timeout_ms_ = ms; }

  const std::string& local_role() const { return local_role_; }
  const std::string& peer_role() const { return peer_role_; }

 protected:
  std::string local_role_;
  std::string peer_role_;
  std::int64_t recv_timeout_ms_ = 30'000;
};

/// Per-connection message handler; a fresh one is created for every accepted
/// connection so multi-round exchanges can keep session state.
using SessionHandler = std::function<wire::Message(const wire::Message&)>;
using SessionFactory = std::function<SessionHandler()>;

class Network {
 public:
  virtual ~Network() = default;

  virtual void serve(const std::string& role, SessionFactory factory) = 0;
  virtual std::unique_ptr<Channel> connect(const std::string& from_role,
                                           const std::string& to_role) = 0;
  /// Stops listeners and joins all session threads. Client channels must be
  /// closed first.
  virtual void shutdown() = 0;

  TransportLog* log() const { return log_; }
  void set_log(TransportLog* log) { log_ = log; }

 protected:
  TransportLog* log_ = nullptr;
};

std::unique_ptr<Network> make_inproc_network();
std::unique_ptr<Network> make_tcp_network();

/// Runs handler over the channel until the peer closes; errors raised by the
/// handler turn into wire Error replies.
void serve_session(Channel& ch, const SessionHandler& handler);

std::uint8_t wire_error_code(Err e);

}  // namespace ppls
