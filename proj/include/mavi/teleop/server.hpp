#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mavi/teleop/session.hpp"

namespace mavi::teleop {

/// Fixed-capacity FIFO that makes room by discarding its oldest element.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

  /// Returns false when an old element had to be dropped.
  bool push(T v) {
    items_.push_back(std::move(v));
    if (items_.size() <= capacity_) return true;
    items_.pop_front();
    ++dropped_;
    return false;
  }
  std::optional<T> pop() {
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
  std::uint64_t dropped_ = 0;
};

class ServerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ListenAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8765;
};

/// Parses "host:port" or ":port". Throws ServerError.
ListenAddress parse_listen(const std::string& text);

class Connection;

/// Network front end. Clients speak newline-delimited envelopes over plain TCP
/// or a WebSocket upgrade on the same port (one envelope per text message).
/// Socket work runs on an internal io thread; the tick thread calls
/// pump_inbound() and receives outbound lines through the session listener.
class TeleopServer {
 public:
  /// Binds immediately; throws ServerError if the address is unavailable.
  TeleopServer(Session& session, const ListenAddress& addr, std::size_t queue_capacity);
  ~TeleopServer();
  TeleopServer(const TeleopServer&) = delete;
  TeleopServer& operator=(const TeleopServer&) = delete;

  std::uint16_t port() const { return port_; }
  void start();
  void stop();

  /// Tick thread: hands queued client envelopes to the session.
  std::size_t pump_inbound();

  std::size_t clients() const;
  std::uint64_t dropped_outbound() const;
  std::uint64_t dropped_inbound() const;

 private:
  friend class Connection;
  struct Inbound {
    std::optional<Envelope> envelope;
    std::string error;
  };
  struct Impl;

  void accept_next();
  void broadcast(const std::string& line);
  void post_inbound(Inbound item);
  void add_client(std::shared_ptr<Connection> c);
  void remove_client(const Connection* c);

  Session& session_;
  std::size_t queue_capacity_;
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
  std::size_t listener_ = 0;
  std::thread io_thread_;
  std::atomic<bool> running_{false};

  mutable std::mutex clients_mutex_;
  std::vector<std::shared_ptr<Connection>> clients_;
  std::uint64_t dropped_by_gone_clients_ = 0;

  mutable std::mutex inbound_mutex_;
  BoundedQueue<Inbound> inbound_;
};

}  // namespace mavi::teleop
