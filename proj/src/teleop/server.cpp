#include "mavi/teleop/server.hpp"

#include <array>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace mavi::teleop {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using boost::system::error_code;

ListenAddress parse_listen(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw ServerError("listen address must be host:port, got '" + text + "'");
  ListenAddress a;
  if (colon > 0) a.host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  try {
    std::size_t used = 0;
    const int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range("port");
    a.port = static_cast<std::uint16_t>(p);
  } catch (const std::exception&) {
    throw ServerError("bad port in listen address '" + text + "'");
  }
  return a;
}

struct TeleopServer::Impl {
  net::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::optional<net::executor_work_guard<net::io_context::executor_type>> work;
};

// Silent raw-TCP clients are promoted after this long without a first byte.
constexpr auto kSniffTimeout = std::chrono::milliseconds(200);

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(TeleopServer& server, tcp::socket socket, std::size_t capacity)
      : server_(server), socket_(std::move(socket)), timer_(socket_.get_executor()), queue_(capacity) {}

  void start() {
    timer_.expires_after(kSniffTimeout);
    timer_.async_wait([self = shared_from_this()](error_code ec) {
      if (!ec && self->mode_ == Mode::Sniffing && self->sniffed_.empty()) self->become_tcp();
    });
    read_raw();
  }

  /// Any thread.
  void enqueue(const std::string& line) {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    queue_.push(line);
    if (!writing_) {
      writing_ = true;
      net::post(socket_.get_executor(), [self = shared_from_this()] { self->write_next(); });
    }
  }

  std::uint64_t dropped() const {
    std::lock_guard lock(mutex_);
    return queue_.dropped();
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      if (closed_) return;
      closed_ = true;
    }
    error_code ec;
    timer_.cancel();
    if (ws_) {
      beast::get_lowest_layer(*ws_).close(ec);
    } else {
      socket_.close(ec);
    }
    server_.remove_client(this);
  }

 private:
  enum class Mode { Sniffing, Tcp, Ws };

  void become_tcp() {
    mode_ = Mode::Tcp;
    server_.add_client(shared_from_this());
  }

  void read_raw() {
    socket_.async_read_some(net::buffer(buf_), [self = shared_from_this()](error_code ec, std::size_t n) {
      if (ec) return self->close();
      self->on_raw(std::string_view(self->buf_.data(), n));
    });
  }

  void on_raw(std::string_view data) {
    if (mode_ == Mode::Sniffing) {
      sniffed_.append(data);
      static constexpr std::string_view kGet = "GET ";
      const std::size_t n = std::min(sniffed_.size(), kGet.size());
      if (sniffed_.compare(0, n, kGet.substr(0, n)) == 0 && sniffed_.size() < kGet.size()) return read_raw();
      timer_.cancel();
      if (sniffed_.compare(0, kGet.size(), kGet) == 0) return upgrade();
      become_tcp();
      data = sniffed_;
    }
    feed(data);
    read_raw();
  }

  void upgrade() {
    mode_ = Mode::Ws;
    ws_.emplace(std::move(socket_));
    ws_->set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_->text(true);
    ws_->async_accept(net::buffer(sniffed_), [self = shared_from_this()](error_code ec) {
      if (ec) return self->close();
      self->server_.add_client(self);
      self->read_ws();
    });
  }

  void read_ws() {
    ws_->async_read(ws_buf_, [self = shared_from_this()](error_code ec, std::size_t) {
      if (ec) return self->close();
      std::string msg = beast::buffers_to_string(self->ws_buf_.data());
      self->ws_buf_.consume(self->ws_buf_.size());
      if (msg.empty() || msg.back() != '\n') msg.push_back('\n');
      self->feed(msg);
      self->read_ws();
    });
  }

  void feed(std::string_view data) {
    decoder_.feed(
        data, [&](Envelope e) { server_.post_inbound({std::move(e), {}}); },
        [&](const EnvelopeDecodeError& err) { server_.post_inbound({std::nullopt, err.what()}); });
  }

  void write_next() {
    {
      std::lock_guard lock(mutex_);
      auto next = queue_.pop();
      if (!next || closed_) {
        writing_ = false;
        return;
      }
      current_ = std::move(*next);
    }
    auto done = [self = shared_from_this()](error_code ec, std::size_t) {
      if (ec) return self->close();
      self->write_next();
    };
    if (mode_ == Mode::Ws) {
      // WebSocket messages carry one envelope without the line terminator.
      ws_->async_write(net::buffer(current_.data(), current_.size() - 1), done);
    } else {
      net::async_write(socket_, net::buffer(current_), done);
    }
  }

  TeleopServer& server_;
  tcp::socket socket_;
  std::optional<websocket::stream<tcp::socket>> ws_;
  net::steady_timer timer_;
  Mode mode_ = Mode::Sniffing;
  std::array<char, 4096> buf_{};
  std::string sniffed_;
  beast::flat_buffer ws_buf_;
  EnvelopeDecoder decoder_;

  mutable std::mutex mutex_;
  BoundedQueue<std::string> queue_;
  bool writing_ = false;
  bool closed_ = false;
  std::string current_;
};

TeleopServer::TeleopServer(Session& session, const ListenAddress& addr, std::size_t queue_capacity)
    : session_(session), queue_capacity_(queue_capacity), impl_(std::make_unique<Impl>()), inbound_(queue_capacity) {
  try {
    const tcp::endpoint ep(net::ip::make_address(addr.host), addr.port);
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
    impl_->acceptor.bind(ep);
    impl_->acceptor.listen();
    port_ = impl_->acceptor.local_endpoint().port();
  } catch (const boost::system::system_error& e) {
    throw ServerError("cannot listen on " + addr.host + ":" + std::to_string(addr.port) + ": " + e.code().message());
  }
  listener_ = session_.add_listener([this](const Envelope&, const std::string& line) { broadcast(line); });
}

TeleopServer::~TeleopServer() {
  stop();
  session_.remove_listener(listener_);
}

void TeleopServer::accept_next() {
  impl_->acceptor.async_accept([this](error_code ec, tcp::socket s) {
    if (ec) return;
    std::make_shared<Connection>(*this, std::move(s), queue_capacity_)->start();
    accept_next();
  });
}

void TeleopServer::start() {
  if (running_.exchange(true)) return;
  impl_->work.emplace(impl_->ioc.get_executor());
  net::post(impl_->ioc, [this] { accept_next(); });
  io_thread_ = std::thread([this] { impl_->ioc.run(); });
}

void TeleopServer::stop() {
  if (!running_.exchange(false)) return;
  net::post(impl_->ioc, [this] {
    error_code ec;
    impl_->acceptor.close(ec);
    std::vector<std::shared_ptr<Connection>> all;
    {
      std::lock_guard lock(clients_mutex_);
      all = clients_;
    }
    for (auto& c : all) c->close();
    impl_->work.reset();
    impl_->ioc.stop();
  });
  if (io_thread_.joinable()) io_thread_.join();
}

std::size_t TeleopServer::pump_inbound() {
  std::deque<Inbound> batch;
  {
    std::lock_guard lock(inbound_mutex_);
    while (auto item = inbound_.pop()) batch.push_back(std::move(*item));
  }
  for (auto& item : batch) {
    if (item.envelope) {
      session_.submit(std::move(*item.envelope));
    } else {
      session_.station().report_error("decode-error", item.error);
    }
  }
  return batch.size();
}

void TeleopServer::broadcast(const std::string& line) {
  std::lock_guard lock(clients_mutex_);
  for (auto& c : clients_) c->enqueue(line);
}

void TeleopServer::post_inbound(Inbound item) {
  std::lock_guard lock(inbound_mutex_);
  inbound_.push(std::move(item));
}

void TeleopServer::add_client(std::shared_ptr<Connection> c) {
  std::lock_guard lock(clients_mutex_);
  clients_.push_back(std::move(c));
}

void TeleopServer::remove_client(const Connection* c) {
  std::lock_guard lock(clients_mutex_);
  for (auto it = clients_.begin(); it != clients_.end(); ++it) {
    if (it->get() == c) {
      dropped_by_gone_clients_ += (*it)->dropped();
      clients_.erase(it);
      return;
    }
  }
}

std::size_t TeleopServer::clients() const {
  std::lock_guard lock(clients_mutex_);
  return clients_.size();
}

std::uint64_t TeleopServer::dropped_outbound() const {
  std::lock_guard lock(clients_mutex_);
  std::uint64_t n = dropped_by_gone_clients_;
  for (const auto& c : clients_) n += c->dropped();
  return n;
}

std::uint64_t TeleopServer::dropped_inbound() const {
  std::lock_guard lock(inbound_mutex_);
  return inbound_.dropped();
}

}  // namespace mavi::teleop
