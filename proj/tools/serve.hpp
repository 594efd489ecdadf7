#pragma once

#include <atomic>
#include <chrono>
#include <csignal>
#include <deque>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "hrc/sim/engine.hpp"
#include "hrc/sim/protocol.hpp"

namespace hrcsim {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

class BindError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Server;

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, Server& server) : ws_(std::move(socket)), server_(server) {}

  void start();
  void send(std::shared_ptr<const std::string> frame);
  void close();

 private:
  void do_read();
  void do_write();

  websocket::stream<tcp::socket> ws_;
  Server& server_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> outbox_;
  bool open_ = false;
};

/// One io thread serves all connections; the engine steps on its own thread
/// in real time. Client commands go through the engine's queue, and state
/// frames are broadcast from the latest published snapshot.
class Server {
 public:
  Server(hrc::sim::ScenarioConfig cfg, const std::string& bind, double stream_hz)
      : engine_(prepare(std::move(cfg)), false), stream_hz_(stream_hz), acceptor_(io_), timer_(io_),
        signals_(io_, SIGINT, SIGTERM)
  {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) {
      throw BindError("--bind must be host:port");
    }
    try {
      const auto addr = asio::ip::make_address(bind.substr(0, colon));
      const auto port = static_cast<unsigned short>(std::stoul(bind.substr(colon + 1)));
      const tcp::endpoint ep(addr, port);
      acceptor_.open(ep.protocol());
      acceptor_.bind(ep);
      acceptor_.listen();
    } catch (const std::exception& e) {
      throw BindError("cannot listen on " + bind + ": " + e.what());
    }
    config_frame_ = hrc::sim::protocol::config_frame(engine_.config(), stream_hz_).dump();
    publish();
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  void run()
  {
    signals_.async_wait([this](const beast::error_code&, int) { stop(); });
    do_accept();
    schedule_broadcast();
    std::thread engine_thread([this] { engine_loop(); });
    io_.run();
    stopping_ = true;
    engine_thread.join();
  }

  void add(const std::shared_ptr<Session>& s) { sessions_.insert(s); }
  void remove(const std::shared_ptr<Session>& s) { sessions_.erase(s); }
  const std::string& config_frame() const { return config_frame_; }

  void handle(const std::shared_ptr<Session>& s, const std::string& text)
  {
    namespace proto = hrc::sim::protocol;
    const proto::Parsed parsed = proto::parse_client_message(text);
    if (const auto* err = std::get_if<proto::ProtocolError>(&parsed)) {
      s->send(std::make_shared<const std::string>(proto::error_frame(*err).dump()));
      return;
    }
    engine_.push(std::get<hrc::sim::Command>(parsed));
  }

 private:
  static hrc::sim::ScenarioConfig prepare(hrc::sim::ScenarioConfig cfg)
  {
    cfg.hand.kind = hrc::sim::HandKind::Interactive;
    cfg.repeat_program = true;
    return cfg;
  }

  void stop()
  {
    stopping_ = true;
    beast::error_code ec;
    acceptor_.close(ec);
    timer_.cancel();
    for (const auto& s : std::set(sessions_)) s->close();
    sessions_.clear();
    io_.stop();
  }

  void do_accept()
  {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        return;
      }
      std::make_shared<Session>(std::move(socket), *this)->start();
      do_accept();
    });
  }

  void schedule_broadcast()
  {
    period_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(1.0 / stream_hz_));
    next_tick_ = std::chrono::steady_clock::now() + period_;
    arm_timer();
  }

  void arm_timer()
  {
    timer_.expires_at(next_tick_);
    timer_.async_wait([this](beast::error_code ec) {
      if (ec || stopping_) {
        return;
      }
      std::shared_ptr<const std::string> frame;
      {
        std::lock_guard lock(live_mutex_);
        frame = std::make_shared<const std::string>(hrc::sim::protocol::state_frame(live_).dump());
      }
      for (const auto& s : sessions_) s->send(frame);
      next_tick_ += period_;
      arm_timer();
    });
  }

  void publish()
  {
    std::lock_guard lock(live_mutex_);
    live_ = engine_.live();
  }

  void engine_loop()
  {
    using clock = std::chrono::steady_clock;
    const auto dt = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(engine_.config().control_dt));
    auto next = clock::now();
    while (!stopping_) {
      try {
        engine_.step();
      } catch (const std::exception& e) {
        std::cerr << "engine: " << e.what() << ", resetting\n";
        engine_.push(hrc::sim::Reset{});
      }
      publish();
      next += dt;
      const auto now = clock::now();
      if (now - next > std::chrono::milliseconds(100)) {
        next = now;
      }
      std::this_thread::sleep_until(next);
    }
  }

  hrc::sim::Engine engine_;
  double stream_hz_;
  asio::io_context io_;
  tcp::acceptor acceptor_;
  asio::steady_timer timer_;
  asio::signal_set signals_;
  std::chrono::steady_clock::duration period_{};
  std::chrono::steady_clock::time_point next_tick_{};
  std::set<std::shared_ptr<Session>> sessions_;
  std::string config_frame_;
  std::mutex live_mutex_;
  hrc::sim::LiveState live_;
  std::atomic<bool> stopping_{false};
};

inline void Session::start()
{
  ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
    if (ec) {
      return;
    }
    self->open_ = true;
    self->server_.add(self);
    self->send(std::make_shared<const std::string>(self->server_.config_frame()));
    self->do_read();
  });
}

inline void Session::do_read()
{
  ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
    if (ec) {
      self->open_ = false;
      self->server_.remove(self);
      return;
    }
    const std::string text = beast::buffers_to_string(self->buffer_.data());
    self->buffer_.consume(self->buffer_.size());
    self->server_.handle(self, text);
    self->do_read();
  });
}

inline void Session::send(std::shared_ptr<const std::string> frame)
{
  if (!open_ || outbox_.size() > 64) {
    return;  // slow client: drop frames rather than queue without bound
  }
  outbox_.push_back(std::move(frame));
  if (outbox_.size() == 1) {
    do_write();
  }
}

inline void Session::do_write()
{
  ws_.text(true);
  ws_.async_write(asio::buffer(*outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
    if (ec) {
      self->open_ = false;
      self->server_.remove(self);
      return;
    }
    self->outbox_.pop_front();
    if (!self->outbox_.empty()) {
      self->do_write();
    }
  });
}

inline void Session::close()
{
  open_ = false;
  beast::error_code ec;
  ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
  ws_.next_layer().close(ec);
}

/// Blocks until SIGINT or SIGTERM. Prints the bound port on stdout first.
inline int serve(hrc::sim::ScenarioConfig cfg, const std::string& bind, double stream_hz)
{
  std::unique_ptr<Server> server;
  try {
    server = std::make_unique<Server>(std::move(cfg), bind, stream_hz);
  } catch (const BindError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cout << "listening on port " << server->port() << std::endl;
  server->run();
  std::cout << "shutdown" << std::endl;
  return 0;
}

}  // namespace hrcsim
