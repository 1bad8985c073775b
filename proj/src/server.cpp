#include "thinsheet/server.hpp"

#include <list>
#include <utility>
#include <vector>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "thinsheet/errors.hpp"
#include "thinsheet/protocol.hpp"

namespace thinsheet {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

DeformationWorker::DeformationWorker(const PointCloudModel& model, PipelineSettings settings)
    : engine_(model, settings), proxy_radius_(settings.material.proxy_radius), thread_([this](std::stop_token stop) { run(stop); }) {}

DeformationWorker::~DeformationWorker() {
  thread_.request_stop();
  {
    std::lock_guard lock(mutex_);
    current_.request_stop();
  }
  wake_.notify_all();
}

std::uint64_t DeformationWorker::submit(const DeformationRequest& request) {
  std::uint64_t id;
  {
    std::lock_guard lock(mutex_);
    id = ++next_job_;
    pending_.emplace(id, request);
    // A solve on another patch is superseded; one on the same patch finishes.
    if (busy_ && (request.proxy - running_proxy_).norm() > 0.5 * proxy_radius_) current_.request_stop();
  }
  wake_.notify_all();
  return id;
}

std::shared_ptr<const DeformationSnapshot> DeformationWorker::latest() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

std::uint64_t DeformationWorker::last_submitted() const {
  std::lock_guard lock(mutex_);
  return next_job_;
}

std::size_t DeformationWorker::cancelled() const {
  std::lock_guard lock(mutex_);
  return cancelled_;
}

void DeformationWorker::wait_idle() {
  std::unique_lock lock(mutex_);
  idle_.wait(lock, [&] { return !busy_ && !pending_; });
}

void DeformationWorker::run(std::stop_token stop) {
  for (;;) {
    std::pair<std::uint64_t, DeformationRequest> job;
    std::stop_source source;
    {
      std::unique_lock lock(mutex_);
      if (!wake_.wait(lock, stop, [&] { return pending_.has_value(); })) return;
      job = *pending_;
      pending_.reset();
      current_ = std::stop_source();
      source = current_;
      running_proxy_ = job.second.proxy;
      busy_ = true;
    }
    std::stop_callback link(stop, [source]() mutable { source.request_stop(); });

    std::shared_ptr<const DeformationSnapshot> done;
    bool was_cancelled = false;
    try {
      done = std::make_shared<const DeformationSnapshot>(DeformationSnapshot{job.first, engine_.deform(job.second, source.get_token())});
    } catch (const SolveCancelled&) {
      was_cancelled = true;
    } catch (const Error&) {
      engine_.invalidate();
      done = std::make_shared<const DeformationSnapshot>(DeformationSnapshot{job.first, {}});
    }

    std::lock_guard lock(mutex_);
    if (done) snapshot_ = std::move(done);
    if (was_cancelled) ++cancelled_;
    busy_ = false;
    if (!pending_) idle_.notify_all();
  }
}

LiveSession::LiveSession(const PointCloudModel& model, PipelineSettings settings)
    : model_(&model), tracker_(model, settings.material), worker_(model, settings) {}

std::string LiveSession::greeting() const { return protocol::format_model(*model_); }

std::string LiveSession::handle(std::string_view message) {
  protocol::HipMessage hip;
  try {
    hip = protocol::parse_hip(message);
  } catch (const ProtocolError& e) {
    return protocol::format_error(e.what());
  }

  ContactUpdate update;
  try {
    update = tracker_.update(hip.hip);
  } catch (const Error& e) {
    tracker_.reset();
    return protocol::format_error(std::string("proxy: ") + e.what());
  }

  protocol::StateMessage state;
  state.t = hip.t;
  state.proxy = update.state.proxy;
  state.contact = update.state.in_contact;
  if (update.force) {
    state.force_magnitude = update.force->magnitude;
    state.force_direction = update.force->direction;
  }
  if (update.request) {
    const std::uint64_t job = worker_.submit(*update.request);
    const auto snapshot = worker_.latest();
    state.stale = !snapshot || snapshot->job != job;
    if (snapshot) state.patch = snapshot->result.deformed_patch;
  }
  return protocol::format_state(state);
}

namespace {

void run_client(tcp::socket socket, std::shared_ptr<websocket::stream<tcp::socket>>& slot, std::mutex& slot_mutex,
                const bool& stopping, const PointCloudModel& model, const PipelineSettings& settings) {
  try {
    auto ws = std::make_shared<websocket::stream<tcp::socket>>(std::move(socket));
    {
      std::lock_guard lock(slot_mutex);
      if (stopping) return;
      slot = ws;
    }
    ws->accept();
    ws->text(true);
    LiveSession session(model, settings);
    ws->write(net::buffer(session.greeting()));
    for (;;) {
      beast::flat_buffer buffer;
      ws->read(buffer);
      const std::string reply = ws->got_text() ? session.handle(beast::buffers_to_string(buffer.data()))
                                               : protocol::format_error("binary frames are not supported");
      ws->text(true);
      ws->write(net::buffer(reply));
    }
  } catch (const beast::system_error&) {
    // Client went away or the server is shutting down.
  }
}

}  // namespace

void serve(const PointCloudModel& model, const PipelineSettings& settings, unsigned short port, std::stop_token stop,
           std::function<void(unsigned short)> on_listening) {
  settings.validate();
  net::io_context ioc;
  tcp::acceptor acceptor(ioc, tcp::endpoint(tcp::v4(), port));
  if (on_listening) on_listening(acceptor.local_endpoint().port());

  struct Client {
    std::shared_ptr<websocket::stream<tcp::socket>> stream;
    std::jthread thread;
  };
  std::mutex clients_mutex;
  std::list<Client> clients;
  bool stopping = false;

  std::function<void()> accept_next = [&] {
    acceptor.async_accept([&](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::lock_guard lock(clients_mutex);
      Client* client = &clients.emplace_back();
      client->thread = std::jthread([&, client, s = std::move(socket)]() mutable {
        run_client(std::move(s), client->stream, clients_mutex, stopping, model, settings);
      });
      accept_next();
    });
  };
  accept_next();

  std::stop_callback on_stop(stop, [&] {
    net::post(ioc, [&] {
      beast::error_code ignored;
      acceptor.close(ignored);
      ioc.stop();
    });
  });
  ioc.run();

  std::list<Client> finished;
  {
    std::lock_guard lock(clients_mutex);
    stopping = true;
    for (auto& c : clients) {
      beast::error_code ignored;
      if (c.stream) c.stream->next_layer().shutdown(tcp::socket::shutdown_both, ignored);
    }
    finished.swap(clients);
  }
  finished.clear();  // joins
}

}  // namespace thinsheet
