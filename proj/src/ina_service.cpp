// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "natcomp/ina_service.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <map>
#include <mutex>
#include <span>
#include <thread>

#include "natcomp/codec.hpp"
#include "natcomp/errors.hpp"
#include "natcomp/ina_core.hpp"

namespace natcomp::ina {

namespace {

constexpr uint8_t kHello = 0x01;
constexpr uint8_t kFrame = 0x02;
constexpr uint8_t kAgg = 0x03;
constexpr uint8_t kAbort = 0x04;
constexpr uint16_t kAggregatorId = 0xffff;

void append_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void append_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
  }
}

uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint64_t read_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

bool send_all(int fd, const uint8_t* data, size_t len) {
  while (len > 0) {
    const ssize_t n = ::send(fd, data, len, MSG_NOSIGNAL);
    if (n <= 0) return false;
    data += n;
    len -= static_cast<size_t>(n);
  }
  return true;
}

bool recv_all(int fd, uint8_t* data, size_t len) {
  while (len > 0) {
    const ssize_t n = ::recv(fd, data, len, 0);
    if (n <= 0) return false;
    data += n;
    len -= static_cast<size_t>(n);
  }
  return true;
}

int connect_to(const std::string& host, uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw ProtocolError("ina: cannot create socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw ProtocolError("ina: bad host address " + host);
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw ProtocolError("ina: cannot connect to " + host + ":" +
                        std::to_string(port));
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return fd;
}

struct FrameRecord {
  uint64_t session = 0;
  uint64_t chunk_index = 0;
  uint16_t worker_id = 0;
  std::vector<uint8_t> payload;
};

// Reads one FRAME/AGG body from fd (after the type byte).
bool read_frame_body(int fd, FrameRecord* frame) {
  uint8_t head[20];
  if (!recv_all(fd, head, sizeof(head))) return false;
  frame->session = read_u64(head);
  frame->chunk_index = read_u64(head + 8);
  frame->worker_id = read_u16(head + 16);
  const uint16_t count = read_u16(head + 18);
  frame->payload.resize(count);
  return count == 0 || recv_all(fd, frame->payload.data(), count);
}

std::vector<uint8_t> make_frame(uint8_t type, uint64_t session, uint64_t chunk,
                                uint16_t worker_id,
                                std::span<const uint8_t> payload) {
  std::vector<uint8_t> msg;
  msg.reserve(21 + payload.size());
  msg.push_back(type);
  append_u64(msg, session);
  append_u64(msg, chunk);
  append_u16(msg, worker_id);
  append_u16(msg, static_cast<uint16_t>(payload.size()));
  msg.insert(msg.end(), payload.begin(), payload.end());
  return msg;
}

}  // namespace

ChunkFrame aggregate_chunk(const std::vector<ChunkFrame>& frames,
                           uint64_t seed, uint64_t* clip_count,
                           uint64_t* saturation_count) {
  if (frames.empty()) {
    throw ProtocolError("aggregate_chunk: no worker frames present");
  }
  const uint64_t session = frames[0].session_id;
  const uint64_t chunk = frames[0].chunk_index;
  const size_t n_elements = frames[0].payload.size();
  if (n_elements == 0 || n_elements > 256) {
    throw ProtocolError("aggregate_chunk: frame must carry 1..256 elements");
  }
  std::vector<const uint8_t*> payloads(frames.size());
  for (size_t w = 0; w < frames.size(); ++w) {
    if (frames[w].session_id != session || frames[w].chunk_index != chunk) {
      throw ProtocolError("aggregate_chunk: frames from different chunks");
    }
    if (frames[w].payload.size() != n_elements) {
      throw ProtocolError("aggregate_chunk: mismatched payload lengths");
    }
    payloads[w] = frames[w].payload.data();
  }
  ChunkFrame out;
  out.session_id = session;
  out.chunk_index = chunk;
  out.worker_id = kAggregatorId;
  out.payload.resize(n_elements);
  aggregate_payloads(payloads.data(), frames.size(), n_elements, seed, session,
                     chunk, out.payload.data(), clip_count, saturation_count);
  return out;
}

// ---------------------------------------------------------------------------
// Server
// ---------------------------------------------------------------------------

struct InaServer::Impl {
  ServerOptions options;
  int listen_fd = -1;
  uint16_t port = 0;
  std::thread accept_thread;
  std::thread watchdog_thread;
  std::atomic<bool> stopping{false};

  std::mutex mu;
  ServerCounters counters;

  struct Session {
    uint16_t n_workers = 0;
    uint64_t d = 0;
    uint16_t chunk_elems = 0;
    std::vector<int> member_fds;
    // chunk_index -> per-worker payloads (empty = missing)
    std::map<uint64_t, std::vector<std::vector<uint8_t>>> pending;
    std::map<uint64_t, std::chrono::steady_clock::time_point> first_seen;
    bool aborted = false;
  };
  std::map<uint64_t, Session> sessions;

  std::vector<std::thread> conn_threads;

  explicit Impl(ServerOptions opts) : options(std::move(opts)) {
    listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd < 0) throw ProtocolError("ina serve: cannot create socket");
    const int one = 1;
    ::setsockopt(listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(options.port);
    if (::inet_pton(AF_INET, options.listen_host.c_str(), &addr.sin_addr) !=
        1) {
      throw ProtocolError("ina serve: bad listen address " +
                          options.listen_host);
    }
    if (::bind(listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) !=
        0) {
      throw ProtocolError("ina serve: cannot bind " + options.listen_host +
                          ":" + std::to_string(options.port));
    }
    if (::listen(listen_fd, 64) != 0) {
      throw ProtocolError("ina serve: listen failed");
    }
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd, reinterpret_cast<sockaddr*>(&addr), &len);
    port = ntohs(addr.sin_port);

    accept_thread = std::thread([this] { accept_loop(); });
    watchdog_thread = std::thread([this] { watchdog_loop(); });
  }

  void accept_loop() {
    for (;;) {
      const int fd = ::accept(listen_fd, nullptr, nullptr);
      if (fd < 0) {
        if (stopping.load()) return;
        continue;
      }
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      std::lock_guard<std::mutex> lock(mu);
      conn_threads.emplace_back([this, fd] { connection_loop(fd); });
    }
  }

  void watchdog_loop() {
    while (!stopping.load()) {
      std::this_thread::sleep_for(std::chrono::milliseconds(200));
      const auto now = std::chrono::steady_clock::now();
      std::lock_guard<std::mutex> lock(mu);
      for (auto& [sid, session] : sessions) {
        if (session.aborted || session.first_seen.empty()) continue;
        const auto oldest = session.first_seen.begin()->second;
        const double age =
            std::chrono::duration<double>(now - oldest).count();
        if (age > options.timeout_sec) {
          abort_session_locked(sid, session, 1 /* timeout */);
        }
      }
    }
  }

  void abort_session_locked(uint64_t sid, Session& session, uint8_t reason) {
    if (session.aborted) return;
    session.aborted = true;
    ++counters.sessions_aborted;
    std::vector<uint8_t> msg;
    msg.push_back(kAbort);
    append_u64(msg, sid);
    msg.push_back(reason);
    for (int fd : session.member_fds) {
      send_all(fd, msg.data(), msg.size());
      ::shutdown(fd, SHUT_RDWR);
    }
    session.pending.clear();
    session.first_seen.clear();
  }

  void connection_loop(int fd) {
    uint64_t my_session = 0;
    bool have_session = false;
    for (;;) {
      uint8_t type = 0;
      if (!recv_all(fd, &type, 1)) break;
      if (type == kHello) {
        uint8_t body[22];
        if (!recv_all(fd, body, sizeof(body))) break;
        const uint64_t sid = read_u64(body);
        const uint16_t n_workers = read_u16(body + 10);
        const uint64_t d = read_u64(body + 12);
        const uint16_t chunk_elems = read_u16(body + 20);
        std::lock_guard<std::mutex> lock(mu);
        Session& session = sessions[sid];
        if (session.member_fds.empty()) {
          session.n_workers = n_workers;
          session.d = d;
          session.chunk_elems = chunk_elems;
        } else if (session.n_workers != n_workers || session.d != d ||
                   session.chunk_elems != chunk_elems) {
          abort_session_locked(sid, session, 2 /* handshake mismatch */);
          break;
        }
        session.member_fds.push_back(fd);
        my_session = sid;
        have_session = true;
        continue;
      }
      if (type == kFrame) {
        FrameRecord frame;
        if (!read_frame_body(fd, &frame)) break;
        std::lock_guard<std::mutex> lock(mu);
        auto it = sessions.find(frame.session);
        if (it == sessions.end() || it->second.aborted) continue;
        Session& session = it->second;
        if (frame.worker_id >= session.n_workers) {
          abort_session_locked(frame.session, session, 3 /* bad worker id */);
          continue;
        }
        auto& slots = session.pending[frame.chunk_index];
        if (slots.empty()) {
          slots.resize(session.n_workers);
          session.first_seen[frame.chunk_index] =
              std::chrono::steady_clock::now();
        }
        if (!slots[frame.worker_id].empty()) {
          abort_session_locked(frame.session, session, 4 /* duplicate */);
          continue;
        }
        // Mismatched payload lengths within a chunk violate the protocol.
        for (const auto& other : slots) {
          if (!other.empty() && other.size() != frame.payload.size()) {
            abort_session_locked(frame.session, session, 5 /* length */);
            break;
          }
        }
        if (session.aborted) continue;
        slots[frame.worker_id] = std::move(frame.payload);
        bool complete = true;
        for (const auto& slot : slots) {
          if (slot.empty()) {
            complete = false;
            break;
          }
        }
        if (complete) {
          aggregate_and_multicast_locked(frame.session, session,
                                         frame.chunk_index);
        }
        continue;
      }
      break;  // unknown type: drop the connection
    }
    // Connection gone: abort its session so peers are not left waiting.
    std::lock_guard<std::mutex> lock(mu);
    if (have_session) {
      auto it = sessions.find(my_session);
      if (it != sessions.end() && !it->second.aborted) {
        bool active = !it->second.pending.empty();
        if (active && !stopping.load()) {
          abort_session_locked(my_session, it->second, 6 /* peer lost */);
        }
      }
    }
    ::close(fd);
  }

  void aggregate_and_multicast_locked(uint64_t sid, Session& session,
                                      uint64_t chunk_index) {
    auto& slots = session.pending[chunk_index];
    const size_t n_elements = slots[0].size();
    std::vector<const uint8_t*> payloads(session.n_workers);
    for (size_t w = 0; w < session.n_workers; ++w) {
      payloads[w] = slots[w].data();
    }
    std::vector<uint8_t> agg(n_elements);
    aggregate_payloads(payloads.data(), session.n_workers, n_elements,
                       options.seed, sid, chunk_index, agg.data(),
                       &counters.clipped, &counters.saturated);
    ++counters.chunks_aggregated;
    const std::vector<uint8_t> msg =
        make_frame(kAgg, sid, chunk_index, kAggregatorId, agg);
    for (int fd : session.member_fds) {
      if (!send_all(fd, msg.data(), msg.size())) {
        abort_session_locked(sid, session, 6 /* peer lost */);
        return;
      }
    }
    session.pending.erase(chunk_index);
    session.first_seen.erase(chunk_index);
  }

  void stop() {
    bool expected = false;
    if (!stopping.compare_exchange_strong(expected, true)) return;
    ::shutdown(listen_fd, SHUT_RDWR);
    ::close(listen_fd);
    if (accept_thread.joinable()) accept_thread.join();
    if (watchdog_thread.joinable()) watchdog_thread.join();
    std::vector<std::thread> threads;
    {
      std::lock_guard<std::mutex> lock(mu);
      for (auto& [sid, session] : sessions) {
        for (int fd : session.member_fds) ::shutdown(fd, SHUT_RDWR);
      }
      threads.swap(conn_threads);
    }
    for (std::thread& t : threads) {
      if (t.joinable()) t.join();
    }
  }

  ~Impl() { stop(); }
};

InaServer::InaServer(ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(options))) {}

InaServer::~InaServer() = default;

uint16_t InaServer::port() const { return impl_->port; }

void InaServer::stop() { impl_->stop(); }

ServerCounters InaServer::counters() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->counters;
}

// ---------------------------------------------------------------------------
// Worker client
// ---------------------------------------------------------------------------

struct InaWorkerClient::Impl {
  int fd = -1;
  uint64_t session_id = 0;
  uint16_t worker_id = 0;
  uint64_t d = 0;
  uint16_t chunk_elems = 256;
};

InaWorkerClient::InaWorkerClient(const std::string& host, uint16_t port,
                                 uint64_t session_id, uint16_t worker_id,
                                 uint16_t n_workers, uint64_t d,
                                 uint16_t chunk_elems)
    : impl_(std::make_unique<Impl>()) {
  if (chunk_elems == 0 || chunk_elems > 256) {
    throw ConfigError("ina worker: chunk size must be in [1, 256]");
  }
  impl_->fd = connect_to(host, port);
  impl_->session_id = session_id;
  impl_->worker_id = worker_id;
  impl_->d = d;
  impl_->chunk_elems = chunk_elems;
  std::vector<uint8_t> hello;
  hello.push_back(kHello);
  append_u64(hello, session_id);
  append_u16(hello, worker_id);
  append_u16(hello, n_workers);
  append_u64(hello, d);
  append_u16(hello, chunk_elems);
  if (!send_all(impl_->fd, hello.data(), hello.size())) {
    throw ProtocolError("ina worker: handshake failed");
  }
}

InaWorkerClient::~InaWorkerClient() {
  if (impl_ && impl_->fd >= 0) ::close(impl_->fd);
}

uint64_t InaWorkerClient::chunks_per_vector() const {
  return (impl_->d + impl_->chunk_elems - 1) / impl_->chunk_elems;
}

void InaWorkerClient::send_vector(const DenseVector& compressed,
                                  uint64_t base_chunk_index) {
  if (compressed.dim() != impl_->d) {
    throw ConfigError("ina worker: vector dimension mismatch");
  }
  uint64_t clip = 0;
  const std::vector<uint8_t> block = encode_nat8c(compressed, &clip);
  std::span<const uint8_t> payload(block.data() + kBlockHeaderBytes,
                                   compressed.dim());
  uint64_t chunk = base_chunk_index;
  for (size_t off = 0; off < payload.size(); off += impl_->chunk_elems) {
    const size_t count =
        std::min<size_t>(impl_->chunk_elems, payload.size() - off);
    const std::vector<uint8_t> msg =
        make_frame(kFrame, impl_->session_id, chunk, impl_->worker_id,
                   payload.subspan(off, count));
    if (!send_all(impl_->fd, msg.data(), msg.size())) {
      throw ProtocolError("ina worker: send failed");
    }
    ++chunk;
  }
}

DenseVector InaWorkerClient::receive_vector(uint64_t base_chunk_index) {
  std::vector<double> values(impl_->d);
  uint64_t expected = base_chunk_index;
  size_t off = 0;
  while (off < impl_->d) {
    uint8_t type = 0;
    if (!recv_all(impl_->fd, &type, 1)) {
      throw ProtocolError("ina worker: connection closed");
    }
    if (type == kAbort) {
      uint8_t body[9];
      recv_all(impl_->fd, body, sizeof(body));
      throw ProtocolError("ina worker: session aborted (reason " +
                          std::to_string(body[8]) + ")");
    }
    if (type != kAgg) {
      throw ProtocolError("ina worker: unexpected message type " +
                          std::to_string(type));
    }
    FrameRecord frame;
    if (!read_frame_body(impl_->fd, &frame)) {
      throw ProtocolError("ina worker: truncated aggregate");
    }
    if (frame.chunk_index != expected) {
      throw ProtocolError("ina worker: aggregate out of order");
    }
    if (off + frame.payload.size() > impl_->d) {
      throw ProtocolError("ina worker: aggregate longer than the vector");
    }
    for (uint8_t byte : frame.payload) {
      const int64_t fixed = nat8c_byte_to_fixed(byte);
      values[off++] =
          static_cast<double>(fixed) * 0x1.0p-50;  // undo the shift
    }
    ++expected;
  }
  return DenseVector::unchecked(std::move(values));
}

}  // namespace natcomp::ina
