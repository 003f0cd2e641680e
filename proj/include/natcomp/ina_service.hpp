// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "natcomp/dense_vector.hpp"

namespace natcomp::ina {

// Stream-socket aggregation service. Wire protocol (all integers
// little-endian), one length-implicit message per record:
//   HELLO (0x01): session u64 | worker_id u16 | n_workers u16 | d u64 |
//                 chunk_elems u16
//   FRAME (0x02): session u64 | chunk_index u64 | worker_id u16 |
//                 element_count u16 | payload bytes (NAT8C)
//   AGG   (0x03): FRAME layout with worker_id = 0xffff
//   ABORT (0x04): session u64 | reason u8
//
// All workers of a session must use identical chunk boundaries. The server
// aggregates a chunk once all n frames arrived and multicasts the identical
// AGG record to every session member, in chunk_index order.

// One worker's contribution to a chunk (or the aggregate sent back, with
// worker_id = 0xffff).
struct ChunkFrame {
  uint64_t session_id = 0;
  uint64_t chunk_index = 0;
  uint16_t worker_id = 0;
  std::vector<uint8_t> payload;  // NAT8C-coded elements, <= 256 per frame
};

// Aggregates one frame per worker into the multicast frame: fixed-point
// integer sum with saturation, then integer stochastic rounding back to
// NAT8C. All frames must share (session_id, chunk_index) and payload length
// (protocol error otherwise); frames must be non-empty (session error).
ChunkFrame aggregate_chunk(const std::vector<ChunkFrame>& frames,
                           uint64_t seed, uint64_t* clip_count = nullptr,
                           uint64_t* saturation_count = nullptr);

struct ServerOptions {
  std::string listen_host = "127.0.0.1";
  uint16_t port = 0;  // 0 picks a free port
  int n_workers = 1;
  uint64_t seed = 0;
  double timeout_sec = 5.0;
};

struct ServerCounters {
  uint64_t chunks_aggregated = 0;
  uint64_t clipped = 0;
  uint64_t saturated = 0;
  uint64_t sessions_aborted = 0;
};

class InaServer {
 public:
  explicit InaServer(ServerOptions options);
  ~InaServer();

  InaServer(const InaServer&) = delete;
  InaServer& operator=(const InaServer&) = delete;

  uint16_t port() const;
  void stop();
  ServerCounters counters() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One worker's connection to the service. Values handed to send_vector must
// be powers of two or zero (NAT8C-encodable after clipping).
class InaWorkerClient {
 public:
  InaWorkerClient(const std::string& host, uint16_t port, uint64_t session_id,
                  uint16_t worker_id, uint16_t n_workers, uint64_t d,
                  uint16_t chunk_elems = 256);
  ~InaWorkerClient();

  InaWorkerClient(const InaWorkerClient&) = delete;
  InaWorkerClient& operator=(const InaWorkerClient&) = delete;

  // Streams the vector as FRAMEs starting at base_chunk_index. Does not wait
  // for results, so every session member can send before anyone reads.
  void send_vector(const DenseVector& compressed, uint64_t base_chunk_index);

  // Receives the aggregated vector for the matching send.
  DenseVector receive_vector(uint64_t base_chunk_index);

  uint64_t chunks_per_vector() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace natcomp::ina
