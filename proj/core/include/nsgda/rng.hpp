// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>

#include <nlohmann/json.hpp>

namespace nsgda {

/// Serializable snapshot of an RngStream.
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::uint64_t draws = 0;
  bool has_spare = false;
  double spare = 0.0;
};

void to_json(nlohmann::json& j, const RngState& s);
void from_json(const nlohmann::json& j, RngState& s);

/*!
 * Counter-based random stream (Philox4x32-10).
 *
 * The 64-bit seed is the Philox key; the 128-bit counter holds the block index
 * in its low half and the stream id in its high half, so every (seed, stream_id)
 * pair addresses a disjoint sequence. Any block can be computed without
 * generating its predecessors, which makes the stream trivially restorable
 * from an RngState.
 *
 * A stream is single-owner mutable state: concurrent consumers must split().
 */
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0) noexcept;
  explicit RngStream(const RngState& state) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept;

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Child stream with the same key and a derived stream id.
  [[nodiscard]] RngStream split(std::uint64_t child) const noexcept;

  [[nodiscard]] RngState state() const noexcept;
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Raw Philox4x32-10 bijection, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                                 std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t draws_ = 0;
  std::array<std::uint64_t, 2> block_{};
  bool block_valid_ = false;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nsgda
