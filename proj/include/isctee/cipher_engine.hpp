// Copyright 2026 The isc-tee-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Trivium stream cipher and the flash-to-DRAM page cipher built on it.
//
// Bit conventions: key/IV bit i is (bytes[i / 8] >> (i % 8)) & 1 and is
// loaded into state bit s_(i+1). Keystream bit t is written to byte t / 8,
// bit t % 8 (LSB first).

#ifndef ISCTEE_CIPHER_ENGINE_HPP_
#define ISCTEE_CIPHER_ENGINE_HPP_

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <set>
#include <utility>
#include <vector>

#include "isctee/flash.hpp"
#include "isctee/sim_core.hpp"

namespace isctee {

using Key80 = std::array<std::uint8_t, 10>;
using Iv80 = std::array<std::uint8_t, 10>;

// Produces 64 keystream bits per step. The three shift registers are kept
// in 128-bit words with register position k at bit 128 - k, so the bits a
// tap sees over the next 64 steps form one contiguous word.
class Trivium {
 public:
  static constexpr int kWarmupRounds = 1152;

  Trivium(const Key80& key, const Iv80& iv);

  std::uint64_t next_word();
  // out.size() must be a multiple of 8.
  void generate(std::span<std::uint8_t> out);

  // n_bits must be a multiple of 64.
  static std::vector<std::uint8_t> keystream(const Key80& key, const Iv80& iv,
                                             std::size_t n_bits);

 private:
  unsigned __int128 a_ = 0, b_ = 0, c_ = 0;
};

// 80-bit IV: PPA in bytes 0..3 and PRNG output in bytes 4..9, little-endian.
struct PageIv {
  static constexpr std::uint64_t kRandMask = (std::uint64_t{1} << 48) - 1;

  std::uint32_t ppa_part = 0;
  std::uint64_t rand_part = 0;

  Iv80 bytes() const;
  static PageIv from_bytes(const Iv80& b);
  bool operator==(const PageIv&) const = default;
};

struct CipherEngineConfig {
  Key80 key = {0x0f, 0x62, 0xb5, 0x08, 0x5b, 0xae, 0x01, 0x54, 0xa7, 0xfa};
  std::uint64_t seed = 1;
  std::uint32_t page_size = 4096;
  bool overlap = true;
  Nanos cycle_ns = 1;
  double energy_per_page_nj = 10.3;
  double area_fraction = 0.016;
};

struct EncryptedPage {
  Ppa ppa;
  std::vector<std::uint8_t> ciphertext;
  PageIv iv;
  Nanos cost = 0;
  double energy_nj = 0.0;
};

struct CipherStats {
  std::uint64_t pages = 0;
  std::uint64_t iv_redraws = 0;
  double energy_nj = 0.0;
};

class CipherEngine {
 public:
  // Everything that crosses the internal bus toward DRAM.
  using BusTap = std::function<void(std::span<const std::uint8_t>, const PageIv&)>;

  explicit CipherEngine(CipherEngineConfig config = {});

  const CipherEngineConfig& config() const { return config_; }

  EncryptedPage encrypt_page(Ppa ppa, std::span<const std::uint8_t> plaintext);
  std::vector<std::uint8_t> decrypt_page(const PageIv& iv,
                                         std::span<const std::uint8_t> ciphertext) const;

  // Extra latency the engine adds on top of the unencrypted transfer.
  Nanos page_cost() const;
  Nanos completion(Nanos plain_completion) const { return plain_completion + page_cost(); }

  // Page buffer: pages from the flash chips wait here in FIFO order.
  void enqueue(Ppa ppa, std::vector<std::uint8_t> page);
  std::optional<EncryptedPage> drain_one();
  std::size_t buffered() const { return buffer_.size(); }

  // Device reset: reseeds the PRNG and starts a new IV epoch.
  void reset(std::uint64_t seed);

  void set_bus_tap(BusTap tap) { tap_ = std::move(tap); }
  std::size_t issued_ivs() const { return issued_.size(); }
  const CipherStats& stats() const { return stats_; }

 private:
  CipherEngineConfig config_;
  SeededRng prng_;
  std::set<std::pair<std::uint32_t, std::uint64_t>> issued_;
  std::deque<std::pair<Ppa, std::vector<std::uint8_t>>> buffer_;
  BusTap tap_;
  CipherStats stats_;
};

}  // namespace isctee

#endif  // ISCTEE_CIPHER_ENGINE_HPP_
