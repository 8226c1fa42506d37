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

#include "isctee/cipher_engine.hpp"

#include "isctee/errors.hpp"

namespace isctee {
namespace {

using u128 = unsigned __int128;

constexpr int kLenA = 93;
constexpr int kLenB = 84;
constexpr int kLenC = 111;

constexpr u128 top_mask(int len) { return ~((u128{1} << (128 - len)) - 1); }

// Bits of register positions p, p-1, ..., p-63 in bits 0..63.
inline std::uint64_t tap(u128 r, int p) { return static_cast<std::uint64_t>(r >> (128 - p)); }

inline void set_position(u128& r, int k) { r |= u128{1} << (128 - k); }

inline void shift_in(u128& r, std::uint64_t word, int len) {
  r = ((r >> 64) | (u128{word} << 64)) & top_mask(len);
}

}  // namespace

Trivium::Trivium(const Key80& key, const Iv80& iv) {
  for (int i = 0; i < 80; ++i) {
    if ((key[i / 8] >> (i % 8)) & 1) set_position(a_, i + 1);
    if ((iv[i / 8] >> (i % 8)) & 1) set_position(b_, i + 1);
  }
  set_position(c_, 109);
  set_position(c_, 110);
  set_position(c_, 111);
  for (int r = 0; r < kWarmupRounds / 64; ++r) next_word();
}

std::uint64_t Trivium::next_word() {
  const std::uint64_t ta = tap(a_, 66) ^ tap(a_, 93);
  const std::uint64_t tb = tap(b_, 69) ^ tap(b_, 84);
  const std::uint64_t tc = tap(c_, 66) ^ tap(c_, 111);
  const std::uint64_t z = ta ^ tb ^ tc;
  const std::uint64_t new_a = tc ^ (tap(c_, 109) & tap(c_, 110)) ^ tap(a_, 69);
  const std::uint64_t new_b = ta ^ (tap(a_, 91) & tap(a_, 92)) ^ tap(b_, 78);
  const std::uint64_t new_c = tb ^ (tap(b_, 82) & tap(b_, 83)) ^ tap(c_, 87);
  shift_in(a_, new_a, kLenA);
  shift_in(b_, new_b, kLenB);
  shift_in(c_, new_c, kLenC);
  return z;
}

void Trivium::generate(std::span<std::uint8_t> out) {
  if (out.size() % 8 != 0)
    throw SimError(ErrorCode::kBadLength, "keystream length must be whole 64-bit words");
  for (std::size_t off = 0; off < out.size(); off += 8) {
    const std::uint64_t w = next_word();
    for (int i = 0; i < 8; ++i) out[off + i] = static_cast<std::uint8_t>(w >> (8 * i));
  }
}

std::vector<std::uint8_t> Trivium::keystream(const Key80& key, const Iv80& iv,
                                             std::size_t n_bits) {
  if (n_bits % 64 != 0)
    throw SimError(ErrorCode::kBadLength, "keystream length must be whole 64-bit words");
  std::vector<std::uint8_t> out(n_bits / 8);
  Trivium t(key, iv);
  t.generate(out);
  return out;
}

Iv80 PageIv::bytes() const {
  Iv80 b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(ppa_part >> (8 * i));
  for (int i = 0; i < 6; ++i) b[4 + i] = static_cast<std::uint8_t>(rand_part >> (8 * i));
  return b;
}

PageIv PageIv::from_bytes(const Iv80& b) {
  PageIv iv;
  for (int i = 3; i >= 0; --i) iv.ppa_part = (iv.ppa_part << 8) | b[i];
  for (int i = 5; i >= 0; --i) iv.rand_part = (iv.rand_part << 8) | b[4 + i];
  return iv;
}

CipherEngine::CipherEngine(CipherEngineConfig config)
    : config_(config), prng_(config.seed) {
  if (config_.page_size == 0 || config_.page_size % 8 != 0)
    throw SimError(ErrorCode::kConfigError, "cipher page size must be a multiple of 8");
}

Nanos CipherEngine::page_cost() const {
  if (config_.overlap) return config_.cycle_ns;
  return config_.cycle_ns * static_cast<Nanos>(config_.page_size * 8 / 64);
}

EncryptedPage CipherEngine::encrypt_page(Ppa ppa, std::span<const std::uint8_t> plaintext) {
  if (plaintext.size() != config_.page_size)
    throw SimError(ErrorCode::kBadLength, "encrypt_page expects exactly one page");
  EncryptedPage out;
  out.ppa = ppa;
  out.iv.ppa_part = ppa.value;
  for (;;) {
    out.iv.rand_part = prng_.next() & PageIv::kRandMask;
    if (issued_.emplace(out.iv.ppa_part, out.iv.rand_part).second) break;
    ++stats_.iv_redraws;
  }
  out.ciphertext.resize(plaintext.size());
  Trivium t(config_.key, out.iv.bytes());
  t.generate(out.ciphertext);
  for (std::size_t i = 0; i < plaintext.size(); ++i) out.ciphertext[i] ^= plaintext[i];
  out.cost = page_cost();
  out.energy_nj = config_.energy_per_page_nj * (static_cast<double>(plaintext.size()) / 4096.0);
  ++stats_.pages;
  stats_.energy_nj += out.energy_nj;
  if (tap_) tap_(out.ciphertext, out.iv);
  return out;
}

std::vector<std::uint8_t> CipherEngine::decrypt_page(
    const PageIv& iv, std::span<const std::uint8_t> ciphertext) const {
  if (ciphertext.size() != config_.page_size)
    throw SimError(ErrorCode::kBadLength, "decrypt_page expects exactly one page");
  std::vector<std::uint8_t> out(ciphertext.size());
  Trivium t(config_.key, iv.bytes());
  t.generate(out);
  for (std::size_t i = 0; i < ciphertext.size(); ++i) out[i] ^= ciphertext[i];
  return out;
}

void CipherEngine::enqueue(Ppa ppa, std::vector<std::uint8_t> page) {
  if (page.size() != config_.page_size)
    throw SimError(ErrorCode::kBadLength, "page buffer accepts whole pages only");
  buffer_.emplace_back(ppa, std::move(page));
}

std::optional<EncryptedPage> CipherEngine::drain_one() {
  if (buffer_.empty()) return std::nullopt;
  auto [ppa, page] = std::move(buffer_.front());
  buffer_.pop_front();
  return encrypt_page(ppa, page);
}

void CipherEngine::reset(std::uint64_t seed) {
  prng_.reseed(seed);
  issued_.clear();
  buffer_.clear();
}

}  // namespace isctee
