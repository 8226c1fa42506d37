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

#ifndef ISCTEE_BLOCK_CIPHER_HPP_
#define ISCTEE_BLOCK_CIPHER_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <span>

namespace isctee {

using Key128 = std::array<std::uint8_t, 16>;
using Block128 = std::array<std::uint8_t, 16>;

// AES-128 in raw block mode, backed by OpenSSL. Not copyable; one instance
// per key.
class BlockCipher {
 public:
  explicit BlockCipher(const Key128& key);
  ~BlockCipher();
  BlockCipher(const BlockCipher&) = delete;
  BlockCipher& operator=(const BlockCipher&) = delete;
  BlockCipher(BlockCipher&&) noexcept;
  BlockCipher& operator=(BlockCipher&&) noexcept;

  // Encrypts whole 16-byte blocks; in.size() == out.size(), multiple of 16.
  void encrypt_blocks(std::span<const std::uint8_t> in,
                      std::span<std::uint8_t> out) const;

  // CBC-MAC with a zero IV over whole 16-byte blocks, truncated to the first
  // 64 bits of the final block (little-endian).
  std::uint64_t cbc_mac64(std::span<const std::uint8_t> message) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace isctee

#endif  // ISCTEE_BLOCK_CIPHER_HPP_
