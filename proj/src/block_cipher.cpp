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

#include "isctee/block_cipher.hpp"

#include <openssl/evp.h>

#include <stdexcept>
#include <vector>

namespace isctee {

struct BlockCipher::Impl {
  EVP_CIPHER_CTX* ctx = nullptr;
  EVP_CIPHER_CTX* cbc = nullptr;
  ~Impl() {
    EVP_CIPHER_CTX_free(ctx);
    EVP_CIPHER_CTX_free(cbc);
  }
};

BlockCipher::BlockCipher(const Key128& key) : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_CIPHER_CTX_new();
  if (impl_->ctx == nullptr ||
      EVP_EncryptInit_ex(impl_->ctx, EVP_aes_128_ecb(), nullptr, key.data(),
                         nullptr) != 1)
    throw std::runtime_error("AES-128 initialisation failed");
  EVP_CIPHER_CTX_set_padding(impl_->ctx, 0);
  impl_->cbc = EVP_CIPHER_CTX_new();
  if (impl_->cbc == nullptr ||
      EVP_EncryptInit_ex(impl_->cbc, EVP_aes_128_cbc(), nullptr, key.data(),
                         nullptr) != 1)
    throw std::runtime_error("AES-128 initialisation failed");
  EVP_CIPHER_CTX_set_padding(impl_->cbc, 0);
}

BlockCipher::~BlockCipher() = default;
BlockCipher::BlockCipher(BlockCipher&&) noexcept = default;
BlockCipher& BlockCipher::operator=(BlockCipher&&) noexcept = default;

void BlockCipher::encrypt_blocks(std::span<const std::uint8_t> in,
                                 std::span<std::uint8_t> out) const {
  if (in.size() != out.size() || in.size() % 16 != 0)
    throw std::invalid_argument("block cipher input must be whole blocks");
  int len = 0;
  if (EVP_EncryptUpdate(impl_->ctx, out.data(), &len, in.data(),
                        static_cast<int>(in.size())) != 1)
    throw std::runtime_error("AES-128 encryption failed");
}

std::uint64_t BlockCipher::cbc_mac64(std::span<const std::uint8_t> message) const {
  if (message.size() % 16 != 0 || message.empty())
    throw std::invalid_argument("CBC-MAC input must be whole blocks");
  static constexpr Block128 kZeroIv{};
  std::uint8_t buf[256];
  std::vector<std::uint8_t> big;
  std::uint8_t* out = buf;
  if (message.size() > sizeof buf) {
    big.resize(message.size());
    out = big.data();
  }
  int len = 0;
  if (EVP_EncryptInit_ex(impl_->cbc, nullptr, nullptr, nullptr, kZeroIv.data()) != 1 ||
      EVP_EncryptUpdate(impl_->cbc, out, &len, message.data(),
                        static_cast<int>(message.size())) != 1)
    throw std::runtime_error("AES-128 CBC-MAC failed");
  const std::uint8_t* state = out + message.size() - 16;
  std::uint64_t tag = 0;
  for (int i = 7; i >= 0; --i) tag = (tag << 8) | state[i];
  return tag;
}

}  // namespace isctee
