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

// Reference models used only by tests. None of them shares code with the
// library: they are written from the algorithm descriptions, one bit or one
// row at a time.

#ifndef ISCTEE_TESTS_ORACLES_HPP_
#define ISCTEE_TESTS_ORACLES_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "isctee/cipher_engine.hpp"
#include "isctee/workloads.hpp"

namespace oracle {

// Textbook Trivium over a 288-entry bit array s[1..288]. Key bit i is bit
// (i % 8) of key byte i / 8 and lands in s[i + 1]; IV bit i lands in s[94 + i].
class BitSerialTrivium {
 public:
  BitSerialTrivium(const isctee::Key80& key, const isctee::Iv80& iv) {
    s_.fill(0);
    for (int i = 0; i < 80; ++i) {
      s_[1 + i] = (key[i / 8] >> (i % 8)) & 1;
      s_[94 + i] = (iv[i / 8] >> (i % 8)) & 1;
    }
    s_[286] = s_[287] = s_[288] = 1;
    for (int r = 0; r < 4 * 288; ++r) clock();
  }

  int next_bit() { return clock(); }

  std::vector<std::uint8_t> bytes(std::size_t n) {
    std::vector<std::uint8_t> out(n, 0);
    for (std::size_t i = 0; i < n * 8; ++i) out[i / 8] |= static_cast<std::uint8_t>(next_bit() << (i % 8));
    return out;
  }

 private:
  int clock() {
    int t1 = s_[66] ^ s_[93];
    int t2 = s_[162] ^ s_[177];
    int t3 = s_[243] ^ s_[288];
    const int z = t1 ^ t2 ^ t3;
    t1 ^= (s_[91] & s_[92]) ^ s_[171];
    t2 ^= (s_[175] & s_[176]) ^ s_[264];
    t3 ^= (s_[286] & s_[287]) ^ s_[69];
    for (int i = 93; i > 1; --i) s_[i] = s_[i - 1];
    s_[1] = static_cast<std::uint8_t>(t3);
    for (int i = 177; i > 94; --i) s_[i] = s_[i - 1];
    s_[94] = static_cast<std::uint8_t>(t1);
    for (int i = 288; i > 178; --i) s_[i] = s_[i - 1];
    s_[178] = static_cast<std::uint8_t>(t2);
    return z;
  }

  std::array<std::uint8_t, 289> s_{};
};

inline void put(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t fnv(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xFF;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Each workload's answer computed directly over the rows on the host.
inline std::vector<std::uint8_t> reference_answer(isctee::WorkloadKind kind,
                                                  const isctee::Dataset& d,
                                                  std::uint32_t divisor_bias = 1) {
  using isctee::WorkloadKind;
  const std::uint64_t basis = 0xcbf29ce484222325ULL;
  auto net = [](const isctee::Row& r) { return r.price * (100 - r.discount) / 100; };
  std::vector<std::uint8_t> out;
  switch (kind) {
    case WorkloadKind::kArithmetic: {
      std::uint64_t sum = 0;
      for (std::uint64_t i = 0; i < d.rows(); ++i) {
        const auto r = d.row(i);
        sum += r.price * r.quantity / (r.discount + divisor_bias) + r.discount;
      }
      put(out, sum);
      put(out, d.rows());
      break;
    }
    case WorkloadKind::kAggregate: {
      std::uint64_t sum = 0;
      for (std::uint64_t i = 0; i < d.rows(); ++i) sum += d.row(i).price;
      put(out, sum);
      put(out, d.rows());
      break;
    }
    case WorkloadKind::kFilter: {
      std::uint64_t n = 0, ks = 0, kx = 0;
      for (std::uint64_t i = 0; i < d.rows(); ++i) {
        const auto r = d.row(i);
        if (r.price < 200) {
          ++n;
          ks += r.key;
          kx ^= r.key;
        }
      }
      put(out, n);
      put(out, ks);
      put(out, kx);
      break;
    }
    case WorkloadKind::kTpchQ1: {
      std::map<int, std::array<std::uint64_t, 4>> g;
      for (int k = 0; k < 6; ++k) g[k] = {};
      for (std::uint64_t i = 0; i < d.rows(); ++i) {
        const auto r = d.row(i);
        if (r.ship_date > 2466) continue;
        auto& a = g[r.return_flag * 2 + r.line_status];
        a[0] += r.quantity;
        a[1] += r.price;
        a[2] += net(r);
        a[3] += 1;
      }
      for (const auto& [k, a] : g)
        for (std::uint64_t v : a) put(out, v);
      break;
    }
    case WorkloadKind::kTpchQ3: {
      std::vector<std::uint64_t> b(1024, 0);
      std::uint64_t n = 0;
      for (std::uint64_t i = 0; i < d.rows(); ++i) {
        const auto r = d.row(i);
        if (r.priority != 1 || r.ship_date < 1200 || r.ship_date >= 1236) continue;
        b[r.cust_key % 1024] += net(r);
        ++n;
      }
      std::uint64_t total = 0, best = 0, best_rev = 0, h = basis;
      for (std::uint64_t k = 0; k < b.size(); ++k) {
        total += b[k];
        h = fnv(h, b[k]);
        if (b[k] > best_rev) {
          best_rev = b[k];
          best = k;
        }
      }
      for (std::uint64_t v : {n, total, best, best_rev, h}) put(out, v);
      break;
    }
    case WorkloadKind::kTpchQ12: {
      std::uint64_t c[4] = {};
      for (std::uint64_t i = 0; i < d.rows(); ++i) {
        const auto r = d.row(i);
        if (r.ship_mode != 2 && r.ship_mode != 5) continue;
        if (r.commit_date >= r.receipt_date || r.ship_date >= r.commit_date) continue;
        if (r.receipt_date < 730 || r.receipt_date >= 1095) continue;
        ++c[(r.ship_mode == 2 ? 0 : 2) + (r.priority < 2 ? 0 : 1)];
      }
      for (std::uint64_t v : c) put(out, v);
      break;
    }
    case WorkloadKind::kTpchQ14: {
      std::uint64_t promo = 0, total = 0;
      for (std::uint64_t i = 0; i < d.rows(); ++i) {
        const auto r = d.row(i);
        if (r.ship_date < 1500 || r.ship_date >= 1530) continue;
        total += net(r);
        if (r.brand < 5) promo += net(r);
      }
      put(out, promo);
      put(out, total);
      break;
    }
    case WorkloadKind::kTpchQ19: {
      std::uint64_t rev = 0, n = 0;
      for (std::uint64_t i = 0; i < d.rows(); ++i) {
        const auto r = d.row(i);
        const bool hit =
            (r.brand == 12 && r.container < 10 && r.quantity >= 1 && r.quantity <= 11) ||
            (r.brand == 23 && r.container >= 10 && r.container < 20 && r.quantity >= 10 &&
             r.quantity <= 20) ||
            (r.brand == 24 && r.container >= 30 && r.quantity >= 20 && r.quantity <= 30);
        if (hit) {
          rev += net(r);
          ++n;
        }
      }
      put(out, rev);
      put(out, n);
      break;
    }
    case WorkloadKind::kTpcB: {
      std::vector<std::uint64_t> bal(64, 0);
      for (std::uint64_t g = 0; g < d.rows(); g += 16) {
        std::uint64_t delta = 0;
        for (std::uint64_t i = g; i < std::min<std::uint64_t>(g + 16, d.rows()); ++i)
          delta += static_cast<std::uint64_t>(d.row(i).quantity) - 25;
        bal[d.row(g).tokens[2] % 64] += delta;
      }
      for (std::uint64_t v : bal) put(out, v);
      break;
    }
    case WorkloadKind::kTpcC: {
      std::vector<std::uint64_t> stock(4096, 0);
      std::uint64_t orders = 0;
      for (std::uint64_t g = 0; g < d.rows(); g += 8) {
        std::uint64_t q = 0;
        for (std::uint64_t i = g; i < std::min<std::uint64_t>(g + 8, d.rows()); ++i)
          q += d.row(i).quantity;
        stock[d.row(g).tokens[1] % 4096] += q;
        ++orders;
      }
      std::uint64_t total = 0, h = basis;
      for (std::uint64_t v : stock) {
        total += v;
        h = fnv(h, v);
      }
      for (std::uint64_t v : {total, h, orders}) put(out, v);
      break;
    }
    case WorkloadKind::kWordcount: {
      std::map<std::uint32_t, std::uint64_t> counts;
      for (std::uint64_t i = 0; i < d.rows(); ++i)
        for (std::uint32_t t : d.row(i).tokens) ++counts[t % isctee::kWordVocabulary];
      std::uint64_t h = basis, best = 0, best_count = 0;
      for (std::uint32_t w = 0; w < isctee::kWordVocabulary; ++w) {
        const auto it = counts.find(w);
        const std::uint64_t v = it == counts.end() ? 0 : it->second;
        h = fnv(h, v);
        if (v > best_count) {
          best_count = v;
          best = w;
        }
      }
      for (std::uint64_t v : {4 * d.rows(), h, best, best_count}) put(out, v);
      break;
    }
  }
  return out;
}

}  // namespace oracle

#endif  // ISCTEE_TESTS_ORACLES_HPP_
