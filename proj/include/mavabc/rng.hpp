/*
   Copyright 2026 The mavabc Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace mavabc {

/// SplitMix64 finaliser (Steele, Lea & Flood). A bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/*
 * Counter-based stream split: the seed for stream `coords` under `root` is a
 * SplitMix64 fold over the root and each coordinate in turn. Derivation is
 * stateless, so any replicate or experiment cell can be regenerated in
 * isolation and in any order.
 */
constexpr std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> coords)
{
    std::uint64_t h = splitmix64(root);
    for (auto c : coords) {
        h = splitmix64(h ^ splitmix64(c));
    }
    return h;
}

inline std::uint64_t double_bits(double value) { return std::bit_cast<std::uint64_t>(value); }

/// One random stream. Not shareable across threads; give each worker its own.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Stream number `counter` under root seed `root`.
    static Rng stream(std::uint64_t root, std::uint64_t counter)
    {
        return Rng(derive_seed(root, {counter}));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n)
    {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }

    double normal() { return normal_(engine_); }

    int spin() { return (engine_() >> 63) ? 1 : -1; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace mavabc
