// SPDX-License-Identifier: Apache-2.0
//
// jamloc: simulation and direction-finding toolkit for GNSS jammer localization
// Copyright (C) 2025 jamloc developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef JAMLOC_RNG_HPP
#define JAMLOC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

namespace jamloc
{

// Deterministic PRNG used throughout the toolkit. The standard library RNG
// adapters are implementation-defined, so reproducible datasets need an
// explicit generator: xoshiro256** seeded through splitmix64.

inline std::uint64_t splitmix64(std::uint64_t &state)
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stream seed for parallel synthesis: every (seed, index) pair gets a
// decorrelated stream, so snapshot order never affects the output.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index)
{
    std::uint64_t a = seed;
    std::uint64_t b = index ^ 0x632BE59BD9B4E019ULL;
    std::uint64_t first = splitmix64(a);
    b ^= first;
    return splitmix64(b);
}

class Rng
{
  public:
    explicit Rng(std::uint64_t seed = 0)
    {
        std::uint64_t sm = seed;
        for (auto &word : s_)
            word = splitmix64(sm);
        have_cached_gauss_ = false;
        cached_gauss_ = 0.0;
    }

    std::uint64_t next_u64()
    {
        const std::uint64_t result = rotl(s_[1] * 5ULL, 7) * 9ULL;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 significant bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller; second value of each pair is cached.
    double gaussian()
    {
        if (have_cached_gauss_)
        {
            have_cached_gauss_ = false;
            return cached_gauss_;
        }
        auto [z0, z1] = gaussian_pair();
        cached_gauss_ = z1;
        have_cached_gauss_ = true;
        return z0;
    }

    std::pair<double, double> gaussian_pair()
    {
        double u1 = 0.0;
        do
        {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    template <typename T> void shuffle(std::vector<T> &v)
    {
        for (std::size_t i = v.size(); i > 1; --i)
        {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
    bool have_cached_gauss_;
    double cached_gauss_;
};

} // namespace jamloc

#endif
