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

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "jamloc/rng.hpp"
#include "jamloc/spectral.hpp"

using namespace jamloc;

// Independent oracle: textbook O(n^2) DFT with its own twiddle table. Kept
// separate from the library implementation on purpose.
static std::vector<cplx> naive_dft(const std::vector<cplx> &x)
{
    const std::size_t n = x.size();
    std::vector<cplx> tw(n);
    for (std::size_t k = 0; k < n; ++k)
        tw[k] = std::polar(1.0, -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n));
    std::vector<cplx> out(n, cplx{0, 0});
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t m = 0; m < n; ++m)
            out[k] += x[m] * tw[(k * m) % n];
    return out;
}

static std::vector<cplx> random_signal(Rng &rng, std::size_t n)
{
    std::vector<cplx> x(n);
    for (auto &v : x)
        v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    return x;
}

static double rel_l2(const std::vector<cplx> &a, const std::vector<cplx> &b)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

TEST_CASE("dft of a delta is all ones")
{
    std::vector<cplx> x(64, cplx{0, 0});
    x[0] = 1.0;
    const auto X = dft(x);
    for (const auto &v : X)
        CHECK(std::abs(v - cplx{1.0, 0.0}) < 1e-12);
}

TEST_CASE("dft of a pure exponential peaks at its bin")
{
    const std::size_t n = 64;
    std::vector<cplx> x(n);
    for (std::size_t m = 0; m < n; ++m)
        x[m] = std::polar(1.0, 2.0 * kPi * 3.0 * static_cast<double>(m) / static_cast<double>(n));
    const auto X = dft(x);
    std::size_t argmax = 0;
    for (std::size_t k = 1; k < n; ++k)
        if (std::abs(X[k]) > std::abs(X[argmax]))
            argmax = k;
    CHECK(argmax == 3);
    CHECK(std::abs(X[3]) == Catch::Approx(64.0).epsilon(1e-12));
}

TEST_CASE("dft matches the naive oracle and satisfies Parseval")
{
    Rng rng(303);
    for (int trial = 0; trial < 40; ++trial)
    {
        const std::size_t n = 8 + rng.below(1024); // mix of power-of-two and general lengths
        const auto x = random_signal(rng, n);
        const auto fast = dft(x);
        const auto oracle = naive_dft(x);
        CHECK(rel_l2(fast, oracle) < 1e-9);

        double time_energy = 0.0, freq_energy = 0.0;
        for (const auto &v : x)
            time_energy += std::norm(v);
        for (const auto &v : fast)
            freq_energy += std::norm(v);
        CHECK(std::abs(time_energy - freq_energy / static_cast<double>(n)) <
              1e-9 * time_energy);
    }
}

TEST_CASE("idft inverts dft for random inputs up to n = 4096")
{
    Rng rng(7);
    for (std::size_t n : {8u, 64u, 100u, 1000u, 4096u})
    {
        const auto x = random_signal(rng, n);
        const auto back = idft(dft(x));
        CHECK(rel_l2(back, x) < 1e-9);
    }
}

TEST_CASE("stft frame-count formula holds for arbitrary shapes")
{
    Rng rng(51);
    for (int trial = 0; trial < 60; ++trial)
    {
        const std::size_t window = 1u << (3 + rng.below(6)); // 8 .. 256
        const std::size_t hop = 1 + rng.below(window);
        const std::size_t len = window + rng.below(4000);
        std::vector<std::vector<cplx>> chans(1, random_signal(rng, len));
        const auto sg = stft_spectrogram(chans, 1e6, 0.0, window, hop);
        CHECK(sg.frames == (len - window) / hop + 1);
        CHECK(sg.freq_bins == window);
    }
}

TEST_CASE("stft of all-zero input sits at the dB floor")
{
    std::vector<std::vector<cplx>> chans(2, std::vector<cplx>(2048, cplx{0, 0}));
    const auto sg = stft_spectrogram(chans, 1e6, 0.0, 512, 256);
    for (double v : sg.values)
        CHECK(v == kDbFloor);
}

TEST_CASE("stft rejects too-short input")
{
    std::vector<std::vector<cplx>> chans(1, std::vector<cplx>(100));
    CHECK_THROWS_AS(stft_spectrogram(chans, 1e6, 0.0, 512, 256), InsufficientDataError);
}

TEST_CASE("welch psd peaks at the tone bin and integrates to the variance")
{
    const double fs = 40.96e6;
    const std::size_t n = 32768;
    const double f0 = 3.2e6;
    Rng rng(99);

    SECTION("pure exponential")
    {
        std::vector<cplx> x(n);
        for (std::size_t m = 0; m < n; ++m)
            x[m] = std::polar(1.0, 2.0 * kPi * f0 * static_cast<double>(m) / fs);
        const auto p = welch_psd(x, fs);
        std::size_t argmax = 0;
        for (std::size_t k = 1; k < p.psd.size(); ++k)
            if (p.psd[k] > p.psd[argmax])
                argmax = k;
        // nearest bin to f0
        double best = 1e18;
        std::size_t want = 0;
        for (std::size_t k = 0; k < p.freqs.size(); ++k)
            if (std::abs(p.freqs[k] - f0) < best)
            {
                best = std::abs(p.freqs[k] - f0);
                want = k;
            }
        CHECK(argmax == want);
    }

    SECTION("white noise integrates to sigma^2 within 5 percent")
    {
        const double sigma2 = 2.0;
        std::vector<cplx> x(n);
        for (auto &v : x)
        {
            auto [re, im] = rng.gaussian_pair();
            v = std::sqrt(sigma2 / 2.0) * cplx{re, im};
        }
        const auto p = welch_psd(x, fs);
        double integrated = 0.0;
        for (double v : p.psd)
            integrated += v;
        integrated *= fs / static_cast<double>(p.psd.size());
        CHECK(integrated == Catch::Approx(sigma2).epsilon(0.05));
    }
}

TEST_CASE("welch averaging shrinks per-bin scatter by about sqrt(K)")
{
    // Monte Carlo oracle, 200 trials. With Hann windows at 50 percent overlap
    // adjacent periodograms are mildly correlated, which caps the reduction a
    // little below the independent-segment sqrt(K).
    const double fs = 1e6;
    const std::size_t n = 16384, seg = 1024, ovl = 512;
    const std::size_t k_segments = (n - seg) / (seg - ovl) + 1;
    const int trials = 200;

    std::vector<std::vector<double>> welch_draws;
    std::vector<std::vector<double>> single_draws;
    Rng rng(424242);
    for (int t = 0; t < trials; ++t)
    {
        std::vector<cplx> x(n);
        for (auto &v : x)
        {
            auto [re, im] = rng.gaussian_pair();
            v = cplx{re, im} / std::sqrt(2.0);
        }
        welch_draws.push_back(welch_psd(x, fs, seg, ovl).psd);
        single_draws.push_back(welch_psd({x.begin(), x.begin() + seg}, fs, seg, 0).psd);
    }

    const auto mean_bin_std = [&](const std::vector<std::vector<double>> &draws) {
        const std::size_t bins = draws[0].size();
        double acc = 0.0;
        for (std::size_t b = 0; b < bins; ++b)
        {
            double mean = 0.0;
            for (const auto &d : draws)
                mean += d[b];
            mean /= trials;
            double var = 0.0;
            for (const auto &d : draws)
                var += (d[b] - mean) * (d[b] - mean);
            acc += std::sqrt(var / (trials - 1));
        }
        return acc / static_cast<double>(bins);
    };

    const double ratio = mean_bin_std(single_draws) / mean_bin_std(welch_draws);
    const double root_k = std::sqrt(static_cast<double>(k_segments));
    CHECK(ratio > 0.70 * root_k);
    CHECK(ratio < 1.10 * root_k);
}

TEST_CASE("welch psd is invariant to a global phase rotation")
{
    Rng rng(8);
    std::vector<cplx> x(4096);
    for (auto &v : x)
        v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    auto rotated = x;
    const cplx ph = std::polar(1.0, 1.234);
    for (auto &v : rotated)
        v *= ph;
    const auto a = welch_psd(x, 1e6);
    const auto b = welch_psd(rotated, 1e6);
    for (std::size_t k = 0; k < a.psd.size(); ++k)
        CHECK(a.psd[k] == Catch::Approx(b.psd[k]).margin(1e-15));
}

TEST_CASE("cfo estimator recovers exact tones")
{
    const double fs = 40.96e6;
    std::vector<cplx> x(8192);
    for (std::size_t m = 0; m < x.size(); ++m)
        x[m] = std::polar(1.0, 2.0 * kPi * 1000.0 * static_cast<double>(m) / fs);
    const auto est = estimate_cfo(x, fs);
    CHECK(est.offset == Catch::Approx(1000.0).margin(1e-6));
    CHECK(est.confidence == Catch::Approx(1.0).epsilon(1e-12));

    std::vector<cplx> flat(100, cplx{0.7, 0.2});
    CHECK(estimate_cfo(flat, fs).offset == Catch::Approx(0.0).margin(1e-9));

    std::vector<cplx> zeros(100, cplx{0, 0});
    CHECK_THROWS_AS(estimate_cfo(zeros, fs), UndefinedCfoError);
}

TEST_CASE("cfo estimator is shift-equivariant")
{
    const double fs = 1e6;
    Rng rng(31);
    std::vector<cplx> x(20000);
    for (auto &v : x)
    {
        auto [re, im] = rng.gaussian_pair();
        v = cplx{re, im};
    }
    const double base = estimate_cfo(x, fs).offset;
    const double df = 1234.5;
    auto shifted = x;
    for (std::size_t m = 0; m < x.size(); ++m)
        shifted[m] *= std::polar(1.0, 2.0 * kPi * df * static_cast<double>(m) / fs);
    const double moved = estimate_cfo(shifted, fs).offset;
    CHECK(moved - base == Catch::Approx(df).margin(1e-3));
}

TEST_CASE("cfo accuracy on a noisy tone, Monte Carlo")
{
    // Lag-1 autocorrelation reaches roughly 120 Hz scatter at 20 dB SNR over
    // a full 122880-sample snapshot; the 300 Hz gate below is the oracle-run
    // 95th percentile with margin. At 50 dB the estimate lands within 100 Hz.
    const double fs = 40.96e6;
    const std::size_t n = 122880;
    const double f0 = 1000.0;

    const auto run = [&](double snr_db, double gate_hz) {
        int hits = 0;
        for (int seedno = 0; seedno < 100; ++seedno)
        {
            Rng rng(1000 + seedno);
            const double noise_sigma = std::pow(10.0, -snr_db / 20.0) / std::sqrt(2.0);
            std::vector<cplx> x(n);
            for (std::size_t m = 0; m < n; ++m)
            {
                auto [re, im] = rng.gaussian_pair();
                x[m] = std::polar(1.0, 2.0 * kPi * f0 * static_cast<double>(m) / fs) +
                       noise_sigma * cplx{re, im};
            }
            if (std::abs(estimate_cfo(x, fs).offset - f0) < gate_hz)
                ++hits;
        }
        return hits;
    };

    CHECK(run(20.0, 300.0) >= 95);
    CHECK(run(50.0, 100.0) >= 95);
}

TEST_CASE("csv exports are byte-stable and centered")
{
    Rng rng(5);
    std::vector<std::vector<cplx>> chans(1, std::vector<cplx>(1024));
    for (auto &v : chans[0])
        v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto sg = stft_spectrogram(chans, 1e6, 0.0, 256, 128);

    std::ostringstream a, b;
    spectrogram_to_csv(sg, 0, a);
    spectrogram_to_csv(sg, 0, b);
    CHECK(a.str() == b.str());
    CHECK(a.str().substr(0, 7) == "freq_hz");
    // first data row carries the most negative frequency
    const auto second_line = a.str().substr(a.str().find('\n') + 1);
    CHECK(second_line.substr(0, 7) == "-500000");
}
