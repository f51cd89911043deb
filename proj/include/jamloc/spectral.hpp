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

#ifndef JAMLOC_SPECTRAL_HPP
#define JAMLOC_SPECTRAL_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <vector>

#include "jamloc/errors.hpp"
#include "jamloc/geometry.hpp"

namespace jamloc
{

using cplx = std::complex<double>;

constexpr double kDbFloor = -300.0; // finite floor for magnitude-squared in dB

inline double power_db(double magnitude_squared)
{
    if (magnitude_squared <= 0.0)
        return kDbFloor;
    return std::max(kDbFloor, 10.0 * std::log10(magnitude_squared));
}

namespace detail
{

inline void fft_radix2_inplace(std::vector<cplx> &a, bool inverse)
{
    const std::size_t n = a.size();
    // bit reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i)
    {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1)
    {
        const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const std::size_t half = len >> 1;
        // fresh twiddles per butterfly column keep round-off at the 1e-15 level
        std::vector<cplx> w(half);
        for (std::size_t k = 0; k < half; ++k)
            w[k] = std::polar(1.0, ang * static_cast<double>(k));
        for (std::size_t i = 0; i < n; i += len)
            for (std::size_t k = 0; k < half; ++k)
            {
                const cplx u = a[i + k];
                const cplx v = a[i + k + half] * w[k];
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
    }
}

inline std::vector<cplx> dft_direct(const std::vector<cplx> &x, bool inverse)
{
    const std::size_t n = x.size();
    const double sign = inverse ? 2.0 : -2.0;
    std::vector<cplx> tw(n);
    for (std::size_t k = 0; k < n; ++k)
        tw[k] = std::polar(1.0, sign * kPi * static_cast<double>(k) / static_cast<double>(n));
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        cplx acc{0.0, 0.0};
        std::size_t idx = 0;
        for (std::size_t m = 0; m < n; ++m)
        {
            acc += x[m] * tw[idx];
            idx += k;
            if (idx >= n)
                idx -= n;
        }
        out[k] = acc;
    }
    return out;
}

} // namespace detail

// Forward transform, X[k] = sum_m x[m] exp(-j 2 pi k m / n). Radix-2 FFT for
// power-of-two lengths, direct evaluation otherwise.
inline std::vector<cplx> dft(const std::vector<cplx> &x)
{
    if (x.empty())
        throw InsufficientDataError("dft requires at least one sample");
    if (std::has_single_bit(x.size()))
    {
        std::vector<cplx> a = x;
        detail::fft_radix2_inplace(a, false);
        return a;
    }
    return detail::dft_direct(x, false);
}

// Inverse transform with 1/n normalization.
inline std::vector<cplx> idft(const std::vector<cplx> &x)
{
    if (x.empty())
        throw InsufficientDataError("idft requires at least one sample");
    std::vector<cplx> a;
    if (std::has_single_bit(x.size()))
    {
        a = x;
        detail::fft_radix2_inplace(a, true);
    }
    else
    {
        a = detail::dft_direct(x, true);
    }
    const double inv = 1.0 / static_cast<double>(a.size());
    for (auto &v : a)
        v *= inv;
    return a;
}

// Frequency of two-sided FFT bin b (length n): DC first, then positive
// frequencies, then negative. For even n the Nyquist bin counts as negative.
inline double bin_frequency_hz(std::size_t b, std::size_t n, double sample_rate)
{
    const double idx = (b < (n + 1) / 2) ? static_cast<double>(b)
                                         : static_cast<double>(b) - static_cast<double>(n);
    return idx * sample_rate / static_cast<double>(n);
}

// Row order that lists bins from most negative to most positive frequency.
inline std::vector<std::size_t> centered_bin_order(std::size_t n)
{
    std::vector<std::size_t> order(n);
    const std::size_t start = (n + 1) / 2;
    for (std::size_t i = 0; i < n; ++i)
        order[i] = (start + i) % n;
    return order;
}

// Periodic Hann window.
inline std::vector<double> hann_window(std::size_t n)
{
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n)));
    return w;
}

// Per-channel time-frequency magnitude map. Bins are in two-sided FFT order
// (DC, positive, negative); values are magnitude-squared in dB.
struct Spectrogram
{
    std::size_t channels = 0;
    std::size_t freq_bins = 0;
    std::size_t frames = 0;
    std::vector<double> values; // [channel][bin][frame]
    double bin_step_hz = 0.0;
    double frame_step_s = 0.0;
    double first_frame_time_s = 0.0;

    double &at(std::size_t c, std::size_t b, std::size_t f)
    {
        return values[(c * freq_bins + b) * frames + f];
    }
    double at(std::size_t c, std::size_t b, std::size_t f) const
    {
        return values[(c * freq_bins + b) * frames + f];
    }

    static std::size_t frame_count(std::size_t len, std::size_t window, std::size_t hop)
    {
        return (len - window) / hop + 1;
    }
};

// Multichannel STFT of complex baseband channels. Each frame is a full
// two-sided windowed FFT of `window_len` samples advanced by `hop`.
inline Spectrogram stft_spectrogram(const std::vector<std::vector<cplx>> &channels,
                                    double sample_rate, double t0 = 0.0,
                                    std::size_t window_len = 512, std::size_t hop = 256)
{
    if (channels.empty())
        throw InsufficientDataError("stft_spectrogram requires at least one channel");
    if (window_len == 0 || hop == 0)
        throw ConfigError("stft window_len and hop must be positive");
    const std::size_t len = channels[0].size();
    for (const auto &ch : channels)
        if (ch.size() != len)
            throw ShapeError("stft channels must share one length");
    if (len < window_len)
        throw InsufficientDataError("stft input shorter than the analysis window");

    Spectrogram sg;
    sg.channels = channels.size();
    sg.freq_bins = window_len;
    sg.frames = Spectrogram::frame_count(len, window_len, hop);
    sg.values.resize(sg.channels * sg.freq_bins * sg.frames);
    sg.bin_step_hz = sample_rate / static_cast<double>(window_len);
    sg.frame_step_s = static_cast<double>(hop) / sample_rate;
    sg.first_frame_time_s = t0;

    const auto w = hann_window(window_len);
    std::vector<cplx> frame(window_len);
    for (std::size_t c = 0; c < sg.channels; ++c)
        for (std::size_t f = 0; f < sg.frames; ++f)
        {
            const std::size_t start = f * hop;
            for (std::size_t i = 0; i < window_len; ++i)
                frame[i] = channels[c][start + i] * w[i];
            detail::fft_radix2_inplace(frame, false);
            for (std::size_t b = 0; b < window_len; ++b)
                sg.at(c, b, f) = power_db(std::norm(frame[b]));
        }
    return sg;
}

struct WelchPsd
{
    std::vector<double> freqs; // Hz, two-sided FFT order
    std::vector<double> psd;   // power per Hz
    std::size_t segment_len = 0;
    std::size_t overlap = 0;
    std::size_t segments = 0;
};

// Averaged windowed periodograms, normalized so the integrated PSD matches
// the signal variance (sum(psd) * fs / n == mean |x|^2).
inline WelchPsd welch_psd(const std::vector<cplx> &x, double sample_rate,
                          std::size_t segment_len = 1024, std::size_t overlap = 512)
{
    if (segment_len == 0 || overlap >= segment_len)
        throw ConfigError("welch overlap must be smaller than segment_len");
    if (x.size() < segment_len)
        throw InsufficientDataError("welch input shorter than one segment");

    const std::size_t hop = segment_len - overlap;
    const std::size_t n_seg = (x.size() - segment_len) / hop + 1;
    const auto w = hann_window(segment_len);
    double window_power = 0.0;
    for (double v : w)
        window_power += v * v;

    WelchPsd out;
    out.segment_len = segment_len;
    out.overlap = overlap;
    out.segments = n_seg;
    out.psd.assign(segment_len, 0.0);
    out.freqs.resize(segment_len);
    for (std::size_t k = 0; k < segment_len; ++k)
        out.freqs[k] = bin_frequency_hz(k, segment_len, sample_rate);

    std::vector<cplx> seg(segment_len);
    for (std::size_t s = 0; s < n_seg; ++s)
    {
        const std::size_t start = s * hop;
        for (std::size_t i = 0; i < segment_len; ++i)
            seg[i] = x[start + i] * w[i];
        detail::fft_radix2_inplace(seg, false);
        for (std::size_t k = 0; k < segment_len; ++k)
            out.psd[k] += std::norm(seg[k]);
    }
    const double scale = 1.0 / (static_cast<double>(n_seg) * sample_rate * window_power);
    for (auto &v : out.psd)
        v *= scale;
    return out;
}

struct CfoEstimate
{
    double offset = 0.0;     // Hz
    double confidence = 0.0; // [0, 1]
};

// Lag-1 autocorrelation frequency estimate:
// offset = fs / (2 pi) * arg(sum x[m+1] conj(x[m])).
inline CfoEstimate estimate_cfo(const std::vector<cplx> &x, double sample_rate)
{
    if (x.size() < 2)
        throw InsufficientDataError("estimate_cfo needs at least two samples");
    cplx acc{0.0, 0.0};
    double mag_sum = 0.0;
    for (std::size_t m = 0; m + 1 < x.size(); ++m)
    {
        acc += x[m + 1] * std::conj(x[m]);
        mag_sum += std::abs(x[m + 1]) * std::abs(x[m]);
    }
    if (mag_sum == 0.0)
        throw UndefinedCfoError("all-zero input has no carrier offset");
    CfoEstimate est;
    est.offset = sample_rate / (2.0 * kPi) * std::arg(acc);
    est.confidence = std::abs(acc) / mag_sum;
    return est;
}

// CSV export with axis headers; bins re-centered to -fs/2 .. fs/2 for display.
inline void spectrogram_to_csv(const Spectrogram &sg, std::size_t channel, std::ostream &os)
{
    if (channel >= sg.channels)
        throw BoundsError("spectrogram channel out of range");
    const std::size_t n = sg.freq_bins;
    const auto order = centered_bin_order(n);
    char buf[64];
    os << "freq_hz";
    for (std::size_t f = 0; f < sg.frames; ++f)
    {
        std::snprintf(buf, sizeof buf, ",%.9g", sg.first_frame_time_s + f * sg.frame_step_s);
        os << buf;
    }
    os << "\n";
    for (std::size_t b : order)
    {
        std::snprintf(buf, sizeof buf, "%.9g",
                      bin_frequency_hz(b, n, sg.bin_step_hz * static_cast<double>(n)));
        os << buf;
        for (std::size_t f = 0; f < sg.frames; ++f)
        {
            std::snprintf(buf, sizeof buf, ",%.9g", sg.at(channel, b, f));
            os << buf;
        }
        os << "\n";
    }
}

inline void welch_to_csv(const WelchPsd &p, std::ostream &os)
{
    char buf[80];
    os << "freq_hz,psd\n";
    for (std::size_t b : centered_bin_order(p.freqs.size()))
    {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", p.freqs[b], p.psd[b]);
        os << buf;
    }
}

} // namespace jamloc

#endif
