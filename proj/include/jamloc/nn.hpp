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

#ifndef JAMLOC_NN_HPP
#define JAMLOC_NN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "jamloc/errors.hpp"
#include "jamloc/rng.hpp"

namespace jamloc::nn
{

struct Tensor
{
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s))
    {
        std::size_t n = 1;
        for (std::size_t d : shape)
            n *= d;
        data.assign(n, 0.0);
    }

    std::size_t size() const { return data.size(); }

    void fill_zero() { std::fill(data.begin(), data.end(), 0.0); }

    // Xavier-uniform initialization for a weight with the given fan pair.
    void init_xavier(Rng &rng, std::size_t fan_in, std::size_t fan_out)
    {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (auto &v : data)
            v = rng.uniform(-bound, bound);
    }
};

// ---- dense -----------------------------------------------------------
// y[b,o] = sum_i x[b,i] w[i,o] + bias[o]

inline void dense_forward(const std::vector<double> &x, std::size_t batch, std::size_t in_dim,
                          const Tensor &w, const Tensor &bias, std::vector<double> &y)
{
    const std::size_t out_dim = bias.size();
    y.assign(batch * out_dim, 0.0);
    for (std::size_t b = 0; b < batch; ++b)
    {
        double *yb = y.data() + b * out_dim;
        for (std::size_t o = 0; o < out_dim; ++o)
            yb[o] = bias.data[o];
        const double *xb = x.data() + b * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i)
        {
            const double xv = xb[i];
            if (xv == 0.0)
                continue;
            const double *wrow = w.data.data() + i * out_dim;
            for (std::size_t o = 0; o < out_dim; ++o)
                yb[o] += xv * wrow[o];
        }
    }
}

inline void dense_backward(const std::vector<double> &x, std::size_t batch, std::size_t in_dim,
                           const Tensor &w, const std::vector<double> &dy, Tensor &dw,
                           Tensor &dbias, std::vector<double> &dx)
{
    const std::size_t out_dim = dbias.size();
    dx.assign(batch * in_dim, 0.0);
    for (std::size_t b = 0; b < batch; ++b)
    {
        const double *dyb = dy.data() + b * out_dim;
        const double *xb = x.data() + b * in_dim;
        for (std::size_t o = 0; o < out_dim; ++o)
            dbias.data[o] += dyb[o];
        double *dxb = dx.data() + b * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i)
        {
            const double *wrow = w.data.data() + i * out_dim;
            double *dwrow = dw.data.data() + i * out_dim;
            const double xv = xb[i];
            double acc = 0.0;
            for (std::size_t o = 0; o < out_dim; ++o)
            {
                acc += dyb[o] * wrow[o];
                dwrow[o] += xv * dyb[o];
            }
            dxb[i] = acc;
        }
    }
}

// ---- 1-d convolution -------------------------------------------------
// x[b, c_in, l], w[c_out, c_in, k], stride s
// y[b, c_out, lo] = bias[c_out] + sum_{ci,t} x[b, ci, lo*s + t] w[c_out, ci, t]

inline std::size_t conv1d_out_len(std::size_t len, std::size_t kernel, std::size_t stride)
{
    if (len < kernel)
        throw ShapeError("conv1d input shorter than the kernel");
    return (len - kernel) / stride + 1;
}

inline void conv1d_forward(const std::vector<double> &x, std::size_t batch, std::size_t c_in,
                           std::size_t len, const Tensor &w, const Tensor &bias,
                           std::size_t stride, std::vector<double> &y)
{
    const std::size_t c_out = bias.size();
    const std::size_t kernel = w.shape[2];
    const std::size_t lo = conv1d_out_len(len, kernel, stride);
    y.assign(batch * c_out * lo, 0.0);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t co = 0; co < c_out; ++co)
        {
            double *yp = y.data() + (b * c_out + co) * lo;
            for (std::size_t p = 0; p < lo; ++p)
                yp[p] = bias.data[co];
            for (std::size_t ci = 0; ci < c_in; ++ci)
            {
                const double *xp = x.data() + (b * c_in + ci) * len;
                const double *wp = w.data.data() + (co * c_in + ci) * kernel;
                for (std::size_t p = 0; p < lo; ++p)
                {
                    const double *xs = xp + p * stride;
                    double acc = 0.0;
                    for (std::size_t t = 0; t < kernel; ++t)
                        acc += xs[t] * wp[t];
                    yp[p] += acc;
                }
            }
        }
}

inline void conv1d_backward(const std::vector<double> &x, std::size_t batch, std::size_t c_in,
                            std::size_t len, const Tensor &w, std::size_t stride,
                            const std::vector<double> &dy, Tensor &dw, Tensor &dbias,
                            std::vector<double> &dx)
{
    const std::size_t c_out = dbias.size();
    const std::size_t kernel = w.shape[2];
    const std::size_t lo = conv1d_out_len(len, kernel, stride);
    dx.assign(batch * c_in * len, 0.0);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t co = 0; co < c_out; ++co)
        {
            const double *dyp = dy.data() + (b * c_out + co) * lo;
            for (std::size_t p = 0; p < lo; ++p)
                dbias.data[co] += dyp[p];
            for (std::size_t ci = 0; ci < c_in; ++ci)
            {
                const double *xp = x.data() + (b * c_in + ci) * len;
                double *dxp = dx.data() + (b * c_in + ci) * len;
                const double *wp = w.data.data() + (co * c_in + ci) * kernel;
                double *dwp = dw.data.data() + (co * c_in + ci) * kernel;
                for (std::size_t p = 0; p < lo; ++p)
                {
                    const double g = dyp[p];
                    if (g == 0.0)
                        continue;
                    const std::size_t base = p * stride;
                    for (std::size_t t = 0; t < kernel; ++t)
                    {
                        dwp[t] += xp[base + t] * g;
                        dxp[base + t] += wp[t] * g;
                    }
                }
            }
        }
}

// ---- activations -----------------------------------------------------

inline void relu_forward(std::vector<double> &x)
{
    for (auto &v : x)
        v = v > 0.0 ? v : 0.0;
}

// dx = dy where the forward OUTPUT was positive (subgradient 0 at the kink)
inline void relu_backward(const std::vector<double> &y, std::vector<double> &dy)
{
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] <= 0.0)
            dy[i] = 0.0;
}

inline void tanh_forward(std::vector<double> &x)
{
    for (auto &v : x)
        v = std::tanh(v);
}

inline void tanh_backward(const std::vector<double> &y, std::vector<double> &dy)
{
    for (std::size_t i = 0; i < y.size(); ++i)
        dy[i] *= (1.0 - y[i] * y[i]);
}

// ---- dropout ---------------------------------------------------------
// Inverted dropout: the mask holds 0 or 1/(1-p); identity when not training.

inline std::vector<double> dropout_mask(std::size_t n, double p, Rng &rng)
{
    std::vector<double> mask(n, 1.0);
    if (p <= 0.0)
        return mask;
    const double keep = 1.0 - p;
    for (auto &m : mask)
        m = rng.uniform() < keep ? 1.0 / keep : 0.0;
    return mask;
}

inline void apply_mask(std::vector<double> &x, const std::vector<double> &mask)
{
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] *= mask[i];
}

// ---- pooling ---------------------------------------------------------
// global average over the length axis of x[b, c, l]

inline void gap_forward(const std::vector<double> &x, std::size_t batch, std::size_t channels,
                        std::size_t len, std::vector<double> &y)
{
    y.assign(batch * channels, 0.0);
    const double inv = 1.0 / static_cast<double>(len);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < channels; ++c)
        {
            const double *xp = x.data() + (b * channels + c) * len;
            double acc = 0.0;
            for (std::size_t l = 0; l < len; ++l)
                acc += xp[l];
            y[b * channels + c] = acc * inv;
        }
}

inline void gap_backward(std::size_t batch, std::size_t channels, std::size_t len,
                         const std::vector<double> &dy, std::vector<double> &dx)
{
    dx.assign(batch * channels * len, 0.0);
    const double inv = 1.0 / static_cast<double>(len);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < channels; ++c)
        {
            const double g = dy[b * channels + c] * inv;
            double *dxp = dx.data() + (b * channels + c) * len;
            for (std::size_t l = 0; l < len; ++l)
                dxp[l] = g;
        }
}

// ---- loss ------------------------------------------------------------
// Mean absolute error over every output of the batch; the subgradient at an
// exact zero residual is zero.

inline double mae_loss(const std::vector<double> &pred, const std::vector<double> &target,
                       std::vector<double> &dpred)
{
    if (pred.size() != target.size() || pred.empty())
        throw ShapeError("mae_loss requires matching non-empty shapes");
    dpred.assign(pred.size(), 0.0);
    const double inv = 1.0 / static_cast<double>(pred.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
    {
        const double r = pred[i] - target[i];
        loss += std::abs(r);
        dpred[i] = r > 0.0 ? inv : (r < 0.0 ? -inv : 0.0);
    }
    return loss * inv;
}

// ---- optimizer -------------------------------------------------------
// SGD with classical momentum and decoupled weight decay:
//   v <- momentum v + g;  w <- (1 - lr wd) w - lr v

struct SgdState
{
    std::vector<Tensor> velocity;

    void match(const std::vector<Tensor *> &params)
    {
        velocity.clear();
        for (const Tensor *p : params)
            velocity.emplace_back(p->shape);
    }

    void step(std::vector<Tensor *> &params, const std::vector<Tensor *> &grads, double lr,
              double momentum, double weight_decay)
    {
        for (std::size_t t = 0; t < params.size(); ++t)
        {
            Tensor &w = *params[t];
            const Tensor &g = *grads[t];
            Tensor &v = velocity[t];
            const double decay = 1.0 - lr * weight_decay;
            for (std::size_t i = 0; i < w.size(); ++i)
            {
                v.data[i] = momentum * v.data[i] + g.data[i];
                w.data[i] = decay * w.data[i] - lr * v.data[i];
            }
        }
    }
};

} // namespace jamloc::nn

#endif
