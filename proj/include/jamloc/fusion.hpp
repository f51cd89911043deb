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

#ifndef JAMLOC_FUSION_HPP
#define JAMLOC_FUSION_HPP

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "jamloc/errors.hpp"
#include "jamloc/geometry.hpp"
#include "jamloc/io_util.hpp"
#include "jamloc/nn.hpp"
#include "jamloc/rng.hpp"

namespace jamloc
{

// Fixed input shapes of the four fusion paths.
struct FusionConfig
{
    // spectrogram path: block-averaged map, flatten -> 256 -> 128
    std::size_t spectro_channels = 4, spectro_bins = 32, spectro_frames = 30;
    std::size_t spectro_hidden = 256, spectro_out = 128;
    // raw IQ path: 8 interleaved I/Q channels of 1024 samples through three
    // stride-4 kernel-7 convolutions, then global average pooling
    std::size_t iq_channels = 8, iq_len = 1024;
    std::size_t iq_conv1 = 8, iq_conv2 = 16, iq_conv3 = 32;
    std::size_t iq_kernel = 7, iq_stride = 4, iq_out = 128;
    // AoA path: 22 features, kernel-1 convolution then a dense layer
    std::size_t aoa_len = 22, aoa_conv_channels = 4, aoa_out = 32;
    // pose path: 5 steps x (position + quaternion)
    std::size_t pose_steps = 5, pose_dim = 7, pose_out = 32;
    bool pose_path = true; // off reproduces the 288-wide trunk input
    std::size_t trunk_hidden = 512;
    double dropout = 0.5;
    double target_scale_m = 30.0; // normalization scale for displacement targets

    std::size_t spectro_flat() const { return spectro_channels * spectro_bins * spectro_frames; }
    std::size_t pose_flat() const { return pose_steps * pose_dim; }
    std::size_t trunk_in() const
    {
        return spectro_out + iq_out + aoa_out + (pose_path ? pose_out : 0);
    }
};

struct FeatureBundle
{
    std::vector<float> spectro; // [channels][bins][frames] flattened
    std::vector<float> iq;      // [4][2][1024] flattened, unit RMS per channel
    std::vector<float> aoa;     // 22 entries in [-1, 1]
    std::vector<float> poses;   // [K][dx dy dz qw qx qy qz]
};

struct Prediction
{
    Vec3 delta;             // m
    double azimuth = 0.0;   // deg, (-180, 180)
    double elevation = 0.0; // deg, (-90, 90)
    double distance = 0.0;  // m
};

struct TrainConfig
{
    double lr = 1e-2;
    std::vector<int> milestones = {30, 40}; // epoch indices where lr drops
    double lr_gamma = 0.1;
    double weight_decay = 1e-4;
    double momentum = 0.9;
    std::size_t batch = 64;
    int epochs = 50;
    std::uint64_t seed = 1;

    void validate() const
    {
        if (!(lr > 0.0))
            throw ConfigError("train lr must be > 0");
        if (momentum < 0.0 || momentum >= 1.0)
            throw ConfigError("train momentum must lie in [0, 1)");
        if (batch == 0)
            throw ConfigError("train batch must be >= 1");
        if (epochs < 1)
            throw ConfigError("train epochs must be >= 1");
    }

    double lr_at(int epoch) const
    {
        double out = lr;
        for (int m : milestones)
            if (epoch >= m)
                out *= lr_gamma;
        return out;
    }
};

// Parameter block of the fusion regressor. Tensor order is the canonical
// serialization order of the checkpoint container.
struct FusionParams
{
    nn::Tensor spectro_fc1_w, spectro_fc1_b, spectro_fc2_w, spectro_fc2_b;
    nn::Tensor iq_conv1_w, iq_conv1_b, iq_conv2_w, iq_conv2_b, iq_conv3_w, iq_conv3_b;
    nn::Tensor iq_fc_w, iq_fc_b;
    nn::Tensor aoa_conv_w, aoa_conv_b, aoa_fc_w, aoa_fc_b;
    nn::Tensor pose_fc_w, pose_fc_b;
    nn::Tensor trunk_fc_w, trunk_fc_b;
    nn::Tensor head_delta_w, head_delta_b, head_angle_w, head_angle_b;

    std::vector<std::pair<std::string, nn::Tensor *>> named()
    {
        return {{"spectro.fc1.w", &spectro_fc1_w}, {"spectro.fc1.b", &spectro_fc1_b},
                {"spectro.fc2.w", &spectro_fc2_w}, {"spectro.fc2.b", &spectro_fc2_b},
                {"iq.conv1.w", &iq_conv1_w},       {"iq.conv1.b", &iq_conv1_b},
                {"iq.conv2.w", &iq_conv2_w},       {"iq.conv2.b", &iq_conv2_b},
                {"iq.conv3.w", &iq_conv3_w},       {"iq.conv3.b", &iq_conv3_b},
                {"iq.fc.w", &iq_fc_w},             {"iq.fc.b", &iq_fc_b},
                {"aoa.conv.w", &aoa_conv_w},       {"aoa.conv.b", &aoa_conv_b},
                {"aoa.fc.w", &aoa_fc_w},           {"aoa.fc.b", &aoa_fc_b},
                {"pose.fc.w", &pose_fc_w},         {"pose.fc.b", &pose_fc_b},
                {"trunk.fc.w", &trunk_fc_w},       {"trunk.fc.b", &trunk_fc_b},
                {"head.delta.w", &head_delta_w},   {"head.delta.b", &head_delta_b},
                {"head.angle.w", &head_angle_w},   {"head.angle.b", &head_angle_b}};
    }

    void allocate(const FusionConfig &cfg)
    {
        spectro_fc1_w = nn::Tensor({cfg.spectro_flat(), cfg.spectro_hidden});
        spectro_fc1_b = nn::Tensor({cfg.spectro_hidden});
        spectro_fc2_w = nn::Tensor({cfg.spectro_hidden, cfg.spectro_out});
        spectro_fc2_b = nn::Tensor({cfg.spectro_out});
        iq_conv1_w = nn::Tensor({cfg.iq_conv1, cfg.iq_channels, cfg.iq_kernel});
        iq_conv1_b = nn::Tensor({cfg.iq_conv1});
        iq_conv2_w = nn::Tensor({cfg.iq_conv2, cfg.iq_conv1, cfg.iq_kernel});
        iq_conv2_b = nn::Tensor({cfg.iq_conv2});
        iq_conv3_w = nn::Tensor({cfg.iq_conv3, cfg.iq_conv2, cfg.iq_kernel});
        iq_conv3_b = nn::Tensor({cfg.iq_conv3});
        iq_fc_w = nn::Tensor({cfg.iq_conv3, cfg.iq_out});
        iq_fc_b = nn::Tensor({cfg.iq_out});
        aoa_conv_w = nn::Tensor({cfg.aoa_conv_channels, 1, 1});
        aoa_conv_b = nn::Tensor({cfg.aoa_conv_channels});
        aoa_fc_w = nn::Tensor({cfg.aoa_conv_channels * cfg.aoa_len, cfg.aoa_out});
        aoa_fc_b = nn::Tensor({cfg.aoa_out});
        pose_fc_w = nn::Tensor({cfg.pose_flat(), cfg.pose_out});
        pose_fc_b = nn::Tensor({cfg.pose_out});
        trunk_fc_w = nn::Tensor({cfg.trunk_in(), cfg.trunk_hidden});
        trunk_fc_b = nn::Tensor({cfg.trunk_hidden});
        head_delta_w = nn::Tensor({cfg.trunk_hidden, 3});
        head_delta_b = nn::Tensor({3});
        head_angle_w = nn::Tensor({cfg.trunk_hidden, 2});
        head_angle_b = nn::Tensor({2});
    }

    void fill_zero()
    {
        for (auto &[name, t] : named())
            t->fill_zero();
    }
};

// Activations of one batched forward pass, kept for the backward sweep.
struct FusionCache
{
    std::size_t batch = 0;
    bool training = false;
    std::vector<double> spectro_in, spectro_h1, spectro_feat;
    std::vector<double> iq_in, iq_c1, iq_c2, iq_c3, iq_gap, iq_feat;
    std::vector<double> aoa_in, aoa_conv, aoa_feat;
    std::vector<double> pose_in, pose_feat;
    std::vector<double> mask_spectro, mask_iq, mask_aoa, mask_pose, mask_trunk;
    std::vector<double> trunk_in, trunk_hidden;
    std::vector<double> head_delta, head_angle_pre, head_angle;
    std::vector<double> raw; // [batch][5]
};

class MlpRegressor
{
  public:
    FusionConfig cfg;
    FusionParams params;

    explicit MlpRegressor(const FusionConfig &config = {}) : cfg(config)
    {
        params.allocate(cfg);
    }

    void init_weights(std::uint64_t seed)
    {
        Rng rng(derive_stream_seed(seed, 0xF05A));
        const auto xavier = [&rng](nn::Tensor &w, std::size_t fan_in, std::size_t fan_out) {
            w.init_xavier(rng, fan_in, fan_out);
        };
        xavier(params.spectro_fc1_w, cfg.spectro_flat(), cfg.spectro_hidden);
        xavier(params.spectro_fc2_w, cfg.spectro_hidden, cfg.spectro_out);
        xavier(params.iq_conv1_w, cfg.iq_channels * cfg.iq_kernel, cfg.iq_conv1);
        xavier(params.iq_conv2_w, cfg.iq_conv1 * cfg.iq_kernel, cfg.iq_conv2);
        xavier(params.iq_conv3_w, cfg.iq_conv2 * cfg.iq_kernel, cfg.iq_conv3);
        xavier(params.iq_fc_w, cfg.iq_conv3, cfg.iq_out);
        xavier(params.aoa_conv_w, 1, cfg.aoa_conv_channels);
        xavier(params.aoa_fc_w, cfg.aoa_conv_channels * cfg.aoa_len, cfg.aoa_out);
        xavier(params.pose_fc_w, cfg.pose_flat(), cfg.pose_out);
        xavier(params.trunk_fc_w, cfg.trunk_in(), cfg.trunk_hidden);
        xavier(params.head_delta_w, cfg.trunk_hidden, 3);
        xavier(params.head_angle_w, cfg.trunk_hidden, 2);
    }

    void check_bundle(const FeatureBundle &bundle) const
    {
        if (bundle.spectro.size() != cfg.spectro_flat())
            throw ShapeError("spectrogram path input has the wrong shape");
        if (bundle.iq.size() != cfg.iq_channels * cfg.iq_len)
            throw ShapeError("iq path input has the wrong shape");
        if (bundle.aoa.size() != cfg.aoa_len)
            throw ShapeError("aoa path input has the wrong shape");
        if (cfg.pose_path && bundle.poses.size() != cfg.pose_flat())
            throw ShapeError("pose path input has the wrong shape");
    }

    // Batched forward pass. `rng` drives the dropout masks and is only read
    // when training is true.
    void forward_batch(const std::vector<const FeatureBundle *> &batch, bool training, Rng *rng,
                      FusionCache &cache) const
    {
        const std::size_t bsz = batch.size();
        if (bsz == 0)
            throw InsufficientDataError("forward_batch needs at least one bundle");
        for (const auto *b : batch)
            check_bundle(*b);
        if (training && rng == nullptr)
            throw ConfigError("training forward pass requires an rng");

        cache = FusionCache{};
        cache.batch = bsz;
        cache.training = training;

        const auto gather = [&](auto member, std::size_t dim, std::vector<double> &dst) {
            dst.resize(bsz * dim);
            for (std::size_t b = 0; b < bsz; ++b)
            {
                const auto &src = batch[b]->*member;
                for (std::size_t i = 0; i < dim; ++i)
                    dst[b * dim + i] = static_cast<double>(src[i]);
            }
        };

        // spectrogram path
        gather(&FeatureBundle::spectro, cfg.spectro_flat(), cache.spectro_in);
        nn::dense_forward(cache.spectro_in, bsz, cfg.spectro_flat(), params.spectro_fc1_w,
                          params.spectro_fc1_b, cache.spectro_h1);
        nn::relu_forward(cache.spectro_h1);
        nn::dense_forward(cache.spectro_h1, bsz, cfg.spectro_hidden, params.spectro_fc2_w,
                          params.spectro_fc2_b, cache.spectro_feat);
        nn::relu_forward(cache.spectro_feat);

        // iq path
        gather(&FeatureBundle::iq, cfg.iq_channels * cfg.iq_len, cache.iq_in);
        nn::conv1d_forward(cache.iq_in, bsz, cfg.iq_channels, cfg.iq_len, params.iq_conv1_w,
                           params.iq_conv1_b, cfg.iq_stride, cache.iq_c1);
        nn::relu_forward(cache.iq_c1);
        const std::size_t l1 = nn::conv1d_out_len(cfg.iq_len, cfg.iq_kernel, cfg.iq_stride);
        nn::conv1d_forward(cache.iq_c1, bsz, cfg.iq_conv1, l1, params.iq_conv2_w,
                           params.iq_conv2_b, cfg.iq_stride, cache.iq_c2);
        nn::relu_forward(cache.iq_c2);
        const std::size_t l2 = nn::conv1d_out_len(l1, cfg.iq_kernel, cfg.iq_stride);
        nn::conv1d_forward(cache.iq_c2, bsz, cfg.iq_conv2, l2, params.iq_conv3_w,
                           params.iq_conv3_b, cfg.iq_stride, cache.iq_c3);
        nn::relu_forward(cache.iq_c3);
        const std::size_t l3 = nn::conv1d_out_len(l2, cfg.iq_kernel, cfg.iq_stride);
        nn::gap_forward(cache.iq_c3, bsz, cfg.iq_conv3, l3, cache.iq_gap);
        nn::dense_forward(cache.iq_gap, bsz, cfg.iq_conv3, params.iq_fc_w, params.iq_fc_b,
                          cache.iq_feat);
        nn::relu_forward(cache.iq_feat);

        // aoa path
        gather(&FeatureBundle::aoa, cfg.aoa_len, cache.aoa_in);
        nn::conv1d_forward(cache.aoa_in, bsz, 1, cfg.aoa_len, params.aoa_conv_w,
                           params.aoa_conv_b, 1, cache.aoa_conv);
        nn::relu_forward(cache.aoa_conv);
        nn::dense_forward(cache.aoa_conv, bsz, cfg.aoa_conv_channels * cfg.aoa_len,
                          params.aoa_fc_w, params.aoa_fc_b, cache.aoa_feat);
        nn::relu_forward(cache.aoa_feat);

        // pose path
        if (cfg.pose_path)
        {
            gather(&FeatureBundle::poses, cfg.pose_flat(), cache.pose_in);
            nn::dense_forward(cache.pose_in, bsz, cfg.pose_flat(), params.pose_fc_w,
                              params.pose_fc_b, cache.pose_feat);
            nn::relu_forward(cache.pose_feat);
        }

        // dropout ahead of the concatenation
        if (training)
        {
            cache.mask_spectro = nn::dropout_mask(cache.spectro_feat.size(), cfg.dropout, *rng);
            cache.mask_iq = nn::dropout_mask(cache.iq_feat.size(), cfg.dropout, *rng);
            cache.mask_aoa = nn::dropout_mask(cache.aoa_feat.size(), cfg.dropout, *rng);
            nn::apply_mask(cache.spectro_feat, cache.mask_spectro);
            nn::apply_mask(cache.iq_feat, cache.mask_iq);
            nn::apply_mask(cache.aoa_feat, cache.mask_aoa);
            if (cfg.pose_path)
            {
                cache.mask_pose = nn::dropout_mask(cache.pose_feat.size(), cfg.dropout, *rng);
                nn::apply_mask(cache.pose_feat, cache.mask_pose);
            }
        }

        // concatenate
        const std::size_t width = cfg.trunk_in();
        cache.trunk_in.assign(bsz * width, 0.0);
        for (std::size_t b = 0; b < bsz; ++b)
        {
            double *dst = cache.trunk_in.data() + b * width;
            std::size_t off = 0;
            std::copy_n(cache.spectro_feat.data() + b * cfg.spectro_out, cfg.spectro_out,
                        dst + off);
            off += cfg.spectro_out;
            std::copy_n(cache.iq_feat.data() + b * cfg.iq_out, cfg.iq_out, dst + off);
            off += cfg.iq_out;
            std::copy_n(cache.aoa_feat.data() + b * cfg.aoa_out, cfg.aoa_out, dst + off);
            off += cfg.aoa_out;
            if (cfg.pose_path)
                std::copy_n(cache.pose_feat.data() + b * cfg.pose_out, cfg.pose_out, dst + off);
        }

        nn::dense_forward(cache.trunk_in, bsz, width, params.trunk_fc_w, params.trunk_fc_b,
                          cache.trunk_hidden);
        nn::relu_forward(cache.trunk_hidden);
        if (training)
        {
            cache.mask_trunk = nn::dropout_mask(cache.trunk_hidden.size(), cfg.dropout, *rng);
            nn::apply_mask(cache.trunk_hidden, cache.mask_trunk);
        }

        nn::dense_forward(cache.trunk_hidden, bsz, cfg.trunk_hidden, params.head_delta_w,
                          params.head_delta_b, cache.head_delta);
        nn::dense_forward(cache.trunk_hidden, bsz, cfg.trunk_hidden, params.head_angle_w,
                          params.head_angle_b, cache.head_angle_pre);
        cache.head_angle = cache.head_angle_pre;
        nn::tanh_forward(cache.head_angle);

        cache.raw.assign(bsz * 5, 0.0);
        for (std::size_t b = 0; b < bsz; ++b)
        {
            cache.raw[b * 5 + 0] = cache.head_delta[b * 3 + 0];
            cache.raw[b * 5 + 1] = cache.head_delta[b * 3 + 1];
            cache.raw[b * 5 + 2] = cache.head_delta[b * 3 + 2];
            cache.raw[b * 5 + 3] = cache.head_angle[b * 2 + 0];
            cache.raw[b * 5 + 4] = cache.head_angle[b * 2 + 1];
        }
    }

    // Reverse sweep from d(loss)/d(raw) to parameter gradients.
    void backward_batch(const FusionCache &cache, const std::vector<double> &draw,
                        FusionParams &grads) const
    {
        const std::size_t bsz = cache.batch;
        std::vector<double> d_head_delta(bsz * 3), d_head_angle(bsz * 2);
        for (std::size_t b = 0; b < bsz; ++b)
        {
            d_head_delta[b * 3 + 0] = draw[b * 5 + 0];
            d_head_delta[b * 3 + 1] = draw[b * 5 + 1];
            d_head_delta[b * 3 + 2] = draw[b * 5 + 2];
            d_head_angle[b * 2 + 0] = draw[b * 5 + 3];
            d_head_angle[b * 2 + 1] = draw[b * 5 + 4];
        }
        nn::tanh_backward(cache.head_angle, d_head_angle);

        std::vector<double> d_trunk_hidden(bsz * cfg.trunk_hidden, 0.0), scratch;
        nn::dense_backward(cache.trunk_hidden, bsz, cfg.trunk_hidden, params.head_delta_w,
                           d_head_delta, grads.head_delta_w, grads.head_delta_b, scratch);
        for (std::size_t i = 0; i < d_trunk_hidden.size(); ++i)
            d_trunk_hidden[i] += scratch[i];
        nn::dense_backward(cache.trunk_hidden, bsz, cfg.trunk_hidden, params.head_angle_w,
                           d_head_angle, grads.head_angle_w, grads.head_angle_b, scratch);
        for (std::size_t i = 0; i < d_trunk_hidden.size(); ++i)
            d_trunk_hidden[i] += scratch[i];

        if (cache.training)
            nn::apply_mask(d_trunk_hidden, cache.mask_trunk);
        nn::relu_backward(cache.trunk_hidden, d_trunk_hidden);

        std::vector<double> d_trunk_in;
        nn::dense_backward(cache.trunk_in, bsz, cfg.trunk_in(), params.trunk_fc_w,
                           d_trunk_hidden, grads.trunk_fc_w, grads.trunk_fc_b, d_trunk_in);

        // split the concatenation
        std::vector<double> d_spectro(bsz * cfg.spectro_out), d_iq(bsz * cfg.iq_out),
            d_aoa(bsz * cfg.aoa_out), d_pose(cfg.pose_path ? bsz * cfg.pose_out : 0);
        const std::size_t width = cfg.trunk_in();
        for (std::size_t b = 0; b < bsz; ++b)
        {
            const double *src = d_trunk_in.data() + b * width;
            std::size_t off = 0;
            std::copy_n(src + off, cfg.spectro_out, d_spectro.data() + b * cfg.spectro_out);
            off += cfg.spectro_out;
            std::copy_n(src + off, cfg.iq_out, d_iq.data() + b * cfg.iq_out);
            off += cfg.iq_out;
            std::copy_n(src + off, cfg.aoa_out, d_aoa.data() + b * cfg.aoa_out);
            off += cfg.aoa_out;
            if (cfg.pose_path)
                std::copy_n(src + off, cfg.pose_out, d_pose.data() + b * cfg.pose_out);
        }

        // spectrogram path
        if (cache.training)
            nn::apply_mask(d_spectro, cache.mask_spectro);
        nn::relu_backward(cache.spectro_feat, d_spectro);
        nn::dense_backward(cache.spectro_h1, bsz, cfg.spectro_hidden, params.spectro_fc2_w,
                           d_spectro, grads.spectro_fc2_w, grads.spectro_fc2_b, scratch);
        nn::relu_backward(cache.spectro_h1, scratch);
        std::vector<double> sink;
        nn::dense_backward(cache.spectro_in, bsz, cfg.spectro_flat(), params.spectro_fc1_w,
                           scratch, grads.spectro_fc1_w, grads.spectro_fc1_b, sink);

        // iq path
        if (cache.training)
            nn::apply_mask(d_iq, cache.mask_iq);
        nn::relu_backward(cache.iq_feat, d_iq);
        nn::dense_backward(cache.iq_gap, bsz, cfg.iq_conv3, params.iq_fc_w, d_iq,
                           grads.iq_fc_w, grads.iq_fc_b, scratch);
        const std::size_t l1 = nn::conv1d_out_len(cfg.iq_len, cfg.iq_kernel, cfg.iq_stride);
        const std::size_t l2 = nn::conv1d_out_len(l1, cfg.iq_kernel, cfg.iq_stride);
        const std::size_t l3 = nn::conv1d_out_len(l2, cfg.iq_kernel, cfg.iq_stride);
        std::vector<double> d_c3;
        nn::gap_backward(bsz, cfg.iq_conv3, l3, scratch, d_c3);
        nn::relu_backward(cache.iq_c3, d_c3);
        std::vector<double> d_c2;
        nn::conv1d_backward(cache.iq_c2, bsz, cfg.iq_conv2, l2, params.iq_conv3_w, cfg.iq_stride,
                            d_c3, grads.iq_conv3_w, grads.iq_conv3_b, d_c2);
        nn::relu_backward(cache.iq_c2, d_c2);
        std::vector<double> d_c1;
        nn::conv1d_backward(cache.iq_c1, bsz, cfg.iq_conv1, l1, params.iq_conv2_w, cfg.iq_stride,
                            d_c2, grads.iq_conv2_w, grads.iq_conv2_b, d_c1);
        nn::relu_backward(cache.iq_c1, d_c1);
        nn::conv1d_backward(cache.iq_in, bsz, cfg.iq_channels, cfg.iq_len, params.iq_conv1_w,
                            cfg.iq_stride, d_c1, grads.iq_conv1_w, grads.iq_conv1_b, sink);

        // aoa path
        if (cache.training)
            nn::apply_mask(d_aoa, cache.mask_aoa);
        nn::relu_backward(cache.aoa_feat, d_aoa);
        nn::dense_backward(cache.aoa_conv, bsz, cfg.aoa_conv_channels * cfg.aoa_len,
                           params.aoa_fc_w, d_aoa, grads.aoa_fc_w, grads.aoa_fc_b, scratch);
        nn::relu_backward(cache.aoa_conv, scratch);
        nn::conv1d_backward(cache.aoa_in, bsz, 1, cfg.aoa_len, params.aoa_conv_w, 1, scratch,
                            grads.aoa_conv_w, grads.aoa_conv_b, sink);

        // pose path
        if (cfg.pose_path)
        {
            if (cache.training)
                nn::apply_mask(d_pose, cache.mask_pose);
            nn::relu_backward(cache.pose_feat, d_pose);
            nn::dense_backward(cache.pose_in, bsz, cfg.pose_flat(), params.pose_fc_w, d_pose,
                               grads.pose_fc_w, grads.pose_fc_b, sink);
        }
    }
};

// Normalized regression target of a label: displacement over the scene
// scale, azimuth over 180, elevation over 90.
inline std::array<double, 5> normalized_target(const LabelRecord &label, double scale_m)
{
    return {label.delta.x / scale_m, label.delta.y / scale_m, label.delta.z / scale_m,
            label.azimuth / 180.0, label.elevation / 90.0};
}

inline Prediction denormalize_outputs(const double *raw, double scale_m)
{
    Prediction p;
    p.delta = {raw[0] * scale_m, raw[1] * scale_m, raw[2] * scale_m};
    p.azimuth = raw[3] * 180.0;
    p.elevation = raw[4] * 90.0;
    p.distance = p.delta.norm();
    return p;
}

// Single-sample forward: returns the 5 raw outputs (normalized displacement
// plus tanh-squashed angles). Deterministic whenever training is false.
inline std::array<double, 5> forward(const MlpRegressor &model, const FeatureBundle &bundle,
                                     bool training = false, Rng *rng = nullptr)
{
    FusionCache cache;
    model.forward_batch({&bundle}, training, rng, cache);
    return {cache.raw[0], cache.raw[1], cache.raw[2], cache.raw[3], cache.raw[4]};
}

// Single-sample loss gradients for every parameter tensor.
inline double gradients(const MlpRegressor &model, const FeatureBundle &bundle,
                        const std::array<double, 5> &target, FusionParams &grads,
                        bool training = false, Rng *rng = nullptr)
{
    FusionCache cache;
    model.forward_batch({&bundle}, training, rng, cache);
    std::vector<double> dpred;
    const double loss = nn::mae_loss(cache.raw, {target.begin(), target.end()}, dpred);
    grads.allocate(model.cfg);
    grads.fill_zero();
    model.backward_batch(cache, dpred, grads);
    return loss;
}

struct TrainResult
{
    std::vector<double> epoch_loss;
    std::vector<double> epoch_lr;
};

// Mini-batch SGD with momentum, decoupled weight decay and the multi-step
// learning-rate schedule. Sample order reshuffles every epoch from the
// seeded generator, so identical seeds give identical loss curves.
inline TrainResult train(MlpRegressor &model, const std::vector<FeatureBundle> &bundles,
                         const std::vector<LabelRecord> &labels, const TrainConfig &cfg)
{
    cfg.validate();
    if (bundles.empty() || bundles.size() != labels.size())
        throw InsufficientDataError("training needs a non-empty bundle/label dataset");

    std::vector<std::array<double, 5>> targets(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        targets[i] = normalized_target(labels[i], model.cfg.target_scale_m);

    Rng shuffle_rng(derive_stream_seed(cfg.seed, 0x5701));
    Rng dropout_rng(derive_stream_seed(cfg.seed, 0xD801));

    FusionParams grads;
    grads.allocate(model.cfg);
    nn::SgdState sgd;
    std::vector<nn::Tensor *> param_list, grad_list;
    for (auto &[name, t] : model.params.named())
        param_list.push_back(t);
    for (auto &[name, t] : grads.named())
        grad_list.push_back(t);
    sgd.match(param_list);

    std::vector<std::size_t> order(bundles.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;

    TrainResult result;
    FusionCache cache;
    std::vector<double> dpred, batch_target;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch)
    {
        const double lr = cfg.lr_at(epoch);
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch)
        {
            const std::size_t bsz = std::min(cfg.batch, order.size() - start);
            std::vector<const FeatureBundle *> batch(bsz);
            batch_target.assign(bsz * 5, 0.0);
            for (std::size_t b = 0; b < bsz; ++b)
            {
                batch[b] = &bundles[order[start + b]];
                const auto &t = targets[order[start + b]];
                std::copy(t.begin(), t.end(), batch_target.begin() + b * 5);
            }
            model.forward_batch(batch, true, &dropout_rng, cache);
            loss_sum += nn::mae_loss(cache.raw, batch_target, dpred);
            ++batches;
            grads.fill_zero();
            model.backward_batch(cache, dpred, grads);
            sgd.step(param_list, grad_list, lr, cfg.momentum, cfg.weight_decay);
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
        result.epoch_lr.push_back(lr);
    }
    return result;
}

inline std::vector<Prediction> predict_batch(const MlpRegressor &model,
                                             const std::vector<FeatureBundle> &bundles)
{
    std::vector<Prediction> out;
    out.reserve(bundles.size());
    FusionCache cache;
    constexpr std::size_t kChunk = 256;
    for (std::size_t start = 0; start < bundles.size(); start += kChunk)
    {
        const std::size_t bsz = std::min(kChunk, bundles.size() - start);
        std::vector<const FeatureBundle *> batch(bsz);
        for (std::size_t b = 0; b < bsz; ++b)
            batch[b] = &bundles[start + b];
        model.forward_batch(batch, false, nullptr, cache);
        for (std::size_t b = 0; b < bsz; ++b)
            out.push_back(denormalize_outputs(cache.raw.data() + b * 5,
                                              model.cfg.target_scale_m));
    }
    return out;
}

// ---- checkpoint container ---------------------------------------------
// "GJMW": magic, u32 version, u32 tensor count, then per tensor a name,
// shape and float64 payload, little-endian. Scalars ride along as
// one-element tensors under meta/ names.

struct Checkpoint
{
    FusionConfig cfg;
    FusionParams params;
    std::map<std::string, std::vector<double>> meta;
};

inline void save_checkpoint(const std::string &path, const MlpRegressor &model,
                            const std::map<std::string, std::vector<double>> &extra_meta = {})
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot write checkpoint '" + path + "'");

    auto named = const_cast<FusionParams &>(model.params).named();
    std::map<std::string, std::vector<double>> meta = extra_meta;
    meta["meta/pose_path"] = {model.cfg.pose_path ? 1.0 : 0.0};
    meta["meta/dropout"] = {model.cfg.dropout};
    meta["meta/target_scale_m"] = {model.cfg.target_scale_m};

    os.write("GJMW", 4);
    detail::write_pod<std::uint32_t>(os, 1u);
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(named.size() + meta.size()));

    const auto write_tensor = [&os](const std::string &name,
                                    const std::vector<std::size_t> &shape,
                                    const std::vector<double> &data) {
        detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(shape.size()));
        for (std::size_t d : shape)
            detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(d));
        os.write(reinterpret_cast<const char *>(data.data()),
                 static_cast<std::streamsize>(data.size() * sizeof(double)));
    };

    for (auto &[name, tensor] : named)
        write_tensor(name, tensor->shape, tensor->data);
    for (const auto &[name, values] : meta)
        write_tensor(name, {values.size()}, values);
    if (!os)
        throw IoError("checkpoint write failed for '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open checkpoint '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "GJMW")
        throw FormatError("not a GJMW checkpoint: '" + path + "'");
    const auto version = detail::read_pod<std::uint32_t>(is, "checkpoint version");
    if (version != 1)
        throw FormatError("unsupported GJMW version " + std::to_string(version));
    const auto count = detail::read_pod<std::uint32_t>(is, "tensor count");

    std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<double>>> raw;
    for (std::uint32_t t = 0; t < count; ++t)
    {
        const auto name_len = detail::read_pod<std::uint32_t>(is, "tensor name");
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const auto ndim = detail::read_pod<std::uint32_t>(is, "tensor rank");
        std::vector<std::size_t> shape(ndim);
        std::size_t total = 1;
        for (auto &d : shape)
        {
            d = detail::read_pod<std::uint32_t>(is, "tensor shape");
            total *= d;
        }
        std::vector<double> data(total);
        is.read(reinterpret_cast<char *>(data.data()),
                static_cast<std::streamsize>(total * sizeof(double)));
        if (!is)
            throw FormatError("checkpoint truncated inside tensor '" + name + "'");
        raw[name] = {std::move(shape), std::move(data)};
    }

    Checkpoint ckpt;
    for (const auto &[name, payload] : raw)
        if (name.rfind("meta/", 0) == 0)
            ckpt.meta[name] = payload.second;

    if (ckpt.meta.count("meta/pose_path"))
        ckpt.cfg.pose_path = ckpt.meta["meta/pose_path"][0] != 0.0;
    if (ckpt.meta.count("meta/dropout"))
        ckpt.cfg.dropout = ckpt.meta["meta/dropout"][0];
    if (ckpt.meta.count("meta/target_scale_m"))
        ckpt.cfg.target_scale_m = ckpt.meta["meta/target_scale_m"][0];

    ckpt.params.allocate(ckpt.cfg);
    for (auto &[name, tensor] : ckpt.params.named())
    {
        const auto it = raw.find(name);
        if (it == raw.end())
            throw FormatError("checkpoint is missing tensor '" + name + "'");
        if (it->second.second.size() != tensor->size())
            throw FormatError("checkpoint tensor '" + name + "' has the wrong shape");
        tensor->shape = it->second.first;
        tensor->data = it->second.second;
    }
    return ckpt;
}

inline MlpRegressor model_from_checkpoint(const Checkpoint &ckpt)
{
    MlpRegressor model(ckpt.cfg);
    model.params = ckpt.params;
    return model;
}

} // namespace jamloc

#endif
