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

#ifndef JAMLOC_DATASET_HPP
#define JAMLOC_DATASET_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jamloc/config.hpp"
#include "jamloc/errors.hpp"
#include "jamloc/geometry.hpp"
#include "jamloc/imu.hpp"
#include "jamloc/io_util.hpp"
#include "jamloc/rf.hpp"
#include "jamloc/rng.hpp"

namespace jamloc
{

struct CircleLayout
{
    std::uint32_t first_snapshot = 0; // index of the circle's first snapshot
    std::uint32_t snapshot_count = 0;
    double radius = 0.0;
    double speed = 0.0;
    Vec3 center;
};

struct DatasetManifest
{
    std::uint32_t format_version = 1;
    std::string scenario_config_text; // verbatim echo of the scenario sections
    std::uint32_t snapshot_count = 0;
    std::uint32_t channels = kNumChannels;
    std::uint32_t samples_per_snapshot = 0;
    std::uint32_t window_count = 0; // K-step windows available within circles
    double sample_rate = 0.0;
    std::string jammer_id;
    std::uint64_t seed = 0;
    std::vector<CircleLayout> circles;
};

struct SnapshotRecord
{
    std::uint32_t id = 0;
    std::uint32_t circle_id = 0;
    SnapshotIQ iq;
    LabelRecord label;
    std::optional<RelativePoseSet> poses; // filled during featurization
};

// ---- GJDF sample container ---------------------------------------------
// magic "GJDF", u32 version = 1, u32 n_snapshots, u32 n_channels,
// u32 n_samples, then per snapshot one f64 timestamp followed by
// channel-major interleaved f32 I,Q pairs. Little-endian throughout.

constexpr std::size_t kGjdfHeaderBytes = 4 + 4 * sizeof(std::uint32_t);

inline std::size_t gjdf_expected_bytes(std::size_t snapshots, std::size_t channels,
                                       std::size_t samples)
{
    return kGjdfHeaderBytes + snapshots * (sizeof(double) + channels * samples * 2 * sizeof(float));
}

inline void write_gjdf(const std::string &path, const std::vector<SnapshotRecord> &records)
{
    if (records.empty())
        throw InsufficientDataError("refusing to write an empty GJDF file");
    const std::size_t samples = records.front().iq.length();
    for (const auto &r : records)
        if (r.iq.length() != samples)
            throw ShapeError("all snapshots in a dataset must share one length");

    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot write '" + path + "'");
    os.write("GJDF", 4);
    detail::write_pod<std::uint32_t>(os, 1u);
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(records.size()));
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(kNumChannels));
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(samples));

    std::vector<float> buf(samples * 2);
    for (const auto &r : records)
    {
        detail::write_pod<double>(os, r.iq.timestamp);
        for (const auto &ch : r.iq.channels)
        {
            for (std::size_t k = 0; k < samples; ++k)
            {
                buf[2 * k] = static_cast<float>(ch[k].real());
                buf[2 * k + 1] = static_cast<float>(ch[k].imag());
            }
            os.write(reinterpret_cast<const char *>(buf.data()),
                     static_cast<std::streamsize>(buf.size() * sizeof(float)));
        }
    }
    os.flush();
    if (!os)
        throw IoError("write failed for '" + path + "'");
    const auto written = static_cast<std::size_t>(os.tellp());
    if (written != gjdf_expected_bytes(records.size(), kNumChannels, samples))
        throw IoError("GJDF size check failed for '" + path + "'");
}

// Streaming reader; keeps the file open and seeks per snapshot.
class GjdfReader
{
  public:
    explicit GjdfReader(const std::string &path) : is_(path, std::ios::binary), path_(path)
    {
        if (!is_)
            throw IoError("cannot open '" + path + "'");
        char magic[4];
        is_.read(magic, 4);
        if (!is_ || std::string(magic, 4) != "GJDF")
            throw FormatError("not a GJDF file: '" + path + "'");
        const auto version = detail::read_pod<std::uint32_t>(is_, "version");
        if (version != 1)
            throw FormatError("unsupported GJDF version " + std::to_string(version));
        snapshots_ = detail::read_pod<std::uint32_t>(is_, "snapshot count");
        channels_ = detail::read_pod<std::uint32_t>(is_, "channel count");
        samples_ = detail::read_pod<std::uint32_t>(is_, "sample count");
        if (channels_ != kNumChannels)
            throw FormatError("GJDF channel count " + std::to_string(channels_) +
                              " is not supported");

        is_.seekg(0, std::ios::end);
        const auto actual = static_cast<std::size_t>(is_.tellg());
        if (actual != gjdf_expected_bytes(snapshots_, channels_, samples_))
            throw FormatError("GJDF payload length disagrees with its header counts");
    }

    std::uint32_t snapshot_count() const { return snapshots_; }
    std::uint32_t samples_per_snapshot() const { return samples_; }

    SnapshotIQ read_snapshot(std::uint32_t index, double sample_rate)
    {
        if (index >= snapshots_)
            throw BoundsError("snapshot index out of range");
        const std::size_t stride = sizeof(double) +
                                   static_cast<std::size_t>(channels_) * samples_ * 2 *
                                       sizeof(float);
        is_.clear();
        is_.seekg(static_cast<std::streamoff>(kGjdfHeaderBytes + index * stride));
        SnapshotIQ snap;
        snap.sample_rate = sample_rate;
        snap.timestamp = detail::read_pod<double>(is_, "snapshot timestamp");
        std::vector<float> buf(static_cast<std::size_t>(samples_) * 2);
        for (std::size_t c = 0; c < channels_; ++c)
        {
            is_.read(reinterpret_cast<char *>(buf.data()),
                     static_cast<std::streamsize>(buf.size() * sizeof(float)));
            if (!is_)
                throw FormatError("truncated GJDF payload in '" + path_ + "'");
            snap.channels[c].resize(samples_);
            for (std::size_t k = 0; k < samples_; ++k)
                snap.channels[c][k] = cplx{static_cast<double>(buf[2 * k]),
                                           static_cast<double>(buf[2 * k + 1])};
        }
        return snap;
    }

  private:
    std::ifstream is_;
    std::string path_;
    std::uint32_t snapshots_ = 0, channels_ = 0, samples_ = 0;
};

// ---- labels CSV ----------------------------------------------------------

inline void write_labels_csv(const std::string &path, const std::vector<SnapshotRecord> &records)
{
    std::ofstream os(path);
    if (!os)
        throw IoError("cannot write '" + path + "'");
    os << "id,t,dx,dy,dz,az,el,dist,speed,circle\n";
    for (const auto &r : records)
    {
        os << r.id << ',' << detail::shortest(r.label.timestamp) << ','
           << detail::shortest(r.label.delta.x) << ',' << detail::shortest(r.label.delta.y)
           << ',' << detail::shortest(r.label.delta.z) << ','
           << detail::shortest(r.label.azimuth) << ',' << detail::shortest(r.label.elevation)
           << ',' << detail::shortest(r.label.distance) << ','
           << detail::shortest(r.label.speed) << ',' << r.circle_id << '\n';
    }
    if (!os)
        throw IoError("write failed for '" + path + "'");
}

struct LabelRow
{
    std::uint32_t id = 0;
    std::uint32_t circle_id = 0;
    LabelRecord label;
};

inline std::vector<LabelRow> read_labels_csv(const std::string &path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line) || line.rfind("id,t,", 0) != 0)
        throw FormatError("labels CSV is missing its header row");
    std::vector<LabelRow> out;
    while (std::getline(is, line))
    {
        if (line.empty())
            continue;
        LabelRow row;
        unsigned long id = 0, circle = 0;
        if (std::sscanf(line.c_str(), "%lu,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lu", &id,
                        &row.label.timestamp, &row.label.delta.x, &row.label.delta.y,
                        &row.label.delta.z, &row.label.azimuth, &row.label.elevation,
                        &row.label.distance, &row.label.speed, &circle) != 10)
            throw FormatError("malformed labels row: " + line);
        row.id = static_cast<std::uint32_t>(id);
        row.circle_id = static_cast<std::uint32_t>(circle);
        out.push_back(row);
    }
    return out;
}

// ---- manifest --------------------------------------------------------------
// Structured text: a [manifest] section, one [circles] section and the
// scenario configuration echoed verbatim.

inline std::string manifest_to_text(const DatasetManifest &m)
{
    std::ostringstream os;
    os << "[manifest]\n";
    os << "format_version = " << m.format_version << "\n";
    os << "snapshot_count = " << m.snapshot_count << "\n";
    os << "channels = " << m.channels << "\n";
    os << "samples_per_snapshot = " << m.samples_per_snapshot << "\n";
    os << "window_count = " << m.window_count << "\n";
    os << "sample_rate_hz = " << detail::shortest(m.sample_rate) << "\n";
    os << "jammer_id = " << m.jammer_id << "\n";
    os << "seed = " << m.seed << "\n";
    os << "\n[circles]\n";
    for (std::size_t c = 0; c < m.circles.size(); ++c)
    {
        const auto &ci = m.circles[c];
        os << "circle" << c << " = " << ci.first_snapshot << ' ' << ci.snapshot_count << ' '
           << detail::shortest(ci.radius) << ' ' << detail::shortest(ci.speed) << ' '
           << detail::shortest(ci.center.x) << ' ' << detail::shortest(ci.center.y) << ' '
           << detail::shortest(ci.center.z) << "\n";
    }
    os << "\n" << m.scenario_config_text;
    return os.str();
}

inline DatasetManifest manifest_from_text(const std::string &text)
{
    const auto cfg = ConfigFile::parse(text, "manifest");
    DatasetManifest m;
    m.format_version = static_cast<std::uint32_t>(cfg.get_int("manifest", "format_version", 1));
    if (m.format_version != 1)
        throw FormatError("unsupported manifest format_version");
    m.snapshot_count = static_cast<std::uint32_t>(cfg.get_int("manifest", "snapshot_count", 0));
    m.channels = static_cast<std::uint32_t>(cfg.get_int("manifest", "channels", 4));
    m.samples_per_snapshot =
        static_cast<std::uint32_t>(cfg.get_int("manifest", "samples_per_snapshot", 0));
    m.window_count = static_cast<std::uint32_t>(cfg.get_int("manifest", "window_count", 0));
    m.sample_rate = cfg.get_double("manifest", "sample_rate_hz", 0.0);
    m.jammer_id = cfg.get_string("manifest", "jammer_id", "");
    m.seed = static_cast<std::uint64_t>(cfg.get_int("manifest", "seed", 0));

    for (std::size_t c = 0;; ++c)
    {
        const std::string key = "circle" + std::to_string(c);
        if (!cfg.has("circles", key))
            break;
        const auto v = cfg.get_list("circles", key, {});
        if (v.size() != 7)
            throw FormatError("manifest circle entry must have 7 fields");
        CircleLayout ci;
        ci.first_snapshot = static_cast<std::uint32_t>(v[0]);
        ci.snapshot_count = static_cast<std::uint32_t>(v[1]);
        ci.radius = v[2];
        ci.speed = v[3];
        ci.center = {v[4], v[5], v[6]};
        m.circles.push_back(ci);
    }

    // scenario echo: from the first section header that is neither
    // [manifest] nor [circles] through the end of the text
    std::istringstream lines(text);
    std::string line;
    std::size_t offset = 0;
    while (std::getline(lines, line))
    {
        const std::string t = line;
        if (!t.empty() && t.front() == '[' && t != "[manifest]" && t != "[circles]")
        {
            m.scenario_config_text = text.substr(offset);
            break;
        }
        offset += line.size() + 1;
    }
    return m;
}

// ---- dataset directory ------------------------------------------------------

inline void write_dataset(const std::string &dir, const std::vector<SnapshotRecord> &records,
                          const DatasetManifest &manifest)
{
    namespace fs = std::filesystem;
    if (records.size() != manifest.snapshot_count)
        throw ShapeError("manifest snapshot_count disagrees with the record count");
    if (!records.empty() && records.front().iq.length() != manifest.samples_per_snapshot)
        throw ShapeError("manifest samples_per_snapshot disagrees with the records");
    fs::create_directories(dir);
    write_gjdf((fs::path(dir) / "data.gjdf").string(), records);
    write_labels_csv((fs::path(dir) / "labels.csv").string(), records);
    std::ofstream os(fs::path(dir) / "manifest.txt");
    if (!os)
        throw IoError("cannot write manifest in '" + dir + "'");
    os << manifest_to_text(manifest);
}

inline DatasetManifest read_manifest(const std::string &dir)
{
    namespace fs = std::filesystem;
    std::ifstream is(fs::path(dir) / "manifest.txt");
    if (!is)
        throw IoError("missing manifest.txt in '" + dir + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return manifest_from_text(ss.str());
}

inline std::pair<std::vector<SnapshotRecord>, DatasetManifest>
read_dataset(const std::string &dir)
{
    namespace fs = std::filesystem;
    DatasetManifest manifest = read_manifest(dir);
    GjdfReader reader((fs::path(dir) / "data.gjdf").string());
    if (reader.snapshot_count() != manifest.snapshot_count)
        throw FormatError("GJDF snapshot count disagrees with the manifest");
    if (reader.samples_per_snapshot() != manifest.samples_per_snapshot)
        throw FormatError("GJDF sample count disagrees with the manifest");
    const auto labels = read_labels_csv((fs::path(dir) / "labels.csv").string());
    if (labels.size() != manifest.snapshot_count)
        throw FormatError("labels.csv row count disagrees with the manifest");

    std::vector<SnapshotRecord> records(labels.size());
    for (std::uint32_t i = 0; i < labels.size(); ++i)
    {
        records[i].id = labels[i].id;
        records[i].circle_id = labels[i].circle_id;
        records[i].label = labels[i].label;
        records[i].iq = reader.read_snapshot(i, manifest.sample_rate);
    }
    return {std::move(records), std::move(manifest)};
}

// ---- ground-truth interpolation ---------------------------------------------
// Positions interpolate linearly; angles are re-derived from the
// interpolated displacement so the azimuth seam never produces a jump.

inline std::vector<LabelRecord> interpolate_labels(const std::vector<LabelRecord> &ground_truth,
                                                   const std::vector<double> &snapshot_times)
{
    if (ground_truth.size() < 2)
        throw InsufficientDataError("label interpolation needs at least two ground-truth rows");
    for (std::size_t i = 1; i < ground_truth.size(); ++i)
        if (!(ground_truth[i].timestamp > ground_truth[i - 1].timestamp))
            throw ConfigError("ground-truth labels must have increasing timestamps");

    std::vector<LabelRecord> out;
    out.reserve(snapshot_times.size());
    for (double t : snapshot_times)
    {
        if (t < ground_truth.front().timestamp - 1e-12 ||
            t > ground_truth.back().timestamp + 1e-12)
            throw CoverageError("snapshot time " + std::to_string(t) +
                                " outside the ground-truth span");
        std::size_t hi = 1;
        while (hi + 1 < ground_truth.size() && ground_truth[hi].timestamp < t)
            ++hi;
        const auto &a = ground_truth[hi - 1];
        const auto &b = ground_truth[hi];
        const double span = b.timestamp - a.timestamp;
        const double w = span > 0.0 ? std::clamp((t - a.timestamp) / span, 0.0, 1.0) : 0.0;

        LabelRecord rec;
        rec.timestamp = t;
        rec.delta = a.delta + w * (b.delta - a.delta);
        rec.speed = a.speed + w * (b.speed - a.speed);
        rec.distance = rec.delta.norm();
        if (rec.distance == 0.0)
            throw DegenerateGeometryError("interpolated position coincides with the jammer");
        delta_to_angles(rec.delta, rec.azimuth, rec.elevation);
        out.push_back(rec);
    }
    return out;
}

// ---- train/test split --------------------------------------------------------
// Split at the group (circle) level: every member of a circle lands on the
// same side, so adjacent near-duplicate windows can never leak across.

struct SplitIndices
{
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

inline SplitIndices split_by_group(const std::vector<std::uint32_t> &group_ids, double ratio,
                                   std::uint64_t seed)
{
    if (group_ids.size() < 2)
        throw InsufficientDataError("cannot split fewer than two records");
    if (!(ratio > 0.0) || !(ratio < 1.0))
        throw ConfigError("split ratio must lie strictly between 0 and 1");

    std::vector<std::uint32_t> groups;
    for (auto g : group_ids)
        if (std::find(groups.begin(), groups.end(), g) == groups.end())
            groups.push_back(g);

    Rng rng(derive_stream_seed(seed, 0x59117));
    rng.shuffle(groups);
    const std::size_t n_train = static_cast<std::size_t>(
        static_cast<double>(groups.size()) * ratio);
    std::vector<std::uint32_t> train_groups(groups.begin(),
                                            groups.begin() + static_cast<std::ptrdiff_t>(n_train));

    SplitIndices out;
    for (std::size_t i = 0; i < group_ids.size(); ++i)
    {
        const bool in_train = std::find(train_groups.begin(), train_groups.end(),
                                        group_ids[i]) != train_groups.end();
        (in_train ? out.train : out.test).push_back(i);
    }
    return out;
}

inline std::pair<std::vector<SnapshotRecord>, std::vector<SnapshotRecord>>
split_dataset(const std::vector<SnapshotRecord> &records, double ratio, std::uint64_t seed)
{
    std::vector<std::uint32_t> groups(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        groups[i] = records[i].circle_id;
    const auto idx = split_by_group(groups, ratio, seed);
    std::pair<std::vector<SnapshotRecord>, std::vector<SnapshotRecord>> out;
    for (std::size_t i : idx.train)
        out.first.push_back(records[i]);
    for (std::size_t i : idx.test)
        out.second.push_back(records[i]);
    return out;
}

} // namespace jamloc

#endif
