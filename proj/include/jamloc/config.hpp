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

#ifndef JAMLOC_CONFIG_HPP
#define JAMLOC_CONFIG_HPP

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "jamloc/errors.hpp"
#include "jamloc/geometry.hpp"

namespace jamloc
{

// Plain-text configuration: `[section]` or `[section.sub]` headers followed
// by `key = value` lines. `#` starts a comment. Values are scalars, words,
// or whitespace-separated numeric lists.
class ConfigFile
{
  public:
    ConfigFile() = default;

    static ConfigFile parse(const std::string &text, const std::string &origin = "<string>")
    {
        ConfigFile cfg;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            const std::string t = strip(line);
            if (t.empty() || t[0] == '#')
                continue;
            if (t.front() == '[')
            {
                if (t.back() != ']' || t.size() < 3)
                    throw ConfigError(origin + ":" + std::to_string(lineno) +
                                      ": malformed section header '" + t + "'");
                section = strip(t.substr(1, t.size() - 2));
                cfg.sections_[section]; // materialize even if empty
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + t + "'");
            const std::string key = strip(t.substr(0, eq));
            const std::string value = strip(t.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            cfg.sections_[section][key] = value;
        }
        return cfg;
    }

    static ConfigFile load(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw IoError("cannot open config file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    bool has(const std::string &section, const std::string &key) const
    {
        const auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    bool has_section(const std::string &section) const { return sections_.count(section) > 0; }

    std::vector<std::string> sections_with_prefix(const std::string &prefix) const
    {
        std::vector<std::string> out;
        for (const auto &[name, kv] : sections_)
            if (name.rfind(prefix, 0) == 0)
                out.push_back(name);
        return out;
    }

    std::string get_string(const std::string &section, const std::string &key,
                           const std::string &fallback) const
    {
        const auto s = sections_.find(section);
        if (s == sections_.end())
            return fallback;
        const auto k = s->second.find(key);
        return k == s->second.end() ? fallback : k->second;
    }

    double get_double(const std::string &section, const std::string &key, double fallback) const
    {
        if (!has(section, key))
            return fallback;
        return to_double(section, key, raw(section, key));
    }

    long get_int(const std::string &section, const std::string &key, long fallback) const
    {
        if (!has(section, key))
            return fallback;
        const double v = to_double(section, key, raw(section, key));
        const long i = static_cast<long>(v);
        if (static_cast<double>(i) != v)
            throw ConfigError(where(section, key) + ": expected an integer, got '" +
                              raw(section, key) + "'");
        return i;
    }

    bool get_bool(const std::string &section, const std::string &key, bool fallback) const
    {
        if (!has(section, key))
            return fallback;
        const std::string v = raw(section, key);
        if (v == "true" || v == "1" || v == "yes" || v == "on")
            return true;
        if (v == "false" || v == "0" || v == "no" || v == "off")
            return false;
        throw ConfigError(where(section, key) + ": expected a boolean, got '" + v + "'");
    }

    std::vector<double> get_list(const std::string &section, const std::string &key,
                                 const std::vector<double> &fallback) const
    {
        if (!has(section, key))
            return fallback;
        std::istringstream in(raw(section, key));
        std::vector<double> out;
        std::string tok;
        while (in >> tok)
            out.push_back(to_double(section, key, tok));
        if (out.empty())
            throw ConfigError(where(section, key) + ": empty numeric list");
        return out;
    }

    Vec3 get_vec3(const std::string &section, const std::string &key, const Vec3 &fallback) const
    {
        if (!has(section, key))
            return fallback;
        const auto v = get_list(section, key, {});
        if (v.size() != 3)
            throw ConfigError(where(section, key) + ": expected 3 components, got " +
                              std::to_string(v.size()));
        return {v[0], v[1], v[2]};
    }

    const std::map<std::string, std::map<std::string, std::string>> &sections() const
    {
        return sections_;
    }

  private:
    static std::string strip(const std::string &s)
    {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos)
            return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    const std::string &raw(const std::string &section, const std::string &key) const
    {
        return sections_.at(section).at(key);
    }

    static std::string where(const std::string &section, const std::string &key)
    {
        return "[" + section + "] " + key;
    }

    static double to_double(const std::string &section, const std::string &key,
                            const std::string &v)
    {
        std::size_t consumed = 0;
        double out = 0.0;
        try
        {
            out = std::stod(v, &consumed);
        }
        catch (const std::exception &)
        {
            throw ConfigError(where(section, key) + ": expected a number, got '" + v + "'");
        }
        if (consumed != v.size())
            throw ConfigError(where(section, key) + ": trailing characters in number '" + v + "'");
        return out;
    }

    std::map<std::string, std::map<std::string, std::string>> sections_;
};

} // namespace jamloc

#endif
