// SPDX-License-Identifier: Apache-2.0
//
// selora: spectral-efficient LoRa link-level simulation library
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

#ifndef SELORA_CONFIG_HPP
#define SELORA_CONFIG_HPP

#include "selora/harness.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace selora {

// Run configuration as read from a flat `key = value` file. `k` and `snr_db`
// accept comma lists; `k` must be a single value for sweeps.
struct RunConfig {
    int sf = 7;
    double bandwidth_hz = 125e3;
    std::vector<int> k{1};
    int payload_len = 57;
    ChannelKind channel = ChannelKind::rician;
    double rician_k_db = 6.0;
    DetectorKind detector = DetectorKind::sic;
    std::vector<double> snr_db;
    std::uint64_t max_symbols = 1'000'000;
    std::uint64_t target_errors = 200;
    std::uint64_t seed = 1;
    std::string out;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

template <typename T>
std::vector<T> parse_list(std::string_view text)
{
    std::vector<T> out;
    for (auto item : split(text, ','))
        out.push_back(parse_number<T>(trim(item)));
    return out;
}

} // namespace detail

// Applies one key/value pair. Unknown keys and malformed values throw ConfigError.
inline void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value)
{
    key = detail::trim(key);
    value = detail::trim(value);
    if (value.empty())
        throw ConfigError("empty value for key '" + std::string(key) + "'");
    if (key == "sf")
        cfg.sf = detail::parse_number<int>(value);
    else if (key == "bandwidth_hz")
        cfg.bandwidth_hz = detail::parse_number<double>(value);
    else if (key == "k")
        cfg.k = detail::parse_list<int>(value);
    else if (key == "payload_len")
        cfg.payload_len = detail::parse_number<int>(value);
    else if (key == "channel")
        cfg.channel = parse_channel_kind(value);
    else if (key == "rician_k_db")
        cfg.rician_k_db = detail::parse_number<double>(value);
    else if (key == "detector")
        cfg.detector = parse_detector_kind(value);
    else if (key == "snr_db")
        cfg.snr_db = detail::parse_list<double>(value);
    else if (key == "max_symbols")
        cfg.max_symbols = detail::parse_number<std::uint64_t>(value);
    else if (key == "target_errors")
        cfg.target_errors = detail::parse_number<std::uint64_t>(value);
    else if (key == "seed")
        cfg.seed = detail::parse_number<std::uint64_t>(value);
    else if (key == "out")
        cfg.out = std::string(value);
    else
        throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

// Blank lines and lines starting with '#' are ignored.
inline void parse_config(std::istream& is, RunConfig& cfg)
{
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#')
            continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        try {
            apply_setting(cfg, text.substr(0, eq), text.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot read configuration file '" + path + "'");
    RunConfig cfg;
    parse_config(is, cfg);
    return cfg;
}

// Sweep job for one overlap factor; prefix symbols are redrawn per frame.
inline SimJob make_job(const RunConfig& rc, int k)
{
    SimJob job;
    job.params = make_params(rc.sf, rc.bandwidth_hz);
    job.cfg = se_config(job.params, k, rc.payload_len, std::vector<int>(static_cast<std::size_t>(std::max(0, k - 1)), 0));
    job.channel = {rc.channel, rc.rician_k_db};
    if (!std::isfinite(rc.rician_k_db))
        throw ConfigError("rician_k_db must be finite");
    job.detector = rc.detector;
    job.snr_grid_db = rc.snr_db;
    job.stop = {rc.max_symbols, rc.target_errors};
    job.master_seed = rc.seed;
    return job;
}

} // namespace selora

#endif
