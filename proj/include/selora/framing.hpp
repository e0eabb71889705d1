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

#ifndef SELORA_FRAMING_HPP
#define SELORA_FRAMING_HPP

#include "selora/waveform.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace selora {

// Overlapped transmission: a new chirp starts every lambda_chips = floor(m/k)
// chips. The k-1 prefix symbols precede the payload and are known to the
// receiver.
struct SEConfig {
    int k = 1;
    int lambda_chips = 0;
    int payload_len = 1;
    std::vector<int> prefix_symbols;
};

inline SEConfig se_config(const LoRaParams& params, int k, int payload_len, std::vector<int> prefix)
{
    if (k < 1 || k > params.m)
        throw ConfigError("overlap factor k must lie in [1, m], got " + std::to_string(k));
    if (payload_len < 1)
        throw ConfigError("payload length must be at least 1");
    if (prefix.size() != static_cast<std::size_t>(k - 1))
        throw ConfigError("expected " + std::to_string(k - 1) + " prefix symbols, got " + std::to_string(prefix.size()));
    for (int s : prefix) {
        if (s < 0 || s >= params.m)
            throw ConfigError("prefix symbol " + std::to_string(s) + " outside [0, m-1]");
    }
    SEConfig cfg;
    cfg.k = k;
    cfg.lambda_chips = params.m / k;
    cfg.payload_len = payload_len;
    cfg.prefix_symbols = std::move(prefix);
    return cfg;
}

// Largest |i| for which a chirp i*lambda chips away still overlaps an m-chip
// window. Equals k-1 when k divides m, and k when it does not (the residual
// m - k*lambda samples of the +-k chirps).
inline int interference_reach(const LoRaParams& params, const SEConfig& cfg) noexcept
{
    return (params.m + cfg.lambda_chips - 1) / cfg.lambda_chips - 1;
}

inline std::int64_t frame_length(const LoRaParams& params, const SEConfig& cfg) noexcept
{
    return static_cast<std::int64_t>(cfg.payload_len - 1) * cfg.lambda_chips + params.m;
}

struct Frame {
    ComplexSignal samples;
    std::vector<int> payload;
    SEConfig config;
};

// Noiseless unit-gain frame: payload chirp i starts at i*lambda, prefix chirp
// i (i = -k+1..-1) starts at i*lambda and only its n >= 0 part is kept.
inline Frame build_frame(const LoRaParams& params, const SEConfig& cfg, std::span<const int> payload)
{
    if (payload.size() != static_cast<std::size_t>(cfg.payload_len))
        throw ConfigError("payload must hold " + std::to_string(cfg.payload_len) + " symbols, got " +
                          std::to_string(payload.size()));
    for (int s : payload) {
        if (s < 0 || s >= params.m)
            throw ConfigError("payload symbol " + std::to_string(s) + " outside [0, m-1]");
    }
    if (cfg.prefix_symbols.size() != static_cast<std::size_t>(cfg.k - 1))
        throw ConfigError("configuration carries the wrong number of prefix symbols");

    const auto table = ChirpTable::get(params.m);
    Frame frame;
    frame.config = cfg;
    frame.payload.assign(payload.begin(), payload.end());
    frame.samples.samples.assign(static_cast<std::size_t>(frame_length(params, cfg)), cplx{});

    const auto k = static_cast<std::int64_t>(cfg.k);
    for (std::int64_t i = -k + 1; i < 0; ++i)
        table->accumulate(frame.samples.samples, i * cfg.lambda_chips, cfg.prefix_symbols[static_cast<std::size_t>(i + k - 1)], 1.0);
    for (std::size_t i = 0; i < payload.size(); ++i)
        table->accumulate(frame.samples.samples, static_cast<std::int64_t>(i) * cfg.lambda_chips, payload[i], 1.0);
    return frame;
}

// Receiving window q: the m samples starting at chip q*lambda.
inline ComplexSignal extract_window(const ComplexSignal& frame, const LoRaParams& params, const SEConfig& cfg, int q)
{
    if (q < 0 || q >= cfg.payload_len)
        throw IndexError("window index " + std::to_string(q) + " outside [0, " + std::to_string(cfg.payload_len - 1) + "]");
    const auto begin = static_cast<std::size_t>(q) * static_cast<std::size_t>(cfg.lambda_chips);
    if (begin + static_cast<std::size_t>(params.m) > frame.size())
        throw ShapeError("frame too short for window " + std::to_string(q));
    ComplexSignal out;
    out.start_index = frame.start_index + static_cast<std::int64_t>(begin);
    out.samples.assign(frame.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                       frame.samples.begin() + static_cast<std::ptrdiff_t>(begin) + params.m);
    return out;
}

inline ComplexSignal extract_window(const Frame& frame, const LoRaParams& params, int q)
{
    return extract_window(frame.samples, params, frame.config, q);
}

// eta_L = SF / 2^SF
inline double spectral_efficiency_lora(const LoRaParams& params) noexcept
{
    return static_cast<double>(params.sf) / static_cast<double>(params.m);
}

// (k*l/(k+l-1) - 1) * 100
inline double se_gain_percent(int k, int payload_len)
{
    if (k < 1 || payload_len < 1)
        throw ConfigError("se_gain_percent needs k >= 1 and payload_len >= 1");
    const double kl = static_cast<double>(k) * payload_len;
    return (kl / (k + payload_len - 1.0) - 1.0) * 100.0;
}

// Same gain in hundredths of a percent, rounded half-up with integer
// arithmetic: (k-1)(l-1)*10000 / (k+l-1).
inline std::int64_t se_gain_centipercent(int k, int payload_len)
{
    if (k < 1 || payload_len < 1)
        throw ConfigError("se_gain_percent needs k >= 1 and payload_len >= 1");
    const std::int64_t num = std::int64_t{k - 1} * (payload_len - 1) * 10000;
    const std::int64_t den = std::int64_t{k} + payload_len - 1;
    return (2 * num + den) / (2 * den);
}

inline std::string format_gain_percent(int k, int payload_len)
{
    const auto c = se_gain_centipercent(k, payload_len);
    std::string frac = std::to_string(c % 100);
    if (frac.size() < 2)
        frac.insert(frac.begin(), '0');
    return std::to_string(c / 100) + "." + frac;
}

} // namespace selora

#endif
