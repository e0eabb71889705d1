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

#ifndef SELORA_CHANNEL_HPP
#define SELORA_CHANNEL_HPP

#include "selora/waveform.hpp"

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>

namespace selora {

// Flat block fading: one gain h for the whole frame, plus complex AWGN.
//
// SNR convention: average per-sample SNR = P E[|h|^2] / sigma^2 with P = 1 and
// the fading families normalised to E[|h|^2] = 1, so sigma^2 = 10^(-SNR/10)
// for every channel kind.

enum class ChannelKind { awgn, rayleigh, rician };

struct ChannelSpec {
    ChannelKind kind = ChannelKind::awgn;
    double rician_k_db = 6.0;
};

struct ChannelRealization {
    cplx h{1.0, 0.0};
    double noise_variance = 0.0;
    double amplitude = 1.0;
};

inline std::string_view to_string(ChannelKind kind) noexcept
{
    switch (kind) {
    case ChannelKind::awgn: return "awgn";
    case ChannelKind::rayleigh: return "rayleigh";
    case ChannelKind::rician: return "rician";
    }
    return "?";
}

inline ChannelKind parse_channel_kind(std::string_view name)
{
    if (name == "awgn")
        return ChannelKind::awgn;
    if (name == "rayleigh")
        return ChannelKind::rayleigh;
    if (name == "rician")
        return ChannelKind::rician;
    throw ConfigError("unknown channel '" + std::string(name) + "' (expected awgn, rayleigh or rician)");
}

using Rng = std::mt19937_64;

// splitmix64 finaliser
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent substream for (master seed, path...), e.g. (seed, snr index, trial).
inline Rng make_stream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path)
{
    std::uint64_t state = mix64(master_seed);
    for (auto p : path)
        state = mix64(state ^ mix64(p + 0x632be59bd9b4e019ULL));
    return Rng(state);
}

inline double rician_factor_linear(double k_db) noexcept { return std::pow(10.0, k_db / 10.0); }

template <typename URBG>
cplx complex_gaussian(URBG& rng, double variance)
{
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

// awgn -> 1; rayleigh -> CN(0,1); rician -> sqrt(kappa/(kappa+1)) + CN(0, 1/(kappa+1)).
// The line-of-sight component has zero phase.
template <typename URBG>
cplx draw_channel(const ChannelSpec& spec, URBG& rng)
{
    switch (spec.kind) {
    case ChannelKind::awgn:
        return {1.0, 0.0};
    case ChannelKind::rayleigh:
        return complex_gaussian(rng, 1.0);
    case ChannelKind::rician: {
        const double kappa = rician_factor_linear(spec.rician_k_db);
        const double los = std::sqrt(kappa / (kappa + 1.0));
        return cplx{los, 0.0} + complex_gaussian(rng, 1.0 / (kappa + 1.0));
    }
    }
    throw ConfigError("unknown channel kind");
}

inline double snr_to_noise_variance(double snr_db) noexcept { return std::pow(10.0, -snr_db / 10.0); }

// out[n] = amplitude * h * in[n] + w[n], w ~ CN(0, sigma^2) i.i.d.
template <typename URBG>
ComplexSignal apply_channel(const ComplexSignal& input, const ChannelRealization& realization, URBG& rng)
{
    if (realization.noise_variance < 0.0)
        throw ConfigError("noise variance must be non-negative");
    ComplexSignal out;
    out.start_index = input.start_index;
    out.samples.resize(input.size());
    const cplx gain = realization.amplitude * realization.h;
    if (realization.noise_variance == 0.0) {
        for (std::size_t n = 0; n < input.size(); ++n)
            out.samples[n] = gain * input.samples[n];
        return out;
    }
    std::normal_distribution<double> normal(0.0, std::sqrt(realization.noise_variance / 2.0));
    for (std::size_t n = 0; n < input.size(); ++n) {
        const double re = normal(rng);
        const double im = normal(rng);
        out.samples[n] = gain * input.samples[n] + cplx{re, im};
    }
    return out;
}

} // namespace selora

#endif
