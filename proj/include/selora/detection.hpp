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

#ifndef SELORA_DETECTION_HPP
#define SELORA_DETECTION_HPP

#include "selora/framing.hpp"
#include "selora/waveform.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace selora {

// Marks an interferer slot with no transmitted chirp.
inline constexpr int kNoChirp = -1;

inline void check_channel_gain(cplx h)
{
    if (h == cplx{})
        throw DegenerateChannelError("coherent detection needs a nonzero channel gain");
}

// Coherent detection of one m-sample window:
//   argmax_u Re{ h* DFT{ r[n] x_L*[n;0] }[u] }, smallest bin on ties.
inline int conventional_detect(const ComplexSignal& window, cplx h, const LoRaParams& params)
{
    check_channel_gain(h);
    if (window.size() != static_cast<std::size_t>(params.m))
        throw ShapeError("conventional detection expects " + std::to_string(params.m) + " samples");
    Demodulator demod(params);
    return demod.detect(window.samples, h);
}

// ---------------------------------------------------------------------------
// Dechirped-spectrum geometry of an overlapped window
// ---------------------------------------------------------------------------

// Interferer i (chirp starting i*lambda chips into the window) dechirps to a
// tone at bin mod(s_i - i*lambda, m) whose peak magnitude is (m - lambda|i|)/sqrt(m).
struct PeakPrediction {
    std::vector<int> locations;    // i = -k+1 .. k-1
    std::vector<double> magnitudes;
    int desired_index = 0;         // position of i = 0 in the vectors

    int location(int i) const { return locations[static_cast<std::size_t>(desired_index + i)]; }
    double magnitude(int i) const { return magnitudes[static_cast<std::size_t>(desired_index + i)]; }
};

inline int positive_mod(std::int64_t a, std::int64_t m) noexcept
{
    const auto r = a % m;
    return static_cast<int>(r < 0 ? r + m : r);
}

inline double interference_magnitude(const LoRaParams& params, const SEConfig& cfg, int i)
{
    if (i <= -cfg.k || i >= cfg.k)
        throw IndexError("interferer index " + std::to_string(i) + " outside [-(k-1), k-1]");
    const int overlap = params.m - cfg.lambda_chips * (i < 0 ? -i : i);
    return overlap / std::sqrt(static_cast<double>(params.m));
}

// symbols holds s_{-k+1} .. s_{k-1}.
inline PeakPrediction predict_peaks(const LoRaParams& params, const SEConfig& cfg, std::span<const int> symbols)
{
    if (symbols.size() != static_cast<std::size_t>(2 * cfg.k - 1))
        throw ConfigError("peak prediction needs 2k-1 = " + std::to_string(2 * cfg.k - 1) + " symbols");
    PeakPrediction out;
    out.desired_index = cfg.k - 1;
    for (int i = -cfg.k + 1; i < cfg.k; ++i) {
        const int s = symbols[static_cast<std::size_t>(i + cfg.k - 1)];
        check_symbol(params, s);
        out.locations.push_back(positive_mod(static_cast<std::int64_t>(s) - static_cast<std::int64_t>(i) * cfg.lambda_chips, params.m));
        out.magnitudes.push_back(interference_magnitude(params, cfg, i));
    }
    return out;
}

// Phase expansion of a shifted chirp against the basic up-chirp:
//   x_L[n - i*lambda; s] = x_L[n; 0] exp(2 pi j (alpha n + beta) / (2m)).
struct ChirpPhase {
    std::int64_t alpha;
    std::int64_t beta;
};

inline ChirpPhase shifted_chirp_phase(std::int64_t i, std::int64_t lambda, std::int64_t s, std::int64_t m) noexcept
{
    return {2 * s - 2 * i * lambda, i * i * lambda * lambda - 2 * i * lambda * s + i * lambda * m};
}

// Closed-form dechirped spectrum of a window (no FFT). symbols holds the
// 2r+1 symbols for i = -r..r; entries equal to kNoChirp are skipped, as are
// chirps with no overlap. Each truncated chirp contributes the geometric sum
//   (1/sqrt m) sum_{n=a}^{b-1} exp(2 pi j [(alpha - 2u) n + beta] / (2m)),
// with [a, b) the part of its support inside the window.
inline Spectrum analytic_vse(const LoRaParams& params, const SEConfig& cfg, std::span<const int> symbols)
{
    if (symbols.size() % 2 != 1)
        throw ConfigError("analytic spectrum needs an odd number of symbols centred on i = 0");
    const std::int64_t m = params.m;
    const std::int64_t lambda = cfg.lambda_chips;
    const auto r = static_cast<std::int64_t>(symbols.size() / 2);
    const double norm = 1.0 / std::sqrt(static_cast<double>(m));
    const double two_pi_over_2m = std::numbers::pi / static_cast<double>(m);

    Spectrum out;
    out.bins.assign(static_cast<std::size_t>(m), cplx{});
    for (std::int64_t i = -r; i <= r; ++i) {
        const int s = symbols[static_cast<std::size_t>(i + r)];
        if (s == kNoChirp)
            continue;
        check_symbol(params, s);
        const std::int64_t a = std::max<std::int64_t>(0, i * lambda);
        const std::int64_t b = std::min<std::int64_t>(m, m + i * lambda);
        if (b <= a)
            continue;
        const auto [alpha, beta] = shifted_chirp_phase(i, lambda, s, m);
        const cplx offset = std::polar(1.0, two_pi_over_2m * static_cast<double>(positive_mod(beta, 2 * m)));
        for (std::int64_t u = 0; u < m; ++u) {
            // ratio exp(j pi (alpha - 2u)/m) of consecutive terms; alpha - 2u is even
            const std::int64_t step = positive_mod(alpha - 2 * u, 2 * m);
            cplx sum;
            if (step == 0) {
                sum = static_cast<double>(b - a);
            } else {
                const double theta = two_pi_over_2m * static_cast<double>(step);
                const cplx first = std::polar(1.0, theta * static_cast<double>(a % (2 * m)));
                const cplx last = std::polar(1.0, theta * static_cast<double>(b % (2 * m)));
                sum = (first - last) / (1.0 - std::polar(1.0, theta));
            }
            out.bins[static_cast<std::size_t>(u)] += norm * offset * sum;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Interference reconstruction
// ---------------------------------------------------------------------------

// A symbol decision attached to a chirp that starts index*lambda chips into
// the current window (negative: preceding, positive: succeeding).
struct PlacedSymbol {
    int index = 0;
    int symbol = 0;
};

// sqrt(P) h sum_i x_L[n - i*lambda; s_i] restricted to the m-sample window.
inline ComplexSignal reconstruct_interference(const LoRaParams& params, const SEConfig& cfg, std::span<const PlacedSymbol> decisions,
                                              cplx h, double amplitude)
{
    const auto table = ChirpTable::get(params.m);
    ComplexSignal out;
    out.samples.assign(static_cast<std::size_t>(params.m), cplx{});
    const cplx gain = amplitude * h;
    for (const auto& d : decisions) {
        check_symbol(params, d.symbol);
        const std::int64_t offset = static_cast<std::int64_t>(d.index) * cfg.lambda_chips;
        if (offset <= -params.m || offset >= params.m)
            throw IndexError("chirp at index " + std::to_string(d.index) + " does not overlap the window");
        table->accumulate(out.samples, offset, d.symbol, gain);
    }
    return out;
}

// ---------------------------------------------------------------------------
// SIC detector
// ---------------------------------------------------------------------------

struct DetectorReport {
    std::vector<int> decisions;             // refined payload decisions
    std::vector<int> first_pass;            // filled when diagnostics are on
    std::vector<Spectrum> spectra;          // refined-pass spectra, diagnostics only
    std::uint64_t operations = 0;           // complex multiply-adds + FFT butterflies
};

struct SicOptions {
    bool diagnostics = false;
};

// Two-pass successive interference cancellation over a received frame.
//
// First pass for window j removes the preceding chirps j-r..j-1 (known prefix,
// else refined decision if one exists, else first-pass decision) and detects
// s^_j. Once first-pass decisions exist for j+1..j+r (or the frame ends),
// the refined pass for j removes preceding chirps with refined decisions and
// succeeding chirps with first-pass decisions and detects s=_j.
// r = interference_reach(), i.e. k-1, or k when k does not divide m.
class SicDetector {
public:
    SicDetector(const LoRaParams& params, const SEConfig& cfg, SicOptions options = {})
        : params_(params), cfg_(cfg), options_(options), reach_(interference_reach(params, cfg)), demod_(params),
          residual_(static_cast<std::size_t>(params.m))
    {
        if (cfg.prefix_symbols.size() != static_cast<std::size_t>(cfg.k - 1))
            throw ConfigError("SIC needs the k-1 known prefix symbols");
    }

    DetectorReport detect(std::span<const cplx> received, cplx h, double amplitude)
    {
        check_channel_gain(h);
        const auto len = static_cast<std::size_t>(frame_length(params_, cfg_));
        if (received.size() != len)
            throw ShapeError("received frame must hold " + std::to_string(len) + " samples, got " + std::to_string(received.size()));

        const int l = cfg_.payload_len;
        first_.assign(static_cast<std::size_t>(l), kNoChirp);
        refined_.assign(static_cast<std::size_t>(l), kNoChirp);
        gain_ = amplitude * h;
        h_ = h;

        DetectorReport report;
        operations_ = 0;
        if (options_.diagnostics)
            report.spectra.resize(static_cast<std::size_t>(l));

        for (int j = 0; j < l; ++j) {
            first_pass(received, j);
            if (j - reach_ >= 0)
                refine(received, j - reach_, report);
        }
        for (int q = std::max(0, l - reach_); q < l; ++q)
            refine(received, q, report);

        report.decisions = refined_;
        if (options_.diagnostics)
            report.first_pass = first_;
        report.operations = operations_;
        return report;
    }

    int reach() const noexcept { return reach_; }

    // Swap in the known prefix of the next frame.
    void set_prefix(std::span<const int> prefix)
    {
        if (prefix.size() != static_cast<std::size_t>(cfg_.k - 1))
            throw ConfigError("SIC needs the k-1 known prefix symbols");
        cfg_.prefix_symbols.assign(prefix.begin(), prefix.end());
    }

private:
    // Decision used when chirp j precedes the window being processed.
    int preceding_symbol(int j) const
    {
        if (j < 0) {
            const int slot = j + cfg_.k - 1;
            return slot >= 0 ? cfg_.prefix_symbols[static_cast<std::size_t>(slot)] : kNoChirp;
        }
        const auto idx = static_cast<std::size_t>(j);
        return refined_[idx] != kNoChirp ? refined_[idx] : first_[idx];
    }

    void load_window(std::span<const cplx> received, int q)
    {
        const auto begin = static_cast<std::size_t>(q) * static_cast<std::size_t>(cfg_.lambda_chips);
        std::copy_n(received.begin() + static_cast<std::ptrdiff_t>(begin), params_.m, residual_.begin());
    }

    void cancel(int offset_index, int symbol)
    {
        if (symbol == kNoChirp)
            return;
        operations_ += demod_.table().accumulate(residual_, static_cast<std::int64_t>(offset_index) * cfg_.lambda_chips, symbol, -gain_);
    }

    int demodulate()
    {
        const auto m = static_cast<std::uint64_t>(params_.m);
        operations_ += m + m * static_cast<std::uint64_t>(params_.sf) + m;
        return demod_.detect(residual_, h_);
    }

    void first_pass(std::span<const cplx> received, int j)
    {
        load_window(received, j);
        for (int d = 1; d <= reach_; ++d)
            cancel(-d, preceding_symbol(j - d));
        first_[static_cast<std::size_t>(j)] = demodulate();
    }

    void refine(std::span<const cplx> received, int q, DetectorReport& report)
    {
        load_window(received, q);
        const int l = cfg_.payload_len;
        for (int d = 1; d <= reach_; ++d) {
            cancel(-d, preceding_symbol(q - d));
            if (q + d < l)
                cancel(d, first_[static_cast<std::size_t>(q + d)]);
        }
        refined_[static_cast<std::size_t>(q)] = demodulate();
        if (options_.diagnostics) {
            const auto y = demod_.spectrum(residual_);
            report.spectra[static_cast<std::size_t>(q)].bins.assign(y.begin(), y.end());
        }
    }

    LoRaParams params_;
    SEConfig cfg_;
    SicOptions options_;
    int reach_;
    Demodulator demod_;
    std::vector<cplx> residual_;
    std::vector<int> first_;
    std::vector<int> refined_;
    cplx gain_;
    cplx h_;
    std::uint64_t operations_ = 0;
};

inline DetectorReport sic_detect_frame(const ComplexSignal& received, cplx h, double amplitude, const LoRaParams& params,
                                       const SEConfig& cfg, SicOptions options = {})
{
    SicDetector detector(params, cfg, options);
    return detector.detect(received.samples, h, amplitude);
}

// Per-window conventional detection with no cancellation at all.
inline DetectorReport conventional_detect_frame(const ComplexSignal& received, cplx h, const LoRaParams& params, const SEConfig& cfg)
{
    check_channel_gain(h);
    const auto len = static_cast<std::size_t>(frame_length(params, cfg));
    if (received.size() != len)
        throw ShapeError("received frame must hold " + std::to_string(len) + " samples");
    Demodulator demod(params);
    DetectorReport report;
    report.decisions.resize(static_cast<std::size_t>(cfg.payload_len));
    for (int q = 0; q < cfg.payload_len; ++q) {
        const auto begin = static_cast<std::size_t>(q) * static_cast<std::size_t>(cfg.lambda_chips);
        report.decisions[static_cast<std::size_t>(q)] =
            demod.detect(std::span<const cplx>(received.samples).subspan(begin, static_cast<std::size_t>(params.m)), h);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Joint ML
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kDefaultJointMlCap = std::uint64_t{1} << 20;

// m^l, saturating at max+1 of the cap type so the feasibility guard cannot overflow.
inline std::uint64_t candidate_count(int m, int payload_len) noexcept
{
    std::uint64_t count = 1;
    for (int i = 0; i < payload_len; ++i) {
        if (count > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(m))
            return std::numeric_limits<std::uint64_t>::max();
        count *= static_cast<std::uint64_t>(m);
    }
    return count;
}

inline void check_joint_ml_feasible(const LoRaParams& params, const SEConfig& cfg, std::uint64_t cap = kDefaultJointMlCap)
{
    if (candidate_count(params.m, cfg.payload_len) > cap)
        throw CapacityError("joint ML search over m^l = " + std::to_string(params.m) + "^" + std::to_string(cfg.payload_len) +
                            " candidates exceeds the cap of " + std::to_string(cap) + " (complexity O(l*M^(l+1)))");
}

namespace detail {

// received - sqrt(P) h C, where C is the known prefix contribution.
inline std::vector<cplx> remove_prefix(const ComplexSignal& received, cplx h, double amplitude, const LoRaParams& params,
                                       const SEConfig& cfg)
{
    const auto len = static_cast<std::size_t>(frame_length(params, cfg));
    if (received.size() != len)
        throw ShapeError("received frame must hold " + std::to_string(len) + " samples");
    std::vector<cplx> out(received.samples);
    const auto table = ChirpTable::get(params.m);
    for (int i = -cfg.k + 1; i < 0; ++i)
        table->accumulate(out, static_cast<std::int64_t>(i) * cfg.lambda_chips, cfg.prefix_symbols[static_cast<std::size_t>(i + cfg.k - 1)],
                          -amplitude * h);
    return out;
}

// <x_L[n; a], x_L[n - d*lambda; b]> over their common support, in closed form.
// The product has linear phase in n: exp(2 pi j [2n(a - b + d lambda) + phi0] / (2m)).
inline cplx chirp_overlap(int a, int b, std::int64_t shift, int m) noexcept
{
    const std::int64_t mm = m;
    if (shift >= mm)
        return {};
    const std::int64_t phi0 = -shift * shift + 2 * shift * b - shift * mm;
    const double unit = std::numbers::pi / static_cast<double>(mm);
    const cplx offset = std::polar(1.0, unit * static_cast<double>(positive_mod(phi0, 2 * mm)));
    const std::int64_t step = positive_mod(2 * (a - b + shift), 2 * mm);
    if (step == 0)
        return offset * static_cast<double>(mm - shift);
    const double theta = unit * static_cast<double>(step);
    const cplx first = std::polar(1.0, theta * static_cast<double>(shift % (2 * mm)));
    const cplx last = std::polar(1.0, theta * static_cast<double>(mm % (2 * mm)));
    return offset * (first - last) / (1.0 - std::polar(1.0, theta));
}

} // namespace detail

// 2 sqrt(P) sum_n Re{h* r_F[n] X*[n]} - P |h|^2 sum_n |X[n]|^2, with X the
// unit-gain payload superposition of the candidate and r_F the received
// frame after removing the known prefix contribution. The candidate-independent
// term -sum |r_F|^2 / sigma^2 (and the Gaussian normaliser) is dropped.
inline double joint_ml_objective(const ComplexSignal& received, cplx h, double amplitude, const LoRaParams& params,
                                 const SEConfig& cfg, std::span<const int> candidate)
{
    if (candidate.size() != static_cast<std::size_t>(cfg.payload_len))
        throw ConfigError("candidate must hold " + std::to_string(cfg.payload_len) + " symbols");
    const auto rc = detail::remove_prefix(received, h, amplitude, params, cfg);
    const auto table = ChirpTable::get(params.m);
    std::vector<cplx> payload_only(rc.size());
    for (std::size_t i = 0; i < candidate.size(); ++i) {
        check_symbol(params, candidate[i]);
        table->accumulate(payload_only, static_cast<std::int64_t>(i) * cfg.lambda_chips, candidate[i], 1.0);
    }
    const cplx hc = std::conj(h);
    double correlation = 0.0;
    double energy = 0.0;
    for (std::size_t n = 0; n < rc.size(); ++n) {
        correlation += (hc * rc[n] * std::conj(payload_only[n])).real();
        energy += std::norm(payload_only[n]);
    }
    return 2.0 * amplitude * correlation - amplitude * amplitude * std::norm(h) * energy;
}

// Exhaustive search over all m^l payloads in lexicographic order; the first
// (lexicographically smallest) maximiser wins ties.
//
// The score is evaluated in decomposed form: the correlation term splits into
// per-chirp tables sqrt(m) * DFT{dechirped window i}[s], and the energy term
// into l*m plus closed-form pairwise overlaps of neighbouring chirps.
inline DetectorReport joint_ml_detect(const ComplexSignal& received, cplx h, double amplitude, const LoRaParams& params,
                                      const SEConfig& cfg, std::uint64_t cap = kDefaultJointMlCap)
{
    check_channel_gain(h);
    check_joint_ml_feasible(params, cfg, cap);
    const auto rc = detail::remove_prefix(received, h, amplitude, params, cfg);
    const int l = cfg.payload_len;
    const int m = params.m;
    const int reach = interference_reach(params, cfg);

    Demodulator demod(params);
    const double root_m = std::sqrt(static_cast<double>(m));
    const cplx hc = std::conj(h);
    // corr[i][s] = Re{h* sum_n rc[n] conj(x_L[n - i lambda; s])}
    std::vector<std::vector<double>> corr(static_cast<std::size_t>(l), std::vector<double>(static_cast<std::size_t>(m)));
    for (int i = 0; i < l; ++i) {
        const auto begin = static_cast<std::size_t>(i) * static_cast<std::size_t>(cfg.lambda_chips);
        const auto y = demod.spectrum(std::span<const cplx>(rc).subspan(begin, static_cast<std::size_t>(m)));
        for (int s = 0; s < m; ++s)
            corr[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)] = root_m * (hc * y[static_cast<std::size_t>(s)]).real();
    }

    const double p = amplitude * amplitude * std::norm(h);
    std::vector<int> candidate(static_cast<std::size_t>(l), 0);
    std::vector<int> best(candidate);
    double best_score = -std::numeric_limits<double>::infinity();
    const auto total = candidate_count(m, l);
    for (std::uint64_t c = 0; c < total; ++c) {
        double correlation = 0.0;
        double energy = static_cast<double>(l) * m;
        for (int i = 0; i < l; ++i) {
            const int si = candidate[static_cast<std::size_t>(i)];
            correlation += corr[static_cast<std::size_t>(i)][static_cast<std::size_t>(si)];
            for (int d = 1; d <= reach && i + d < l; ++d) {
                const auto shift = static_cast<std::int64_t>(d) * cfg.lambda_chips;
                energy += 2.0 * detail::chirp_overlap(si, candidate[static_cast<std::size_t>(i + d)], shift, m).real();
            }
        }
        const double score = 2.0 * amplitude * correlation - p * energy;
        if (score > best_score) {
            best_score = score;
            best = candidate;
        }
        // odometer, last symbol fastest: lexicographic order
        for (int i = l - 1; i >= 0; --i) {
            auto& digit = candidate[static_cast<std::size_t>(i)];
            if (++digit < m)
                break;
            digit = 0;
        }
    }

    DetectorReport report;
    report.decisions = std::move(best);
    report.operations = total * static_cast<std::uint64_t>(l) * static_cast<std::uint64_t>(reach + 1);
    return report;
}

} // namespace selora

#endif
