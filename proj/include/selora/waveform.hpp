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

#ifndef SELORA_WAVEFORM_HPP
#define SELORA_WAVEFORM_HPP

#include "selora/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace selora {

using cplx = std::complex<double>;

// Chirp geometry. One sample per chip, so the symbol spans m samples.
struct LoRaParams {
    int sf = 7;
    double bandwidth_hz = 125e3;
    int m = 128;
    double symbol_duration_s = 128.0 / 125e3;
};

// Finite run of complex baseband samples; start_index is the chip offset of
// samples[0] relative to the frame origin.
struct ComplexSignal {
    std::vector<cplx> samples;
    std::int64_t start_index = 0;

    std::size_t size() const noexcept { return samples.size(); }
    const cplx& operator[](std::size_t n) const { return samples[n]; }
    cplx& operator[](std::size_t n) { return samples[n]; }
};

// Output of the unitary DFT, indexed by frequency bin.
struct Spectrum {
    std::vector<cplx> bins;

    std::size_t size() const noexcept { return bins.size(); }
    const cplx& operator[](std::size_t u) const { return bins[u]; }
};

// sf in [2, 12]. sf < 7 is outside the LoRaWAN set and only meant for
// exhaustive test-scale oracles.
inline LoRaParams make_params(int sf, double bandwidth_hz)
{
    if (sf < 2 || sf > 12)
        throw ConfigError("spreading factor must lie in [2, 12], got " + std::to_string(sf));
    if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz))
        throw ConfigError("bandwidth must be a positive finite number of Hz");
    LoRaParams p;
    p.sf = sf;
    p.bandwidth_hz = bandwidth_hz;
    p.m = 1 << sf;
    p.symbol_duration_s = static_cast<double>(p.m) / bandwidth_hz;
    return p;
}

inline void check_symbol(const LoRaParams& params, int s)
{
    if (s < 0 || s >= params.m)
        throw SymbolError("symbol " + std::to_string(s) + " outside [0, " + std::to_string(params.m - 1) + "]");
}

namespace detail {

// Process-wide cache of immutable per-m objects.
template <typename T>
std::shared_ptr<const T> cached_for(int m)
{
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const T>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[m];
    if (!slot)
        slot = std::make_shared<const T>(m);
    return slot;
}

inline std::mutex& fftw_planner_mutex()
{
    static std::mutex mutex;
    return mutex;
}

} // namespace detail

// Chirp synthesis by table lookup. The chirp phase 2*pi*(t^2 + 2ts - tm)/(2m)
// is an integer multiple of pi/m, so every sample is one entry of a 2m-point
// unit-circle table and no phase error accumulates with t.
class ChirpTable {
public:
    explicit ChirpTable(int m) : m_(m), mask_(2 * static_cast<std::uint64_t>(m) - 1), unit_(2 * static_cast<std::size_t>(m))
    {
        for (std::size_t k = 0; k < unit_.size(); ++k) {
            // Exact values on the axes keep s=0 / n=0 samples bit-exact.
            const double angle = std::numbers::pi * static_cast<double>(k) / m;
            if (k == 0)
                unit_[k] = {1.0, 0.0};
            else if (2 * k == unit_.size())
                unit_[k] = {-1.0, 0.0};
            else if (4 * k == unit_.size())
                unit_[k] = {0.0, 1.0};
            else if (4 * k == 3 * unit_.size())
                unit_[k] = {0.0, -1.0};
            else
                unit_[k] = {std::cos(angle), std::sin(angle)};
        }
    }

    int m() const noexcept { return m_; }

    // x_L[t; s] for local chip index t in [0, m)
    cplx sample(std::int64_t t, int s) const noexcept
    {
        const std::int64_t k = t * (t + 2 * static_cast<std::int64_t>(s) - m_);
        return unit_[static_cast<std::uint64_t>(k) & mask_];
    }

    // Adds gain * x_L[n - offset; s] to out[n] over the chirp's support.
    // Returns the number of samples touched.
    std::size_t accumulate(std::span<cplx> out, std::int64_t offset, int s, cplx gain) const noexcept
    {
        const std::int64_t len = static_cast<std::int64_t>(out.size());
        const std::int64_t lo = std::max<std::int64_t>(0, offset);
        const std::int64_t hi = std::min<std::int64_t>(len, offset + m_);
        for (std::int64_t n = lo; n < hi; ++n)
            out[static_cast<std::size_t>(n)] += gain * sample(n - offset, s);
        return hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
    }

    static std::shared_ptr<const ChirpTable> get(int m) { return detail::cached_for<ChirpTable>(m); }

private:
    int m_;
    std::uint64_t mask_;
    std::vector<cplx> unit_;
};

// Unitary DFT of a fixed power-of-two length, backed by an FFTW plan.
// Plans are created once under the planner lock; execution is re-entrant.
class UnitaryDft {
public:
    explicit UnitaryDft(int m) : m_(m), scale_(1.0 / std::sqrt(static_cast<double>(m)))
    {
        std::vector<cplx> in(static_cast<std::size_t>(m)), out(static_cast<std::size_t>(m));
        std::lock_guard lock(detail::fftw_planner_mutex());
        plan_ = fftw_plan_dft_1d(m, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()),
                                 FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    ~UnitaryDft()
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }
    UnitaryDft(const UnitaryDft&) = delete;
    UnitaryDft& operator=(const UnitaryDft&) = delete;

    int m() const noexcept { return m_; }

    // in and out must both hold m samples and must not alias.
    void operator()(std::span<const cplx> in, std::span<cplx> out) const
    {
        fftw_execute_dft(plan_, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                         reinterpret_cast<fftw_complex*>(out.data()));
        for (auto& v : out)
            v *= scale_;
    }

    static std::shared_ptr<const UnitaryDft> get(int m) { return detail::cached_for<UnitaryDft>(m); }

private:
    int m_;
    double scale_;
    fftw_plan plan_ = nullptr;
};

inline bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

inline ComplexSignal modulate_chirp(const LoRaParams& params, int s)
{
    check_symbol(params, s);
    const auto table = ChirpTable::get(params.m);
    ComplexSignal out;
    out.samples.resize(static_cast<std::size_t>(params.m));
    for (int n = 0; n < params.m; ++n)
        out.samples[static_cast<std::size_t>(n)] = table->sample(n, s);
    return out;
}

inline ComplexSignal basic_upchirp(const LoRaParams& params) { return modulate_chirp(params, 0); }

inline ComplexSignal dechirp(const ComplexSignal& signal, const LoRaParams& params)
{
    if (signal.size() != static_cast<std::size_t>(params.m))
        throw ShapeError("dechirp expects " + std::to_string(params.m) + " samples, got " + std::to_string(signal.size()));
    const auto table = ChirpTable::get(params.m);
    ComplexSignal out;
    out.start_index = signal.start_index;
    out.samples.resize(signal.size());
    for (std::size_t n = 0; n < signal.size(); ++n)
        out.samples[n] = signal.samples[n] * std::conj(table->sample(static_cast<std::int64_t>(n), 0));
    return out;
}

inline Spectrum dft(const ComplexSignal& signal)
{
    if (!is_power_of_two(signal.size()) || signal.size() > (std::size_t{1} << 24))
        throw ShapeError("dft length must be a power of two, got " + std::to_string(signal.size()));
    const auto transform = UnitaryDft::get(static_cast<int>(signal.size()));
    Spectrum out;
    out.bins.resize(signal.size());
    (*transform)(signal.samples, out.bins);
    return out;
}

inline Spectrum dechirp_spectrum(const ComplexSignal& signal, const LoRaParams& params)
{
    return dft(dechirp(signal, params));
}

// Reusable buffers for the detector hot path: dechirp + unitary DFT without
// per-call allocation.
class Demodulator {
public:
    explicit Demodulator(const LoRaParams& params)
        : params_(params), table_(ChirpTable::get(params.m)), dft_(UnitaryDft::get(params.m)),
          reference_(static_cast<std::size_t>(params.m)), scratch_(static_cast<std::size_t>(params.m)),
          spectrum_(static_cast<std::size_t>(params.m))
    {
        for (int n = 0; n < params.m; ++n)
            reference_[static_cast<std::size_t>(n)] = std::conj(table_->sample(n, 0));
    }

    const LoRaParams& params() const noexcept { return params_; }
    const ChirpTable& table() const noexcept { return *table_; }

    std::span<const cplx> spectrum(std::span<const cplx> window)
    {
        if (window.size() != reference_.size())
            throw ShapeError("window must hold " + std::to_string(params_.m) + " samples");
        for (std::size_t n = 0; n < window.size(); ++n)
            scratch_[n] = window[n] * reference_[n];
        (*dft_)(scratch_, spectrum_);
        return spectrum_;
    }

    // argmax_u Re{h* Y[u]}, smallest u on ties
    int detect(std::span<const cplx> window, cplx h)
    {
        const auto y = spectrum(window);
        const cplx hc = std::conj(h);
        int best = 0;
        double best_value = (hc * y[0]).real();
        for (std::size_t u = 1; u < y.size(); ++u) {
            const double value = (hc * y[u]).real();
            if (value > best_value) {
                best_value = value;
                best = static_cast<int>(u);
            }
        }
        return best;
    }

private:
    LoRaParams params_;
    std::shared_ptr<const ChirpTable> table_;
    std::shared_ptr<const UnitaryDft> dft_;
    std::vector<cplx> reference_;
    std::vector<cplx> scratch_;
    std::vector<cplx> spectrum_;
};

} // namespace selora

#endif
