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

#ifndef SELORA_HARNESS_HPP
#define SELORA_HARNESS_HPP

#include "selora/channel.hpp"
#include "selora/detection.hpp"
#include "selora/framing.hpp"
#include "selora/waveform.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <tuple>
#include <vector>

namespace selora {

enum class DetectorKind { conventional, sic, joint_ml };

inline std::string_view to_string(DetectorKind kind) noexcept
{
    switch (kind) {
    case DetectorKind::conventional: return "conv";
    case DetectorKind::sic: return "sic";
    case DetectorKind::joint_ml: return "jointml";
    }
    return "?";
}

inline DetectorKind parse_detector_kind(std::string_view name)
{
    if (name == "conv")
        return DetectorKind::conventional;
    if (name == "sic")
        return DetectorKind::sic;
    if (name == "jointml")
        return DetectorKind::joint_ml;
    throw ConfigError("unknown detector '" + std::string(name) + "' (expected conv, sic or jointml)");
}

// Per SNR point: stop after the first frame at which either limit is reached.
struct StopRule {
    std::uint64_t max_symbols = 1'000'000;
    std::uint64_t target_errors = 200;
};

struct SimJob {
    LoRaParams params;
    SEConfig cfg;                    // prefix_symbols are redrawn per frame unless redraw_prefix is false
    bool redraw_prefix = true;
    ChannelSpec channel;
    DetectorKind detector = DetectorKind::sic;
    std::vector<double> snr_grid_db;
    StopRule stop;
    std::uint64_t master_seed = 1;
    unsigned workers = 1;
    std::uint64_t joint_ml_cap = kDefaultJointMlCap;
    // When positive, the sweep ends after the first point whose SER falls below it.
    double ser_floor = 0.0;
};

struct SERRecord {
    double snr_db = 0.0;
    std::uint64_t symbols = 0;
    std::uint64_t errors = 0;
    double ser = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;

    friend bool operator==(const SERRecord&, const SERRecord&) = default;
};

struct ComparisonRow {
    ChannelKind channel = ChannelKind::rician;
    int sf = 7;
    int k = 1;
    int l = 50;
    double gain_percent = 0.0;
    double loss_db = 0.0;
};

struct Tally {
    std::uint64_t frames = 0;
    std::uint64_t symbols = 0;
    std::uint64_t errors = 0;

    Tally& operator+=(const Tally& o) noexcept
    {
        frames += o.frames;
        symbols += o.symbols;
        errors += o.errors;
        return *this;
    }
    friend bool operator==(const Tally&, const Tally&) = default;
};

// Wilson score interval, 95 %.
inline std::pair<double, double> wilson_interval(std::uint64_t errors, std::uint64_t trials)
{
    if (trials == 0)
        return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double denom = 1.0 + z * z / n;
    const double centre = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    return {std::max(0.0, std::min(p, centre - half)), std::min(1.0, std::max(p, centre + half))};
}

inline SERRecord make_record(double snr_db, std::uint64_t symbols, std::uint64_t errors)
{
    SERRecord r;
    r.snr_db = snr_db;
    r.symbols = symbols;
    r.errors = errors;
    r.ser = symbols ? static_cast<double>(errors) / static_cast<double>(symbols) : 0.0;
    std::tie(r.ci_low, r.ci_high) = wilson_interval(errors, symbols);
    return r;
}

inline void validate_job(const SimJob& job)
{
    if (job.snr_grid_db.empty())
        throw ConfigError("SNR grid is empty");
    for (std::size_t i = 1; i < job.snr_grid_db.size(); ++i) {
        if (!(job.snr_grid_db[i] > job.snr_grid_db[i - 1]))
            throw ConfigError("SNR grid must be strictly increasing");
    }
    if (job.stop.max_symbols == 0 || job.stop.target_errors == 0)
        throw ConfigError("stop rule limits must be positive");
    if (job.cfg.lambda_chips != job.params.m / job.cfg.k)
        throw ConfigError("configuration does not match the chirp parameters");
    if (job.detector == DetectorKind::joint_ml)
        check_joint_ml_feasible(job.params, job.cfg, job.joint_ml_cap);
}

// One Monte Carlo frame. Everything random is drawn from the substream
// (master seed, SNR, trial), so the outcome does not depend on scheduling.
class FrameSimulator {
public:
    explicit FrameSimulator(const SimJob& job)
        : job_(job), cfg_(job.cfg), sic_(job.detector == DetectorKind::sic ? std::make_unique<SicDetector>(job.params, job.cfg) : nullptr),
          payload_(static_cast<std::size_t>(job.cfg.payload_len))
    {
    }

    std::uint64_t errors(double snr_db, std::uint64_t trial)
    {
        // Draw order: gain, payload, prefix, noise. Jobs that differ only in k
        // therefore see the same fades and payloads for the same trial.
        Rng rng = make_stream(job_.master_seed, {std::bit_cast<std::uint64_t>(snr_db), trial});
        ChannelRealization channel;
        channel.h = draw_channel(job_.channel, rng);
        channel.noise_variance = snr_to_noise_variance(snr_db);

        std::uniform_int_distribution<int> symbol(0, job_.params.m - 1);
        for (auto& s : payload_)
            s = symbol(rng);
        if (job_.redraw_prefix) {
            for (auto& s : cfg_.prefix_symbols)
                s = symbol(rng);
        }
        const Frame frame = build_frame(job_.params, cfg_, payload_);
        const ComplexSignal received = apply_channel(frame.samples, channel, rng);

        std::vector<int> decisions;
        switch (job_.detector) {
        case DetectorKind::conventional:
            decisions = conventional_detect_frame(received, channel.h, job_.params, cfg_).decisions;
            break;
        case DetectorKind::sic:
            sic_->set_prefix(cfg_.prefix_symbols);
            decisions = sic_->detect(received.samples, channel.h, channel.amplitude).decisions;
            break;
        case DetectorKind::joint_ml:
            decisions = joint_ml_detect(received, channel.h, channel.amplitude, job_.params, cfg_, job_.joint_ml_cap).decisions;
            break;
        }
        std::uint64_t count = 0;
        for (std::size_t i = 0; i < payload_.size(); ++i)
            count += decisions[i] != payload_[i];
        return count;
    }

private:
    const SimJob& job_;
    SEConfig cfg_;
    std::unique_ptr<SicDetector> sic_;
    std::vector<int> payload_;
};

// Tally of trials [first, first + count) at one SNR, ignoring the stop rule.
inline Tally simulate_trials(const SimJob& job, double snr_db, std::uint64_t first, std::uint64_t count)
{
    FrameSimulator sim(job);
    Tally t;
    for (std::uint64_t trial = first; trial < first + count; ++trial) {
        t.frames += 1;
        t.symbols += static_cast<std::uint64_t>(job.cfg.payload_len);
        t.errors += sim.errors(snr_db, trial);
    }
    return t;
}

// Runs one SNR point to its stop rule. Frames are evaluated in batches across
// workers but folded strictly in trial order, and the tally is cut at the
// first frame that meets the stop rule, so the record is identical for any
// worker count.
inline SERRecord run_ser_point(const SimJob& job, double snr_db)
{
    constexpr std::uint64_t batch = 16;
    const unsigned workers = std::max(1u, job.workers);
    const auto l = static_cast<std::uint64_t>(job.cfg.payload_len);

    std::uint64_t symbols = 0;
    std::uint64_t errors = 0;
    std::uint64_t next_trial = 0;
    std::vector<std::vector<std::uint64_t>> per_frame(workers);

    auto run_batch = [&](unsigned w, std::uint64_t first) {
        FrameSimulator sim(job);
        auto& out = per_frame[w];
        out.clear();
        for (std::uint64_t t = first; t < first + batch; ++t)
            out.push_back(sim.errors(snr_db, t));
    };

    for (;;) {
        if (workers == 1) {
            run_batch(0, next_trial);
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(workers);
            for (unsigned w = 0; w < workers; ++w)
                pool.emplace_back(run_batch, w, next_trial + w * batch);
        }
        for (unsigned w = 0; w < workers; ++w) {
            for (auto e : per_frame[w]) {
                symbols += l;
                errors += e;
                if (symbols >= job.stop.max_symbols || errors >= job.stop.target_errors)
                    return make_record(snr_db, symbols, errors);
            }
        }
        next_trial += workers * batch;
    }
}

inline std::vector<SERRecord> run_ser_sweep(const SimJob& job)
{
    validate_job(job);
    std::vector<SERRecord> records;
    for (double snr : job.snr_grid_db) {
        records.push_back(run_ser_point(job, snr));
        if (job.ser_floor > 0.0 && records.back().ser < job.ser_floor)
            break;
    }
    return records;
}

// SNR at which the SER curve crosses target, interpolated linearly in
// (SNR dB, log10 SER) between the first pair of points that brackets it.
inline double snr_at_target_ser(std::span<const SERRecord> records, double target = 1e-3)
{
    if (!(target > 0.0))
        throw ConfigError("target SER must be positive");
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].ser > target)
            continue;
        if (records[i].ser == target)
            return records[i].snr_db;
        if (i == 0)
            throw InsufficientSweepError("every SER point is already below the target; extend the grid to lower SNR");
        const auto& hi = records[i - 1];
        const auto& lo = records[i];
        if (lo.ser <= 0.0)
            throw InsufficientSweepError("SER drops from above the target to zero errors at " + std::to_string(lo.snr_db) +
                                         " dB; refine the grid or raise the stop rule");
        const double y0 = std::log10(hi.ser);
        const double y1 = std::log10(lo.ser);
        const double yt = std::log10(target);
        return hi.snr_db + (yt - y0) * (lo.snr_db - hi.snr_db) / (y1 - y0);
    }
    throw InsufficientSweepError("no SER point reaches the target; extend the grid to higher SNR");
}

// Baseline is conventional LoRa (k = 1) on the same channel and stop rule.
// G_SE uses gain_payload_len; the sweeps use job.cfg.payload_len.
struct ComparisonResult {
    std::vector<ComparisonRow> rows;
    std::vector<SERRecord> baseline;
    std::vector<std::vector<SERRecord>> curves;   // one per k, empty for k = 1
};

inline ComparisonResult reproduce_comparison(const SimJob& base, std::span<const int> ks, int gain_payload_len = 50, double target = 1e-3)
{
    ComparisonResult result;
    SimJob baseline = base;
    baseline.cfg = se_config(base.params, 1, base.cfg.payload_len, {});
    baseline.detector = DetectorKind::conventional;
    result.baseline = run_ser_sweep(baseline);
    const double reference = snr_at_target_ser(result.baseline, target);

    for (int k : ks) {
        ComparisonRow row;
        row.channel = base.channel.kind;
        row.sf = base.params.sf;
        row.k = k;
        row.l = gain_payload_len;
        row.gain_percent = se_gain_percent(k, gain_payload_len);
        if (k == 1) {
            row.loss_db = 0.0;
            result.curves.emplace_back();
        } else {
            SimJob job = base;
            job.cfg = se_config(base.params, k, base.cfg.payload_len, std::vector<int>(static_cast<std::size_t>(k - 1), 0));
            result.curves.push_back(run_ser_sweep(job));
            row.loss_db = snr_at_target_ser(result.curves.back(), target) - reference;
        }
        result.rows.push_back(row);
    }
    return result;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

// Shortest representation that parses back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline void emit_csv(std::span<const SERRecord> records, std::ostream& os)
{
    os << "snr_db,symbols,errors,ser,ci_low,ci_high\n";
    for (const auto& r : records)
        os << format_double(r.snr_db) << ',' << r.symbols << ',' << r.errors << ',' << format_double(r.ser) << ','
           << format_double(r.ci_low) << ',' << format_double(r.ci_high) << '\n';
}

inline void emit_csv(std::span<const ComparisonRow> rows, std::ostream& os)
{
    os << "channel,sf,k,l,gse_percent,lser_db\n";
    for (const auto& r : rows)
        os << to_string(r.channel) << ',' << r.sf << ',' << r.k << ',' << r.l << ',' << format_gain_percent(r.k, r.l) << ','
           << format_double(r.loss_db) << '\n';
}

namespace detail {

inline std::ofstream open_for_write(const std::string& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw IoError("cannot open '" + path + "' for writing");
    return os;
}

inline void finish_write(std::ofstream& os, const std::string& path)
{
    os.flush();
    if (!os)
        throw IoError("failed writing '" + path + "'");
}

inline std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

template <typename T>
T parse_number(std::string_view text)
{
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
        text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    T value{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ConfigError("not a number: '" + std::string(text) + "'");
    return value;
}

} // namespace detail

inline void emit_csv(std::span<const SERRecord> records, const std::string& path)
{
    auto os = detail::open_for_write(path);
    emit_csv(records, os);
    detail::finish_write(os, path);
}

inline void emit_csv(std::span<const ComparisonRow> rows, const std::string& path)
{
    auto os = detail::open_for_write(path);
    emit_csv(rows, os);
    detail::finish_write(os, path);
}

inline std::vector<SERRecord> parse_ser_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line != "snr_db,symbols,errors,ser,ci_low,ci_high")
        throw ConfigError("missing or unexpected SER CSV header");
    std::vector<SERRecord> out;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 6)
            throw ConfigError("SER CSV row must have 6 fields: " + line);
        SERRecord r;
        r.snr_db = detail::parse_number<double>(f[0]);
        r.symbols = detail::parse_number<std::uint64_t>(f[1]);
        r.errors = detail::parse_number<std::uint64_t>(f[2]);
        r.ser = detail::parse_number<double>(f[3]);
        r.ci_low = detail::parse_number<double>(f[4]);
        r.ci_high = detail::parse_number<double>(f[5]);
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spectrum dump
// ---------------------------------------------------------------------------

struct SpectrumPair {
    Spectrum measured;   // FFT of the dechirped window 0 of a physically built frame
    Spectrum analytic;   // closed form
};

// symbols holds s_{-k+1} .. s_{k-1}: the first k-1 become the known prefix,
// the rest the payload, so window 0 contains exactly those 2k-1 chirps.
inline SpectrumPair window_spectra(const LoRaParams& params, int k, std::span<const int> symbols)
{
    if (symbols.size() != static_cast<std::size_t>(2 * k - 1))
        throw ConfigError("spectrum dump needs 2k-1 = " + std::to_string(2 * k - 1) + " symbols");
    std::vector<int> prefix(symbols.begin(), symbols.begin() + (k - 1));
    const SEConfig cfg = se_config(params, k, k, prefix);
    const Frame frame = build_frame(params, cfg, symbols.subspan(static_cast<std::size_t>(k - 1)));
    SpectrumPair out;
    out.measured = dechirp_spectrum(extract_window(frame, params, 0), params);
    out.analytic = analytic_vse(params, cfg, symbols);
    return out;
}

inline void emit_spectrum_csv(const SpectrumPair& spectra, std::ostream& os)
{
    os << "bin,re_measured,im_measured,re_analytic,im_analytic\n";
    for (std::size_t u = 0; u < spectra.measured.size(); ++u)
        os << u << ',' << format_double(spectra.measured[u].real()) << ',' << format_double(spectra.measured[u].imag()) << ','
           << format_double(spectra.analytic[u].real()) << ',' << format_double(spectra.analytic[u].imag()) << '\n';
}

inline void dump_spectrum(const LoRaParams& params, int k, std::span<const int> symbols, const std::string& path)
{
    const auto spectra = window_spectra(params, k, symbols);
    auto os = detail::open_for_write(path);
    emit_spectrum_csv(spectra, os);
    detail::finish_write(os, path);
}

} // namespace selora

#endif
