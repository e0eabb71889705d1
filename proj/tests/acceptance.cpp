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

// Acceptance suite: one PASS/FAIL line per criterion. Usage:
//   acceptance            run criteria 1-12
//   acceptance 1 2 5      run the listed criteria only
// The exit status is non-zero when any selected criterion fails.

#include "oracles.hpp"
#include "selora/selora.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>

using namespace selora;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<int> random_symbols(std::mt19937_64& rng, int count, int m)
{
    std::uniform_int_distribution<int> pick(0, m - 1);
    std::vector<int> out(static_cast<std::size_t>(count));
    for (auto& s : out)
        s = pick(rng);
    return out;
}

// m-sample window holding one chirp that starts i*lambda chips in, built from
// modulate_chirp by shifting and gating.
ComplexSignal shifted_chirp_window(const LoRaParams& p, int i, int lambda, int s)
{
    const auto x = modulate_chirp(p, s);
    ComplexSignal w;
    w.samples.assign(static_cast<std::size_t>(p.m), cplx{});
    for (int n = 0; n < p.m; ++n) {
        const int t = n - i * lambda;
        if (t >= 0 && t < p.m)
            w.samples[static_cast<std::size_t>(n)] = x[static_cast<std::size_t>(t)];
    }
    return w;
}

Outcome orthogonality()
{
    double worst_peak = 0.0, worst_leak = 0.0;
    for (int sf : {4, 7, 9}) {
        const auto p = make_params(sf, 125e3);
        const double root = std::sqrt(static_cast<double>(p.m));
        for (int s = 0; s < p.m; ++s) {
            const auto y = dechirp_spectrum(modulate_chirp(p, s), p);
            for (int u = 0; u < p.m; ++u) {
                const auto v = y[static_cast<std::size_t>(u)];
                if (u == s)
                    worst_peak = std::max(worst_peak, std::abs(v - root));
                else
                    worst_leak = std::max(worst_leak, std::abs(v));
            }
        }
    }
    return {worst_peak <= 1e-9 && worst_leak < 1e-9,
            "max |Y[s]-sqrt(m)| = " + fmt("%.3g", worst_peak) + ", max off-bin |Y| = " + fmt("%.3g", worst_leak)};
}

Outcome peak_locations()
{
    const auto p7 = make_params(7, 125e3);
    const auto a = predict_peaks(p7, se_config(p7, 3, 1, {0, 0}), std::vector<int>{10, 30, 50, 70, 90});
    const auto b = predict_peaks(p7, se_config(p7, 4, 1, {0, 0, 0}), std::vector<int>{10, 30, 50, 70, 90, 100, 120});
    bool ok = a.locations == std::vector<int>{94, 72, 50, 28, 6} && b.locations == std::vector<int>{106, 94, 82, 70, 58, 36, 24};
    int checked = 0, mismatched = 0;
    const auto p = make_params(4, 125e3);
    for (int k : {2, 3, 4}) {
        const auto cfg = se_config(p, k, 1, std::vector<int>(static_cast<std::size_t>(k - 1), 0));
        for (int i = -k + 1; i < k; ++i) {
            for (int s = 0; s < p.m; ++s) {
                const auto y = dechirp_spectrum(shifted_chirp_window(p, i, cfg.lambda_chips, s), p);
                std::size_t best = 0;
                for (std::size_t u = 1; u < y.size(); ++u) {
                    if (std::abs(y[u]) > std::abs(y[best]) + 1e-12)
                        best = u;
                }
                std::vector<int> symbols(static_cast<std::size_t>(2 * k - 1), 0);
                symbols[static_cast<std::size_t>(i + k - 1)] = s;
                ++checked;
                if (predict_peaks(p, cfg, symbols).location(i) != static_cast<int>(best))
                    ++mismatched;
            }
        }
    }
    ok = ok && mismatched == 0;
    return {ok, "known windows " + std::string(a.locations == std::vector<int>{94, 72, 50, 28, 6} ? "match" : "differ") + "/" +
                    (b.locations == std::vector<int>{106, 94, 82, 70, 58, 36, 24} ? "match" : "differ") + ", sf=4 sweep " +
                    std::to_string(checked - mismatched) + "/" + std::to_string(checked) + " argmax bins agree"};
}

Outcome peak_magnitudes()
{
    double worst = 0.0;
    int checked = 0;
    for (int sf : {4, 7}) {
        const auto p = make_params(sf, 125e3);
        for (int k : {2, 3, 4}) {
            const auto cfg = se_config(p, k, 1, std::vector<int>(static_cast<std::size_t>(k - 1), 0));
            for (int i = -k + 1; i < k; ++i) {
                for (int s = 0; s < p.m; ++s) {
                    const auto y = dechirp_spectrum(shifted_chirp_window(p, i, cfg.lambda_chips, s), p);
                    const int loc = positive_mod(s - static_cast<std::int64_t>(i) * cfg.lambda_chips, p.m);
                    const double expect = (p.m - cfg.lambda_chips * std::abs(i)) / std::sqrt(static_cast<double>(p.m));
                    worst = std::max(worst, std::abs(std::abs(y[static_cast<std::size_t>(loc)]) - expect));
                    worst = std::max(worst, std::abs(interference_magnitude(p, cfg, i) - expect));
                    ++checked;
                }
            }
        }
    }
    return {worst <= 1e-6, std::to_string(checked) + " interferers, max deviation " + fmt("%.3g", worst)};
}

Outcome analytic_oracle()
{
    std::mt19937_64 rng(4);
    const auto p = make_params(7, 125e3);
    double worst = 0.0;
    int draws = 0;
    for (int k : {3, 4}) {
        const auto probe = se_config(p, k, 1, std::vector<int>(static_cast<std::size_t>(k - 1), 0));
        const int r = interference_reach(p, probe);
        // window q sees chirps q-r .. q+r; the earliest must still exist
        const int q = std::max(0, r - (k - 1));
        const int l = q + r + 1;
        for (int trial = 0; trial < 1000; ++trial) {
            const auto prefix = random_symbols(rng, k - 1, p.m);
            const auto payload = random_symbols(rng, l, p.m);
            const auto cfg = se_config(p, k, l, prefix);
            const auto f = build_frame(p, cfg, payload);
            const auto measured = dechirp_spectrum(extract_window(f, p, q), p);
            std::vector<int> symbols;
            for (int j = q - r; j <= q + r; ++j)
                symbols.push_back(j < 0 ? prefix[static_cast<std::size_t>(j + k - 1)] : payload[static_cast<std::size_t>(j)]);
            const auto analytic = analytic_vse(p, cfg, symbols);
            for (std::size_t u = 0; u < measured.size(); ++u)
                worst = std::max(worst, std::abs(measured[u] - analytic[u]));
            ++draws;
        }
    }
    return {worst <= 1e-6, std::to_string(draws) + " windows, max |analytic - measured| = " + fmt("%.3g", worst)};
}

Outcome gain_table()
{
    const std::vector<std::pair<int, std::string>> table{{2, "96.08"},  {3, "188.46"}, {5, "362.96"},  {6, "445.45"},  {7, "525.00"},
                                                         {9, "675.86"}, {12, "883.61"}, {14, "1011.11"}, {15, "1071.88"}};
    std::string got;
    bool ok = true;
    for (const auto& [k, want] : table) {
        const auto exact = format_gain_percent(k, 50);
        const auto rounded = fmt("%.2f", se_gain_percent(k, 50));
        ok = ok && exact == want && rounded == want;
        got += (got.empty() ? "" : " ") + exact;
    }
    return {ok, "l=50: " + got};
}

Outcome exact_cancellation()
{
    std::mt19937_64 rng(6);
    double worst = 0.0;
    int windows = 0;
    for (int sf : {4, 7}) {
        const auto p = make_params(sf, 125e3);
        for (int k : {2, 3, 4, 5}) {
            for (int trial = 0; trial < 100; ++trial) {
                const int l = 8;
                const auto prefix = random_symbols(rng, k - 1, p.m);
                const auto payload = random_symbols(rng, l, p.m);
                const auto cfg = se_config(p, k, l, prefix);
                const auto f = build_frame(p, cfg, payload);
                const int r = interference_reach(p, cfg);
                for (int q = 0; q < l; ++q) {
                    std::vector<PlacedSymbol> others;
                    for (int i = -r; i <= r; ++i) {
                        const int j = q + i;
                        if (i == 0 || j >= l || j < -k + 1)
                            continue;
                        others.push_back({i, j < 0 ? prefix[static_cast<std::size_t>(j + k - 1)] : payload[static_cast<std::size_t>(j)]});
                    }
                    const auto w = extract_window(f, p, q);
                    const auto rec = reconstruct_interference(p, cfg, others, 1.0, 1.0);
                    const auto desired = modulate_chirp(p, payload[static_cast<std::size_t>(q)]);
                    for (std::size_t n = 0; n < w.size(); ++n)
                        worst = std::max(worst, std::abs(w[n] - rec[n] - desired[n]));
                    ++windows;
                }
            }
        }
    }
    return {worst <= 1e-9, std::to_string(windows) + " windows, max residual error " + fmt("%.3g", worst)};
}

Outcome joint_ml_equality()
{
    std::mt19937_64 rng(7);
    const auto p = make_params(2, 125e3);
    int frames = 0, agree = 0;
    for (int l : {1, 2, 3}) {
        for (int trial = 0; trial < 100; ++trial) {
            const auto prefix = random_symbols(rng, 1, p.m);
            const auto payload = random_symbols(rng, l, p.m);
            const auto cfg = se_config(p, 2, l, prefix);
            const auto f = build_frame(p, cfg, payload);
            Rng noise(rng());
            ChannelRealization ch;
            ch.h = draw_channel(ChannelSpec{ChannelKind::rayleigh}, noise);
            ch.noise_variance = snr_to_noise_variance(0.0);
            const auto rx = apply_channel(f.samples, ch, noise);
            const auto got = joint_ml_detect(rx, ch.h, 1.0, p, cfg).decisions;
            const auto want = oracle::joint_ml_brute(rx.samples, ch.h, 1.0, {prefix.begin(), prefix.end()}, l, p.m, cfg.lambda_chips);
            ++frames;
            agree += std::vector<long>(got.begin(), got.end()) == want;
        }
    }
    int windows = 0, same = 0;
    const auto cfg1 = se_config(p, 1, 1, {});
    for (int trial = 0; trial < 1000; ++trial) {
        const auto payload = random_symbols(rng, 1, p.m);
        const auto f = build_frame(p, cfg1, payload);
        Rng noise(rng());
        ChannelRealization ch;
        ch.h = draw_channel(ChannelSpec{ChannelKind::rayleigh}, noise);
        ch.noise_variance = snr_to_noise_variance(0.0);
        const auto rx = apply_channel(f.samples, ch, noise);
        ++windows;
        same += joint_ml_detect(rx, ch.h, 1.0, p, cfg1).decisions[0] == conventional_detect(rx, ch.h, p);
    }
    return {agree == frames && same == windows, "k=2 brute force " + std::to_string(agree) + "/" + std::to_string(frames) +
                                                    " frames, k=1 conventional " + std::to_string(same) + "/" + std::to_string(windows) + " windows"};
}

Outcome conventional_floor()
{
    std::mt19937_64 rng(8);
    const auto p = make_params(7, 125e3);
    std::uint64_t symbols = 0, errors = 0;
    while (symbols < 100'000) {
        const auto prefix = random_symbols(rng, 3, p.m);
        const auto payload = random_symbols(rng, 57, p.m);
        const auto cfg = se_config(p, 4, 57, prefix);
        const auto f = build_frame(p, cfg, payload);
        const auto d = conventional_detect_frame(f.samples, 1.0, p, cfg).decisions;
        for (std::size_t q = 0; q < payload.size(); ++q)
            errors += d[q] != payload[q];
        symbols += payload.size();
    }
    const double ser = static_cast<double>(errors) / static_cast<double>(symbols);
    return {ser > 1e-2, "noiseless SER " + fmt("%.4g", ser) + " over " + std::to_string(symbols) + " symbols"};
}

std::string curve_summary(const std::vector<SERRecord>& records)
{
    std::string s;
    for (const auto& r : records)
        s += (s.empty() ? "" : " ") + fmt("%g", r.snr_db) + ":" + fmt("%.2e", r.ser);
    return s;
}

// L_SER for each k against a conventional k=1 baseline on the same channel.
struct LossCheck {
    int k;
    double low;
    double high;
};

Outcome loss_reproduction(int sf, int payload_len, std::vector<double> grid, const std::vector<LossCheck>& checks)
{
    SimJob job;
    job.params = make_params(sf, 125e3);
    job.cfg = se_config(job.params, 1, payload_len, {});
    job.channel = {ChannelKind::rician, 6.0};
    job.detector = DetectorKind::sic;
    job.snr_grid_db = std::move(grid);
    job.stop = {1'000'000, 2000};
    job.master_seed = 1;
    job.workers = std::max(1u, std::thread::hardware_concurrency());
    job.ser_floor = 1e-4;

    SimJob baseline = job;
    baseline.detector = DetectorKind::conventional;
    const auto base_curve = run_ser_sweep(baseline);
    std::cout << "    k=1 conventional: " << curve_summary(base_curve) << std::endl;
    double reference = 0.0;
    try {
        reference = snr_at_target_ser(base_curve);
    } catch (const InsufficientSweepError& e) {
        return {false, std::string("baseline: ") + e.what()};
    }

    Outcome out;
    out.detail = "baseline " + fmt("%.2f", reference) + " dB;";
    for (const auto& c : checks) {
        SimJob sweep = job;
        sweep.cfg = se_config(job.params, c.k, payload_len, std::vector<int>(static_cast<std::size_t>(c.k - 1), 0));
        const auto curve = run_ser_sweep(sweep);
        std::cout << "    k=" << c.k << " sic: " << curve_summary(curve) << std::endl;
        const std::string range = "[" + fmt("%g", c.low) + ", " + fmt("%g", c.high) + "]";
        try {
            const double loss = snr_at_target_ser(curve) - reference;
            const bool ok = loss > c.low && loss < c.high;
            out.pass = out.pass && ok;
            out.detail += " k=" + std::to_string(c.k) + " L=" + fmt("%.2f", loss) + " dB " + (ok ? "in " : "outside ") + range + ";";
        } catch (const InsufficientSweepError&) {
            out.pass = false;
            double lowest = 1.0;
            for (const auto& r : curve)
                lowest = std::min(lowest, r.ser);
            out.detail += " k=" + std::to_string(c.k) + " never reaches SER 1e-3 (lowest " + fmt("%.2e", lowest) + ");";
        }
    }
    return out;
}

std::vector<double> grid(double from, double to, double step)
{
    std::vector<double> g;
    for (int i = 0; from + i * step <= to + 1e-9; ++i)
        g.push_back(from + i * step);
    return g;
}

Outcome rician_sf7()
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    return loss_reproduction(7, 57, grid(-10.0, 24.0, 1.0), {{2, -inf, 1.0}, {3, -inf, 1.0}, {5, 0.75, 2.25}, {6, 1.75, 3.25}});
}

Outcome rician_sf9() { return loss_reproduction(9, 44, grid(-10.0, 24.0, 1.0), {{14, 2.0, 4.0}}); }

Outcome channel_statistics()
{
    const int draws = 1'000'000;
    Rng rng = make_stream(11, {});
    double rayleigh = 0.0;
    for (int i = 0; i < draws; ++i)
        rayleigh += std::norm(draw_channel(ChannelSpec{ChannelKind::rayleigh}, rng));
    rayleigh /= draws;
    double rician = 0.0;
    cplx mean;
    for (int i = 0; i < draws; ++i) {
        const cplx h = draw_channel(ChannelSpec{ChannelKind::rician, 6.0}, rng);
        rician += std::norm(h);
        mean += h;
    }
    rician /= draws;
    const double los = std::norm(mean / static_cast<double>(draws));
    const bool ok = std::abs(rayleigh - 1.0) <= 0.01 && std::abs(rician - 1.0) <= 0.01 && std::abs(los - 0.799) <= 0.01;
    return {ok, "Rayleigh E|h|^2 = " + fmt("%.4f", rayleigh) + ", Rician E|h|^2 = " + fmt("%.4f", rician) + ", |E h|^2 = " + fmt("%.4f", los)};
}

Outcome determinism()
{
    SimJob job;
    job.params = make_params(7, 125e3);
    job.cfg = se_config(job.params, 4, 57, {0, 0, 0});
    job.channel = {ChannelKind::rician, 6.0};
    job.detector = DetectorKind::sic;
    job.snr_grid_db = {0.0, 4.0, 8.0};
    job.stop = {20'000, 200};
    job.master_seed = 12;
    std::string reference;
    bool identical = true;
    for (unsigned w : {1u, 4u, 8u}) {
        job.workers = w;
        std::ostringstream os;
        emit_csv(run_ser_sweep(job), os);
        if (w == 1)
            reference = os.str();
        else
            identical = identical && os.str() == reference;
    }
    const auto serial = simulate_trials(job, 2.0, 0, 240);
    Tally parts;
    for (std::uint64_t first = 0; first < 240; first += 40)
        parts += simulate_trials(job, 2.0, first, 40);
    return {identical && parts == serial, std::string("CSV at 1/4/8 workers ") + (identical ? "identical" : "differs") + ", partitioned tally " +
                                              std::to_string(parts.errors) + "/" + std::to_string(parts.symbols) + " vs serial " +
                                              std::to_string(serial.errors) + "/" + std::to_string(serial.symbols)};
}

} // namespace

int main(int argc, char** argv)
{
    const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
        {1, {"orthogonality of dechirped chirps", orthogonality}},
        {2, {"interference peak locations", peak_locations}},
        {3, {"interference peak magnitudes", peak_magnitudes}},
        {4, {"analytic spectrum vs measured spectrum", analytic_oracle}},
        {5, {"spectral-efficiency gain table", gain_table}},
        {6, {"exact interference cancellation", exact_cancellation}},
        {7, {"joint ML vs brute-force search", joint_ml_equality}},
        {8, {"conventional detection error floor", conventional_floor}},
        {9, {"Rician SF7 SER loss at 1e-3", rician_sf7}},
        {10, {"Rician SF9 k=14 SER loss at 1e-3", rician_sf9}},
        {11, {"channel gain statistics", channel_statistics}},
        {12, {"determinism and tally additivity", determinism}},
    };

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        try {
            selected.push_back(std::stoi(argv[i]));
        } catch (const std::exception&) {
            std::cerr << "usage: acceptance [criterion ...]\n";
            return 2;
        }
        if (!criteria.contains(selected.back())) {
            std::cerr << "unknown criterion " << argv[i] << '\n';
            return 2;
        }
    }
    if (selected.empty()) {
        for (const auto& [id, c] : criteria)
            selected.push_back(id);
    }

    int failed = 0;
    for (int id : selected) {
        const auto& [title, run] = criteria.at(id);
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " - " << title << " - " << o.detail << " ("
                  << fmt("%.1f", secs) << " s)" << std::endl;
    }
    std::cout << (selected.size() - static_cast<std::size_t>(failed)) << "/" << selected.size() << " criteria passed" << std::endl;
    return failed ? 1 : 0;
}
