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

// Command-line front end.
//
//   selora sweep    --config run.cfg [--set key=value ...] [--workers N] [--ser-floor X]
//   selora table    --config run.cfg [--gain-l 50] [--target 1e-3]
//   selora spectrum --sf 7 --k 3 --symbols 10,30,50,70,90 [--out file.csv]
//   selora peaks    --sf 7 --k 4 --symbols 10,30,50,70,90,100,120
//   selora validate [--draws 1000] [--seed 1]
//
// Exit codes: 0 success, 1 configuration error, 2 joint ML infeasible,
// 3 sweep does not bracket the target SER.

#include "selora/selora.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <random>
#include <thread>

using namespace selora;

namespace {

struct RunOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    unsigned workers = 0;
    double ser_floor = 0.0;
};

void add_run_options(CLI::App* cmd, RunOptions& opt)
{
    cmd->add_option("-c,--config", opt.config_path, "key = value configuration file");
    cmd->add_option("-s,--set", opt.overrides, "override one configuration key, e.g. --set snr_db=0,2,4");
    cmd->add_option("-w,--workers", opt.workers, "worker threads (0: hardware concurrency)");
    cmd->add_option("--ser-floor", opt.ser_floor, "stop a sweep after the first point below this SER");
}

RunConfig resolve(const RunOptions& opt)
{
    RunConfig cfg = opt.config_path.empty() ? RunConfig{} : load_config(opt.config_path);
    for (const auto& kv : opt.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override '" + kv + "' is not key=value");
        apply_setting(cfg, std::string_view(kv).substr(0, eq), std::string_view(kv).substr(eq + 1));
    }
    if (cfg.snr_db.empty())
        throw ConfigError("snr_db is not set");
    return cfg;
}

void finish_job(SimJob& job, const RunOptions& opt)
{
    job.workers = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
    job.ser_floor = opt.ser_floor;
}

int run_sweep(const RunOptions& opt)
{
    const auto rc = resolve(opt);
    if (rc.k.size() != 1)
        throw ConfigError("sweep takes a single k; use `table` for several");
    auto job = make_job(rc, rc.k.front());
    finish_job(job, opt);
    const auto records = run_ser_sweep(job);
    if (rc.out.empty())
        emit_csv(records, std::cout);
    else
        emit_csv(records, rc.out);
    return 0;
}

int run_table(const RunOptions& opt, int gain_l, double target)
{
    const auto rc = resolve(opt);
    auto job = make_job(rc, 1);
    finish_job(job, opt);
    const auto result = reproduce_comparison(job, rc.k, gain_l, target);
    if (rc.out.empty())
        emit_csv(result.rows, std::cout);
    else
        emit_csv(result.rows, rc.out);
    return 0;
}

int run_spectrum(int sf, double bw, int k, const std::vector<int>& symbols, const std::string& out)
{
    const auto params = make_params(sf, bw);
    if (out.empty())
        emit_spectrum_csv(window_spectra(params, k, symbols), std::cout);
    else
        dump_spectrum(params, k, symbols, out);
    return 0;
}

int run_peaks(int sf, double bw, int k, const std::vector<int>& symbols)
{
    const auto params = make_params(sf, bw);
    const auto cfg = se_config(params, k, 1, std::vector<int>(static_cast<std::size_t>(k - 1), 0));
    const auto peaks = predict_peaks(params, cfg, symbols);
    std::printf("sf=%d m=%d k=%d lambda=%d\n", sf, params.m, k, cfg.lambda_chips);
    std::printf("%4s %6s %6s %10s\n", "i", "s_i", "p_i", "magnitude");
    for (int i = -k + 1; i < k; ++i)
        std::printf("%4d %6d %6d %10.4f\n", i, symbols[static_cast<std::size_t>(i + k - 1)], peaks.location(i), peaks.magnitude(i));
    return 0;
}

// Closed-form window spectra against FFT spectra of physically built frames.
int run_validate(int draws, std::uint64_t seed)
{
    Rng rng = make_stream(seed, {});
    bool ok = true;
    for (int sf : {4, 7, 9}) {
        const auto params = make_params(sf, 125e3);
        std::uniform_int_distribution<int> pick(0, params.m - 1);
        for (int k : {2, 3, 4, 5}) {
            const auto probe = se_config(params, k, 1, std::vector<int>(static_cast<std::size_t>(k - 1), 0));
            const int r = interference_reach(params, probe);
            const int q = std::max(0, r - (k - 1));
            const int l = q + r + 1;
            double worst = 0.0;
            for (int d = 0; d < draws; ++d) {
                std::vector<int> prefix(static_cast<std::size_t>(k - 1)), payload(static_cast<std::size_t>(l));
                for (auto& s : prefix)
                    s = pick(rng);
                for (auto& s : payload)
                    s = pick(rng);
                const auto cfg = se_config(params, k, l, prefix);
                const auto frame = build_frame(params, cfg, payload);
                const auto measured = dechirp_spectrum(extract_window(frame, params, q), params);
                std::vector<int> symbols;
                for (int j = q - r; j <= q + r; ++j)
                    symbols.push_back(j < 0 ? prefix[static_cast<std::size_t>(j + k - 1)] : payload[static_cast<std::size_t>(j)]);
                const auto analytic = analytic_vse(params, cfg, symbols);
                for (std::size_t u = 0; u < measured.size(); ++u)
                    worst = std::max(worst, std::abs(measured[u] - analytic[u]));
            }
            const bool pass = worst <= 1e-6;
            ok = ok && pass;
            std::printf("sf=%d k=%d draws=%d max|diff|=%.3g %s\n", sf, k, draws, worst, pass ? "ok" : "FAIL");
        }
    }
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"SE-LoRa link-level simulator"};
    app.require_subcommand(1);

    RunOptions sweep_opt;
    auto* sweep = app.add_subcommand("sweep", "SER versus SNR for one configuration, as CSV");
    add_run_options(sweep, sweep_opt);

    RunOptions table_opt;
    int gain_l = 50;
    double target = 1e-3;
    auto* table = app.add_subcommand("table", "spectral-efficiency gain and SNR loss per k, as CSV");
    add_run_options(table, table_opt);
    table->add_option("--gain-l", gain_l, "payload length used for the gain column")->check(CLI::PositiveNumber);
    table->add_option("--target", target, "SER at which the SNR loss is measured")->check(CLI::PositiveNumber);

    int sf = 7, k = 1, draws = 1000;
    double bw = 125e3;
    std::vector<int> symbols;
    std::string out;
    auto* spectrum = app.add_subcommand("spectrum", "measured and closed-form window spectrum, as CSV");
    spectrum->add_option("--sf", sf, "spreading factor")->required();
    spectrum->add_option("--bandwidth-hz", bw, "bandwidth in Hz");
    spectrum->add_option("--k", k, "overlap factor")->required();
    spectrum->add_option("--symbols", symbols, "s_{-k+1} .. s_{k-1}")->delimiter(',')->required();
    spectrum->add_option("-o,--out", out, "output file (default stdout)");

    auto* peaks = app.add_subcommand("peaks", "predicted interference peak locations and magnitudes");
    peaks->add_option("--sf", sf, "spreading factor")->required();
    peaks->add_option("--bandwidth-hz", bw, "bandwidth in Hz");
    peaks->add_option("--k", k, "overlap factor")->required();
    peaks->add_option("--symbols", symbols, "s_{-k+1} .. s_{k-1}")->delimiter(',')->required();

    std::uint64_t seed = 1;
    auto* validate = app.add_subcommand("validate", "closed-form spectra against FFT spectra on random windows");
    validate->add_option("--draws", draws, "random windows per (sf, k)")->check(CLI::PositiveNumber);
    validate->add_option("--seed", seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*sweep)
            return run_sweep(sweep_opt);
        if (*table)
            return run_table(table_opt, gain_l, target);
        if (*spectrum)
            return run_spectrum(sf, bw, k, symbols, out);
        if (*peaks)
            return run_peaks(sf, bw, k, symbols);
        if (*validate)
            return run_validate(draws, seed);
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const InsufficientSweepError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
