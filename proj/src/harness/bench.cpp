// SPDX-License-Identifier: Apache-2.0
//
// reccal - reciprocity calibration of dual-antenna repeaters
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


#include <chrono>
#include <cstdio>
#include <map>
#include <ostream>

#include "reccal/calib_aonls.hpp"
#include "reccal/calib_nls.hpp"
#include "reccal/harness.hpp"

namespace reccal {

namespace {

// Keeps the optimiser from discarding an estimate whose value is unused.
volatile double g_sink = 0.0;

template <class F>
double time_us(F&& f)
{
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::micro>(t1 - t0).count();
}

}  // namespace

std::vector<BenchRow> bench_complexity(const BenchSpec& spec)
{
    if (spec.trials < 1 || spec.sizes.empty() || spec.n_iter < 1 || spec.aonls_max_outer < 1)
        throw ConfigError("bench: trials, sizes and iteration counts must be positive");
    std::vector<BenchRow> rows;
    for (std::size_t s = 0; s < spec.sizes.size(); ++s) {
        ScenarioConfig cfg;
        cfg.m_a = spec.sizes[s].first;
        cfg.m_b = spec.sizes[s].second;
        cfg.snr_db = spec.snr_db;
        cfg.validate();
        const RawNoise raw = raw_noise(cfg);

        std::vector<PreprocessedSet> data;
        for (int t = 0; t < spec.trials; ++t) {
            Rng rng = make_stream_rng(spec.seed, s, static_cast<std::uint64_t>(t));
            const GroundTruth truth = draw_ground_truth(cfg, rng);
            data.push_back(preprocess(generate_measurements(truth, cfg, rng), raw, CovMode::diagonal));
        }

        NlsOptions nls;
        nls.n_iter = spec.n_iter;
        AonlsOptions ao;
        ao.n_iter = spec.n_iter;
        ao.max_outer = spec.aonls_max_outer;
        MmseConfig diag;
        diag.n_iter = spec.n_iter;
        diag.cov_mode = CovMode::diagonal;
        MmseConfig full = diag;
        full.cov_mode = CovMode::full;

        const auto bench = [&](const std::string& variant, auto&& run) {
            run(data.front());  // warm-up
            double total = 0.0;
            double outer = 0.0;
            for (const PreprocessedSet& pre : data) {
                CalibrationEstimate est;
                total += time_us([&] { est = run(pre); });
                g_sink = g_sink + est.gamma_hat.real();
                if (!est.trace.empty())
                    outer += static_cast<double>(est.trace.back().iteration);
            }
            BenchRow row;
            row.m_a = cfg.m_a;
            row.m_b = cfg.m_b;
            row.variant = variant;
            row.trials = spec.trials;
            row.mean_runtime_us = total / spec.trials;
            row.mean_outer = outer / spec.trials;
            rows.push_back(row);
        };
        bench("nls", [&](const PreprocessedSet& pre) { return nls_calibrate(pre, nls); });
        bench("aonls", [&](const PreprocessedSet& pre) { return aonls_calibrate(pre, ao); });
        bench("mmse-diag", [&](const PreprocessedSet& pre) { return mmse_calibrate(pre, diag); });
        bench("mmse-full", [&](const PreprocessedSet& pre) { return mmse_calibrate(pre, full); });
    }
    return rows;
}

void write_bench_table(const std::vector<BenchRow>& rows, std::ostream& os)
{
    std::map<std::pair<int, int>, std::map<std::string, BenchRow>> by_size;
    std::vector<std::pair<int, int>> order;
    for (const BenchRow& r : rows) {
        const auto key = std::make_pair(r.m_a, r.m_b);
        if (!by_size.count(key))
            order.push_back(key);
        by_size[key][r.variant] = r;
    }
    char line[256];
    std::snprintf(line, sizeof line, "%-9s %12s %12s %12s %12s %10s %10s %10s %8s\n", "size", "nls_us", "aonls_us",
                  "diag_us", "full_us", "diag/nls", "full/diag", "aonls/nls", "N_opt");
    os << line;
    for (const auto& key : order) {
        auto& m = by_size[key];
        const double nls = m["nls"].mean_runtime_us;
        const double ao = m["aonls"].mean_runtime_us;
        const double diag = m["mmse-diag"].mean_runtime_us;
        const double full = m["mmse-full"].mean_runtime_us;
        const std::string size = "(" + std::to_string(key.first) + "," + std::to_string(key.second) + ")";
        std::snprintf(line, sizeof line, "%-9s %12.1f %12.1f %12.1f %12.1f %10.3f %10.3f %10.3f %8.2f\n",
                      size.c_str(), nls, ao, diag, full, diag / nls, full / diag, ao / nls, m["aonls"].mean_outer);
        os << line;
    }
}

}  // namespace reccal
