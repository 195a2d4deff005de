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


#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "reccal/calib_aonls.hpp"
#include "reccal/calib_nls.hpp"
#include "reccal/harness.hpp"

namespace reccal {

namespace {

constexpr std::size_t kMaxMessages = 8;

enum class RunStatus { ok, flagged, failed };

// One algorithm on one trial. For SNR sweeps gammas has one entry; for
// iteration sweeps one entry per iter_grid point.
struct AlgoRun {
    std::vector<cplx> gammas;
    double runtime_us = 0.0;
    RunStatus status = RunStatus::ok;
    std::string message;
};

struct TrialRecord {
    cplx truth;
    std::vector<AlgoRun> runs;
};

bool hard_flag(const Diagnostics& d)
{
    // Divergence and clamping are handled by the estimators themselves.
    return d.uninformative > 0 || d.degenerate_prior || d.skipped_updates > 0;
}

int algo_iterations(const SweepSpec& spec, Algorithm a)
{
    switch (a) {
    case Algorithm::nls:
        return spec.nls_iter;
    case Algorithm::aonls:
        return spec.aonls_max_outer;
    case Algorithm::mmse:
        return spec.mmse.n_iter;
    }
    return 0;
}

cplx gamma_at(const std::vector<TraceEntry>& trace, std::size_t idx)
{
    if (trace.empty())
        throw NumericalError("empty iteration trace");
    const TraceEntry& e = trace[std::min(idx, trace.size() - 1)];
    if (!e.gamma)
        throw NumericalError("trace entry without gamma");
    return *e.gamma;
}

// Runs one estimator. iters empty: plain run with the sweep's iteration
// counts. Otherwise one run at max(iters) with gammas read from its trace.
AlgoRun run_algorithm(const SweepSpec& spec, Algorithm a, const PreprocessedSet& pre, const std::vector<int>& iters)
{
    AlgoRun out;
    const bool traced = !iters.empty();
    const int kmax = traced ? *std::max_element(iters.begin(), iters.end()) : 0;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        CalibrationEstimate est;
        switch (a) {
        case Algorithm::nls: {
            NlsOptions o;
            o.n_iter = traced ? kmax : spec.nls_iter;
            o.record_gamma = traced;
            est = nls_calibrate(pre, o);
            break;
        }
        case Algorithm::aonls: {
            AonlsOptions o;
            o.n_iter = spec.aonls_inner_iter;
            o.max_outer = traced ? kmax : spec.aonls_max_outer;
            o.rel_tol = spec.aonls_rel_tol;
            est = aonls_calibrate(pre, o);
            break;
        }
        case Algorithm::mmse: {
            MmseConfig c = spec.mmse;
            if (traced) {
                c.n_iter = kmax;
                c.record_trace = true;
            }
            est = mmse_calibrate(pre, c);
            break;
        }
        }
        const auto t1 = std::chrono::steady_clock::now();
        out.runtime_us = std::chrono::duration<double, std::micro>(t1 - t0).count();
        if (traced) {
            for (int k : iters) {
                // nls / mmse traces start at sweep 1, the aonls trace at outer pass 0.
                const std::size_t idx = a == Algorithm::aonls ? static_cast<std::size_t>(k)
                                                              : static_cast<std::size_t>(k - 1);
                out.gammas.push_back(gamma_at(est.trace, idx));
            }
        } else {
            out.gammas.push_back(est.gamma_hat);
        }
        for (const cplx& g : out.gammas)
            if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
                throw NumericalError("non-finite gamma estimate");
        if (hard_flag(est.diagnostics))
            out.status = RunStatus::flagged;
    } catch (const std::exception& e) {
        out.gammas.clear();
        out.status = RunStatus::failed;
        out.message = algorithm_name(a) + ": " + e.what();
    }
    return out;
}

TrialRecord run_trial(const SweepSpec& spec, const ScenarioConfig& cfg, const RawNoise& raw, std::size_t snr_idx,
                      int trial, const std::vector<int>& iters)
{
    TrialRecord rec;
    std::optional<PreprocessedSet> pre;
    std::string setup_error;
    try {
        Rng rng = make_stream_rng(spec.seed(), snr_idx, static_cast<std::uint64_t>(trial));
        const GroundTruth truth = draw_ground_truth(cfg, rng);
        const MeasurementSet meas = generate_measurements(truth, cfg, rng);
        rec.truth = truth.gamma;
        pre = preprocess(meas, raw, spec.mmse.cov_mode);
    } catch (const std::exception& e) {
        setup_error = std::string("scenario: ") + e.what();
    }
    for (Algorithm a : spec.algorithms) {
        if (!pre) {
            AlgoRun failed;
            failed.status = RunStatus::failed;
            failed.message = setup_error;
            rec.runs.push_back(std::move(failed));
            continue;
        }
        rec.runs.push_back(run_algorithm(spec, a, *pre, iters));
    }
    return rec;
}

std::vector<TrialRecord> run_trials(const SweepSpec& spec, const ScenarioConfig& cfg, std::size_t snr_idx,
                                    const std::vector<int>& iters, Execution exec)
{
    const RawNoise raw = raw_noise(cfg);
    std::vector<TrialRecord> records(static_cast<std::size_t>(spec.trials));
    const int threads = exec == Execution::parallel ? worker_count() : 1;
    // Every trial owns its generator and output slot, so the schedule cannot
    // influence the results.
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads > 1)
    for (int t = 0; t < spec.trials; ++t)
        records[static_cast<std::size_t>(t)] = run_trial(spec, cfg, raw, snr_idx, t, iters);
    return records;
}

// Folds the records of one SNR point into rows, in trial order.
void aggregate(const SweepSpec& spec, double snr, const std::vector<TrialRecord>& records,
               const std::vector<int>& iters, SweepResult& result)
{
    const std::size_t points = iters.empty() ? 1 : iters.size();
    for (std::size_t ai = 0; ai < spec.algorithms.size(); ++ai) {
        const Algorithm a = spec.algorithms[ai];
        std::vector<double> sq(points, 0.0);
        long ok = 0;
        double runtime = 0.0;
        for (const TrialRecord& rec : records) {
            const AlgoRun& run = rec.runs[ai];
            ++result.runs;
            if (run.status == RunStatus::failed) {
                ++result.failed;
                if (result.messages.size() < kMaxMessages)
                    result.messages.push_back(run.message);
                continue;
            }
            if (run.status == RunStatus::flagged)
                ++result.flagged;
            for (std::size_t p = 0; p < points; ++p)
                sq[p] += std::norm(run.gammas[p] - rec.truth);
            runtime += run.runtime_us;
            ++ok;
        }
        for (std::size_t p = 0; p < points; ++p) {
            ResultRow row;
            row.snr_db = snr;
            row.m_a = spec.scenario.m_a;
            row.m_b = spec.scenario.m_b;
            row.algorithm = algorithm_name(a);
            row.n_iter = iters.empty() ? algo_iterations(spec, a) : iters[p];
            row.trials = static_cast<int>(ok);
            row.rmse = ok > 0 ? std::sqrt(sq[p] / static_cast<double>(ok))
                              : std::numeric_limits<double>::quiet_NaN();
            row.mean_runtime_us = spec.record_timing && ok > 0 ? runtime / static_cast<double>(ok) : 0.0;
            row.seed = spec.seed();
            result.rows.push_back(row);
        }
    }
}

SweepResult run_sweep(const SweepSpec& spec, const std::vector<int>& iters, Execution exec)
{
    spec.validate();
    SweepResult result;
    for (std::size_t s = 0; s < spec.snr_grid_db.size(); ++s) {
        ScenarioConfig cfg = spec.scenario;
        cfg.snr_db = spec.snr_grid_db[s];
        const std::vector<TrialRecord> records = run_trials(spec, cfg, s, iters, exec);
        aggregate(spec, cfg.snr_db, records, iters, result);
    }
    return result;
}

}  // namespace

SweepResult run_snr_sweep(const SweepSpec& spec, Execution exec)
{
    return run_sweep(spec, {}, exec);
}

SweepResult run_iter_sweep(const SweepSpec& spec, Execution exec)
{
    return run_sweep(spec, spec.iter_grid, exec);
}

}  // namespace reccal
