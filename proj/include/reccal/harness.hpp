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


#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "reccal/calib_mmse.hpp"
#include "reccal/scenario.hpp"

namespace reccal {

/// Invalid sweep or scenario configuration.
class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Output could not be written or input could not be read.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Algorithm { nls, aonls, mmse };

std::string algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);
/// Comma separated list, e.g. "nls,mmse". Throws ConfigError on unknown or duplicate names.
std::vector<Algorithm> parse_algorithm_list(const std::string& list);

/// sqrt(mean |est - truth|^2). Throws DomainError for empty or mismatched input.
double rmse(const std::vector<cplx>& estimates, const std::vector<cplx>& truths);

struct SweepSpec {
    ScenarioConfig scenario;  // snr_db is overridden by the grid
    std::vector<double> snr_grid_db{0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
    // Iteration counts visited by run_iter_sweep. For aonls they count outer passes.
    std::vector<int> iter_grid{1, 2, 3, 4, 5, 10, 20, 50, 100};
    std::vector<Algorithm> algorithms{Algorithm::nls, Algorithm::aonls, Algorithm::mmse};
    int trials = 1000;
    MmseConfig mmse;
    int nls_iter = 100;
    int aonls_inner_iter = 100;
    int aonls_max_outer = 20;
    double aonls_rel_tol = 1e-6;
    // Fraction of (trial, algorithm) runs allowed to fail or be flagged before
    // the sweep reports a numerical failure.
    double failure_threshold = 0.01;
    bool record_timing = false;  // otherwise mean_runtime_us is written as 0
    std::string output_path;
    std::string svg_path;

    void validate() const;
    std::uint64_t seed() const { return scenario.master_seed; }
};

struct ResultRow {
    double snr_db = 0.0;
    int m_a = 0;
    int m_b = 0;
    std::string algorithm;
    int n_iter = 0;
    int trials = 0;
    double rmse = 0.0;
    double mean_runtime_us = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const ResultRow&) const = default;
};

struct SweepResult {
    std::vector<ResultRow> rows;
    long runs = 0;     // (trial, algorithm) pairs executed
    long failed = 0;   // threw; excluded from the RMSE
    long flagged = 0;  // finished with a hard diagnostic (uninformative, degenerate prior, skipped update)
    std::vector<std::string> messages;  // first few failure messages

    bool numerical_failure(double threshold) const;
};

enum class Execution { parallel, serial };

/// Worker count: CALIB_THREADS if set to a positive integer, else the hardware parallelism.
int worker_count();

/// One row per (snr, algorithm). Trial t at grid point s draws its truth and
/// measurements from make_stream_rng(seed, s, t), shared by every algorithm.
/// Rows are a pure function of the SweepSpec unless record_timing is set.
SweepResult run_snr_sweep(const SweepSpec& spec, Execution exec = Execution::parallel);

/// One row per (snr, algorithm, n_iter in iter_grid). NLS and MMSE read the
/// per-sweep gamma trace of a single run; AO-NLS reads its per-outer-pass trace.
SweepResult run_iter_sweep(const SweepSpec& spec, Execution exec = Execution::parallel);

extern const char* const kCsvHeader;

void write_csv(const std::vector<ResultRow>& rows, std::ostream& os);
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> parse_csv(std::istream& is);

struct PlotAxes {
    std::string title;
    std::string x_label = "SNR [dB]";
    std::string y_label = "RMSE";
    bool x_is_iterations = false;  // plot against n_iter instead of snr_db
};

/// Log-y line chart, one polyline per series. Series are keyed by algorithm,
/// plus the SNR when plotting against iterations.
std::string render_svg(const std::vector<ResultRow>& rows, const PlotAxes& axes);
void emit_svg_plot(const std::vector<ResultRow>& rows, const std::string& path, const PlotAxes& axes);

CovMode parse_cov_mode(const std::string& v);
/// "unity", "mom" or a positive number (known E|gamma|^2).
PhiGamma parse_phi_gamma(const std::string& v);
/// Applies one config key. Throws ConfigError for unknown keys or bad values.
void apply_setting(SweepSpec& spec, const std::string& key, const std::string& value);

/// Parses key=value lines ('#' starts a comment) on top of `base`.
SweepSpec load_sweep_spec(std::istream& is, SweepSpec base = {});
SweepSpec load_sweep_spec_file(const std::string& path, SweepSpec base = {});

struct BenchSpec {
    std::vector<std::pair<int, int>> sizes{{4, 3}, {8, 8}, {32, 16}, {64, 32}};
    int trials = 20;
    double snr_db = 10.0;
    std::uint64_t seed = 1;
    int n_iter = 100;
    int aonls_max_outer = 20;
};

struct BenchRow {
    int m_a = 0;
    int m_b = 0;
    std::string variant;  // nls, aonls, mmse-diag, mmse-full
    int trials = 0;
    double mean_runtime_us = 0.0;
    double mean_outer = 0.0;  // aonls only: mean outer passes taken
};

/// Mean wall time per trial of each variant, timing only the estimator.
/// Runs serially so numbers are not distorted by contention.
std::vector<BenchRow> bench_complexity(const BenchSpec& spec);
void write_bench_table(const std::vector<BenchRow>& rows, std::ostream& os);

}  // namespace reccal
