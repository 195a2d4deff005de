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


// Command-line front end: SNR and iteration sweeps, the complexity benchmark
// and a single-trial dump.

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "reccal/calib_aonls.hpp"
#include "reccal/calib_nls.hpp"
#include "reccal/harness.hpp"

namespace {

using namespace reccal;

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

struct CommonFlags {
    std::string config;
    std::optional<int> trials;
    std::optional<long long> seed;
    std::string algorithms;
    std::string cov_mode;
    std::string phi_gamma;
    std::string out;
    std::string svg;
    bool timing = false;
};

void add_common(CLI::App* cmd, CommonFlags& f)
{
    cmd->add_option("--config", f.config, "key=value config file ('#' comments)");
    cmd->add_option("--trials", f.trials, "Monte Carlo trials per grid point");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--algorithms", f.algorithms, "comma list of nls,aonls,mmse");
    cmd->add_option("--cov-mode", f.cov_mode, "full|diagonal");
    cmd->add_option("--phi-gamma", f.phi_gamma, "unity|mom|<value>");
    cmd->add_option("--out", f.out, "output path (stdout when omitted)");
    cmd->add_option("--svg", f.svg, "SVG plot path");
}

SweepSpec build_spec(const CommonFlags& f, SweepSpec base)
{
    SweepSpec spec = f.config.empty() ? std::move(base) : load_sweep_spec_file(f.config, std::move(base));
    if (f.trials)
        apply_setting(spec, "trials", std::to_string(*f.trials));
    if (f.seed)
        apply_setting(spec, "seed", std::to_string(*f.seed));
    if (!f.algorithms.empty())
        apply_setting(spec, "algorithms", f.algorithms);
    if (!f.cov_mode.empty())
        apply_setting(spec, "cov_mode", f.cov_mode);
    if (!f.phi_gamma.empty())
        apply_setting(spec, "phi_gamma", f.phi_gamma);
    if (!f.out.empty())
        spec.output_path = f.out;
    if (!f.svg.empty())
        spec.svg_path = f.svg;
    if (f.timing)
        spec.record_timing = true;
    spec.validate();
    return spec;
}

int finish_sweep(const SweepSpec& spec, const SweepResult& result, const PlotAxes& axes)
{
    if (spec.output_path.empty())
        write_csv(result.rows, std::cout);
    else
        emit_csv(result.rows, spec.output_path);
    if (!spec.svg_path.empty())
        emit_svg_plot(result.rows, spec.svg_path, axes);
    if (result.failed + result.flagged > 0)
        std::cerr << "reccal: " << result.failed << " failed and " << result.flagged << " flagged runs out of "
                  << result.runs << "\n";
    for (const std::string& m : result.messages)
        std::cerr << "  " << m << "\n";
    if (result.numerical_failure(spec.failure_threshold)) {
        std::cerr << "reccal: failure rate exceeds failure_threshold=" << spec.failure_threshold << "\n";
        return kNumerical;
    }
    return kOk;
}

std::string axes_title(const SweepSpec& spec, const char* what)
{
    return std::string(what) + ", (M_A, M_B) = (" + std::to_string(spec.scenario.m_a) + ", " +
           std::to_string(spec.scenario.m_b) + ")";
}

int cmd_sweep_snr(const CommonFlags& f)
{
    const SweepSpec spec = build_spec(f, {});
    const SweepResult result = run_snr_sweep(spec);
    PlotAxes axes;
    axes.title = axes_title(spec, "RMSE of gamma vs SNR");
    return finish_sweep(spec, result, axes);
}

int cmd_sweep_iters(const CommonFlags& f)
{
    SweepSpec base;
    base.snr_grid_db = {20.0, 0.0};
    const SweepSpec spec = build_spec(f, base);
    const SweepResult result = run_iter_sweep(spec);
    PlotAxes axes;
    axes.title = axes_title(spec, "RMSE of gamma vs iterations");
    axes.x_label = "iterations";
    axes.x_is_iterations = true;
    return finish_sweep(spec, result, axes);
}

int cmd_bench(const CommonFlags& f)
{
    BenchSpec bench;
    if (f.trials)
        bench.trials = *f.trials;
    if (f.seed)
        bench.seed = static_cast<std::uint64_t>(*f.seed);
    const std::vector<BenchRow> rows = bench_complexity(bench);
    if (f.out.empty()) {
        write_bench_table(rows, std::cout);
    } else {
        std::ofstream out(f.out);
        if (!out)
            throw IoError("cannot open '" + f.out + "' for writing");
        write_bench_table(rows, out);
        if (!out)
            throw IoError("write to '" + f.out + "' failed");
    }
    return kOk;
}

void dump(std::ostream& os, const std::string& name, const ComplexMatrix& m)
{
    static const Eigen::IOFormat fmt(Eigen::FullPrecision, 0, ", ", "\n", "  [", "]");
    os << name << " (" << m.rows() << "x" << m.cols() << ")\n" << m.format(fmt) << "\n";
}

int cmd_single(const CommonFlags& f)
{
    SweepSpec spec = build_spec(f, {});
    ScenarioConfig cfg = spec.scenario;
    cfg.snr_db = spec.snr_grid_db.front();
    Rng rng = make_stream_rng(cfg.master_seed, 0, 0);
    const GroundTruth truth = draw_ground_truth(cfg, rng);
    const MeasurementSet meas = generate_measurements(truth, cfg, rng);
    const PreprocessedSet pre = preprocess(meas, raw_noise(cfg), spec.mmse.cov_mode);

    std::ofstream file;
    if (!spec.output_path.empty()) {
        file.open(spec.output_path);
        if (!file)
            throw IoError("cannot open '" + spec.output_path + "' for writing");
    }
    std::ostream& os = spec.output_path.empty() ? std::cout : file;
    os.precision(17);
    os << "snr_db " << cfg.snr_db << "  m_a " << cfg.m_a << "  m_b " << cfg.m_b << "  seed " << cfg.master_seed
       << "\n";
    os << "gamma " << truth.gamma << "  alpha " << truth.alpha << "  beta " << truth.beta << "\n";
    dump(os, "A", truth.a_diag());
    dump(os, "B", truth.b_diag());
    dump(os, "H", truth.h_matrix());
    dump(os, "Z", truth.z_matrix());
    dump(os, "X_AB0", meas.x_ab0);
    dump(os, "X_BA0", meas.x_ba0);
    dump(os, "X_AB1", meas.x_ab1);
    dump(os, "X_BA1", meas.x_ba1);
    dump(os, "R1", pre.r1);
    dump(os, "R2", pre.r2);
    dump(os, "R3", pre.r3);
    dump(os, "R4", pre.r4);

    bool flagged = false;
    for (Algorithm a : spec.algorithms) {
        CalibrationEstimate est;
        switch (a) {
        case Algorithm::nls: {
            NlsOptions o;
            o.n_iter = spec.nls_iter;
            est = nls_calibrate(pre, o);
            break;
        }
        case Algorithm::aonls: {
            AonlsOptions o;
            o.n_iter = spec.aonls_inner_iter;
            o.max_outer = spec.aonls_max_outer;
            o.rel_tol = spec.aonls_rel_tol;
            est = aonls_calibrate(pre, o);
            break;
        }
        case Algorithm::mmse:
            est = mmse_calibrate(pre, spec.mmse);
            break;
        }
        const std::string n = algorithm_name(a);
        os << "== " << n << "\n";
        os << "gamma_hat " << est.gamma_hat << "  |error| " << std::abs(est.gamma_hat - truth.gamma) << "\n";
        os << "objective " << nls_objective(pre, est) << "\n";
        dump(os, n + " A_hat", est.a_hat);
        dump(os, n + " B_hat", est.b_hat);
        dump(os, n + " Z_hat", est.z_hat);
        if (est.mse_a)
            dump(os, n + " mse_A", est.mse_a->cast<cplx>());
        if (est.mse_b)
            dump(os, n + " mse_B", est.mse_b->cast<cplx>());
        if (est.mse_gamma)
            os << n << " mse_gamma " << *est.mse_gamma << "\n";
        const Diagnostics& d = est.diagnostics;
        os << n << " diagnostics skipped=" << d.skipped_updates << " uninformative=" << d.uninformative
           << " clamped=" << d.clamped_inverse << " diverged=" << d.diverged
           << " degenerate_prior=" << d.degenerate_prior << " rank_one_unconverged=" << d.rank_one_unconverged
           << "\n";
        flagged = flagged || d.uninformative > 0 || d.degenerate_prior || d.skipped_updates > 0;
    }
    if (!os)
        throw IoError("write failed");
    return flagged ? kNumerical : kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"reccal: reciprocity calibration experiments for dual-antenna repeaters"};
    app.require_subcommand(1);
    CommonFlags flags;
    CLI::App* snr = app.add_subcommand("sweep-snr", "RMSE of gamma over an SNR grid");
    CLI::App* iters = app.add_subcommand("sweep-iters", "RMSE of gamma over iteration counts");
    CLI::App* bench = app.add_subcommand("bench", "per-trial runtime of each estimator over array sizes");
    CLI::App* single = app.add_subcommand("single", "one trial with every intermediate matrix dumped");
    for (CLI::App* cmd : {snr, iters, bench, single})
        add_common(cmd, flags);
    snr->add_flag("--timing", flags.timing, "fill mean_runtime_us (output is then not reproducible)");
    iters->add_flag("--timing", flags.timing, "fill mean_runtime_us (output is then not reproducible)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (snr->parsed())
            return cmd_sweep_snr(flags);
        if (iters->parsed())
            return cmd_sweep_iters(flags);
        if (bench->parsed())
            return cmd_bench(flags);
        return cmd_single(flags);
    } catch (const IoError& e) {
        std::cerr << "reccal: I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const DomainError& e) {
        std::cerr << "reccal: configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const NumericalError& e) {
        std::cerr << "reccal: numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "reccal: " << e.what() << "\n";
        return kNumerical;
    }
}
