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


// Serial reference vs OpenMP trial-parallel sweep, followed by the
// per-estimator complexity table.
//
//   reccal_bench [trials] [bench_trials]

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "reccal/harness.hpp"

using namespace reccal;

namespace {

std::string csv_of(const SweepResult& r)
{
    std::ostringstream os;
    write_csv(r.rows, os);
    return os.str();
}

}  // namespace

int main(int argc, char** argv)
{
    const int trials = argc > 1 ? std::atoi(argv[1]) : 200;
    const int bench_trials = argc > 2 ? std::atoi(argv[2]) : 20;
    if (trials < 1 || bench_trials < 1) {
        std::cerr << "usage: reccal_bench [trials] [bench_trials]\n";
        return 2;
    }

    SweepSpec spec;
    spec.trials = trials;
    spec.snr_grid_db = {0.0, 10.0, 20.0};
    spec.scenario.m_a = 8;
    spec.scenario.m_b = 8;

    const auto run = [&](Execution exec, double& seconds) {
        const auto t0 = std::chrono::steady_clock::now();
        SweepResult r = run_snr_sweep(spec, exec);
        seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return r;
    };
    double t_serial = 0.0;
    double t_parallel = 0.0;
    const SweepResult serial = run(Execution::serial, t_serial);
    const SweepResult parallel = run(Execution::parallel, t_parallel);
    const bool same = csv_of(serial) == csv_of(parallel);

    std::cout << "sweep (8,8), 3 SNR points, " << trials << " trials, nls+aonls+mmse\n"
              << "  serial    " << t_serial << " s\n"
              << "  parallel  " << t_parallel << " s with " << worker_count() << " workers, speedup "
              << t_serial / t_parallel << "\n"
              << "  outputs identical: " << (same ? "yes" : "NO") << "\n\n";

    BenchSpec bench;
    bench.trials = bench_trials;
    write_bench_table(bench_complexity(bench), std::cout);
    return same ? 0 : 1;
}
