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


#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "reccal/harness.hpp"

namespace reccal {

std::string algorithm_name(Algorithm a)
{
    switch (a) {
    case Algorithm::nls:
        return "nls";
    case Algorithm::aonls:
        return "aonls";
    case Algorithm::mmse:
        return "mmse";
    }
    return "unknown";
}

Algorithm parse_algorithm(const std::string& name)
{
    if (name == "nls")
        return Algorithm::nls;
    if (name == "aonls")
        return Algorithm::aonls;
    if (name == "mmse")
        return Algorithm::mmse;
    throw ConfigError("unknown algorithm '" + name + "'");
}

std::vector<Algorithm> parse_algorithm_list(const std::string& list)
{
    std::vector<Algorithm> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos)
            continue;
        const Algorithm a = parse_algorithm(item.substr(b, e - b + 1));
        for (Algorithm seen : out)
            if (seen == a)
                throw ConfigError("algorithm listed twice: " + algorithm_name(a));
        out.push_back(a);
    }
    if (out.empty())
        throw ConfigError("algorithm list is empty");
    return out;
}

double rmse(const std::vector<cplx>& estimates, const std::vector<cplx>& truths)
{
    if (estimates.empty() || estimates.size() != truths.size())
        throw DomainError("rmse: inputs must have equal nonzero length");
    double acc = 0.0;
    for (std::size_t t = 0; t < estimates.size(); ++t)
        acc += std::norm(estimates[t] - truths[t]);
    return std::sqrt(acc / static_cast<double>(estimates.size()));
}

void SweepSpec::validate() const
{
    try {
        ScenarioConfig probe = scenario;
        for (double snr : snr_grid_db) {
            probe.snr_db = snr;
            probe.validate();
        }
        mmse.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (trials < 1)
        throw ConfigError("trials must be >= 1");
    if (snr_grid_db.empty())
        throw ConfigError("snr grid is empty");
    if (iter_grid.empty())
        throw ConfigError("iteration grid is empty");
    for (int k : iter_grid)
        if (k < 1)
            throw ConfigError("iteration counts must be >= 1");
    if (algorithms.empty())
        throw ConfigError("no algorithms selected");
    if (nls_iter < 1 || aonls_inner_iter < 1 || aonls_max_outer < 1)
        throw ConfigError("iteration counts must be >= 1");
    if (!(aonls_rel_tol >= 0.0) || !std::isfinite(aonls_rel_tol))
        throw ConfigError("aonls_rel_tol must be a finite nonnegative number");
    if (!(failure_threshold >= 0.0 && failure_threshold <= 1.0))
        throw ConfigError("failure_threshold must lie in [0, 1]");
}

bool SweepResult::numerical_failure(double threshold) const
{
    if (runs == 0)
        return false;
    return static_cast<double>(failed + flagged) > threshold * static_cast<double>(runs);
}

int worker_count()
{
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1)
        hw = 1;
    if (const char* env = std::getenv("CALIB_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n > 0)
            return static_cast<int>(std::min<long>(n, 1024));
    }
    return hw;
}

}  // namespace reccal
