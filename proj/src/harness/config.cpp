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
#include <fstream>
#include <sstream>

#include "reccal/harness.hpp"

namespace reccal {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || !std::isfinite(x))
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    return x;
}

long long to_int(const std::string& key, const std::string& v)
{
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0')
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return x;
}

int to_count(const std::string& key, const std::string& v)
{
    const long long x = to_int(key, v);
    if (x < 0 || x > 1000000000)
        throw ConfigError(key + ": out of range");
    return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "1" || v == "true" || v == "yes" || v == "on")
        return true;
    if (v == "0" || v == "false" || v == "no" || v == "off")
        return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::string> list_items(const std::string& v)
{
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty())
            out.push_back(trim(item));
    return out;
}

}  // namespace

CovMode parse_cov_mode(const std::string& v)
{
    if (v == "full")
        return CovMode::full;
    if (v == "diagonal" || v == "diag")
        return CovMode::diagonal;
    throw ConfigError("cov_mode: expected full or diagonal, got '" + v + "'");
}

PhiGamma parse_phi_gamma(const std::string& v)
{
    if (v == "unity")
        return {PhiGammaMode::unity, 1.0};
    if (v == "mom")
        return {PhiGammaMode::mom, 1.0};
    const double x = to_double("phi_gamma", v);
    if (!(x > 0.0))
        throw ConfigError("phi_gamma: a known value must be positive");
    return {PhiGammaMode::known, x};
}

void apply_setting(SweepSpec& spec, const std::string& key, const std::string& v)
{
    ScenarioConfig& sc = spec.scenario;
    if (key == "m_a")
        sc.m_a = to_count(key, v);
    else if (key == "m_b")
        sc.m_b = to_count(key, v);
    else if (key == "alpha_gain_db")
        sc.alpha_gain_db = to_double(key, v);
    else if (key == "beta_gain_db")
        sc.beta_gain_db = to_double(key, v);
    else if (key == "amplitude_error_std")
        sc.amplitude_error_std = to_double(key, v);
    else if (key == "noise_kind") {
        if (v == "white")
            sc.noise_kind = NoiseKind::white;
        else if (v == "kronecker")
            sc.noise_kind = NoiseKind::kronecker;
        else
            throw ConfigError("noise_kind: expected white or kronecker, got '" + v + "'");
    } else if (key == "repeater_channel") {
        if (v == "unit_modulus")
            sc.repeater_channel = RepeaterChannel::unit_modulus;
        else if (v == "unit_norm")
            sc.repeater_channel = RepeaterChannel::unit_norm;
        else
            throw ConfigError("repeater_channel: expected unit_modulus or unit_norm, got '" + v + "'");
    } else if (key == "spatial_corr")
        sc.spatial_corr = to_double(key, v);
    else if (key == "temporal_corr")
        sc.temporal_corr = to_double(key, v);
    else if (key == "seed" || key == "master_seed") {
        const long long x = to_int(key, v);
        if (x < 0)
            throw ConfigError(key + ": must be nonnegative");
        sc.master_seed = static_cast<std::uint64_t>(x);
    } else if (key == "snr_db" || key == "snr_grid_db") {
        spec.snr_grid_db.clear();
        for (const std::string& item : list_items(v))
            spec.snr_grid_db.push_back(to_double(key, item));
    } else if (key == "iter_grid") {
        spec.iter_grid.clear();
        for (const std::string& item : list_items(v)) {
            const long long k = to_int(key, item);
            if (k < 1 || k > 1000000)
                throw ConfigError("iter_grid: iteration counts must be >= 1");
            spec.iter_grid.push_back(static_cast<int>(k));
        }
    } else if (key == "algorithms")
        spec.algorithms = parse_algorithm_list(v);
    else if (key == "trials")
        spec.trials = to_count(key, v);
    else if (key == "cov_mode")
        spec.mmse.cov_mode = parse_cov_mode(v);
    else if (key == "phi_gamma")
        spec.mmse.phi_gamma = parse_phi_gamma(v);
    else if (key == "mmse_iter" || key == "n_iter")
        spec.mmse.n_iter = to_count(key, v);
    else if (key == "damping")
        spec.mmse.damping = to_double(key, v);
    else if (key == "nls_iter")
        spec.nls_iter = to_count(key, v);
    else if (key == "aonls_inner_iter")
        spec.aonls_inner_iter = to_count(key, v);
    else if (key == "aonls_max_outer")
        spec.aonls_max_outer = to_count(key, v);
    else if (key == "aonls_rel_tol")
        spec.aonls_rel_tol = to_double(key, v);
    else if (key == "failure_threshold")
        spec.failure_threshold = to_double(key, v);
    else if (key == "record_timing")
        spec.record_timing = to_bool(key, v);
    else if (key == "output_path" || key == "out")
        spec.output_path = v;
    else if (key == "svg_path" || key == "svg")
        spec.svg_path = v;
    else
        throw ConfigError("unknown config key '" + key + "'");
}

SweepSpec load_sweep_spec(std::istream& is, SweepSpec base)
{
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            apply_setting(base, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

SweepSpec load_sweep_spec_file(const std::string& path, SweepSpec base)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config '" + path + "'");
    return load_sweep_spec(in, std::move(base));
}

}  // namespace reccal
