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


#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "reccal/harness.hpp"

using namespace reccal;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::string csv_of(const std::vector<ResultRow>& rows)
{
    std::ostringstream os;
    write_csv(rows, os);
    return os.str();
}

SweepSpec small_spec()
{
    SweepSpec s;
    s.scenario.m_a = 4;
    s.scenario.m_b = 3;
    s.scenario.master_seed = 77;
    s.snr_grid_db = {5.0, 20.0};
    s.trials = 24;
    s.nls_iter = 20;
    s.aonls_inner_iter = 20;
    s.aonls_max_outer = 4;
    s.mmse.n_iter = 10;
    return s;
}

// Sets CALIB_THREADS for the lifetime of the object.
class ThreadsEnv {
public:
    explicit ThreadsEnv(const char* value)
    {
        if (const char* old = std::getenv("CALIB_THREADS"))
            saved_ = old;
        if (value != nullptr)
            ::setenv("CALIB_THREADS", value, 1);
        else
            ::unsetenv("CALIB_THREADS");
    }
    ~ThreadsEnv()
    {
        if (saved_.empty())
            ::unsetenv("CALIB_THREADS");
        else
            ::setenv("CALIB_THREADS", saved_.c_str(), 1);
    }
    ThreadsEnv(const ThreadsEnv&) = delete;
    ThreadsEnv& operator=(const ThreadsEnv&) = delete;

private:
    std::string saved_;
};

}  // namespace

TEST_CASE("rmse examples", "[harness][metrics]")
{
    const std::vector<cplx> t{cplx(1.0, 0.0), cplx(0.0, -1.0)};
    CHECK(rmse(t, t) == 0.0);
    CHECK_THAT(rmse({cplx(1.3, 0.4)}, {cplx(1.0, 0.0)}), WithinAbs(0.5, 1e-15));
    CHECK_THAT(rmse({cplx(1.0, 0.0), cplx(2.0, 0.0)}, {cplx(0.0, 0.0), cplx(2.0, 0.0)}),
               WithinAbs(1.0 / std::sqrt(2.0), 1e-15));
    CHECK_THAT(rmse({cplx(1.0, 0.0), cplx(2.0, 0.0)}, {cplx(0.0, 0.0), cplx(2.0, 0.0)}), WithinAbs(0.7071, 1e-4));
    CHECK_THROWS_AS(rmse({}, {}), DomainError);
    CHECK_THROWS_AS(rmse({cplx(1.0, 0.0)}, {}), DomainError);
}

TEST_CASE("algorithm names", "[harness][metrics]")
{
    for (Algorithm a : {Algorithm::nls, Algorithm::aonls, Algorithm::mmse})
        CHECK(parse_algorithm(algorithm_name(a)) == a);
    CHECK(parse_algorithm_list("nls, mmse") == std::vector<Algorithm>{Algorithm::nls, Algorithm::mmse});
    CHECK_THROWS_AS(parse_algorithm("lms"), ConfigError);
    CHECK_THROWS_AS(parse_algorithm_list("nls,nls"), ConfigError);
    CHECK_THROWS_AS(parse_algorithm_list(""), ConfigError);
}

TEST_CASE("sweep spec validation", "[harness][config]")
{
    SweepSpec s = small_spec();
    CHECK_NOTHROW(s.validate());
    apply_setting(s, "n_iter", "0");
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = small_spec();
    s.trials = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = small_spec();
    s.snr_grid_db.clear();
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = small_spec();
    s.algorithms.clear();
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = small_spec();
    s.nls_iter = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = small_spec();
    s.scenario.m_a = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK_THROWS_AS(run_snr_sweep(s), ConfigError);
}

TEST_CASE("config files", "[harness][config]")
{
    std::istringstream in("# comment line\n"
                          "m_a = 16   # trailing comment\n"
                          "m_b=4\n"
                          "\n"
                          "snr_grid_db = 0, 10,20\n"
                          "algorithms = mmse,nls\n"
                          "trials = 50\n"
                          "cov_mode = full\n"
                          "phi_gamma = 2.5\n"
                          "seed = 123\n"
                          "iter_grid = 1,4,100\n"
                          "noise_kind = kronecker\n"
                          "spatial_corr = 0.3\n");
    const SweepSpec s = load_sweep_spec(in);
    CHECK(s.scenario.m_a == 16);
    CHECK(s.scenario.m_b == 4);
    CHECK(s.snr_grid_db == std::vector<double>{0.0, 10.0, 20.0});
    CHECK(s.algorithms == std::vector<Algorithm>{Algorithm::mmse, Algorithm::nls});
    CHECK(s.trials == 50);
    CHECK(s.mmse.cov_mode == CovMode::full);
    CHECK(s.mmse.phi_gamma.mode == PhiGammaMode::known);
    CHECK(s.mmse.phi_gamma.value == 2.5);
    CHECK(s.seed() == 123);
    CHECK(s.iter_grid == std::vector<int>{1, 4, 100});
    CHECK(s.scenario.noise_kind == NoiseKind::kronecker);
    CHECK(s.scenario.spatial_corr == 0.3);

    std::istringstream unknown("m_a = 4\nbogus = 1\n");
    CHECK_THROWS_WITH(load_sweep_spec(unknown), Catch::Matchers::ContainsSubstring("line 2"));
    std::istringstream malformed("m_a 4\n");
    CHECK_THROWS_AS(load_sweep_spec(malformed), ConfigError);
    std::istringstream bad_value("trials = many\n");
    CHECK_THROWS_AS(load_sweep_spec(bad_value), ConfigError);

    CHECK(parse_cov_mode("diagonal") == CovMode::diagonal);
    CHECK_THROWS_AS(parse_cov_mode("sparse"), ConfigError);
    CHECK(parse_phi_gamma("unity").mode == PhiGammaMode::unity);
    CHECK(parse_phi_gamma("mom").mode == PhiGammaMode::mom);
    CHECK_THROWS_AS(parse_phi_gamma("-1"), ConfigError);
    CHECK_THROWS_AS(load_sweep_spec_file("/nonexistent/dir/cfg.txt"), IoError);
}

TEST_CASE("csv header and round trip", "[harness][report]")
{
    ResultRow r{12.5, 8, 4, "mmse", 100, 1000, 0.012345678901234567, 3.25, 18446744073709551615ull};
    const std::string text = csv_of({r});
    CHECK(text.substr(0, text.find('\n')) == "snr_db,m_a,m_b,algorithm,n_iter,trials,rmse,mean_runtime_us,seed");
    CHECK(std::string(kCsvHeader) == "snr_db,m_a,m_b,algorithm,n_iter,trials,rmse,mean_runtime_us,seed");
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);

    std::istringstream in(text);
    const std::vector<ResultRow> back = parse_csv(in);
    REQUIRE(back.size() == 1);
    CHECK(back[0] == r);

    std::istringstream bad("snr_db,m_a\n1,2\n");
    CHECK_THROWS_AS(parse_csv(bad), IoError);
}

TEST_CASE("svg chart has decade ticks and one polyline per algorithm", "[harness][report]")
{
    std::vector<ResultRow> rows;
    for (double snr : {0.0, 10.0, 20.0}) {
        rows.push_back({snr, 8, 8, "nls", 100, 10, 0.2 * std::pow(10.0, -snr / 20.0), 0.0, 1});
        rows.push_back({snr, 8, 8, "mmse", 100, 10, 0.1 * std::pow(10.0, -snr / 20.0), 0.0, 1});
    }
    const std::string svg = render_svg(rows, {"RMSE <vs> SNR", "SNR [dB]", "RMSE", false});
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("RMSE &lt;vs&gt; SNR") != std::string::npos);

    // Data span 0.01 .. 0.2: decades 1e-2 .. 1e0.
    const std::regex tick("class=\"ytick\"[^>]*>1e(-?[0-9]+)<");
    std::vector<int> decades;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), tick); it != std::sregex_iterator(); ++it)
        decades.push_back(std::stoi((*it)[1]));
    CHECK(decades == std::vector<int>{-2, -1, 0});

    std::size_t polylines = 0;
    for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1))
        ++polylines;
    CHECK(polylines == 2);
    CHECK_THROWS_AS(render_svg({}, {}), DomainError);
}

TEST_CASE("csv and svg files", "[harness][report]")
{
    const auto dir = std::filesystem::temp_directory_path() / "reccal_test_files";
    std::filesystem::create_directories(dir);
    const std::vector<ResultRow> rows{{5.0, 4, 3, "nls", 10, 3, 0.1, 0.0, 9}};
    emit_csv(rows, (dir / "out.csv").string());
    std::ifstream in(dir / "out.csv");
    CHECK(parse_csv(in) == rows);
    emit_svg_plot(rows, (dir / "out.svg").string(), {});
    CHECK(std::filesystem::file_size(dir / "out.svg") > 100);
    CHECK_THROWS_AS(emit_csv(rows, (dir / "missing" / "x.csv").string()), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("worker count honours CALIB_THREADS", "[harness][threads]")
{
    {
        ThreadsEnv env("3");
        CHECK(worker_count() == 3);
    }
    {
        ThreadsEnv env("junk");
        CHECK(worker_count() >= 1);
    }
    {
        ThreadsEnv env(nullptr);
        CHECK(worker_count() >= 1);
    }
}

TEST_CASE("snr sweep rows", "[harness][sweep]")
{
    const SweepSpec s = small_spec();
    const SweepResult r = run_snr_sweep(s);
    REQUIRE(r.rows.size() == 6);
    CHECK(r.runs == 6 * 24);
    CHECK_FALSE(r.numerical_failure(s.failure_threshold));
    for (const ResultRow& row : r.rows) {
        CHECK(row.m_a == 4);
        CHECK(row.m_b == 3);
        CHECK(row.trials == 24);
        CHECK(row.seed == 77);
        CHECK(row.rmse >= 0.0);
        CHECK(std::isfinite(row.rmse));
        CHECK(row.mean_runtime_us == 0.0);
    }
    CHECK(r.rows[0].algorithm == "nls");
    CHECK(r.rows[0].n_iter == 20);
    CHECK(r.rows[1].algorithm == "aonls");
    CHECK(r.rows[1].n_iter == 4);
    CHECK(r.rows[2].algorithm == "mmse");
    CHECK(r.rows[2].n_iter == 10);
    // Higher SNR, lower error.
    for (int a = 0; a < 3; ++a)
        CHECK(r.rows[static_cast<std::size_t>(3 + a)].rmse < r.rows[static_cast<std::size_t>(a)].rmse);
}

TEST_CASE("sweeps are deterministic across execution modes and thread counts", "[harness][sweep][threads]")
{
    SweepSpec s = small_spec();
    std::string reference;
    {
        ThreadsEnv env("1");
        reference = csv_of(run_snr_sweep(s, Execution::serial).rows);
    }
    for (const char* threads : {"1", "2", "5"}) {
        ThreadsEnv env(threads);
        CHECK(csv_of(run_snr_sweep(s).rows) == reference);
    }
    CHECK(csv_of(run_snr_sweep(s).rows) == reference);

    s.iter_grid = {1, 2, 4, 10};
    std::string iter_ref;
    {
        ThreadsEnv env("1");
        iter_ref = csv_of(run_iter_sweep(s, Execution::serial).rows);
    }
    ThreadsEnv env("4");
    CHECK(csv_of(run_iter_sweep(s).rows) == iter_ref);
}

TEST_CASE("timing fills the runtime column", "[harness][sweep]")
{
    SweepSpec s = small_spec();
    s.snr_grid_db = {10.0};
    s.trials = 4;
    s.record_timing = true;
    for (const ResultRow& row : run_snr_sweep(s).rows)
        CHECK(row.mean_runtime_us > 0.0);
}

TEST_CASE("noiseless sweep recovers gamma for every algorithm", "[harness][sweep]")
{
    SweepSpec s = small_spec();
    s.snr_grid_db = {200.0};
    s.trials = 1;
    s.nls_iter = 100;
    s.aonls_inner_iter = 100;
    s.aonls_max_outer = 20;
    s.mmse.n_iter = 100;
    const SweepResult r = run_snr_sweep(s);
    REQUIRE(r.rows.size() == 3);
    for (const ResultRow& row : r.rows)
        CHECK(row.rmse < 1e-5);
}

TEST_CASE("iteration sweep layout and nls monotonicity", "[harness][sweep]")
{
    SweepSpec s = small_spec();
    s.snr_grid_db = {20.0};
    s.trials = 300;
    s.iter_grid = {1, 2, 3, 4, 5, 10, 20};
    s.algorithms = {Algorithm::nls, Algorithm::mmse};
    const SweepResult r = run_iter_sweep(s);
    REQUIRE(r.rows.size() == 14);
    std::vector<double> nls;
    for (const ResultRow& row : r.rows)
        if (row.algorithm == "nls")
            nls.push_back(row.rmse);
    REQUIRE(nls.size() == 7);
    for (std::size_t k = 1; k < nls.size(); ++k)
        CHECK(nls[k] <= nls[k - 1] * 1.01);

    // The iteration sweep's last point equals a plain run with that budget.
    SweepSpec plain = s;
    plain.nls_iter = 20;
    plain.mmse.n_iter = 20;
    const SweepResult p = run_snr_sweep(plain);
    CHECK(p.rows[0].rmse == r.rows[6].rmse);
    CHECK(p.rows[1].rmse == r.rows[13].rmse);
}

TEST_CASE("failure accounting", "[harness][metrics]")
{
    SweepResult r;
    r.runs = 100;
    CHECK_FALSE(r.numerical_failure(0.01));
    r.flagged = 1;
    CHECK_FALSE(r.numerical_failure(0.01));
    r.failed = 1;
    CHECK(r.numerical_failure(0.01));
}
