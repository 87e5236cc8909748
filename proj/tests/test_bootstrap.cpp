#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tailhedge/bootstrap.hpp"
#include "tailhedge/errors.hpp"

using namespace tailhedge;

TEST_SUITE_BEGIN("bootstrap");

TEST_CASE("heuristic block length is floor of the cube root") {
    CHECK(heuristic_block_length(1000) == 10);
    CHECK(heuristic_block_length(27) == 3);
    CHECK(heuristic_block_length(7) == 1);
    CHECK(heuristic_block_length(1) == 1);
    CHECK(heuristic_block_length(999) == 9);
}

TEST_CASE("config validation rejects impossible setups") {
    BootstrapConfig cfg;
    cfg.block_len = 11;
    cfg.out_len = 5;
    CHECK_THROWS_AS(cfg.validate(10), std::invalid_argument);  // block longer than source
    CHECK_THROWS_AS(cfg.validate(0), DataError);               // empty source
    cfg.block_len = 0;
    cfg.out_len = 0;
    CHECK_THROWS_AS(cfg.validate(10), std::invalid_argument);  // nothing to emit
    cfg.out_len = 5;
    CHECK_NOTHROW(cfg.validate(10));
    CHECK(cfg.resolved_block_len(1000) == 10);  // heuristic kicks in at 0
}

TEST_CASE("method names round trip") {
    for (auto m : {BootstrapMethod::naive, BootstrapMethod::simple_block,
                   BootstrapMethod::moving_block, BootstrapMethod::stationary})
        CHECK(bootstrap_method_from_string(to_string(m)) == m);
    CHECK_THROWS_AS((void)bootstrap_method_from_string("jackknife"), std::invalid_argument);
}

TEST_CASE("moving block with block length n degenerates to the source cycle") {
    const std::vector<double> src{1.0, 2.0, 3.0, 4.0};
    BootstrapConfig cfg;
    cfg.method = BootstrapMethod::moving_block;
    cfg.block_len = 4;
    cfg.out_len = 10;
    cfg.seed = 77;
    const auto out = resample(src, cfg);
    REQUIRE(out.size() == 10);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == src[i % 4]);
}

TEST_CASE("naive resampling of a constant series is constant") {
    const std::vector<double> src(50, 3.25);
    BootstrapConfig cfg;
    cfg.method = BootstrapMethod::naive;
    cfg.out_len = 200;
    cfg.seed = 5;
    for (double v : resample(src, cfg)) CHECK(v == 3.25);
}

TEST_CASE("resampled values always come from the source multiset") {
    std::vector<double> src(64);
    Rng gen(123);
    for (double& v : src) v = gen.normal();
    std::set<double> universe(src.begin(), src.end());
    for (auto method : {BootstrapMethod::naive, BootstrapMethod::simple_block,
                        BootstrapMethod::moving_block, BootstrapMethod::stationary}) {
        BootstrapConfig cfg;
        cfg.method = method;
        cfg.block_len = 5;
        cfg.out_len = 333;
        cfg.seed = 9;
        for (double v : resample(src, cfg)) CHECK(universe.count(v) == 1);
    }
}

TEST_CASE("simple block concatenates aligned non-overlapping segments") {
    // distinct values, n=12, l=3: segments start at 0, 3, 6, 9
    std::vector<double> src(12);
    std::iota(src.begin(), src.end(), 0.0);
    BootstrapConfig cfg;
    cfg.method = BootstrapMethod::simple_block;
    cfg.block_len = 3;
    cfg.out_len = 12;
    cfg.seed = 2024;
    const auto out = resample(src, cfg);
    for (std::size_t b = 0; b < out.size() / 3; ++b) {
        const double start = out[3 * b];
        CHECK(std::fmod(start, 3.0) == 0.0);  // aligned start
        CHECK(out[3 * b + 1] == start + 1.0);
        CHECK(out[3 * b + 2] == start + 2.0);
    }
}

TEST_CASE("stationary restart probability one behaves like naive draws") {
    // block_len 1 means restart probability 1: every step is a fresh uniform
    // index, so value frequencies match the naive scheme's distribution.
    const std::size_t n = 5;
    std::vector<double> src(n);
    std::iota(src.begin(), src.end(), 0.0);
    const std::size_t draws = 100000;

    auto frequencies = [&](BootstrapMethod method, std::uint64_t seed) {
        BootstrapConfig cfg;
        cfg.method = method;
        cfg.block_len = 1;
        cfg.out_len = draws;
        cfg.seed = seed;
        std::vector<double> freq(n, 0.0);
        for (double v : resample(src, cfg)) freq[static_cast<std::size_t>(v)] += 1.0;
        for (double& f : freq) f /= static_cast<double>(draws);
        return freq;
    };

    const auto st = frequencies(BootstrapMethod::stationary, 11);
    const auto nv = frequencies(BootstrapMethod::naive, 12);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(st[i] == doctest::Approx(0.2).epsilon(0.05));
        CHECK(nv[i] == doctest::Approx(0.2).epsilon(0.05));
        CHECK(std::abs(st[i] - nv[i]) < 0.01);
    }
}

TEST_CASE("stationary mean block length tracks one over the restart probability") {
    // integer ramp source: a continuation step is detectable as +1 mod n
    const std::size_t n = 4096;
    std::vector<double> src(n);
    std::iota(src.begin(), src.end(), 0.0);
    BootstrapConfig cfg;
    cfg.method = BootstrapMethod::stationary;
    cfg.block_len = 5;  // restart probability 0.2
    cfg.out_len = 600000;
    cfg.seed = 3;
    const auto out = resample(src, cfg);

    std::vector<double> lengths;
    std::size_t run = 1;
    for (std::size_t i = 1; i < out.size(); ++i) {
        const auto prev = static_cast<std::size_t>(out[i - 1]);
        if (static_cast<std::size_t>(out[i]) == (prev + 1) % n) {
            ++run;
        } else {
            lengths.push_back(static_cast<double>(run));
            run = 1;
        }
    }
    REQUIRE(lengths.size() >= 100000);
    lengths.resize(100000);
    const double mean_len = testoracle::mean(lengths);
    CHECK(mean_len > 0.95 * 5.0);
    CHECK(mean_len < 1.05 * 5.0);
}

TEST_CASE("block resampling preserves serial dependence, naive destroys it") {
    // AR(1) with coefficient 0.8
    std::vector<double> src(20000);
    Rng gen(42);
    double x = 0.0;
    for (int burn = 0; burn < 1000; ++burn) x = 0.8 * x + gen.normal();
    for (double& v : src) {
        x = 0.8 * x + gen.normal();
        v = x;
    }
    BootstrapConfig cfg;
    cfg.block_len = 10;
    cfg.out_len = 100000;
    cfg.seed = 7;

    cfg.method = BootstrapMethod::moving_block;
    const double rho_block = testoracle::lag1_autocorr(resample(src, cfg));
    cfg.method = BootstrapMethod::naive;
    const double rho_naive = testoracle::lag1_autocorr(resample(src, cfg));

    CHECK(rho_block >= 0.5);
    CHECK(std::abs(rho_naive) < 0.05);
}

TEST_CASE("scenario panels are deterministic and anchor-order independent") {
    std::vector<double> src(300);
    Rng gen(1);
    for (double& v : src) v = 0.01 * gen.normal();

    BootstrapConfig cfg;
    cfg.method = BootstrapMethod::moving_block;
    cfg.seed = 55;
    const std::vector<std::size_t> fwd{100, 200, 300};
    const std::vector<std::size_t> rev{300, 200, 100};
    const std::vector<std::size_t> solo{200};

    const auto a = build_scenarios(src, fwd, 40, 3, cfg);
    const auto b = build_scenarios(src, fwd, 40, 3, cfg);
    const auto c = build_scenarios(src, rev, 40, 3, cfg);
    const auto d = build_scenarios(src, solo, 40, 3, cfg);

    REQUIRE(a.size() == 3);
    CHECK(a[1].origin_index == 200);
    CHECK(a[1].scenario_count == 40);
    CHECK(a[1].tau_steps == 3);
    REQUIRE(a[1].assets.size() == 1);
    CHECK(a[1].assets[0].rows() == 40);
    CHECK(a[1].assets[0].cols() == 3);

    CHECK(a[0].assets[0].values() == b[0].assets[0].values());
    CHECK(a[1].assets[0].values() == c[1].assets[0].values());  // c[1] is anchor 200 too
    CHECK(a[1].assets[0].values() == d[0].assets[0].values());
    CHECK(a[0].assets[0].values() != a[2].assets[0].values());
}

TEST_CASE("constant sources give constant panels and exact terminal compounding") {
    const std::vector<double> src(64, 0.01);
    BootstrapConfig cfg;
    cfg.method = BootstrapMethod::naive;
    cfg.seed = 8;
    const auto panels = build_scenarios(src, std::vector<std::size_t>{64}, 3, 4, cfg);
    REQUIRE(panels.size() == 1);
    for (double v : panels[0].assets[0].values()) CHECK(v == 0.01);
    const auto terminal = panels[0].terminal_returns(0);
    REQUIRE(terminal.size() == 3);
    const double expect = std::pow(1.01, 4) - 1.0;
    for (double t : terminal) CHECK(t == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("naive panel mean approaches the source mean") {
    const std::vector<double> src{-0.01, 0.02};
    BootstrapConfig cfg;
    cfg.method = BootstrapMethod::naive;
    cfg.seed = 21;
    const auto panels = build_scenarios(src, std::vector<std::size_t>{2}, 100000, 1, cfg);
    const double m = testoracle::mean(panels[0].assets[0].values());
    // sd of a fair two-point draw at {-0.01, 0.02} is 0.015
    const double se = 0.015 / std::sqrt(100000.0);
    CHECK(std::abs(m - 0.005) < 3.0 * se);
}

TEST_SUITE_END();
