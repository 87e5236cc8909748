#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tailhedge/errors.hpp"
#include "tailhedge/marketdata.hpp"
#include "tailhedge/threads.hpp"
#include "tailhedge/train.hpp"

using namespace tailhedge;

namespace {

HedgePolicy constant_policy(std::size_t window, double value) {
    HedgePolicy p = HedgePolicy::create(window, {}, 1, 0);
    p.params = MlpParams::zeros(p.spec);
    p.params.biases[0][0] = value;
    return p;
}

AnchorBatch make_batch(std::size_t window, std::vector<double> pnl) {
    AnchorBatch b;
    b.features.assign(window, 0.0);
    b.hedge_moves = Matrix(pnl.size(), 1, 0.0);
    b.hedge_prices = {1.0};
    b.primary_pnl = std::move(pnl);
    return b;
}

}  // namespace

TEST_SUITE_BEGIN("train");

TEST_CASE("default anchors cover every full feature window") {
    const auto anchors = default_anchors(520, 32);
    REQUIRE(anchors.size() == 489);
    CHECK(anchors.front() == 32);
    CHECK(anchors.back() == 520);
    CHECK_THROWS_AS((void)default_anchors(31, 32), DataError);
    CHECK(default_anchors(32, 32) == std::vector<std::size_t>{32});
}

TEST_CASE("train config validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    TrainConfig bad = cfg;
    bad.iterations = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.alpha = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.scenarios = 99;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.tau_steps = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("policy forward applies the symmetric output clip") {
    HedgePolicy p = constant_policy(4, -3.0);
    CHECK(p.hedge_units(std::vector<double>(4, 0.0)) == std::vector<double>{-3.0});
    p.output_clip = 0.5;
    CHECK(p.hedge_units(std::vector<double>(4, 0.0)) == std::vector<double>{-0.5});
    p.output_clip = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    HedgePolicy wrong = constant_policy(4, 0.0);
    wrong.feature_window = 5;  // spec still expects 4 inputs
    CHECK_THROWS_AS(wrong.validate(), std::invalid_argument);
}

TEST_CASE("anchor batches carry trailing features and unit prices") {
    std::vector<double> returns(60);
    std::mt19937_64 gen(3);
    std::normal_distribution<double> r(0.0, 0.01);
    for (double& v : returns) v = r(gen);

    const HedgePolicy policy = constant_policy(8, 0.0);
    TrainConfig cfg;
    cfg.scenarios = 100;
    cfg.seed = 44;
    BootstrapConfig bcfg;
    bcfg.method = BootstrapMethod::moving_block;
    const std::vector<std::size_t> anchors{8, 30, 60};
    const auto batches = build_anchor_batches(returns, anchors, policy, cfg, bcfg);
    REQUIRE(batches.size() == 3);
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        const auto& b = batches[a];
        REQUIRE(b.features.size() == 8);
        for (std::size_t i = 0; i < 8; ++i) CHECK(b.features[i] == returns[anchors[a] - 8 + i]);
        CHECK(b.hedge_prices == std::vector<double>{1.0});
        CHECK(b.hedge_moves.rows() == 100);
        CHECK(b.hedge_moves.cols() == 1);
        REQUIRE(b.primary_pnl.size() == 100);
        // hedge and primary sides share the panel in the self-hedge setup
        for (std::size_t j = 0; j < 100; ++j) CHECK(b.primary_pnl[j] == b.hedge_moves(j, 0));
    }

    // panels match a direct scenario build with the same seed
    BootstrapConfig direct = bcfg;
    direct.seed = cfg.seed;
    const auto panels = build_scenarios(returns, anchors, 100, 1, direct);
    const auto terminal = panels[1].terminal_returns(0);
    for (std::size_t j = 0; j < 100; ++j) CHECK(batches[1].primary_pnl[j] == terminal[j]);

    CHECK_THROWS_AS(
        (void)build_anchor_batches(returns, std::vector<std::size_t>{}, policy, cfg, bcfg),
        DataError);
    CHECK_THROWS_AS(
        (void)build_anchor_batches(returns, std::vector<std::size_t>{7}, policy, cfg, bcfg),
        std::invalid_argument);  // anchor has no full window
    CHECK_THROWS_AS(
        (void)build_anchor_batches(returns, std::vector<std::size_t>{61}, policy, cfg, bcfg),
        std::invalid_argument);  // anchor past the data
}

TEST_CASE("tail-mean loss on a pinned five-scenario panel") {
    const HedgePolicy zero = constant_policy(4, 0.0);
    const AnchorBatch batch = make_batch(4, {-3.0, -1.0, 0.0, 1.0, 2.0});
    const AnchorBatch batches[] = {batch};
    // losses are the negated pnl: {3, 1, 0, -1, -2}; k = 2, tail mean 2
    CHECK(cvar_loss(zero, batches, CostSpec{}, 0.6) == 2.0);
    // k = 1 keeps only the worst scenario
    CHECK(cvar_loss(zero, batches, CostSpec{}, 0.8) == 3.0);
    // k = m averages everything
    CHECK(cvar_loss(zero, batches, CostSpec{}, 0.01) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("zero panels and full offsets both give zero loss") {
    const HedgePolicy any = HedgePolicy::create(4, std::vector<std::size_t>{5}, 1, 7);
    const AnchorBatch flat = make_batch(4, std::vector<double>(20, 0.0));
    const AnchorBatch batches[] = {flat};
    CHECK(cvar_loss(any, batches, CostSpec{}, 0.95) == 0.0);

    // hedge == short one unit of the primary asset cancels every scenario
    const HedgePolicy offset = constant_policy(4, -1.0);
    AnchorBatch same = make_batch(4, {0.02, -0.05, 0.01, -0.03, 0.04});
    for (std::size_t j = 0; j < 5; ++j) same.hedge_moves(j, 0) = same.primary_pnl[j];
    const AnchorBatch same_batches[] = {same};
    CHECK(cvar_loss(offset, same_batches, CostSpec{}, 0.6) == 0.0);
}

TEST_CASE("loss bounds and oracle agreement at the k extremes") {
    std::mt19937_64 gen(12);
    std::normal_distribution<double> r(0.0, 1.0);
    std::vector<double> pnl(8);
    for (double& v : pnl) v = r(gen);
    std::vector<double> losses(8);
    for (std::size_t j = 0; j < 8; ++j) losses[j] = -pnl[j];
    const AnchorBatch batch = make_batch(4, pnl);
    const AnchorBatch batches[] = {batch};
    const HedgePolicy zero = constant_policy(4, 0.0);

    const double max_loss = *std::max_element(losses.begin(), losses.end());
    CHECK(cvar_loss(zero, batches, CostSpec{}, 7.0 / 8.0) == max_loss);

    const auto oracle = testoracle::brute_var_cvar(losses, 0.01);  // k = m
    CHECK(cvar_loss(zero, batches, CostSpec{}, 0.01) == oracle.cvar);
}

TEST_CASE("loss ignores scenario order and anchor order") {
    std::mt19937_64 gen(1234);
    std::normal_distribution<double> r(0.0, 0.02);
    auto random_batch = [&] {
        AnchorBatch b = make_batch(6, {});
        b.primary_pnl.resize(40);
        b.hedge_moves = Matrix(40, 1);
        for (std::size_t j = 0; j < 40; ++j) {
            b.primary_pnl[j] = r(gen);
            b.hedge_moves(j, 0) = r(gen);
        }
        for (double& f : b.features) f = r(gen);
        return b;
    };
    const HedgePolicy policy = HedgePolicy::create(6, std::vector<std::size_t>{5}, 1, 3);
    CostSpec costs;
    costs.proportional_rate = 0.001;

    AnchorBatch a = random_batch();
    AnchorBatch shuffled = a;
    // rotate scenarios: same multiset of rows in a different order
    std::rotate(shuffled.primary_pnl.begin(), shuffled.primary_pnl.begin() + 13,
                shuffled.primary_pnl.end());
    std::rotate(shuffled.hedge_moves.values().begin(),
                shuffled.hedge_moves.values().begin() + 13, shuffled.hedge_moves.values().end());
    const AnchorBatch one[] = {a};
    const AnchorBatch one_shuffled[] = {shuffled};
    CHECK(cvar_loss(policy, one, costs, 0.9) == cvar_loss(policy, one_shuffled, costs, 0.9));

    AnchorBatch b = random_batch();
    const AnchorBatch ab[] = {a, b};
    const AnchorBatch ba[] = {b, a};
    CHECK(cvar_loss(policy, ab, costs, 0.9) == cvar_loss(policy, ba, costs, 0.9));

    AnchorBatch c = random_batch();
    AnchorBatch d = random_batch();
    const AnchorBatch abcd[] = {a, b, c, d};
    const AnchorBatch dcab[] = {d, c, a, b};
    const double l1 = cvar_loss(policy, abcd, costs, 0.9);
    const double l2 = cvar_loss(policy, dcab, costs, 0.9);
    CHECK(std::abs(l1 - l2) <= 1e-12 * std::abs(l1));
}

TEST_CASE("grads variant reports the same loss and the decisions taken") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> r(0.0, 0.02);
    std::vector<AnchorBatch> batches;
    for (int a = 0; a < 3; ++a) {
        AnchorBatch b = make_batch(6, {});
        b.primary_pnl.resize(30);
        b.hedge_moves = Matrix(30, 1);
        for (std::size_t j = 0; j < 30; ++j) {
            b.primary_pnl[j] = r(gen);
            b.hedge_moves(j, 0) = r(gen);
        }
        for (double& f : b.features) f = r(gen);
        batches.push_back(std::move(b));
    }
    const HedgePolicy policy = HedgePolicy::create(6, std::vector<std::size_t>{4}, 1, 9);
    CostSpec costs;
    costs.proportional_rate = 0.002;

    const LossGrads lg = cvar_loss_with_grads(policy, batches, costs, 0.9);
    CHECK(lg.loss == cvar_loss(policy, batches, costs, 0.9));
    REQUIRE(lg.hedge_units.rows() == 3);
    REQUIRE(lg.hedge_units.cols() == 1);
    for (std::size_t a = 0; a < 3; ++a)
        CHECK(lg.hedge_units(a, 0) == policy.hedge_units(batches[a].features)[0]);
}

TEST_CASE("analytic loss gradient matches finite differences at a stable point") {
    const double h = 1e-5;
    bool found_stable = false;
    for (std::uint64_t attempt = 0; attempt < 50 && !found_stable; ++attempt) {
        std::mt19937_64 gen(900 + attempt);
        std::normal_distribution<double> r(0.0, 0.05);
        std::vector<AnchorBatch> batches;
        for (int a = 0; a < 2; ++a) {
            AnchorBatch b = make_batch(6, {});
            b.primary_pnl.resize(30);
            b.hedge_moves = Matrix(30, 1);
            for (std::size_t j = 0; j < 30; ++j) {
                b.primary_pnl[j] = r(gen);
                b.hedge_moves(j, 0) = r(gen);
            }
            for (double& f : b.features) f = r(gen);
            batches.push_back(std::move(b));
        }
        HedgePolicy policy = HedgePolicy::create(6, std::vector<std::size_t>{4}, 1, attempt);
        CostSpec costs;
        costs.proportional_rate = 0.001;
        const double alpha = 0.9;  // k = 3 of 30

        // stability: the tail selection and every trade sign must survive +-h
        bool stable = true;
        for (const auto& b : batches) {
            const double units = policy.hedge_units(b.features)[0];
            if (std::abs(units) < 1e-3) stable = false;
            std::vector<double> losses(30);
            for (std::size_t j = 0; j < 30; ++j)
                losses[j] = -(b.primary_pnl[j] + units * b.hedge_moves(j, 0));
            std::sort(losses.begin(), losses.end(), std::greater<>());
            if (losses[2] - losses[3] < 1e-4) stable = false;
        }
        if (!stable) continue;
        found_stable = true;

        const LossGrads lg = cvar_loss_with_grads(policy, batches, costs, alpha);
        double dot_aa = 0.0, dot_ff = 0.0, dot_diff = 0.0;
        for (std::size_t layer = 0; layer < policy.params.weights.size(); ++layer) {
            auto fd_entry = [&](double& slot, double analytic) {
                const double keep = slot;
                slot = keep + h;
                const double up = cvar_loss(policy, batches, costs, alpha);
                slot = keep - h;
                const double dn = cvar_loss(policy, batches, costs, alpha);
                slot = keep;
                const double fd = (up - dn) / (2.0 * h);
                dot_aa += analytic * analytic;
                dot_ff += fd * fd;
                dot_diff += (analytic - fd) * (analytic - fd);
            };
            auto& w = policy.params.weights[layer];
            for (std::size_t i = 0; i < w.size(); ++i)
                fd_entry(w.values()[i], lg.grads.weights[layer].values()[i]);
            auto& bias = policy.params.biases[layer];
            for (std::size_t i = 0; i < bias.size(); ++i)
                fd_entry(bias[i], lg.grads.biases[layer][i]);
        }
        const double rel =
            std::sqrt(dot_diff) / std::max(std::sqrt(std::max(dot_aa, dot_ff)), 1e-12);
        CHECK(rel <= 1e-4);
    }
    CHECK(found_stable);
}

TEST_CASE("training on a flat market does nothing") {
    const std::vector<double> returns(60, 0.0);
    HedgePolicy policy = HedgePolicy::create(8, std::vector<std::size_t>{4}, 1, 21);
    const MlpParams before = policy.params;
    TrainConfig cfg;
    cfg.iterations = 3;
    cfg.scenarios = 100;
    cfg.seed = 2;
    BootstrapConfig bcfg;
    const auto anchors = default_anchors(returns.size(), 8);
    const TrainResult result = train(policy, returns, anchors, cfg, bcfg);
    CHECK(result.loss_history == std::vector<double>{0.0, 0.0, 0.0});
    for (std::size_t l = 0; l < before.weights.size(); ++l)
        CHECK(result.policy.params.weights[l].values() == before.weights[l].values());
}

TEST_CASE("training is deterministic and thread-count invariant") {
    SyntheticSpec spec;
    spec.mu = 0.05;
    spec.sigma = 0.2;
    spec.steps = 120;
    spec.seed = 77;
    const ReturnSeries rs = to_returns(simulate_paths(spec, 1)[0]);

    HedgePolicy policy = HedgePolicy::create(8, std::vector<std::size_t>{6}, 1, 5);
    TrainConfig cfg;
    cfg.iterations = 4;
    cfg.learning_rate = 0.02;
    cfg.scenarios = 120;
    cfg.seed = 13;
    BootstrapConfig bcfg;
    const auto anchors = default_anchors(rs.size(), 8);

    set_max_threads(1);
    const TrainResult serial = train(policy, rs.returns, anchors, cfg, bcfg);
    set_max_threads(8);
    const TrainResult parallel = train(policy, rs.returns, anchors, cfg, bcfg);
    set_max_threads(0);
    const TrainResult again = train(policy, rs.returns, anchors, cfg, bcfg);

    CHECK(serial.loss_history == parallel.loss_history);
    CHECK(serial.loss_history == again.loss_history);
    REQUIRE(serial.loss_history.size() == 4);
    for (std::size_t l = 0; l < serial.policy.params.weights.size(); ++l) {
        CHECK(serial.policy.params.weights[l].values() ==
              parallel.policy.params.weights[l].values());
        CHECK(serial.policy.params.biases[l] == parallel.policy.params.biases[l]);
    }
}

TEST_CASE("self-hedge training drives the loss down with a flat trend") {
    SyntheticSpec spec;
    spec.mu = 0.05;
    spec.sigma = 0.2;
    spec.steps = 300;
    spec.seed = 42;
    const ReturnSeries rs = to_returns(simulate_paths(spec, 1)[0]);

    HedgePolicy policy = HedgePolicy::create(8, std::vector<std::size_t>{8}, 1, 1);
    TrainConfig cfg;
    cfg.iterations = 50;
    cfg.learning_rate = 0.02;
    cfg.alpha = 0.95;
    cfg.scenarios = 150;
    cfg.seed = 6;
    BootstrapConfig bcfg;
    const auto anchors = default_anchors(rs.size(), 8);
    const TrainResult result = train(policy, rs.returns, anchors, cfg, bcfg);

    REQUIRE(result.loss_history.size() == 50);
    for (double l : result.loss_history) CHECK(std::isfinite(l));
    CHECK(result.loss_history.back() < result.loss_history.front());

    // Adam wiggles, so ask for trend properties instead of monotonicity: the
    // 10-step moving average never climbs back above its starting level and
    // ends at less than half of it.
    std::vector<double> ma;
    for (std::size_t i = 0; i + 10 <= result.loss_history.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 10; ++j) s += result.loss_history[i + j];
        ma.push_back(s / 10.0);
    }
    for (double m : ma) CHECK(m <= ma.front() + 1e-12);
    CHECK(ma.back() < 0.5 * ma.front());
}

TEST_SUITE_END();
