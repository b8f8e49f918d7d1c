#include "doctest.h"
#include "fixtures.hpp"
#include "homonet/metrics.hpp"
#include "homonet/policy.hpp"
#include "homonet/thresholds.hpp"
#include "oracle.hpp"

using namespace homonet;
using fixtures::two_cliques;

namespace {

const Bridges kBridges{0, 5, 1, 3};

// Net payoff of i with the given transfers and contracts, recomputed from scratch.
Rational payoff(const GameInstance& g, const Network& net, const TransferVector<Rational>& tau, const ContractVector& c, int i) {
    Rational s = oracle::utility(g, net, i);
    for (int j = 0; j < net.n(); ++j)
        if (net.has_edge(i, j)) s += tau.get(i, j) + c.get(i, j);
    return s;
}

// Best strictly positive joint gain over singleton and pair moves, new links
// carrying no transfer yet.
Rational oracle_best_gain(const GameInstance& g, const Network& net, const TransferVector<Rational>& tau, const ContractVector& c) {
    Rational best = 0;
    oracle::pair_moves(g, net, [&](uint32_t t, const std::vector<Edge>& A, const std::vector<Edge>& D) {
        Network after = net;
        for (auto [a, b] : D) after.remove_edge(a, b);
        for (auto [a, b] : A) after.add_edge(a, b);
        TransferVector<Rational> kept;
        for (auto [a, b] : after.edges())
            if (net.has_edge(a, b)) kept.set(a, b, tau.get(a, b));
        Rational s = 0;
        for (int i = 0; i < net.n(); ++i)
            if ((t >> i) & 1) s += payoff(g, after, kept, c, i) - payoff(g, net, tau, c, i);
        if (s > best) best = s;
    });
    return best;
}

std::vector<Rational> window_points(const Rational& lo, const Rational& hi) {
    std::vector<Rational> v;
    for (int k = 1; k <= 5; ++k) v.push_back(lo + (hi - lo) * k / 6);
    return v;
}

}  // namespace

TEST_CASE("contract vectors") {
    ContractVector c;
    c.set(0, 5, 3);
    c.set(5, 0, 1);
    CHECK(c.get(0, 5) == 3);
    CHECK(c.get(5, 0) == 1);
    CHECK(c.get(1, 2) == 0);
    Network net(6, {{0, 5}, {1, 2}});
    CHECK(c.income(net, 0) == 3);
    CHECK(c.total(net) == 4);
    CHECK(c.total(Network(6)) == 0);
    CHECK_THROWS(c.set(1, 2, -1));
    c.set(0, 5, 0);
    CHECK(c.entries().size() == 1);
}

TEST_CASE("designed contracts implement the bridged network across the window") {
    auto base = two_cliques(DecayKind::hyperbolic, 0);
    for (const auto& d : window_points(frac(2, 65), frac(1, 22))) {
        auto g = with_delta(base, d);
        const auto& sorted = fixtures::segregated();
        auto st = pairwise_nash_stable<Rational>(g, sorted);
        REQUIRE(st.verdict == Verdict::stable);
        auto tau0 = *st.witness;
        auto design = design_contracts(g, sorted, tau0, kBridges, ContractMode::trace);
        CHECK(design.target.edges() == fixtures::bridged().edges());
        CHECK(design.total_per_bridge > design.lo);
        if (!design.hi_unbounded) CHECK(design.total_per_bridge < design.hi);
        CHECK(design.contracts.get(0, 5) + design.contracts.get(5, 0) == design.total_per_bridge);
        CHECK(design.contracts.get(0, 5) == design.contracts.get(5, 0));
        CHECK(design.contracts.get(0, 1) == 0);

        auto tr = simulate_implementable(g, sorted, tau0, design.contracts);
        REQUIRE(tr.steps.size() == 2);
        CHECK(tr.steps[0].move.added == std::vector<Edge>{{0, 5}});
        CHECK(tr.steps[0].move.deleted.size() == 2);
        CHECK(tr.steps[1].move.added == std::vector<Edge>{{1, 3}});
        CHECK(tr.steps[1].move.deleted.empty());
        CHECK(tr.final_network.edges() == fixtures::bridged().edges());
        CHECK(tr.welfare_after > tr.welfare_before);
        CHECK(oracle::total(g, tr.final_network) > oracle::total(g, sorted));
        CHECK(tr.stable_given_contracts);
        CHECK(oracle_best_gain(g, tr.final_network, tr.final_transfers, design.contracts) == 0);
        for (const auto& s : tr.steps) {
            CHECK(s.gain > 0);
            Rational sum = 0;
            for (const auto& [i, v] : s.member_gains) sum += v;
            CHECK(sum == s.gain);
            CHECK(s.gain == oracle_best_gain(g, s.before, s.before.edges() == sorted.edges() ? tau0 : tr.steps[0].transfers_after, design.contracts));
        }

        // Below the lower end the intended two-move trace no longer occurs.
        auto low = design.contracts;
        low.set(0, 5, design.lo / 4);
        low.set(5, 0, design.lo / 4);
        low.set(1, 3, design.lo / 4);
        low.set(3, 1, design.lo / 4);
        auto lt = simulate_implementable(g, sorted, tau0, low);
        CHECK(lt.steps.size() != 2);
        CHECK(simulate_implementable(g, sorted, tau0, ContractVector{}).steps.empty());
    }
}

TEST_CASE("contract design errors") {
    auto g = two_cliques(DecayKind::hyperbolic, frac(1, 25));
    auto tau0 = *pairwise_nash_stable<Rational>(g, fixtures::segregated()).witness;
    CHECK_THROWS_WITH_AS(design_contracts(g, fixtures::segregated(), tau0, kBridges, ContractMode::literal),
                         doctest::Contains("empty contract interval"), std::exception);
    auto low = with_delta(g, frac(1, 100));
    CHECK_THROWS_WITH_AS(design_contracts(low, fixtures::segregated(), tau0, kBridges, ContractMode::trace),
                         doctest::Contains("no welfare gap"), std::exception);
    auto flat = g;
    flat.value = symmetric_table({2, 1}, {{6, 6}, {6, 6}});
    CHECK_THROWS_WITH_AS(design_contracts(flat, fixtures::segregated(), tau0, kBridges, ContractMode::trace),
                         doctest::Contains("not supermodular"), std::exception);
    CHECK_THROWS(design_contracts(g, fixtures::segregated(), tau0, Bridges{0, 1, 2, 3}, ContractMode::trace));
    CHECK_THROWS(design_contracts(g, fixtures::segregated(), tau0, Bridges{0, 5, 3, 1}, ContractMode::trace));
}

TEST_CASE("zero contracts leave a stable network alone") {
    auto g = two_cliques(DecayKind::hyperbolic, frac(1, 30));
    auto st = pairwise_nash_stable<Rational>(g, fixtures::segregated());
    REQUIRE(st.verdict == Verdict::stable);
    auto tr = simulate_implementable(g, fixtures::segregated(), *st.witness, ContractVector{});
    CHECK(tr.steps.empty());
    CHECK(tr.stable_given_contracts);
    CHECK(tr.welfare_after == tr.welfare_before);
    CHECK(pairwise_stable_given_contracts(g, fixtures::segregated(), *st.witness, ContractVector{}).verdict == Verdict::stable);
}

TEST_CASE("trace steps are greedy on unstable starts") {
    auto g = two_cliques(DecayKind::hyperbolic, frac(1, 30));
    Network empty(6);
    auto tr = simulate_implementable(g, empty, TransferVector<Rational>{}, ContractVector{});
    CHECK(!tr.steps.empty());
    TransferVector<Rational> tau;
    for (const auto& s : tr.steps) {
        CHECK(s.gain == oracle_best_gain(g, s.before, tau, ContractVector{}));
        tau = s.transfers_after;
    }
    CHECK(oracle_best_gain(g, tr.final_network, tr.final_transfers, ContractVector{}) == 0);
    CHECK(tr.stable_given_contracts);
    // Closer to the stability threshold the equal-split dynamics do not settle.
    CHECK_THROWS_AS(simulate_implementable(with_delta(g, frac(1, 10)), empty, TransferVector<Rational>{}, ContractVector{}), PolicyCycle);
}

TEST_CASE("low-value star construction") {
    GameInstance g;
    g.types = {2, 2, 1};
    g.value.kind = ValueKind::product;
    g.cost = CostRegime::linear(1);
    auto s = build_low_value_star(g);
    CHECK(s.center == 2);
    CHECK_FALSE(s.tie_break);
    CHECK(s.net.edges() == std::vector<Edge>{{0, 2}, {1, 2}});
    g.types = {2, 1};
    CHECK(build_low_value_star(g).net.edges() == std::vector<Edge>{{0, 1}});
    g.types = {1, 1, 1, 1};
    s = build_low_value_star(g);
    CHECK(s.center == 3);
    CHECK(s.tie_break);
    g.types = {1};
    CHECK_THROWS(build_low_value_star(g));
}

TEST_CASE("star conditions") {
    auto g = fixtures::star_instance(3, frac(9, 10));
    auto rep = star_conditions(g, frac(9, 10));
    CHECK(rep.all_pass);
    REQUIRE(rep.witness);
    for (const auto& c : rep.sufficient) CHECK(c.holds);
    CHECK(pairwise_stable_given_transfers(g, rep.star.net, *rep.witness).verdict == Verdict::stable);
    CHECK_FALSE(oracle::pair_blocked(g, rep.star.net, *rep.witness));

    auto zero = star_conditions(g, 0);
    bool delta_fails = false;
    for (const auto& c : zero.sufficient)
        if (c.name.find("d >=") == 0) delta_fails = !c.holds;
    CHECK(delta_fails);

    auto edge = g;
    edge.value = symmetric_table({2, 1}, {{3, 1}, {1, frac(3, 2)}});
    auto e = star_conditions(edge, frac(9, 10));
    bool strict_fails = false;
    for (const auto& c : e.sufficient)
        if (c.strict) strict_fails = !c.holds;
    CHECK(strict_fails);

    auto q = g;
    q.cost = CostRegime::quota(2);
    CHECK_THROWS(star_conditions(q, frac(9, 10)));
    CHECK_THROWS(star_conditions(fixtures::star_instance(2, frac(9, 10)), frac(9, 10)));
}

TEST_CASE("certified stars are pairwise stable") {
    for (int n = 3; n <= 5; ++n)
        for (const auto& d : {frac(1, 2), frac(9, 10), frac(19, 20)}) {
            auto g = fixtures::star_instance(n, d);
            auto rep = star_conditions(g, d);
            if (!rep.all_pass) continue;
            CHECK(pairwise_nash_stable<Rational>(g, rep.star.net).verdict == Verdict::stable);
            CHECK_FALSE(oracle::pair_blocked(g, rep.star.net, *rep.witness));
        }
}

TEST_CASE("star corollaries") {
    for (int n : {3, 5}) {
        auto g = fixtures::star_instance(n, frac(9, 10));
        auto r = verify_star_corollaries(g, frac(9, 10));
        CHECK(r.pairwise_stable);
        CHECK(r.inefficient);
        REQUIRE(r.better);
        auto star = build_low_value_star(g).net;
        CHECK(oracle::total(g, *r.better) > oracle::total(g, star));
        CHECK(r.sorting_in_type == oracle::sorting_in_type(g, star));
        CHECK_FALSE(r.degree_monotonic);
        CHECK_FALSE(r.decay_monotonic);
    }
    // Control: the star centered on a high agent is degree monotone.
    auto g = fixtures::star_instance(4, frac(9, 10));
    Network high(4, {{0, 1}, {0, 2}, {0, 3}});
    CHECK(degree_monotonic(g, high));
}
