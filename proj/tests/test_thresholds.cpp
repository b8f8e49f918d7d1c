#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "homonet/stability.hpp"
#include "homonet/thresholds.hpp"
#include "oracle.hpp"

using namespace homonet;
using fixtures::two_cliques;

namespace {

bool in_bracket(const Rational& x, const std::optional<Bracket>& b) { return b && b->lo <= x && x <= b->hi; }

// Two disjoint n-cycles of high and low agents, and the same with link 01 and
// its copy replaced by two bridges.
struct Paired {
    GameInstance g;
    Network sorted, bridged;
};

Paired paired_cycles(int n, DecayKind kind, const Rational& d, const std::vector<std::vector<Rational>>& Z) {
    Paired p;
    p.g.types.assign(n, 2);
    p.g.types.resize(2 * n, 1);
    p.g.value = symmetric_table({2, 1}, Z);
    p.g.cost = CostRegime::quota(2);
    p.g.decay = {kind, d};
    p.sorted = Network(2 * n);
    for (int i = 0; i < n; ++i) {
        p.sorted.add_edge(i, (i + 1) % n);
        p.sorted.add_edge(n + i, n + (i + 1) % n);
    }
    p.bridged = p.sorted;
    p.bridged.remove_edge(0, 1);
    p.bridged.remove_edge(n, n + 1);
    p.bridged.add_edge(0, n);
    p.bridged.add_edge(1, n + 1);
    return p;
}

const std::vector<std::vector<Rational>> kTable{{10, 7}, {7, 6}};

}  // namespace

TEST_CASE("complementarity statistics") {
    CHECK(zhat(10, 6, 7) == frac(1, 7));
    CHECK(zhat(5, 5, 5) == 0);
    CHECK_THROWS(zhat(1, 1, 0));
    auto g = two_cliques(DecayKind::hyperbolic, frac(1, 10));
    CHECK(zhat_small(g, 2, 1) == 0);
    GameInstance h = g;
    h.types = {2, 2, 2, 2, 1, 1, 1};
    h.value = symmetric_table({2, 1}, kTable);
    // The low type is the smaller population: z(low, high) / Z(high, low).
    CHECK(zhat_small(h, 2, 1) == frac(7, 2) / 7);
}

TEST_CASE("example closed forms") {
    auto a = example_thresholds(frac(1, 7));
    CHECK(a.delta_lower == frac(2, 37));
    CHECK(a.delta_upper == frac(1, 8));
    CHECK(a.method == "closed-form-example");
    auto b = example_thresholds(1);
    CHECK(b.delta_lower == frac(2, 7));
    CHECK(b.delta_upper == frac(1, 2));
    auto c = example_thresholds(0);
    CHECK(c.delta_lower == 0);
    CHECK(c.delta_upper == 0);
    CHECK(example_thresholds(10, 6, 7).delta_lower == frac(2, 37));
}

TEST_CASE("hyperbolic closed forms") {
    auto g = two_cliques(DecayKind::hyperbolic, frac(1, 10));
    auto r = hyperbolic_thresholds(g);
    CHECK(r.delta_lower == frac(2, 65));
    CHECK(r.delta_upper == frac(1, 22));
    CHECK(r.method == "closed-form-hyperbolic");
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].zhat == frac(1, 7));

    GameInstance three;
    three.types = {3, 3, 3, 3, 2, 2, 2, 1, 1, 1, 1, 1};
    three.value = symmetric_table({3, 2, 1}, {{20, 9, 5}, {9, 8, 4}, {5, 4, 4}});
    three.cost = CostRegime::quota(2);
    three.decay = {DecayKind::hyperbolic, frac(1, 10)};
    auto t = hyperbolic_thresholds(three);
    REQUIRE(t.pairs.size() == 3);
    Rational lo = t.pairs[0].delta_lower, hi = t.pairs[0].delta_upper;
    for (const auto& p : t.pairs) {
        lo = std::min(lo, p.delta_lower);
        hi = std::min(hi, p.delta_upper);
        CHECK(p.delta_lower == hyperbolic_lower(p.zhat, p.n_x, p.n_x_tilde));
        CHECK(p.zhat == zhat(three.Zlevels(p.x, p.x), three.Zlevels(p.x_tilde, p.x_tilde), three.Zlevels(p.x, p.x_tilde)));
    }
    CHECK(t.delta_lower == lo);
    CHECK(t.delta_upper == hi);

    auto bad = g;
    bad.decay.kind = DecayKind::constant;
    CHECK_THROWS(hyperbolic_thresholds(bad));
    bad = g;
    bad.cost = CostRegime::quota(1);
    CHECK_THROWS_WITH_AS(hyperbolic_thresholds(bad), doctest::Contains("singular"), std::exception);
    bad = g;
    bad.cost = CostRegime::quota(3);
    CHECK_THROWS_WITH_AS(hyperbolic_thresholds(bad), doctest::Contains("self-sufficient"), std::exception);
    CHECK(hyperbolic_lower(0, 3, 3) == 0);
    CHECK(hyperbolic_upper(0, 0, 3, 3) == 0);
}

TEST_CASE("empirical thresholds on the two-clique instance") {
    auto g = two_cliques(DecayKind::hyperbolic, frac(1, 10));
    auto r = empirical_thresholds(g, fixtures::segregated(), fixtures::bridged());
    CHECK(r.method == "empirical-bisection");
    CHECK(in_bracket(frac(2, 65), r.lower_bracket));
    CHECK(in_bracket(frac(1, 22), r.upper_bracket));
    CHECK(r.upper_bracket->hi - r.upper_bracket->lo <= bisection_width());

    // Both objectives change sign at the brackets, recomputed by the oracle.
    auto gd = with_delta(g, r.lower_bracket->lo);
    CHECK(oracle::total(gd, fixtures::bridged()) <= oracle::total(gd, fixtures::segregated()));
    gd = with_delta(g, r.lower_bracket->hi);
    CHECK(oracle::total(gd, fixtures::bridged()) > oracle::total(gd, fixtures::segregated()));

    // Under constant decay the printed example forms exceed the true thresholds.
    auto c = two_cliques(DecayKind::constant, frac(1, 10));
    auto e = empirical_thresholds(c, fixtures::segregated(), fixtures::bridged());
    auto ex = example_thresholds(frac(1, 7));
    CHECK(e.delta_lower < ex.delta_lower);
    CHECK(e.delta_upper < ex.delta_upper);
    CHECK(e.delta_lower < e.delta_upper);
}

TEST_CASE("empirical thresholds error paths") {
    GameInstance g = two_cliques(DecayKind::hyperbolic, frac(1, 10));
    g.value = symmetric_table({2, 1}, {{6, 6}, {6, 6}});
    CHECK_THROWS_WITH_AS(empirical_thresholds(g, fixtures::segregated(), fixtures::bridged()),
                         doctest::Contains("threshold outside unit interval"), std::exception);
    CHECK_THROWS_WITH_AS(find_root([](const Rational& d) -> Rational { return d * (1 - d) - frac(1, 8); }, "f"),
                         doctest::Contains("not monotone"), std::exception);
    auto b = find_root([](const Rational& d) -> Rational { return d - frac(1, 3); }, "f");
    CHECK(b.lo <= frac(1, 3));
    CHECK(frac(1, 3) <= b.hi);
}

TEST_CASE("thresholds are scale invariant") {
    std::mt19937 rng(71);
    for (int trial = 0; trial < 5; ++trial) {
        auto v = oracle::random_supermodular(rng, {2, 1});
        auto g = two_cliques(DecayKind::hyperbolic, frac(1, 10));
        g.value = v;
        auto s = g;
        Rational lam = oracle::random_rational(rng, 1, 30, 7);
        for (auto& row : s.value.z)
            for (auto& e : row) e *= lam;
        auto a = hyperbolic_thresholds(g), b = hyperbolic_thresholds(s);
        CHECK(a.delta_lower == b.delta_lower);
        CHECK(a.delta_upper == b.delta_upper);
        auto ea = empirical_thresholds(g, fixtures::segregated(), fixtures::bridged());
        auto eb = empirical_thresholds(s, fixtures::segregated(), fixtures::bridged());
        CHECK(ea.lower_bracket->lo == eb.lower_bracket->lo);
        CHECK(ea.upper_bracket->lo == eb.upper_bracket->lo);
        // The hyperbolic instance attains the closed forms.
        CHECK(in_bracket(a.delta_lower, ea.lower_bracket));
        CHECK(in_bracket(a.delta_upper, ea.upper_bracket));
    }
}

TEST_CASE("closed forms bound the paired-cycle thresholds") {
    for (int n = 4; n <= 7; ++n) {
        auto p = paired_cycles(n, DecayKind::hyperbolic, frac(1, 10), kTable);
        auto cf = hyperbolic_thresholds(p.g);
        auto e = empirical_thresholds(p.g, p.sorted, p.bridged);
        CHECK(e.upper_bracket->hi >= cf.delta_upper);
        CHECK(e.lower_bracket->lo <= cf.delta_lower);
    }
}

TEST_CASE("threshold sandwich checked by the stability module") {
    for (int n = 3; n <= 5; ++n) {
        auto p = paired_cycles(n, DecayKind::hyperbolic, 0, kTable);
        if (n == 3) p.sorted = fixtures::segregated(), p.bridged = fixtures::bridged();
        auto cf = hyperbolic_thresholds(p.g);
        auto below = with_delta(p.g, cf.delta_upper * frac(9, 10));
        CHECK(pairwise_nash_stable(below, p.sorted).verdict == Verdict::stable);
        auto above = with_delta(p.g, cf.delta_lower + frac(1, 100));
        auto eff = is_efficient(above, p.sorted, std::vector<Network>{p.sorted, p.bridged});
        CHECK_FALSE(eff.efficient);
        CHECK(oracle::total(above, p.bridged) > oracle::total(above, p.sorted));
    }
}

TEST_CASE("exact-tree thresholds") {
    auto four = LocalTreeProfile::ideal(4, 3);
    auto r = exact_tree_thresholds(four, 10, 6, 7);
    CHECK(r.method == "closed-form-exact-tree");
    CHECK(0 < r.delta_lower);
    CHECK(r.delta_lower < r.delta_upper);
    CHECK(r.delta_upper < 1);

    // Three-cliques are also 3-cycles: the closed forms agree with the
    // empirical thresholds of the two-clique instance.
    auto three = LocalTreeProfile::ideal(3, 2);
    auto c = exact_tree_thresholds(three, 10, 6, 7);
    auto e = empirical_thresholds(two_cliques(DecayKind::constant, frac(1, 10)), fixtures::segregated(), fixtures::bridged());
    CHECK(Rational(c.delta_lower - e.delta_lower).get_d() == doctest::Approx(0).epsilon(1e-10));
    CHECK(Rational(c.delta_upper - e.delta_upper).get_d() == doctest::Approx(0).epsilon(1e-10));
    CHECK(c.delta_lower < example_thresholds(frac(1, 7)).delta_lower);

    // Objectives evaluated against a direct graph computation at one point.
    auto o = exact_tree_objectives(four, 10, 6, 7);
    auto p = paired_cycles(4, DecayKind::constant, frac(1, 5), kTable);
    Network k4(8);
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) k4.add_edge(a, b), k4.add_edge(a + 4, b + 4);
    Network br = k4;
    br.remove_edge(0, 1);
    br.remove_edge(4, 5);
    br.add_edge(0, 4);
    br.add_edge(1, 5);
    p.g.cost = CostRegime::quota(3);
    CHECK(o.aggregate(frac(1, 5)) == oracle::total(p.g, br) - oracle::total(p.g, k4));
    CHECK_THROWS(exact_tree_thresholds(LocalTreeProfile::ideal(6, 2), 10, 6, 7));
}

TEST_CASE("mixing penalty") {
    auto m0 = mixing_penalty(10, 6, 7, 2, frac(1, 4), 50, 50, 0);
    CHECK(m0.penalty == 0);
    auto m = mixing_penalty(10, 6, 7, 2, frac(1, 4), 50, 50, frac(1, 2));
    CHECK(m.penalty > 0);
    CHECK(m.penalty == frac(1, 2) * frac(1, 4) * 2);
    CHECK(m.sorted == frac(1, 3) * 4);
    auto s = mixing_penalty(10, 6, 7, 2, frac(1, 4), 50, 50, frac(1, 2), SortedConstant::summed);
    CHECK(s.sorted == frac(8, 3) * 4);
    CHECK(s.penalty == m.penalty);
    CHECK(mixing_penalty(7, 7, 7, 3, frac(1, 4), 5, 5, 1).penalty == 0);
    CHECK_THROWS(mixing_penalty(10, 6, 7, 3, frac(1, 2), 5, 5, 0));
    CHECK_THROWS(mixing_penalty(10, 6, 7, 2, frac(1, 4), 0, 0, 0));
}

TEST_CASE("threshold sweep") {
    SweepSpec s;
    for (int n = 3; n <= 50; ++n) s.populations.emplace_back(n, n);
    s.zhats = {1};
    auto rows = sweep(s);
    CHECK(rows.size() == 48);
    for (size_t k = 0; k < rows.size(); ++k) {
        CHECK(rows[k].delta_lower < rows[k].delta_upper);
        if (k) {
            CHECK(rows[k].delta_lower < rows[k - 1].delta_lower);
            CHECK(rows[k].delta_upper < rows[k - 1].delta_upper);
        }
    }
    auto slope = [&](size_t a, size_t b) {
        return (std::log(rows[b].delta_lower.get_d()) - std::log(rows[a].delta_lower.get_d())) /
               (std::log(double(rows[b].n_x)) - std::log(double(rows[a].n_x)));
    };
    CHECK(std::abs(slope(0, 1) + 2) > std::abs(slope(46, 47) + 2));
    CHECK(slope(46, 47) == doctest::Approx(-2).epsilon(0.01));

    auto csv = sweep_csv(rows);
    CHECK(csv.rfind("n_x,n_y,kappa,zhat,delta_lower,delta_upper,method\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 49);
    CHECK(sweep_svg(rows).find("<svg") != std::string::npos);

    SweepSpec one;
    one.populations = {{3, 3}};
    one.zhats = {frac(1, 7)};
    auto r1 = sweep(one);
    REQUIRE(r1.size() == 1);
    CHECK(r1[0].delta_lower == frac(2, 65));
    CHECK(r1[0].delta_upper == frac(1, 22));
    CHECK_THROWS(sweep(SweepSpec{}));
}
