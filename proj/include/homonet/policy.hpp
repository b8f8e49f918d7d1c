#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "homonet/game.hpp"
#include "homonet/lp.hpp"
#include "homonet/metrics.hpp"
#include "homonet/network.hpp"
#include "homonet/rational.hpp"
#include "homonet/stability.hpp"

namespace homonet {

// C(i,j): payment to i for maintaining link ij. Ordered pairs.
class ContractVector {
public:
    Rational get(int i, int j) const {
        auto it = c_.find({i, j});
        return it == c_.end() ? Rational(0) : it->second;
    }
    void set(int i, int j, const Rational& v) {
        if (sign(v) < 0) throw std::invalid_argument("contract payments must be nonnegative");
        if (sign(v) == 0)
            c_.erase({i, j});
        else
            c_[{i, j}] = v;
    }
    const std::map<std::pair<int, int>, Rational>& entries() const { return c_; }
    Rational income(const Network& net, int i) const {
        Rational t = 0;
        for (int j : net.neighbors(i)) t += get(i, j);
        return t;
    }
    Rational total(const Network& net) const {
        Rational t = 0;
        for (int i = 0; i < net.n(); ++i) t += income(net, i);
        return t;
    }

private:
    std::map<std::pair<int, int>, Rational> c_;
};

// Each member's change in net payoff (utility, transfers, contracts) from a
// move, before any transfer is attached to newly formed links.
inline std::vector<std::pair<int, Rational>> member_gains(const GameInstance& g, const Evaluator<Rational>& ev,
                                                          const Network& net, const TransferVector<Rational>& tau,
                                                          const ContractVector& c, const Move& m) {
    Network after = apply_move(net, m);
    std::vector<std::pair<int, Rational>> out;
    (void)g;
    for (int i : members(m.coalition)) {
        Rational before = ev.utility_unchecked(net, i) + tau.income(net, i) + c.income(net, i);
        Rational kept = 0;
        for (int j : after.neighbors(i))
            if (net.has_edge(i, j)) kept += tau.get(i, j);
        out.emplace_back(i, ev.utility_unchecked(after, i) + kept + c.income(after, i) - before);
    }
    return out;
}

inline Rational move_gain(const GameInstance& g, const Evaluator<Rational>& ev, const Network& net,
                          const TransferVector<Rational>& tau, const ContractVector& c, const Move& m) {
    Rational s = 0;
    for (const auto& [i, v] : member_gains(g, ev, net, tau, c, m)) s += v;
    return s;
}

struct PolicyStep {
    Network before;
    Move move;
    Rational gain;
    std::vector<std::pair<int, Rational>> member_gains;  // after the equal split
    TransferVector<Rational> transfers_after;
};

struct PolicyTrace {
    std::vector<PolicyStep> steps;
    Network final_network;
    TransferVector<Rational> final_transfers;
    bool stable_given_contracts = false;
    std::optional<Move> final_blocking;
    Rational welfare_before, welfare_after;
};

struct BestMove {
    std::optional<Move> move;
    Rational gain;
};

// Strictly positive gain-maximal pairwise move; ties go to the earliest move.
inline BestMove best_pairwise_move(const GameInstance& g, const Network& net, const TransferVector<Rational>& tau,
                                   const ContractVector& c) {
    Evaluator<Rational> ev(g);
    BestMove best;
    enumerate_moves(g, net, 2, 1, [&](const Move& m) {
        Rational v = move_gain(g, ev, net, tau, c, m);
        if (sign(v) > 0 && (!best.move || v > best.gain)) {
            best.move = m;
            best.gain = v;
        }
        return true;
    });
    return best;
}

// Second route for the end-state check: rows from the stability module plus
// the contract change of each move.
inline StabilityReport<Rational> pairwise_stable_given_contracts(const GameInstance& g, const Network& net,
                                                                 const TransferVector<Rational>& tau,
                                                                 const ContractVector& c) {
    tau.validate(net);
    Evaluator<Rational> ev(g);
    RowBuilder<Rational> rb(ev, net);
    StabilityReport<Rational> rep;
    auto rows = pairwise_rows(g, net, rb, &rep.moves);
    rep.rows = static_cast<long>(rows.size());
    auto t = rb.tau_vector(tau);
    rep.stage = "given transfers and contracts";
    for (const auto& r : rows) {
        Network after = apply_move(net, r.move);
        Rational dc = 0;
        for (int i : members(r.move.coalition)) dc += c.income(after, i) - c.income(net, i);
        Rational surplus = r.rhs + dc - rb.lhs(r, t);
        if (sign(surplus) > 0) {
            set_blocking(rep, r.move, surplus);
            rep.blocking_transfers = tau;
            return rep;
        }
    }
    rep.verdict = Verdict::stable;
    rep.witness = tau;
    return rep;
}

struct PolicyCycle : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline TransferVector<Rational> split_new_links(const Move& m, const TransferVector<Rational>& tau,
                                                std::vector<std::pair<int, Rational>>& gains) {
    TransferVector<Rational> out = tau;
    for (auto [a, b] : m.deleted) out.erase(a, b);
    if (m.added.size() == 1 && gains.size() == 2) {
        auto [a, b] = m.added[0];
        Rational ga = gains[0].first == a ? gains[0].second : gains[1].second;
        Rational gb = gains[0].first == b ? gains[0].second : gains[1].second;
        Rational to_a = (gb - ga) / 2;
        out.set(a, b, to_a);
        for (auto& [i, v] : gains) v = i == a ? Rational(ga + to_a) : Rational(gb - to_a);
    }
    return out;
}

inline PolicyTrace simulate_implementable(const GameInstance& g, const Network& start, const TransferVector<Rational>& tau0,
                                          const ContractVector& c, int max_steps = 1000) {
    tau0.validate(start);
    Evaluator<Rational> ev(g);
    PolicyTrace tr;
    tr.welfare_before = ev.total(start);
    Network net = start;
    TransferVector<Rational> tau = tau0;
    std::set<std::pair<std::vector<Edge>, std::map<Edge, Rational>>> seen;
    auto key = [&] { return std::make_pair(net.edges(), tau.entries()); };
    seen.insert(key());
    for (int step = 0;; ++step) {
        auto best = best_pairwise_move(g, net, tau, c);
        if (!best.move) break;
        if (step >= max_steps) throw PolicyCycle("no termination within " + std::to_string(max_steps) + " steps");
        PolicyStep st;
        st.before = net;
        st.move = *best.move;
        st.gain = best.gain;
        st.member_gains = member_gains(g, ev, net, tau, c, st.move);
        tau = split_new_links(st.move, tau, st.member_gains);
        net = apply_move(net, st.move);
        st.transfers_after = tau;
        tr.steps.push_back(st);
        if (!seen.insert(key()).second)
            throw PolicyCycle("state revisited after step " + std::to_string(step + 1) + ": contracts do not implement a terminal network");
    }
    tr.final_network = net;
    tr.final_transfers = tau;
    tr.welfare_after = ev.total(net);
    auto chk = pairwise_stable_given_contracts(g, net, tau, c);
    tr.stable_given_contracts = chk.verdict == Verdict::stable;
    tr.final_blocking = chk.blocking;
    return tr;
}

struct Bridges {
    int i, j, i2, j2;  // links ij and i2 j2 form; i i2 and j j2 are deleted
};

enum class ContractMode { literal, trace };

struct ContractDesign {
    ContractVector contracts;
    Rational total_per_bridge;
    Rational lo, hi;  // open interval for the per-bridge total (hi < 0 means unbounded)
    bool hi_unbounded = false;
    Network target;
};

namespace detail {

inline Network bridged_target(const Network& sorted, const Bridges& b) {
    for (auto [a, c] : std::vector<Edge>{{b.i, b.i2}, {b.j, b.j2}})
        if (!sorted.has_edge(a, c)) throw std::invalid_argument("bridge deletion " + std::to_string(a) + "-" + std::to_string(c) + " is not a link");
    return with_changes(sorted, {make_edge(b.i, b.j), make_edge(b.i2, b.j2)}, {make_edge(b.i, b.i2), make_edge(b.j, b.j2)});
}

inline ContractVector unit_contracts(const Bridges& b, const Rational& total) {
    ContractVector c;
    for (auto [a, d] : std::vector<std::pair<int, int>>{{b.i, b.j}, {b.i2, b.j2}}) {
        c.set(a, d, total / 2);
        c.set(d, a, total / 2);
    }
    return c;
}

// Feasible set of C for constraints alpha + beta C > 0 (strict) or >= 0.
struct Interval {
    Rational lo = 0, hi = 0;
    bool lo_open = false, hi_open = false, hi_inf = true, empty = false;
    void add(const Rational& alpha, const Rational& beta, bool strict) {
        if (sign(beta) == 0) {
            if (sign(alpha) < 0 || (strict && sign(alpha) == 0)) empty = true;
            return;
        }
        Rational x = -alpha / beta;
        if (sign(beta) > 0) {
            if (x > lo || (x == lo && strict)) {
                lo = x;
                lo_open = strict;
            }
        } else if (hi_inf || x < hi || (x == hi && strict)) {
            hi = x;
            hi_open = strict;
            hi_inf = false;
        }
    }
    bool is_empty() const {
        if (empty) return true;
        if (hi_inf) return false;
        return lo > hi || (lo == hi && (lo_open || hi_open));
    }
};

}  // namespace detail

// Literal mode: midpoint of (wedge/2, (U(target) - U(sorted))/2). Trace mode:
// the exact set of per-bridge totals under which the two intended moves are
// the greedy choices and the end state is stable given the contracts.
inline ContractDesign design_contracts(const GameInstance& g, const Network& sorted, const TransferVector<Rational>& tau0,
                                       const Bridges& b, ContractMode mode) {
    if (g.levels().size() != 2) throw std::invalid_argument("contract design needs exactly two types");
    if (g.types[b.i] == g.types[b.j] || g.types[b.i2] == g.types[b.j2])
        throw std::invalid_argument("bridge endpoints must have opposite types");
    if (g.types[b.i] != g.types[b.i2]) throw std::invalid_argument("bridges must start from the same type");
    auto ls = g.levels();
    Rational wedge = g.Zlevels(ls[0], ls[0]) + g.Zlevels(ls[1], ls[1]) - 2 * g.Zlevels(ls[0], ls[1]);
    if (sign(wedge) <= 0) throw std::invalid_argument("empty contract interval: value table is not supermodular (wedge " + to_string(wedge) + ")");
    ContractDesign d;
    d.target = detail::bridged_target(sorted, b);
    Evaluator<Rational> ev(g);
    Rational gap = ev.total(d.target) - ev.total(sorted);
    if (sign(gap) <= 0) throw std::invalid_argument("no welfare gap: U(bridged) <= U(sorted)");
    if (mode == ContractMode::literal) {
        d.lo = wedge / 2;
        d.hi = gap / 2;
        if (!(d.lo < d.hi))
            throw std::invalid_argument("empty contract interval (" + to_string(d.lo) + ", " + to_string(d.hi) + ")");
        d.total_per_bridge = (d.lo + d.hi) / 2;
        d.contracts = detail::unit_contracts(b, d.total_per_bridge);
        return d;
    }
    Move m1{(uint32_t{1} << b.i) | (uint32_t{1} << b.j), {make_edge(b.i, b.j)}, {}};
    m1.deleted = {make_edge(b.i, b.i2), make_edge(b.j, b.j2)};
    std::sort(m1.deleted.begin(), m1.deleted.end());
    Move m2{(uint32_t{1} << b.i2) | (uint32_t{1} << b.j2), {make_edge(b.i2, b.j2)}, {}};
    detail::Interval iv;
    iv.add(0, 1, false);  // nonnegative payments
    auto gains_at = [&](const Network& net, const TransferVector<Rational>& tau, const Rational& C) {
        auto c = detail::unit_contracts(b, C);
        std::vector<std::pair<Move, Rational>> out;
        enumerate_moves(g, net, 2, 1, [&](const Move& m) {
            out.emplace_back(m, move_gain(g, ev, net, tau, c, m));
            return true;
        });
        return out;
    };
    // Gains are affine in C; transfers on new links do not depend on C.
    auto next_tau = [&](const Network& net, const TransferVector<Rational>& tau, const Move& m, const Rational& C) {
        auto gains = member_gains(g, ev, net, tau, detail::unit_contracts(b, C), m);
        return split_new_links(m, tau, gains);
    };
    auto require_greedy = [&](const Network& net, const TransferVector<Rational>& tau, const Move& want) {
        auto g0 = gains_at(net, tau, 0), g1 = gains_at(net, tau, 1);
        const Rational* a_w = nullptr;
        Rational b_w;
        for (size_t k = 0; k < g0.size(); ++k)
            if (g0[k].first == want) {
                a_w = &g0[k].second;
                b_w = g1[k].second - g0[k].second;
            }
        if (!a_w) throw std::invalid_argument("intended move is not a feasible pairwise move");
        iv.add(*a_w, b_w, true);
        for (size_t k = 0; k < g0.size(); ++k) {
            if (g0[k].first == want) continue;
            Rational beta = b_w - (g1[k].second - g0[k].second);
            iv.add(*a_w - g0[k].second, beta, !move_less(want, g0[k].first));
        }
    };
    require_greedy(sorted, tau0, m1);
    auto t1a = next_tau(sorted, tau0, m1, 0), t1b = next_tau(sorted, tau0, m1, 1);
    if (t1a.entries() != t1b.entries()) throw std::logic_error("new-link transfers depend on the contract level");
    Network mid = apply_move(sorted, m1);
    require_greedy(mid, t1a, m2);
    auto t2 = next_tau(mid, t1a, m2, 0);
    Network fin = apply_move(mid, m2);
    {
        auto g0 = gains_at(fin, t2, 0), g1 = gains_at(fin, t2, 1);
        for (size_t k = 0; k < g0.size(); ++k) iv.add(-g0[k].second, -(g1[k].second - g0[k].second), false);
    }
    if (iv.is_empty()) throw std::invalid_argument("no contract level implements the intended trace");
    d.lo = iv.lo;
    d.hi_unbounded = iv.hi_inf;
    d.hi = iv.hi_inf ? Rational(0) : iv.hi;
    if (iv.hi_inf)
        d.total_per_bridge = sign(iv.lo) > 0 ? Rational(2 * iv.lo) : Rational(iv.lo + 1);
    else
        d.total_per_bridge = (iv.lo + iv.hi) / 2;
    d.contracts = detail::unit_contracts(b, d.total_per_bridge);
    return d;
}

struct Star {
    Network net;
    int center = -1;
    bool tie_break = false;  // several agents share the minimal type
};

inline Star build_low_value_star(const GameInstance& g) {
    const int n = g.n();
    if (n < 2) throw std::invalid_argument("a star needs at least two agents");
    Star s;
    s.net = Network(n);
    Rational lo = *std::min_element(g.types.begin(), g.types.end());
    int count = 0;
    for (int i = 0; i < n; ++i)
        if (g.types[i] == lo) {
            s.center = i;
            ++count;
        }
    s.tie_break = count > 1;
    for (int i = 0; i < n; ++i)
        if (i != s.center) s.net.add_edge(i, s.center);
    return s;
}

struct InequalityCheck {
    std::string name;
    Rational lhs, rhs;
    bool strict = false;
    bool holds = false;
};

struct StarReport {
    Star star;
    std::vector<InequalityCheck> structural;   // no transfers involved
    std::vector<InequalityCheck> transfer;     // evaluated at the witness
    std::vector<InequalityCheck> sufficient;   // closed-form sufficient conditions
    std::optional<TransferVector<Rational>> witness;
    bool all_pass = false;
};

namespace detail {

inline InequalityCheck check(std::string name, const Rational& lhs, const Rational& rhs, bool strict = false) {
    return {std::move(name), lhs, rhs, strict, strict ? lhs > rhs : lhs >= rhs};
}

// Linear form in the leaf-to-center transfers t_i = tau(center <- i).
struct Affine {
    Rational c;
    std::vector<Rational> t;
};

}  // namespace detail

// Example 5.1 (n = 3) and Condition B.1 (general n) for the low-value star.
inline StarReport star_conditions(const GameInstance& g, const Rational& delta) {
    if (g.cost.kind == CostKind::quota) throw std::invalid_argument("star conditions need linear or convex costs");
    GameInstance gd = g;
    gd.decay.delta = delta;
    StarReport rep;
    rep.star = build_low_value_star(gd);
    const int n = gd.n(), ctr = rep.star.center;
    if (n < 3) throw std::invalid_argument("star conditions need at least three agents");
    Evaluator<Rational> ev(gd);
    auto c = [&](int k) { return gd.cost.cost(k); };
    std::vector<int> leaves;
    for (int i = 0; i < n; ++i)
        if (i != ctr) leaves.push_back(i);
    auto z = [&](int i, int j) { return gd.z(i, j); };
    auto Z = [&](int i, int j) { return gd.Z(i, j); };
    auto idx = [&](int leaf) { return static_cast<size_t>(std::find(leaves.begin(), leaves.end(), leaf) - leaves.begin()); };
    const size_t m = leaves.size();
    auto s_of = [&](int i) {
        detail::Affine a{ev.utility_unchecked(rep.star.net, i), std::vector<Rational>(m, Rational(0))};
        if (i == ctr)
            for (auto& v : a.t) v = 1;
        else
            a.t[idx(i)] = -1;
        return a;
    };
    struct Row {
        std::string name;
        detail::Affine lhs;
        Rational rhs;
    };
    std::vector<Row> rows;
    auto plus = [](detail::Affine a, const detail::Affine& b) {
        a.c += b.c;
        for (size_t k = 0; k < a.t.size(); ++k) a.t[k] += b.t[k];
        return a;
    };
    for (int i = 0; i < n; ++i) rows.push_back({"s_" + std::to_string(i) + " >= 0", s_of(i), 0});
    for (int i : leaves) {
        detail::Affine a{0, std::vector<Rational>(m, Rational(0))};
        a.t[idx(i)] = 1;
        rows.push_back({"tau(" + std::to_string(ctr) + "<-" + std::to_string(i) + ") >= c(n-1)-c(n-2)-z", a,
                        c(n - 1) - c(n - 2) - z(ctr, i)});
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            rows.push_back({"s_" + std::to_string(i) + "+s_" + std::to_string(j) + " >= Z-2c(1)", plus(s_of(i), s_of(j)),
                            Z(i, j) - 2 * c(1)});
    for (int i : leaves)
        for (int j : leaves) {
            if (i == j) continue;
            // i keeps its link to the center (and its transfer), j drops it.
            Rational rhs = Z(i, j) + z(i, ctr) + delta * z(j, ctr) - c(1) - c(2);
            for (int l : leaves)
                if (l != i && l != j) rhs += delta * (z(i, l) + delta * z(j, l));
            detail::Affine lhs = plus(s_of(i), s_of(j));
            lhs.t[idx(i)] += 1;  // move tau(i <- center) = -t_i to the left side
            rows.push_back({"s_" + std::to_string(i) + "+s_" + std::to_string(j) + " >= form ij, " + std::to_string(j) +
                                " drops center",
                            lhs, rhs});
        }
    for (int a = 0; a < static_cast<int>(m); ++a)
        for (int b = a + 1; b < static_cast<int>(m); ++b) {
            int i = leaves[a], j = leaves[b];
            rep.structural.push_back(detail::check("2[c(2)-c(1)] >= (1-d) Z_" + std::to_string(i) + std::to_string(j),
                                                   2 * (c(2) - c(1)), (1 - delta) * Z(i, j)));
            if (n == 3 && gd.cost.kind == CostKind::convex && static_cast<int>(gd.cost.table.size()) > 3)
                rep.structural.push_back(detail::check("printed form 2[c(3)-c(2)] >= (1-d) Z", 2 * (c(3) - c(2)),
                                                       (1 - delta) * Z(i, j)));
        }
    // Sufficient conditions for linear costs.
    if (gd.cost.kind == CostKind::linear) {
        const Rational& ct = gd.cost.c;
        int h1 = leaves[0], h2 = leaves[1];
        if (n == 3) {
            rep.sufficient.push_back(detail::check("2Z(hi,lo)+Z(hi,hi) >= 4c", 2 * Z(h1, ctr) + Z(h1, h2), 4 * ct));
            rep.sufficient.push_back(detail::check("Z(hi,lo) > c", Z(h1, ctr), ct, true));
        }
        rep.sufficient.push_back(detail::check("d >= 1-2c/Z(x1,x2)", delta, 1 - 2 * ct / Z(h1, h2)));
    }
    // Witness transfers by linear feasibility over t.
    Matrix<Rational> A;
    std::vector<Rational> bvec;
    for (const auto& r : rows) {
        A.push_back(r.lhs.t);
        bvec.push_back(r.rhs - r.lhs.c);
    }
    auto fr = solve_feasibility(A, bvec, m);
    auto eval = [&](const detail::Affine& a, const std::vector<Rational>& t) {
        Rational v = a.c;
        for (size_t k = 0; k < m; ++k) v += a.t[k] * t[k];
        return v;
    };
    if (fr.feasible) {
        TransferVector<Rational> tau;
        for (size_t k = 0; k < m; ++k) tau.set(ctr, leaves[k], fr.x[k]);
        rep.witness = tau;
    }
    // Lower bound on leaf net payoffs for linear costs, checked at the witness.
    for (const auto& r : rows) {
        InequalityCheck ch;
        ch.name = r.name;
        ch.rhs = r.rhs;
        if (fr.feasible) {
            ch.lhs = eval(r.lhs, fr.x);
            ch.holds = ch.lhs >= ch.rhs;
        }
        rep.transfer.push_back(ch);
    }
    if (gd.cost.kind == CostKind::linear && fr.feasible) {
        const Rational& ct = gd.cost.c;
        for (int i : leaves) {
            std::optional<Rational> mx;
            for (int j : leaves)
                if (j != i) {
                    Rational v = (1 - delta * delta) * Z(i, j) - (delta - delta * delta) * z(j, i);
                    if (!mx || v > *mx) mx = v;
                }
            Rational rhs = *mx + delta * z(i, ctr) - 2 * ct;
            for (int l = 0; l < n; ++l)
                if (l != i && l != ctr) rhs += delta * delta * z(i, l);
            rep.sufficient.push_back(detail::check("s_" + std::to_string(i) + " >= payoff bound", eval(s_of(i), fr.x), rhs));
        }
    }
    auto ok = [](const std::vector<InequalityCheck>& v) {
        return std::all_of(v.begin(), v.end(), [](const InequalityCheck& c) { return c.holds; });
    };
    rep.all_pass = fr.feasible && ok(rep.structural) && ok(rep.transfer);
    return rep;
}

struct StarCorollaries {
    bool pairwise_stable = false;
    std::optional<TransferVector<Rational>> witness;
    bool inefficient = false;
    std::optional<Network> better;
    bool sorting_in_type = false, degree_monotonic = false, decay_monotonic = false;
};

inline StarCorollaries verify_star_corollaries(const GameInstance& g, const Rational& delta,
                                               const std::optional<std::vector<Network>>& candidates = std::nullopt) {
    GameInstance gd = g;
    gd.decay.delta = delta;
    auto star = build_low_value_star(gd);
    StarCorollaries r;
    auto pw = pairwise_nash_stable<Rational>(gd, star.net);
    r.pairwise_stable = pw.verdict == Verdict::stable;
    r.witness = pw.witness;
    auto eff = is_efficient<Rational>(gd, star.net, candidates);
    r.inefficient = !eff.efficient;
    if (r.inefficient) r.better = eff.argmax;
    r.sorting_in_type = sorting_in_type(gd, star.net).holds;
    r.degree_monotonic = degree_monotonic(gd, star.net);
    r.decay_monotonic = decay_monotonic(gd, star.net);
    return r;
}

}  // namespace homonet
