#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homonet/game.hpp"
#include "homonet/lp.hpp"
#include "homonet/network.hpp"

namespace homonet {

struct Move {
    uint32_t coalition = 0;
    std::vector<Edge> added;    // sorted
    std::vector<Edge> deleted;  // sorted
    bool operator==(const Move&) const = default;
};

inline bool move_less(const Move& a, const Move& b) {
    auto ma = members(a.coalition), mb = members(b.coalition);
    if (ma != mb) return ma < mb;
    if (a.added != b.added) return a.added < b.added;
    return a.deleted < b.deleted;
}

inline bool is_null(const Move& m) { return m.added.empty() && m.deleted.empty(); }

inline Network apply_move(const Network& net, const Move& m) { return with_changes(net, m.added, m.deleted); }

// Empty string when feasible, otherwise the reason.
inline std::string move_infeasibility(const GameInstance& g, const Network& net, const Move& m) {
    auto in = [&](int i) { return (m.coalition >> i) & 1; };
    for (auto [a, b] : m.added) {
        if (!in(a) || !in(b)) return "added link outside coalition";
        if (net.has_edge(a, b)) return "added link already present";
    }
    for (auto [a, b] : m.deleted) {
        if (!in(a) && !in(b)) return "deleted link without coalition member";
        if (!net.has_edge(a, b)) return "deleted link absent";
    }
    if (g.cost.kind == CostKind::quota) {
        Network after = apply_move(net, m);
        for (int i = 0; i < net.n(); ++i)
            if (after.degree(i) > g.cost.kappa) return "quota exceeded";
    }
    return "";
}

template <class T>
std::vector<std::vector<T>> sorted_subsets(const std::vector<T>& items, size_t max_size) {
    std::vector<std::vector<T>> out;
    size_t k = items.size();
    for (uint64_t s = 0; s < (uint64_t{1} << k); ++s) {
        if (static_cast<size_t>(std::popcount(s)) > max_size) continue;
        std::vector<T> sub;
        for (size_t i = 0; i < k; ++i)
            if ((s >> i) & 1) sub.push_back(items[i]);
        out.push_back(std::move(sub));
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct EnumerationStats {
    long yielded = 0;
    bool truncated = false;  // stopped by the callback or the budget
};

// All feasible moves with |t| <= max_coalition and |added| <= max_adds, in
// order (coalition, added, deleted). The callback returns false to stop.
inline EnumerationStats enumerate_moves(const GameInstance& g, const Network& net, int max_coalition, int max_adds,
                                        const std::function<bool(const Move&)>& visit, bool include_null = false,
                                        long budget = -1) {
    if (max_coalition < 1) throw std::invalid_argument("max_coalition must be at least 1");
    EnumerationStats st;
    const int n = net.n();
    const auto edges = net.edges();
    const bool quota = g.cost.kind == CostKind::quota;
    std::vector<int> deg(n);
    for (int i = 0; i < n; ++i) deg[i] = net.degree(i);
    bool stop = false;

    auto emit_coalition = [&](uint32_t t) {
        std::vector<Edge> addable, deletable;
        auto mem = members(t);
        for (size_t x = 0; x < mem.size(); ++x)
            for (size_t y = x + 1; y < mem.size(); ++y)
                if (!net.has_edge(mem[x], mem[y])) addable.emplace_back(mem[x], mem[y]);
        for (auto e : edges)
            if (((t >> e.first) & 1) || ((t >> e.second) & 1)) deletable.push_back(e);
        auto adds = sorted_subsets(addable, static_cast<size_t>(std::max(max_adds, 0)));
        auto dels = sorted_subsets(deletable, deletable.size());
        std::vector<int> d(n);
        for (const auto& A : adds) {
            for (const auto& D : dels) {
                if (!include_null && A.empty() && D.empty()) continue;
                if (quota) {
                    d = deg;
                    for (auto [a, b] : A) ++d[a], ++d[b];
                    for (auto [a, b] : D) --d[a], --d[b];
                    bool ok = true;
                    for (int i : mem) ok = ok && d[i] <= g.cost.kappa;
                    if (!ok) continue;
                }
                if (budget >= 0 && st.yielded >= budget) {
                    st.truncated = stop = true;
                    return;
                }
                ++st.yielded;
                if (!visit(Move{t, A, D})) {
                    st.truncated = stop = true;
                    return;
                }
            }
        }
    };

    std::function<void(uint32_t, int, int)> rec = [&](uint32_t t, int last, int size) {
        for (int i = last + 1; i < n && !stop; ++i) {
            uint32_t u = t | (uint32_t{1} << i);
            emit_coalition(u);
            if (size + 1 < max_coalition && !stop) rec(u, i, size + 1);
        }
    };
    rec(0, -1, 0);
    return st;
}

// Constraint of one move: sum_{k in pos} tau_k - sum_{k in neg} tau_k >= rhs,
// with tau_k the transfer to the lower endpoint of the k-th link.
template <class S>
struct MoveRow {
    uint64_t pos = 0, neg = 0;
    S rhs = 0;
    Move move;
};

template <class S>
class RowBuilder {
public:
    RowBuilder(const Evaluator<S>& ev, const Network& net) : ev_(&ev), net_(&net), edges_(net.edges()) {
        base_ = ev.utilities(net);
        index_.assign(net.n(), std::vector<int>(net.n(), -1));
        for (size_t k = 0; k < edges_.size(); ++k) index_[edges_[k].first][edges_[k].second] = static_cast<int>(k);
        if (edges_.size() > 64) throw std::invalid_argument("too many links for the constraint encoding");
    }

    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<S>& base() const { return base_; }
    int edge_index(int a, int b) const { return index_[std::min(a, b)][std::max(a, b)]; }

    void signature(const Move& m, MoveRow<S>& r) const {
        r.pos = r.neg = 0;
        for (auto [a, b] : m.deleted) {
            bool ia = (m.coalition >> a) & 1, ib = (m.coalition >> b) & 1;
            int k = edge_index(a, b);
            if (ia && !ib) r.pos |= uint64_t{1} << k;
            if (ib && !ia) r.neg |= uint64_t{1} << k;
        }
    }

    MoveRow<S> row(const Move& m) const {
        MoveRow<S> r;
        r.move = m;
        Network after = apply_move(*net_, m);
        for (int i : members(m.coalition)) r.rhs += ev_->utility_unchecked(after, i) - base_[i];
        signature(m, r);
        return r;
    }

    S lhs(const MoveRow<S>& r, const std::vector<S>& tau) const {
        S v = 0;
        for (uint64_t p = r.pos; p; p &= p - 1) v += tau[std::countr_zero(p)];
        for (uint64_t q = r.neg; q; q &= q - 1) v -= tau[std::countr_zero(q)];
        return v;
    }

    std::vector<S> tau_vector(const TransferVector<S>& t) const {
        std::vector<S> v(edges_.size(), S(0));
        for (size_t k = 0; k < edges_.size(); ++k) v[k] = t.get(edges_[k].first, edges_[k].second);
        return v;
    }

    TransferVector<S> transfers(const std::vector<S>& tau) const {
        TransferVector<S> t;
        for (size_t k = 0; k < edges_.size(); ++k)
            if (sign(tau[k]) != 0) t.set(edges_[k].first, edges_[k].second, tau[k]);
        return t;
    }

private:
    const Evaluator<S>* ev_;
    const Network* net_;
    std::vector<Edge> edges_;
    std::vector<S> base_;
    std::vector<std::vector<int>> index_;
};

enum class Verdict { stable, unstable, unknown_at_bound };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::stable: return "stable";
        case Verdict::unstable: return "unstable";
        case Verdict::unknown_at_bound: return "unknown-at-bound";
    }
    return "";
}

struct SearchBounds {
    int max_coalition = 2;
    int max_adds = 1;
    long budget = -1;
    bool full = false;  // every coalition and every target network covered
};

template <class S>
struct StabilityReport {
    Verdict verdict = Verdict::stable;
    std::optional<TransferVector<S>> witness;
    std::optional<Move> blocking;
    S surplus = 0;                          // blocking surplus under the reported transfers
    std::vector<std::pair<int, S>> gains;   // equal split of the surplus
    std::optional<TransferVector<S>> blocking_transfers;
    std::vector<std::pair<Move, S>> certificate;  // Farkas multipliers per move
    SearchBounds bounds;
    std::string stage;  // which check decided the verdict
    long moves = 0, rows = 0, lp_solves = 0, pivots = 0;
};

template <class S>
void set_blocking(StabilityReport<S>& rep, const Move& m, const S& surplus) {
    rep.verdict = Verdict::unstable;
    rep.blocking = m;
    rep.surplus = surplus;
    rep.gains.clear();
    auto mem = members(m.coalition);
    for (int i : mem) rep.gains.emplace_back(i, S(surplus / static_cast<long>(mem.size())));
}

template <class S>
struct BlockingGain {
    S surplus = 0;
    bool blocks = false;
    std::vector<std::pair<int, S>> gains;
};

// Joint surplus of the coalition: post-move utilities plus retained external
// transfer income minus current net payoffs.
template <class S = Rational>
BlockingGain<S> blocking_gain(const GameInstance& g, const Network& net, const TransferVector<S>& tau, const Move& m) {
    if (auto why = move_infeasibility(g, net, m); !why.empty()) throw std::invalid_argument("infeasible move: " + why);
    tau.validate(net);
    Evaluator<S> ev(g);
    Network after = apply_move(net, m);
    BlockingGain<S> r;
    auto in = [&](int i) { return (m.coalition >> i) & 1; };
    auto mem = members(m.coalition);
    for (int i : mem) {
        r.surplus += ev.utility_unchecked(after, i);
        for (int j : after.neighbors(i))
            if (!in(j) && net.has_edge(i, j)) r.surplus += tau.get(i, j);
        r.surplus -= ev.utility_unchecked(net, i) + tau.income(net, i);
    }
    r.blocks = sign(r.surplus) > 0;
    for (int i : mem) r.gains.emplace_back(i, S(r.surplus / static_cast<long>(mem.size())));
    return r;
}

struct PairwiseOptions {
    int max_agents = -1;  // default: 10 under a quota, 7 otherwise
    int cuts_per_round = 20;
};

inline int default_pairwise_cap(const GameInstance& g) { return g.cost.kind == CostKind::quota ? 10 : 7; }

template <class S>
std::vector<MoveRow<S>> pairwise_rows(const GameInstance& g, const Network& net, const RowBuilder<S>& rb, long* count) {
    std::vector<MoveRow<S>> rows;
    auto st = enumerate_moves(g, net, 2, 1, [&](const Move& m) {
        rows.push_back(rb.row(m));
        return true;
    });
    if (count) *count += st.yielded;
    return rows;
}

// Keeps the largest right-hand side per coefficient signature.
template <class S>
std::vector<MoveRow<S>> group_rows(std::vector<MoveRow<S>> rows) {
    std::map<std::pair<uint64_t, uint64_t>, size_t> best;
    std::vector<MoveRow<S>> out;
    for (auto& r : rows) {
        auto key = std::make_pair(r.pos, r.neg);
        auto it = best.find(key);
        if (it == best.end()) {
            best.emplace(key, out.size());
            out.push_back(std::move(r));
        } else if (sign(S(r.rhs - out[it->second].rhs)) > 0) {
            out[it->second] = std::move(r);
        }
    }
    return out;
}

// Cutting-plane search for tau with every row satisfied.
template <class S>
StabilityReport<S> solve_rows(const RowBuilder<S>& rb, std::vector<MoveRow<S>> rows, int cuts_per_round) {
    StabilityReport<S> rep;
    rep.rows = static_cast<long>(rows.size());
    for (const auto& r : rows)
        if (r.pos == 0 && r.neg == 0 && sign(r.rhs) > 0) {
            set_blocking(rep, r.move, r.rhs);
            rep.blocking_transfers = TransferVector<S>{};
            rep.stage = "transfer-free block";
            return rep;
        }
    const size_t E = rb.edges().size();
    std::vector<S> tau(E, S(0));
    std::vector<size_t> active;
    std::vector<char> is_active(rows.size(), 0);
    for (;;) {
        std::vector<std::pair<S, size_t>> viol;
        for (size_t k = 0; k < rows.size(); ++k) {
            S v = rows[k].rhs - rb.lhs(rows[k], tau);
            if (sign(v) > 0) viol.emplace_back(v, k);
        }
        if (viol.empty()) {
            rep.verdict = Verdict::stable;
            rep.witness = rb.transfers(tau);
            rep.stage = "linear feasibility";
            return rep;
        }
        std::stable_sort(viol.begin(), viol.end(), [](const auto& a, const auto& b) { return sign(S(a.first - b.first)) > 0; });
        int added = 0;
        for (const auto& [v, k] : viol) {
            if (added >= cuts_per_round) break;
            if (is_active[k]) continue;
            is_active[k] = 1;
            active.push_back(k);
            ++added;
        }
        if (added == 0) throw std::logic_error("cutting plane made no progress");
        Matrix<S> A;
        std::vector<S> b;
        for (size_t k : active) {
            std::vector<S> row(E, S(0));
            for (uint64_t p = rows[k].pos; p; p &= p - 1) row[std::countr_zero(p)] = 1;
            for (uint64_t q = rows[k].neg; q; q &= q - 1) row[std::countr_zero(q)] = -1;
            A.push_back(std::move(row));
            b.push_back(rows[k].rhs);
        }
        auto res = solve_feasibility(A, b, E);
        ++rep.lp_solves;
        rep.pivots += res.pivots;
        if (res.feasible) {
            tau = res.x;
            continue;
        }
        // Report the first supported move that blocks at zero transfers.
        std::optional<size_t> pick;
        for (size_t a = 0; a < active.size(); ++a) {
            if (sign(res.farkas[a]) == 0) continue;
            rep.certificate.emplace_back(rows[active[a]].move, res.farkas[a]);
            if (sign(rows[active[a]].rhs) > 0 && (!pick || move_less(rows[active[a]].move, rows[active[*pick]].move))) pick = a;
        }
        set_blocking(rep, rows[active[*pick]].move, rows[active[*pick]].rhs);
        rep.blocking_transfers = TransferVector<S>{};
        rep.stage = "Farkas certificate";
        return rep;
    }
}

template <class S = Rational>
StabilityReport<S> pairwise_stable_given_transfers(const GameInstance& g, const Network& net, const TransferVector<S>& tau) {
    tau.validate(net);
    Evaluator<S> ev(g);
    RowBuilder<S> rb(ev, net);
    StabilityReport<S> rep;
    auto rows = pairwise_rows(g, net, rb, &rep.moves);
    rep.rows = static_cast<long>(rows.size());
    auto t = rb.tau_vector(tau);
    for (const auto& r : rows) {
        S surplus = r.rhs - rb.lhs(r, t);
        if (sign(surplus) > 0) {
            set_blocking(rep, r.move, surplus);
            rep.blocking_transfers = tau;
            rep.stage = "given transfers";
            return rep;
        }
    }
    rep.verdict = Verdict::stable;
    rep.witness = tau;
    rep.stage = "given transfers";
    return rep;
}

template <class S = Rational>
StabilityReport<S> pairwise_nash_stable(const GameInstance& g, const Network& net, const PairwiseOptions& opt = {}) {
    int cap = opt.max_agents >= 0 ? opt.max_agents : default_pairwise_cap(g);
    if (net.n() > cap)
        throw std::invalid_argument("instance too large for exact pairwise enumeration (n=" + std::to_string(net.n()) +
                                    ", cap " + std::to_string(cap) + ")");
    Evaluator<S> ev(g);
    RowBuilder<S> rb(ev, net);
    long count = 0;
    auto rows = group_rows(pairwise_rows(g, net, rb, &count));
    auto rep = solve_rows(rb, std::move(rows), opt.cuts_per_round);
    rep.moves = count;
    rep.bounds = SearchBounds{2, 1, -1, false};
    return rep;
}

template <class S>
struct EfficiencyReport {
    bool efficient = true;
    Network argmax;
    S max_total = 0;
    S total = 0;
    long candidates = 0;
};

struct EfficiencyOptions {
    int max_agents = -1;  // default: 8 under a quota of at most 3, 6 otherwise
};

inline int default_efficiency_cap(const GameInstance& g) {
    return g.cost.kind == CostKind::quota && g.cost.kappa <= 3 ? 8 : 6;
}

template <class S = Rational>
EfficiencyReport<S> is_efficient(const GameInstance& g, const Network& net,
                                 const std::optional<std::vector<Network>>& candidates = std::nullopt,
                                 const EfficiencyOptions& opt = {}) {
    Evaluator<S> ev(g);
    EfficiencyReport<S> rep;
    rep.total = ev.total(net);
    rep.max_total = rep.total;
    rep.argmax = net;
    auto consider = [&](const Network& c) {
        ++rep.candidates;
        S u = ev.total(c);
        if (sign(S(u - rep.max_total)) > 0) {
            rep.max_total = u;
            rep.argmax = c;
        }
        return true;
    };
    if (candidates) {
        for (const auto& c : *candidates) consider(c);
    } else {
        int cap = opt.max_agents >= 0 ? opt.max_agents : default_efficiency_cap(g);
        if (net.n() > cap)
            throw std::invalid_argument("enumeration cap exceeded without candidate set (n=" + std::to_string(net.n()) +
                                        ", cap " + std::to_string(cap) + ")");
        for_each_network(net.n(), g.cost.max_degree(net.n()), consider);
    }
    rep.efficient = !(sign(S(rep.max_total - rep.total)) > 0);
    return rep;
}

inline Move transition_move(const Network& from, const Network& to, uint32_t coalition) {
    Move m;
    m.coalition = coalition;
    for (auto e : to.edges())
        if (!from.has_edge(e.first, e.second)) m.added.push_back(e);
    for (auto e : from.edges())
        if (!to.has_edge(e.first, e.second)) m.deleted.push_back(e);
    return m;
}

// One row per (target network, realizing coalition), grouped by signature.
template <class S>
std::vector<MoveRow<S>> full_coalition_rows(const GameInstance& g, const Network& net, const Evaluator<S>& ev,
                                            const RowBuilder<S>& rb, long* count) {
    const int n = net.n();
    const uint32_t all = n == 32 ? ~uint32_t{0} : (uint32_t{1} << n) - 1;
    std::map<std::pair<uint64_t, uint64_t>, MoveRow<S>> best;
    const auto& base = rb.base();
    for_each_network(n, g.cost.max_degree(n), [&](const Network& target) {
        if (target == net) return true;
        Move shape = transition_move(net, target, 0);
        uint32_t req = 0;
        for (auto [a, b] : shape.added) req |= (uint32_t{1} << a) | (uint32_t{1} << b);
        std::vector<S> du(n);
        for (int i = 0; i < n; ++i) du[i] = ev.utility_unchecked(target, i) - base[i];
        std::vector<std::pair<int, int>> del;
        for (auto [a, b] : shape.deleted) del.emplace_back(a, b);
        uint32_t free = all & ~req;
        for (uint32_t s = free;; s = (s - 1) & free) {
            uint32_t t = req | s;
            bool hits = t != 0;
            for (auto [a, b] : del) hits = hits && (((t >> a) & 1) || ((t >> b) & 1));
            if (hits) {
                ++*count;
                MoveRow<S> r;
                for (uint32_t x = t; x; x &= x - 1) r.rhs += du[std::countr_zero(x)];
                r.move = shape;
                r.move.coalition = t;
                rb.signature(r.move, r);
                auto key = std::make_pair(r.pos, r.neg);
                auto it = best.find(key);
                if (it == best.end())
                    best.emplace(key, std::move(r));
                else if (sign(S(r.rhs - it->second.rhs)) > 0 ||
                         (sign(S(r.rhs - it->second.rhs)) == 0 && move_less(r.move, it->second.move)))
                    it->second = std::move(r);
            }
            if (s == 0) break;
        }
        return true;
    });
    std::vector<MoveRow<S>> out;
    for (auto& [k, r] : best) out.push_back(std::move(r));
    return out;
}

struct StrongOptions {
    EfficiencyOptions efficiency;
    PairwiseOptions pairwise;
    int full_bound_max_agents = 8;
};

// Sound for "unstable"; "stable" only when the bounds cover every coalition.
template <class S = Rational>
StabilityReport<S> strongly_stable(const GameInstance& g, const Network& net, SearchBounds bounds,
                                   const StrongOptions& opt = {}) {
    const int n = net.n();
    bounds.full = bounds.max_coalition >= n && bounds.max_adds >= n * (n - 1) / 2;
    Evaluator<S> ev(g);
    int ecap = opt.efficiency.max_agents >= 0 ? opt.efficiency.max_agents : default_efficiency_cap(g);
    if (n <= ecap) {
        auto eff = is_efficient<S>(g, net, std::nullopt, opt.efficiency);
        if (!eff.efficient) {
            StabilityReport<S> rep;
            uint32_t everyone = n == 32 ? ~uint32_t{0} : (uint32_t{1} << n) - 1;
            set_blocking(rep, transition_move(net, eff.argmax, everyone), S(eff.max_total - eff.total));
            rep.blocking_transfers = TransferVector<S>{};
            rep.stage = "efficiency";
            rep.bounds = bounds;
            return rep;
        }
    }
    auto pw = pairwise_nash_stable<S>(g, net, opt.pairwise);
    if (pw.verdict == Verdict::unstable) {
        pw.stage = "pairwise: " + pw.stage;
        pw.bounds = bounds;
        return pw;
    }
    RowBuilder<S> rb(ev, net);
    long count = 0;
    std::vector<MoveRow<S>> rows;
    if (bounds.full) {
        if (n > opt.full_bound_max_agents)
            throw std::invalid_argument("full coalition bound too large (n=" + std::to_string(n) + ")");
        rows = full_coalition_rows(g, net, ev, rb, &count);
    } else {
        auto raw = pairwise_rows(g, net, rb, &count);
        enumerate_moves(g, net, bounds.max_coalition, bounds.max_adds, [&](const Move& m) {
            ++count;
            raw.push_back(rb.row(m));
            return true;
        }, false, bounds.budget);
        rows = group_rows(std::move(raw));
    }
    auto rep = solve_rows(rb, std::move(rows), opt.pairwise.cuts_per_round);
    rep.moves = count;
    rep.bounds = bounds;
    if (rep.verdict == Verdict::stable && !bounds.full) rep.verdict = Verdict::unknown_at_bound;
    rep.stage = (bounds.full ? "full coalition bound: " : "bounded coalitions: ") + rep.stage;
    return rep;
}

// Every coalition and target network checked at the given transfers.
template <class S = Rational>
StabilityReport<S> strongly_stable_given_transfers(const GameInstance& g, const Network& net, const TransferVector<S>& tau,
                                                   int max_agents = 8) {
    tau.validate(net);
    if (net.n() > max_agents) throw std::invalid_argument("full coalition bound too large");
    Evaluator<S> ev(g);
    RowBuilder<S> rb(ev, net);
    StabilityReport<S> rep;
    auto rows = full_coalition_rows(g, net, ev, rb, &rep.moves);
    rep.rows = static_cast<long>(rows.size());
    rep.bounds = SearchBounds{net.n(), net.n() * (net.n() - 1) / 2, -1, true};
    auto t = rb.tau_vector(tau);
    std::optional<size_t> worst;
    for (size_t k = 0; k < rows.size(); ++k) {
        S s = rows[k].rhs - rb.lhs(rows[k], t);
        if (sign(s) > 0 && (!worst || move_less(rows[k].move, rows[*worst].move))) worst = k;
    }
    rep.stage = "given transfers, full coalition bound";
    if (worst) {
        set_blocking(rep, rows[*worst].move, S(rows[*worst].rhs - rb.lhs(rows[*worst], t)));
        rep.blocking_transfers = tau;
        return rep;
    }
    rep.verdict = Verdict::stable;
    rep.witness = tau;
    return rep;
}

}  // namespace homonet
