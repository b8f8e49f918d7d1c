#pragma once

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/isomorphism.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "homonet/game.hpp"
#include "homonet/network.hpp"
#include "homonet/rational.hpp"

namespace homonet {

inline long ipow(long b, int e) {
    long r = 1;
    while (e-- > 0) r *= b;
    return r;
}

// Smallest r with 1 + sum_{l=1}^r k(k-1)^{l-1} >= n; -1 if none exists.
inline int diameter_bound(int n, int kappa) {
    if (n <= 1) return 0;
    if (kappa < 1) return -1;
    long reach = 1;
    for (int r = 1; r <= n; ++r) {
        reach += kappa * ipow(kappa - 1, r - 1);
        if (reach >= n) return r;
        if (kappa == 1) break;
    }
    return -1;
}

inline long deficiency(int n, int kappa) {
    int r = diameter_bound(n, kappa);
    if (r < 0) throw std::invalid_argument("no local tree diameter for these sizes");
    long s = 1;
    for (int l = 1; l <= r; ++l) s += kappa * ipow(kappa - 1, l - 1);
    return s - n;
}

struct LocalTreeProfile {
    int n = 0, kappa = 0, r = 0;
    long deficiency = 0;
    std::vector<std::vector<long>> hist;  // hist[i][p], p = 1..r

    // Sizes only, for closed forms that never look at a graph.
    static LocalTreeProfile ideal(int n, int kappa) {
        LocalTreeProfile p;
        p.n = n;
        p.kappa = kappa;
        p.r = diameter_bound(n, kappa);
        if (p.r < 0) throw std::invalid_argument("no local tree for n=" + std::to_string(n) + ", kappa=" + std::to_string(kappa));
        p.deficiency = homonet::deficiency(n, kappa);
        return p;
    }
};

inline bool is_exact(const LocalTreeProfile& p) { return p.deficiency == 0; }

struct LocalTreeCheck {
    bool holds = false;
    std::string reason;
    LocalTreeProfile profile;
};

inline LocalTreeCheck is_local_tree(const Network& net, int kappa) {
    LocalTreeCheck c;
    const int n = net.n();
    c.profile.n = n;
    c.profile.kappa = kappa;
    for (int i = 0; i < n; ++i)
        if (net.degree(i) != kappa) {
            c.reason = "not regular";
            return c;
        }
    int r = diameter_bound(n, kappa);
    if (r < 0) {
        c.reason = "no admissible diameter";
        return c;
    }
    c.profile.r = r;
    c.profile.deficiency = deficiency(n, kappa);
    if (net.diameter() != r) {
        c.reason = "diameter differs from bound";
        return c;
    }
    c.profile.hist.assign(n, std::vector<long>(r + 1, 0));
    for (int i = 0; i < n; ++i) {
        auto ls = net.layers(i);
        for (size_t d = 1; d < ls.size(); ++d) c.profile.hist[i][d] = std::popcount(ls[d]);
        // Every agent j at distance d <= r-2 needs k-1 links one step further out.
        for (int d = 1; d <= r - 2 && d < static_cast<int>(ls.size()); ++d) {
            uint32_t next = d + 1 < static_cast<int>(ls.size()) ? ls[d + 1] : 0;
            for (int j : members(ls[d]))
                if (std::popcount(net.adj(j) & next) != kappa - 1) {
                    c.reason = "branching fails";
                    return c;
                }
        }
    }
    c.holds = true;
    return c;
}

// Agent-level construction: circulant bipartite shift, complement for large
// quotas, patch agent for odd sizes. The result is validated.
inline Network build_regular_network(int n, int kappa) {
    if (n <= kappa) throw std::invalid_argument("need n > kappa");
    if (kappa < 1) throw std::invalid_argument("need kappa >= 1");
    if ((n * kappa) % 2) throw std::invalid_argument("n * kappa must be even");
    std::function<Network(int, int)> even = [&](int m, int k) {
        Network net(m);
        int h = m / 2;
        if (k <= h) {
            for (int i = 0; i < h; ++i)
                for (int l = 0; l < k; ++l) net.add_edge(i, h + (i + l) % h);
            return net;
        }
        Network sparse = even(m, m - k - 1);
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b)
                if (!sparse.has_edge(a, b)) net.add_edge(a, b);
        return net;
    };
    Network out(n);
    if (kappa == n - 1) {
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) out.add_edge(a, b);
    } else if (n % 2 == 0) {
        out = even(n, kappa);
    } else {
        int h = (n - 1) / 2;
        Network base = even(n - 1, kappa);
        int shift = kappa <= h ? 0 : h - 1;
        for (int a = 0; a < n - 1; ++a)
            for (int b : base.neighbors(a))
                if (a < b) out.add_edge(a, b);
        for (int i = 0; i < kappa / 2; ++i) {
            int j = h + (i + shift) % h;
            if (!out.has_edge(i, j)) throw std::logic_error("patch link missing");
            out.remove_edge(i, j);
            out.add_edge(n - 1, i);
            out.add_edge(n - 1, j);
        }
    }
    for (int i = 0; i < n; ++i)
        if (out.degree(i) != kappa) throw std::logic_error("construction not regular");
    if (kappa >= 2 && !out.is_connected()) throw std::logic_error("construction not connected");
    return out;
}

enum class CanonicalKind { cycle, clique, footnote_10_3, petersen };

inline Network build_canonical_local_tree(CanonicalKind kind, int n) {
    switch (kind) {
        case CanonicalKind::cycle: {
            if (n < 3) throw std::invalid_argument("cycle needs n >= 3");
            Network net(n);
            for (int i = 0; i < n; ++i) net.add_edge(i, (i + 1) % n);
            return net;
        }
        case CanonicalKind::clique: {
            if (n < 2) throw std::invalid_argument("clique needs n >= 2");
            Network net(n);
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b) net.add_edge(a, b);
            return net;
        }
        case CanonicalKind::footnote_10_3: {
            if (n != 10) throw std::invalid_argument("the listed (10,3) instance has n = 10");
            return Network(10, {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {1, 5}, {2, 6}, {2, 7}, {3, 8},
                                {3, 9}, {4, 6}, {4, 8}, {5, 7}, {5, 9}, {6, 8}, {7, 9}});
        }
        case CanonicalKind::petersen: {
            if (n != 10) throw std::invalid_argument("Petersen graph has n = 10");
            Network net(10);
            for (int i = 0; i < 5; ++i) {
                net.add_edge(i, (i + 1) % 5);
                net.add_edge(i, i + 5);
                net.add_edge(i + 5, (i + 2) % 5 + 5);
            }
            return net;
        }
    }
    throw std::invalid_argument("unknown kind");
}

// Visits every kappa-regular graph on n agents whose agent 0 is linked to
// 1..kappa (every isomorphism class has such a labelling) and that passes
// is_local_tree. Budget counts backtracking nodes; returns false when exhausted.
inline bool enumerate_local_trees(int n, int kappa, long budget, const std::function<bool(const Network&)>& visit,
                                  long* nodes_used = nullptr) {
    if (n <= kappa || kappa < 1 || (n * kappa) % 2) return true;
    Network net(n);
    for (int j = 1; j <= kappa; ++j) net.add_edge(0, j);
    long nodes = 0;
    bool exhausted = false, stopped = false;
    std::function<void(int)> fill = [&](int v) {
        if (stopped || exhausted) return;
        if (budget >= 0 && ++nodes > budget) {
            exhausted = true;
            return;
        }
        if (budget < 0) ++nodes;
        while (v < n && net.degree(v) == kappa) ++v;
        if (v == n) {
            if (is_local_tree(net, kappa).holds && !visit(net)) stopped = true;
            return;
        }
        int need = kappa - net.degree(v);
        std::vector<int> cand;
        for (int u = v + 1; u < n; ++u)
            if (!net.has_edge(v, u) && net.degree(u) < kappa) cand.push_back(u);
        if (static_cast<int>(cand.size()) < need) return;
        std::vector<int> pick;
        std::function<void(size_t)> choose = [&](size_t start) {
            if (stopped || exhausted) return;
            if (static_cast<int>(pick.size()) == need) {
                for (int u : pick) net.add_edge(v, u);
                fill(v + 1);
                for (int u : pick) net.remove_edge(v, u);
                return;
            }
            for (size_t k = start; k < cand.size(); ++k) {
                if (cand.size() - k < static_cast<size_t>(need) - pick.size()) break;
                pick.push_back(cand[k]);
                choose(k + 1);
                pick.pop_back();
            }
        };
        choose(0);
    };
    fill(1);
    if (nodes_used) *nodes_used = nodes;
    return !exhausted;
}

struct LocalTreeSearch {
    std::optional<Network> found;
    bool exhausted_budget = false;
    long nodes = 0;
};

inline LocalTreeSearch search_local_tree(int n, int kappa, long budget) {
    LocalTreeSearch s;
    bool complete = enumerate_local_trees(n, kappa, budget, [&](const Network& net) {
        s.found = net;
        return false;
    }, &s.nodes);
    s.exhausted_budget = !complete && !s.found;
    return s;
}

namespace detail {

using BoostGraph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS>;

inline BoostGraph to_boost(const Network& net) {
    BoostGraph g(net.n());
    for (auto [a, b] : net.edges()) boost::add_edge(a, b, g);
    return g;
}

// Invariant used to bucket graphs before exact isomorphism tests.
inline std::vector<long> iso_invariant(const Network& net) {
    std::vector<long> per;
    for (int i = 0; i < net.n(); ++i) {
        long key = 0;
        for (uint32_t l : net.layers(i)) key = key * 64 + std::popcount(l);
        long tri = 0;
        for (int j : net.neighbors(i)) tri += std::popcount(net.adj(i) & net.adj(j));
        per.push_back(key * 1024 + tri);
    }
    std::sort(per.begin(), per.end());
    return per;
}

}  // namespace detail

inline bool isomorphic(const Network& a, const Network& b) {
    if (a.n() != b.n() || a.num_edges() != b.num_edges()) return false;
    if (detail::iso_invariant(a) != detail::iso_invariant(b)) return false;
    auto ga = detail::to_boost(a), gb = detail::to_boost(b);
    return boost::isomorphism(ga, gb);
}

// One representative (first seen) per isomorphism class.
inline std::vector<Network> isomorphism_classes(const std::vector<Network>& nets) {
    std::map<std::vector<long>, std::vector<size_t>> buckets;
    std::vector<Network> reps;
    for (const auto& net : nets) {
        auto& bucket = buckets[detail::iso_invariant(net)];
        bool seen = false;
        for (size_t k : bucket) {
            auto ga = detail::to_boost(reps[k]), gb = detail::to_boost(net);
            if (boost::isomorphism(ga, gb)) {
                seen = true;
                break;
            }
        }
        if (!seen) {
            bucket.push_back(reps.size());
            reps.push_back(net);
        }
    }
    return reps;
}

inline bool has_symmetric_losses(const Network& net, int kappa) {
    auto chk = is_local_tree(net, kappa);
    if (!chk.holds) throw std::invalid_argument("not a local tree: " + chk.reason);
    int r = chk.profile.r;
    for (auto [a, b] : net.edges()) {
        Network cut = net;
        cut.remove_edge(a, b);
        auto la = cut.layers(a), lb = cut.layers(b);
        for (int p = 1; p <= r; ++p) {
            int ca = p < static_cast<int>(la.size()) ? std::popcount(la[p]) : 0;
            int cb = p < static_cast<int>(lb.size()) ? std::popcount(lb[p]) : 0;
            if (ca != cb) return false;
        }
    }
    return true;
}

// Same comparison over the whole post-deletion histogram.
inline bool has_symmetric_losses_full(const Network& net) {
    for (auto [a, b] : net.edges()) {
        Network cut = net;
        cut.remove_edge(a, b);
        auto la = cut.layers(a), lb = cut.layers(b);
        if (la.size() != lb.size()) return false;
        for (size_t p = 1; p < la.size(); ++p)
            if (std::popcount(la[p]) != std::popcount(lb[p])) return false;
    }
    return true;
}

// Closed forms for exact local trees. Distances use the weight convention of
// link_weight; `literal` reproduces the printed exponent conventions.

enum class Scenario { baseline, after_deletion, after_bridging };

inline void require_exact(const LocalTreeProfile& p) {
    if (!is_exact(p)) throw std::invalid_argument("closed form needs an exact local tree");
}

// Number of x~ agents at distance b from a bridge endpoint after its own
// component lost one link at that endpoint, b = 0..2r.
inline long side_count(const LocalTreeProfile& p, int b) {
    return ipow(p.kappa - 1, std::min(b, 2 * p.r - b));
}

// Number of agents with p_hat = the given value after deleting one link.
inline long agents_at_phat(const LocalTreeProfile& p, int ph) {
    if (ph < p.r) return 2 * ipow(p.kappa - 1, ph);
    long rest = p.n;
    for (int l = 0; l < p.r; ++l) rest -= 2 * ipow(p.kappa - 1, l);
    return rest;
}

inline long closed_form_counts(const LocalTreeProfile& p, Scenario s, int p_hat, int dist, bool literal = false) {
    const int r = p.r;
    const long k1 = p.kappa - 1;
    switch (s) {
        case Scenario::baseline:
            if (dist < 1 || dist > r) throw std::out_of_range("distance out of range");
            return p.kappa * ipow(k1, dist - 1) - (dist == r ? p.deficiency : 0);
        case Scenario::after_deletion:
            require_exact(p);
            if (p_hat < 0 || p_hat > r || dist < 1 || dist > 2 * r - p_hat) throw std::out_of_range("distance out of range");
            if (dist <= r) return p.kappa * ipow(k1, dist - 1) - (dist > p_hat ? ipow(k1, dist - p_hat - 1) : 0);
            return ipow(k1, 2 * r - p_hat - dist);
        case Scenario::after_bridging: {
            require_exact(p);
            if (p_hat < 0 || p_hat > r || dist < 1 || dist > 2 * r + 1) throw std::out_of_range("distance out of range");
            if (literal) {
                if (dist >= p_hat + 1 && dist <= r + 1 + p_hat) return ipow(k1, dist - 1 - p_hat);
                if (dist >= r + p_hat + 2 && dist <= 2 * r + 1) {
                    int e = 2 * r + 1 - dist - p_hat;
                    if (e < 0) throw std::domain_error("printed exponent negative");
                    return ipow(k1, e);
                }
                if (dist >= 2 * r + 1 - p_hat && dist <= 2 * r) return ipow(k1, dist + p_hat - 2 * r - 1);
                return 0;
            }
            long c = 0;
            for (int b = 0; b <= 2 * r; ++b)
                if (1 + std::min(p_hat + b, 4 * r - p_hat - b) == dist) c += side_count(p, b);
            return c;
        }
    }
    return 0;
}

namespace detail {

inline Rational weight(DecayKind kind, const Rational& delta, int dist) {
    return link_weight<Rational>(DecayModel{kind, delta}, dist);
}

inline void require_constant(DecayKind kind) {
    if (kind != DecayKind::constant) throw std::invalid_argument("printed forms are stated for constant decay");
}

}  // namespace detail

// Loss of an agent at p_hat from the deleted link; p_hat < 0 gives the
// aggregate over the component.
inline Rational closed_form_loss(const LocalTreeProfile& p, const Rational& delta, const Rational& z_same, int p_hat,
                                 DecayKind kind = DecayKind::constant, bool literal = false) {
    require_exact(p);
    const int r = p.r;
    const long k1 = p.kappa - 1;
    Rational s = 0;
    if (literal) {
        detail::require_constant(kind);
        if (p_hat >= 0) {
            for (int l = 1; l <= r - p_hat; ++l)
                s += Rational(ipow(k1, l - 1)) * (rpow(delta, l - 1 + p_hat) - rpow(delta, 2 * r - (l - 1) - p_hat));
        } else {
            for (int l = 1; l <= r; ++l)
                s += Rational(2 * l * ipow(k1, l - 1)) * (rpow(delta, l - 1) - rpow(delta, 2 * r - (l - 1)));
        }
        return s * z_same;
    }
    auto w = [&](int d) { return detail::weight(kind, delta, d); };
    if (p_hat >= 0) {
        for (int l = 1; l <= r - p_hat; ++l) s += Rational(ipow(k1, l - 1)) * (w(p_hat + l) - w(2 * r - p_hat - l + 1));
    } else {
        for (int m = 1; m <= r; ++m) s += Rational(2 * m * ipow(k1, m - 1)) * (w(m) - w(2 * r - m + 1));
    }
    return s * z_same;
}

enum class GainVariant { focal_pairwise, agent, aggregate };

// focal_pairwise and agent take z(x,x~); aggregate takes Z(x,x~).
inline Rational closed_form_gain(const LocalTreeProfile& p, const Rational& delta, const Rational& z, GainVariant v,
                                 int p_hat = 0, DecayKind kind = DecayKind::constant, bool literal = false) {
    require_exact(p);
    const int r = p.r;
    const long k1 = p.kappa - 1;
    if (literal) {
        detail::require_constant(kind);
        auto agent = [&](int ph) {
            Rational s = 0;
            for (int l = 0; l <= r; ++l) s += Rational(ipow(k1, l)) * rpow(delta, l + ph);
            for (int l = ph; l <= r - 1; ++l) s += Rational(ipow(k1, l)) * rpow(delta, 2 * r - l + ph);
            for (int l = 0; l <= ph - 1; ++l) s += Rational(ipow(k1, l)) * rpow(delta, 2 * r + l - ph);
            return s;
        };
        switch (v) {
            case GainVariant::focal_pairwise: {
                Rational s = 0;
                for (int l = 0; l <= r; ++l) s += Rational(ipow(k1, l)) * rpow(delta, l);
                for (int l = 0; l <= r - 1; ++l) s += Rational(ipow(k1, l)) * rpow(delta, 2 * r - l);
                return s * z;
            }
            case GainVariant::agent: return agent(p_hat) * z;
            case GainVariant::aggregate: {
                Rational s = 0;
                long rest = p.n;
                for (int l = 1; l <= r - 1; ++l) rest -= 2 * ipow(k1, l);
                for (int ph = 0; ph <= r; ++ph) s += Rational(ph < r ? 2 * ipow(k1, ph) : rest) * agent(ph);
                return s * z;
            }
        }
    }
    auto w = [&](int d) { return detail::weight(kind, delta, d); };
    auto agent = [&](int a) {
        Rational s = 0;
        for (int b = 0; b <= 2 * r; ++b) s += Rational(side_count(p, b)) * w(1 + std::min(a + b, 4 * r - a - b));
        return s;
    };
    switch (v) {
        case GainVariant::focal_pairwise: {
            Rational s = 0;
            for (int b = 0; b <= 2 * r; ++b) s += Rational(side_count(p, b)) * w(b + 1);
            return s * z;
        }
        case GainVariant::agent: return agent(p_hat) * z;
        case GainVariant::aggregate: {
            Rational s = 0;
            for (int a = 0; a <= 2 * r; ++a) s += Rational(side_count(p, a)) * agent(a);
            return s * z;
        }
    }
    return 0;
}

struct LossBounds {
    Rational lower, upper;
};

// Bounds for local trees that need not be exact.
inline LossBounds loss_bounds(const LocalTreeProfile& p, const Rational& delta, const Rational& z_same, int p_hat,
                              DecayKind kind = DecayKind::constant, bool literal = false) {
    const int r = p.r;
    const long k1 = p.kappa - 1;
    LossBounds b;
    const int rt = std::min(r - 1, r - p_hat);
    if (literal) {
        detail::require_constant(kind);
        for (int l = 1; l <= r - p_hat; ++l) {
            long c = std::max(0L, ipow(k1, l - 1) - (l == r ? p.deficiency : 0));
            b.upper += Rational(c) * (rpow(delta, l - 1 + p_hat) - rpow(delta, 2 * r - (l - 1) - p_hat));
        }
        for (int l = 1; l <= rt; ++l)
            b.lower += Rational(ipow(k1, l - 1)) * (rpow(delta, l - 1 + p_hat) - rpow(delta, 2 * r - (l + 1) - p_hat));
    } else {
        // Deficient agents need not sit on the deleted link's side, so the
        // upper bound keeps the full tree counts.
        auto w = [&](int d) { return detail::weight(kind, delta, d); };
        for (int l = 1; l <= r - p_hat; ++l)
            b.upper += Rational(ipow(k1, l - 1)) * (w(p_hat + l) - w(2 * r - p_hat - l + 1));
        for (int l = 1; l <= rt; ++l)
            b.lower += Rational(ipow(k1, l - 1)) * (w(p_hat + l) - w(std::max(p_hat + l, 2 * r - 1 - p_hat - l)));
    }
    b.lower *= z_same;
    b.upper *= z_same;
    return b;
}

enum class SortedBuilder { regular, cycle, clique, search };

// Disjoint union of one component per type, over contiguous agent blocks.
inline Network build_sorted_network(const GameInstance& g, SortedBuilder builder, long search_budget = 1000000) {
    if (g.cost.kind != CostKind::quota) throw std::invalid_argument("sorted network needs a degree quota");
    const int kappa = g.cost.kappa;
    Network out(g.n());
    int start = 0;
    for (const auto& x : g.levels()) {
        int nx = g.population(x);
        if (nx <= kappa)
            throw std::invalid_argument("type " + to_string(x) + " is not self-sufficient: " + std::to_string(nx) +
                                        " agents for quota " + std::to_string(kappa));
        if ((nx * kappa) % 2)
            throw std::invalid_argument("parity obstruction: kappa * n_x = " + std::to_string(kappa * nx) + " is odd");
        Network part;
        switch (builder) {
            case SortedBuilder::regular: part = build_regular_network(nx, kappa); break;
            case SortedBuilder::cycle:
                if (kappa != 2) throw std::invalid_argument("cycle builder needs kappa = 2");
                part = build_canonical_local_tree(CanonicalKind::cycle, nx);
                break;
            case SortedBuilder::clique:
                if (kappa != nx - 1) throw std::invalid_argument("clique builder needs kappa = n_x - 1");
                part = build_canonical_local_tree(CanonicalKind::clique, nx);
                break;
            case SortedBuilder::search: {
                auto s = search_local_tree(nx, kappa, search_budget);
                if (!s.found) throw std::invalid_argument(s.exhausted_budget ? "local tree search budget exhausted" : "no local tree exists");
                part = *s.found;
                break;
            }
        }
        for (auto [a, b] : part.edges()) out.add_edge(start + a, start + b);
        start += nx;
    }
    return out;
}

}  // namespace homonet
