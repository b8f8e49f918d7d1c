#pragma once

// Independent recomputations used as test oracles. Nothing here calls the
// library's evaluators, enumerators or closed forms.

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "homonet/game.hpp"
#include "homonet/network.hpp"
#include "homonet/rational.hpp"

namespace oracle {

using homonet::Edge;
using homonet::GameInstance;
using homonet::Network;
using homonet::Rational;

constexpr int kFar = 1 << 20;

inline std::vector<std::vector<int>> floyd(const Network& net) {
    const int n = net.n();
    std::vector<std::vector<int>> d(n, std::vector<int>(n, kFar));
    for (int i = 0; i < n; ++i) d[i][i] = 0;
    for (auto [a, b] : net.edges()) d[a][b] = d[b][a] = 1;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    return d;
}

inline Rational weight(homonet::DecayKind kind, const Rational& delta, int dist) {
    if (dist >= kFar || dist < 1) return 0;
    if (dist == 1) return 1;
    switch (kind) {
        case homonet::DecayKind::none: return 0;
        case homonet::DecayKind::hyperbolic: return delta;
        case homonet::DecayKind::constant: {
            Rational w = 1;
            for (int k = 1; k < dist; ++k) w *= delta;
            return w;
        }
    }
    return 0;
}

inline Rational cost(const GameInstance& g, int k) {
    switch (g.cost.kind) {
        case homonet::CostKind::quota: return 0;
        case homonet::CostKind::linear: return g.cost.c * k;
        case homonet::CostKind::convex: return g.cost.table.at(static_cast<size_t>(k));
    }
    return 0;
}

inline Rational utility(const GameInstance& g, const Network& net, int i) {
    auto d = floyd(net);
    Rational s = 0;
    for (int j = 0; j < net.n(); ++j)
        if (j != i) s += weight(g.decay.kind, g.decay.delta, d[i][j]) * g.value.value(g.types[i], g.types[j]);
    return s - cost(g, net.degree(i));
}

inline Rational total(const GameInstance& g, const Network& net) {
    Rational s = 0;
    for (int i = 0; i < net.n(); ++i) s += utility(g, net, i);
    return s;
}

// Every simple graph on n agents with maximum degree at most maxdeg.
inline void all_networks(int n, int maxdeg, const std::function<void(const Network&)>& f) {
    std::vector<Edge> pairs;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
    const uint64_t lim = uint64_t{1} << pairs.size();
    for (uint64_t s = 0; s < lim; ++s) {
        std::vector<int> deg(n, 0);
        bool ok = true;
        for (size_t k = 0; k < pairs.size() && ok; ++k)
            if ((s >> k) & 1) ok = ++deg[pairs[k].first] <= maxdeg && ++deg[pairs[k].second] <= maxdeg;
        if (!ok) continue;
        Network net(n);
        for (size_t k = 0; k < pairs.size(); ++k)
            if ((s >> k) & 1) net.add_edge(pairs[k].first, pairs[k].second);
        f(net);
    }
}

inline Rational best_total(const GameInstance& g, int n, int maxdeg) {
    Rational best;
    bool first = true;
    all_networks(n, maxdeg, [&](const Network& net) {
        Rational u = total(g, net);
        if (first || u > best) best = u, first = false;
    });
    return best;
}

// Literal sorting-in-type check with the index range clamped to both vectors.
inline bool sorting_in_type(const GameInstance& g, const Network& net) {
    const int n = net.n();
    auto vec = [&](int i, int skip) {
        std::vector<Rational> v;
        for (int j = 0; j < n; ++j)
            if (j != skip && net.has_edge(i, j)) v.push_back(g.types[j]);
        std::sort(v.begin(), v.end(), std::greater<>());
        return v;
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (!(g.types[i] > g.types[j])) continue;
            auto A = vec(i, j), B = vec(j, i);
            int ki = net.degree(i), kj = net.degree(j);
            int ks = std::min(ki, kj), ls = std::max(kj - ki, 0);
            for (int l = 1; l <= ks; ++l) {
                if (l > static_cast<int>(A.size()) || l + ls > static_cast<int>(B.size())) break;
                if (A[l - 1] < B[l + ls - 1]) return false;
            }
        }
    return true;
}

inline bool sorting_in_degree(const Network& net) {
    const int n = net.n();
    auto vec = [&](int i, int skip) {
        std::vector<int> v;
        for (int j = 0; j < n; ++j)
            if (j != skip && net.has_edge(i, j)) v.push_back(net.degree(j));
        std::sort(v.begin(), v.end(), std::greater<>());
        return v;
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (!(net.degree(i) > net.degree(j))) continue;
            auto A = vec(i, j), B = vec(j, i);
            for (int l = 1; l <= net.degree(j); ++l) {
                if (l > static_cast<int>(A.size()) || l > static_cast<int>(B.size())) break;
                if (A[l - 1] < B[l - 1]) return false;
            }
        }
    return true;
}

// Affine joint surplus of a coalition move: du - sum_k coef[k] tau_k, where
// tau_k is the transfer to the lower endpoint of link k (a deleted link with
// one member endpoint costs that member its transfer).
struct SurplusRow {
    Rational du;
    std::map<Edge, int> coef;
};

inline SurplusRow surplus_row(const GameInstance& g, const Network& net, uint32_t coalition, const std::vector<Edge>& added,
                              const std::vector<Edge>& deleted) {
    Network after = net;
    for (auto [a, b] : deleted) after.remove_edge(a, b);
    for (auto [a, b] : added) after.add_edge(a, b);
    auto in = [&](int i) { return (coalition >> i) & 1; };
    SurplusRow r;
    for (int i = 0; i < net.n(); ++i)
        if (in(i)) r.du += utility(g, after, i) - utility(g, net, i);
    for (auto [a, b] : deleted) {
        if (in(a) && !in(b)) r.coef[{a, b}] += 1;
        if (in(b) && !in(a)) r.coef[{a, b}] -= 1;
    }
    return r;
}

template <class Tau>
Rational surplus_at(const SurplusRow& r, const Tau& tau) {
    Rational s = r.du;
    for (const auto& [e, c] : r.coef) s -= c * tau.get(e.first, e.second);
    return s;
}

// Visits every singleton and pair move: any subset of the members' links
// deleted, the pair link optionally added, within the quota.
inline void pair_moves(const GameInstance& g, const Network& net,
                       const std::function<void(uint32_t, const std::vector<Edge>&, const std::vector<Edge>&)>& f) {
    const int n = net.n();
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            uint32_t t = (uint32_t{1} << i) | (uint32_t{1} << j);
            std::vector<Edge> inc;
            for (auto e : net.edges())
                if (((t >> e.first) & 1) || ((t >> e.second) & 1)) inc.push_back(e);
            for (int add = 0; add < (i != j && !net.has_edge(i, j) ? 2 : 1); ++add)
                for (uint64_t s = 0; s < (uint64_t{1} << inc.size()); ++s) {
                    std::vector<Edge> A, D;
                    if (add) A.emplace_back(i, j);
                    for (size_t k = 0; k < inc.size(); ++k)
                        if ((s >> k) & 1) D.push_back(inc[k]);
                    if (A.empty() && D.empty()) continue;
                    Network after = net;
                    for (auto [a, b] : D) after.remove_edge(a, b);
                    for (auto [a, b] : A) after.add_edge(a, b);
                    if (g.cost.kind == homonet::CostKind::quota && after.max_degree() > g.cost.kappa) continue;
                    f(t, A, D);
                }
        }
}

template <class Tau>
bool pair_blocked(const GameInstance& g, const Network& net, const Tau& tau) {
    bool blocked = false;
    pair_moves(g, net, [&](uint32_t t, const std::vector<Edge>& A, const std::vector<Edge>& D) {
        if (!blocked && surplus_at(surplus_row(g, net, t, A, D), tau) > 0) blocked = true;
    });
    return blocked;
}

// Nonnegative multipliers whose combination of surplus rows has no transfer
// term and a positive constant: no transfers can stop every move.
template <class MoveT>
bool farkas_valid(const GameInstance& g, const Network& net, const std::vector<std::pair<MoveT, Rational>>& cert) {
    if (cert.empty()) return false;
    std::map<Edge, Rational> sum;
    Rational du = 0;
    for (const auto& [m, y] : cert) {
        if (y < 0) return false;
        auto r = surplus_row(g, net, m.coalition, m.added, m.deleted);
        du += y * r.du;
        for (const auto& [e, c] : r.coef) sum[e] += y * c;
    }
    for (const auto& [e, v] : sum)
        if (v != 0) return false;
    return du > 0;
}

inline Network random_network(std::mt19937& rng, int n, int maxdeg, double p) {
    std::bernoulli_distribution coin(p);
    Network net(n);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (net.degree(a) < maxdeg && net.degree(b) < maxdeg && coin(rng)) net.add_edge(a, b);
    return net;
}

inline Rational random_rational(std::mt19937& rng, int lo, int hi, int den) {
    Rational q(std::uniform_int_distribution<int>(lo, hi)(rng));
    q /= den;
    return q;
}

// Supermodular symmetric table over the given descending levels:
// Z(a,b) = alpha * l_a * l_b + beta_a + beta_b with alpha > 0 and beta
// descending with the levels, so Z is also monotone for positive levels.
inline homonet::ValueModel random_supermodular(std::mt19937& rng, const std::vector<Rational>& levels) {
    Rational alpha = random_rational(rng, 1, 20, 4);
    std::vector<Rational> beta;
    for (size_t k = 0; k < levels.size(); ++k) beta.push_back(random_rational(rng, 1, 20, 4));
    std::sort(beta.begin(), beta.end(), std::greater<>());
    std::vector<std::vector<Rational>> Z(levels.size(), std::vector<Rational>(levels.size()));
    for (size_t a = 0; a < levels.size(); ++a)
        for (size_t b = 0; b < levels.size(); ++b) Z[a][b] = alpha * levels[a] * levels[b] + beta[a] + beta[b];
    return homonet::symmetric_table(levels, Z);
}

}  // namespace oracle
