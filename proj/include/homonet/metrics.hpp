#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "homonet/game.hpp"
#include "homonet/network.hpp"

namespace homonet {

struct SortingReport {
    bool holds = true;
    int i = -1, j = -1;            // first violating pair
    int q = -1;                    // 1-based violating index into i's vector
    int i_prime = -1, j_prime = -1;  // partners compared at that index
    bool clamped = false;          // the nominal index range overran a vector somewhere
};

namespace detail {

// Partners of i other than `skip`, sorted by key descending (ids ascending on ties).
template <class Key>
std::vector<int> sorted_partners(const Network& net, int i, int skip, Key key) {
    std::vector<int> out;
    for (int j : net.neighbors(i))
        if (j != skip) out.push_back(j);
    std::stable_sort(out.begin(), out.end(), [&](int a, int b) { return key(a) > key(b); });
    return out;
}

}  // namespace detail

inline SortingReport sorting_in_type(const GameInstance& g, const Network& net) {
    SortingReport rep;
    const int n = net.n();
    auto type = [&](int a) { return g.types[a]; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (!(g.types[i] > g.types[j])) continue;
            auto A = detail::sorted_partners(net, i, j, type);
            auto B = detail::sorted_partners(net, j, i, type);
            int ki = net.degree(i), kj = net.degree(j);
            int kstar = std::min(ki, kj), lstar = std::max(kj - ki, 0);
            for (int l = 1; l <= kstar; ++l) {
                if (l > static_cast<int>(A.size()) || l + lstar > static_cast<int>(B.size())) {
                    rep.clamped = true;
                    break;
                }
                int a = A[l - 1], b = B[l + lstar - 1];
                if (g.types[a] < g.types[b]) {
                    if (rep.holds) {
                        rep.holds = false;
                        rep.i = i, rep.j = j, rep.q = l, rep.i_prime = a, rep.j_prime = b;
                    }
                    break;
                }
            }
        }
    return rep;
}

inline SortingReport sorting_in_degree(const GameInstance& g, const Network& net) {
    (void)g;
    SortingReport rep;
    const int n = net.n();
    auto deg = [&](int a) { return net.degree(a); };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            int ki = net.degree(i), kj = net.degree(j);
            if (!(ki > kj)) continue;
            auto A = detail::sorted_partners(net, i, j, deg);
            auto B = detail::sorted_partners(net, j, i, deg);
            for (int l = 1; l <= kj; ++l) {
                if (l > static_cast<int>(A.size()) || l > static_cast<int>(B.size())) {
                    rep.clamped = true;
                    break;
                }
                int a = A[l - 1], b = B[l - 1];
                if (net.degree(a) < net.degree(b)) {
                    if (rep.holds) {
                        rep.holds = false;
                        rep.i = i, rep.j = j, rep.q = l, rep.i_prime = a, rep.j_prime = b;
                    }
                    break;
                }
            }
        }
    return rep;
}

inline bool is_perfectly_sorted(const GameInstance& g, const Network& net) {
    for (auto [a, b] : net.edges())
        if (g.types[a] != g.types[b]) return false;
    return true;
}

// Perfectly sorted with exactly one component per type.
inline bool is_locally_connected_sorted(const GameInstance& g, const Network& net) {
    if (!is_perfectly_sorted(g, net)) return false;
    for (int i = 0; i < net.n(); ++i) {
        uint32_t same = 0;
        for (int j = 0; j < net.n(); ++j)
            if (g.types[j] == g.types[i]) same |= uint32_t{1} << j;
        if (net.component_of(i) != same) return false;
    }
    return true;
}

inline bool no_link_surplus(const GameInstance& g, const Network& net) {
    if (g.cost.kind != CostKind::quota) throw std::invalid_argument("no link surplus needs a degree quota");
    for (int i = 0; i < net.n(); ++i)
        if (net.degree(i) != g.cost.kappa) return false;
    return true;
}

inline bool degree_monotonic(const GameInstance& g, const Network& net) {
    for (int i = 0; i < net.n(); ++i)
        for (int j = 0; j < net.n(); ++j)
            if (g.types[i] > g.types[j] && net.degree(i) < net.degree(j)) return false;
    return true;
}

inline bool decay_monotonic(const GameInstance& g, const Network& net) {
    std::vector<Rational> d;
    for (int i = 0; i < net.n(); ++i) d.push_back(decay_centrality(g, net, i));
    for (int i = 0; i < net.n(); ++i)
        for (int j = 0; j < net.n(); ++j)
            if (g.types[i] > g.types[j] && d[i] < d[j]) return false;
    return true;
}

inline Rational same_type_link_share(const GameInstance& g, const Network& net) {
    auto es = net.edges();
    if (es.empty()) throw std::invalid_argument("empty network has no link share");
    long same = 0;
    for (auto [a, b] : es) same += g.types[a] == g.types[b];
    Rational share(mpz_class(same), mpz_class(static_cast<long>(es.size())));
    share.canonicalize();
    return share;
}

}  // namespace homonet
