#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace homonet {

// Adjacency rows are 32-bit masks; pair indices must fit in EdgeMask.
inline constexpr int kMaxAgents = 22;
inline constexpr int kInf = -1;

using Edge = std::pair<int, int>;

inline Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

inline int pair_index(int a, int b) {
    if (a > b) std::swap(a, b);
    return b * (b - 1) / 2 + a;
}

struct EdgeMask {
    std::array<uint64_t, 4> w{};
    void set(int k) { w[k >> 6] |= uint64_t{1} << (k & 63); }
    void reset(int k) { w[k >> 6] &= ~(uint64_t{1} << (k & 63)); }
    bool test(int k) const { return (w[k >> 6] >> (k & 63)) & 1; }
    auto operator<=>(const EdgeMask&) const = default;
};

struct EdgeMaskHash {
    size_t operator()(const EdgeMask& m) const {
        uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (uint64_t v : m.w) {
            h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return static_cast<size_t>(h);
    }
};

inline std::vector<int> members(uint32_t mask) {
    std::vector<int> out;
    while (mask) {
        out.push_back(std::countr_zero(mask));
        mask &= mask - 1;
    }
    return out;
}

class Network {
public:
    Network() = default;
    explicit Network(int n) : n_(n), adj_(n, 0) {
        if (n < 0 || n > kMaxAgents) throw std::invalid_argument("agent count out of range: " + std::to_string(n));
    }
    Network(int n, const std::vector<Edge>& edges) : Network(n) {
        for (auto [a, b] : edges) {
            if (has_edge(a, b)) throw std::invalid_argument("duplicate link");
            add_edge(a, b);
        }
    }

    int n() const { return n_; }

    bool has_edge(int a, int b) const {
        check(a);
        check(b);
        return (adj_[a] >> b) & 1;
    }
    void add_edge(int a, int b) {
        check(a);
        check(b);
        if (a == b) throw std::invalid_argument("self link");
        adj_[a] |= uint32_t{1} << b;
        adj_[b] |= uint32_t{1} << a;
    }
    void remove_edge(int a, int b) {
        adj_[a] &= ~(uint32_t{1} << b);
        adj_[b] &= ~(uint32_t{1} << a);
    }

    uint32_t adj(int i) const { return adj_[i]; }
    const std::vector<uint32_t>& rows() const { return adj_; }
    int degree(int i) const { return std::popcount(adj_[i]); }
    std::vector<int> neighbors(int i) const { return members(adj_[i]); }
    int max_degree() const {
        int d = 0;
        for (int i = 0; i < n_; ++i) d = std::max(d, degree(i));
        return d;
    }
    int num_edges() const {
        int m = 0;
        for (int i = 0; i < n_; ++i) m += degree(i);
        return m / 2;
    }

    // Sorted lexicographically, each pair ascending.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (int a = 0; a < n_; ++a)
            for (int b : members(adj_[a] >> (a + 1) << (a + 1))) out.emplace_back(a, b);
        return out;
    }

    EdgeMask edge_mask() const {
        EdgeMask m;
        for (auto [a, b] : edges()) m.set(pair_index(a, b));
        return m;
    }

    // Layer masks by distance from i: layers[d] holds agents at distance d.
    std::vector<uint32_t> layers(int i, int max_depth = kMaxAgents) const {
        std::vector<uint32_t> out{uint32_t{1} << i};
        uint32_t seen = out[0], frontier = out[0];
        for (int d = 1; d <= max_depth && frontier; ++d) {
            uint32_t next = 0;
            for (uint32_t f = frontier; f; f &= f - 1) next |= adj_[std::countr_zero(f)];
            next &= ~seen;
            if (!next) break;
            seen |= next;
            out.push_back(next);
            frontier = next;
        }
        return out;
    }

    std::vector<int> distances_from(int i) const {
        std::vector<int> dist(n_, kInf);
        auto ls = layers(i);
        for (size_t d = 0; d < ls.size(); ++d)
            for (int j : members(ls[d])) dist[j] = static_cast<int>(d);
        return dist;
    }

    std::vector<std::vector<int>> distance_matrix() const {
        std::vector<std::vector<int>> out;
        for (int i = 0; i < n_; ++i) out.push_back(distances_from(i));
        return out;
    }

    uint32_t component_of(int i) const {
        uint32_t c = 0;
        for (uint32_t l : layers(i)) c |= l;
        return c;
    }

    std::vector<uint32_t> components() const {
        std::vector<uint32_t> out;
        uint32_t seen = 0;
        for (int i = 0; i < n_; ++i) {
            if ((seen >> i) & 1) continue;
            uint32_t c = component_of(i);
            seen |= c;
            out.push_back(c);
        }
        return out;
    }

    bool is_connected() const { return n_ <= 1 || components().size() == 1; }

    // Largest finite eccentricity; kInf when disconnected.
    int diameter() const {
        if (!is_connected()) return kInf;
        int d = 0;
        for (int i = 0; i < n_; ++i) d = std::max(d, static_cast<int>(layers(i).size()) - 1);
        return d;
    }

    bool operator==(const Network& o) const { return n_ == o.n_ && adj_ == o.adj_; }
    bool operator<(const Network& o) const { return n_ != o.n_ ? n_ < o.n_ : edges() < o.edges(); }

private:
    void check(int i) const {
        if (i < 0 || i >= n_) throw std::out_of_range("agent id out of range: " + std::to_string(i));
    }
    int n_ = 0;
    std::vector<uint32_t> adj_;
};

inline Network with_changes(const Network& net, const std::vector<Edge>& added, const std::vector<Edge>& deleted) {
    Network out = net;
    for (auto [a, b] : deleted) out.remove_edge(a, b);
    for (auto [a, b] : added) out.add_edge(a, b);
    return out;
}

// Visits every simple graph on n agents with all degrees <= max_degree,
// adding pairs in lexicographic order. The callback returns false to stop.
inline bool for_each_network(int n, int max_degree, const std::function<bool(const Network&)>& visit) {
    std::vector<Edge> pairs;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
    Network net(n);
    std::function<bool(size_t)> rec = [&](size_t k) -> bool {
        if (k == pairs.size()) return visit(net);
        if (!rec(k + 1)) return false;
        auto [a, b] = pairs[k];
        if (net.degree(a) < max_degree && net.degree(b) < max_degree) {
            net.add_edge(a, b);
            bool go = rec(k + 1);
            net.remove_edge(a, b);
            if (!go) return false;
        }
        return true;
    };
    return rec(0);
}

}  // namespace homonet
