#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "homonet/rational.hpp"

namespace homonet {

template <class S>
using Matrix = std::vector<std::vector<S>>;

// Finds x >= 0 with A x = b by Phase I of the simplex method with Bland's
// rule (terminates without cycling). Returns nullopt when infeasible.
template <class S>
std::optional<std::vector<S>> nonneg_solution(const Matrix<S>& A, const std::vector<S>& b, long* pivots = nullptr) {
    const size_t m = A.size();
    const size_t nv = m ? A[0].size() : 0;
    const size_t cols = nv + m;  // structural, then artificials
    Matrix<S> T(m, std::vector<S>(cols + 1, S(0)));
    for (size_t i = 0; i < m; ++i) {
        bool flip = sign(b[i]) < 0;
        for (size_t j = 0; j < nv; ++j) T[i][j] = flip ? S(-A[i][j]) : A[i][j];
        T[i][nv + i] = 1;
        T[i][cols] = flip ? S(-b[i]) : b[i];
    }
    std::vector<size_t> basis(m);
    for (size_t i = 0; i < m; ++i) basis[i] = nv + i;
    // Reduced costs of the Phase I objective (sum of artificials).
    std::vector<S> obj(cols + 1, S(0));
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j <= cols; ++j)
            if (j < nv || j == cols) obj[j] -= T[i][j];

    long count = 0;
    for (;;) {
        size_t enter = cols;
        for (size_t j = 0; j < cols; ++j)
            if (sign(obj[j]) < 0) {
                enter = j;
                break;
            }
        if (enter == cols) break;
        size_t leave = m;
        S best = 0;
        for (size_t i = 0; i < m; ++i) {
            if (sign(T[i][enter]) <= 0) continue;
            S ratio = T[i][cols] / T[i][enter];
            if (leave == m || sign(S(ratio - best)) < 0 || (sign(S(ratio - best)) == 0 && basis[i] < basis[leave])) {
                leave = i;
                best = ratio;
            }
        }
        if (leave == m) throw std::logic_error("phase I objective unbounded");
        ++count;
        S piv = T[leave][enter];
        for (auto& v : T[leave]) v /= piv;
        for (size_t i = 0; i < m; ++i) {
            if (i == leave || sign(T[i][enter]) == 0) continue;
            S f = T[i][enter];
            for (size_t j = 0; j <= cols; ++j)
                if (sign(T[leave][j]) != 0) T[i][j] -= f * T[leave][j];
        }
        if (sign(obj[enter]) != 0) {
            S f = obj[enter];
            for (size_t j = 0; j <= cols; ++j)
                if (sign(T[leave][j]) != 0) obj[j] -= f * T[leave][j];
        }
        basis[leave] = enter;
    }
    if (pivots) *pivots += count;
    // obj[cols] holds minus the remaining artificial mass.
    if (sign(obj[cols]) != 0) return std::nullopt;
    std::vector<S> x(nv, S(0));
    for (size_t i = 0; i < m; ++i)
        if (basis[i] < nv) x[basis[i]] = T[i][cols];
    return x;
}

template <class S>
struct FeasibilityResult {
    bool feasible = false;
    std::vector<S> x;       // solution of A x >= b when feasible
    std::vector<S> farkas;  // y >= 0, y^T A = 0, y^T b = 1 otherwise
    long pivots = 0;
};

// Decides A x >= b over free x. Infeasibility comes with a Farkas certificate.
template <class S>
FeasibilityResult<S> solve_feasibility(const Matrix<S>& A, const std::vector<S>& b, size_t nvars) {
    FeasibilityResult<S> r;
    const size_t m = A.size();
    if (m == 0) {
        r.feasible = true;
        r.x.assign(nvars, S(0));
        return r;
    }
    // A x+ - A x- - s = b with x+, x-, s >= 0.
    Matrix<S> E(m, std::vector<S>(2 * nvars + m, S(0)));
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < nvars; ++j) {
            E[i][j] = A[i][j];
            E[i][nvars + j] = -A[i][j];
        }
        E[i][2 * nvars + i] = -1;
    }
    if (auto sol = nonneg_solution(E, b, &r.pivots)) {
        r.feasible = true;
        r.x.assign(nvars, S(0));
        for (size_t j = 0; j < nvars; ++j) r.x[j] = (*sol)[j] - (*sol)[nvars + j];
        return r;
    }
    Matrix<S> F(nvars + 1, std::vector<S>(m, S(0)));
    std::vector<S> rhs(nvars + 1, S(0));
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < nvars; ++j) F[j][i] = A[i][j];
        F[nvars][i] = b[i];
    }
    rhs[nvars] = 1;
    auto y = nonneg_solution(F, rhs, &r.pivots);
    if (!y) throw std::logic_error("neither primal solution nor Farkas certificate found");
    r.farkas = *y;
    return r;
}

}  // namespace homonet
