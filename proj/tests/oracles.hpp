#pragma once

// Independent reference computations for the tests. Everything here is
// written from the definitions with dense arrays and exhaustive enumeration
// and shares no code with the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace oracle {

// A tower chain built from scratch: flat state = (tower, level), tops go to
// bases with the given rows (default law proportional to mass / height).
struct Chain {
  std::vector<std::int64_t> heights;
  std::vector<double> masses;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> begin;
  std::size_t states = 0;

  Chain(std::vector<std::int64_t> h, std::vector<double> m, std::vector<std::vector<double>> r = {})
      : heights(std::move(h)), masses(std::move(m)), rows(std::move(r)) {
    for (auto H : heights) {
      begin.push_back(states);
      states += static_cast<std::size_t>(H);
    }
    if (rows.empty()) {
      double z = 0.0;
      for (std::size_t l = 0; l < heights.size(); ++l) z += masses[l] / static_cast<double>(heights[l]);
      std::vector<double> row;
      for (std::size_t l = 0; l < heights.size(); ++l) row.push_back(masses[l] / static_cast<double>(heights[l]) / z);
      rows.assign(heights.size(), row);
    }
  }

  std::size_t tower_of(std::size_t s) const {
    std::size_t l = 0;
    while (l + 1 < begin.size() && begin[l + 1] <= s) ++l;
    return l;
  }

  // Dense transition matrix.
  std::vector<std::vector<double>> matrix() const {
    std::vector<std::vector<double>> P(states, std::vector<double>(states, 0.0));
    for (std::size_t s = 0; s < states; ++s) {
      const std::size_t l = tower_of(s);
      if (s + 1 < begin[l] + static_cast<std::size_t>(heights[l])) {
        P[s][s + 1] = 1.0;
      } else {
        for (std::size_t d = 0; d < heights.size(); ++d) P[s][begin[d]] += rows[l][d];
      }
    }
    return P;
  }

  // Stationary law: solve pi (P - I) = 0 with Sum pi = 1 by Gaussian
  // elimination on the dense system.
  std::vector<double> stationary() const {
    const auto P = matrix();
    const std::size_t S = states;
    // A x = b with A = (P - I)^T, last row replaced by all ones.
    std::vector<std::vector<double>> A(S, std::vector<double>(S + 1, 0.0));
    for (std::size_t i = 0; i < S; ++i)
      for (std::size_t j = 0; j < S; ++j) A[i][j] = P[j][i] - (i == j ? 1.0 : 0.0);
    for (std::size_t j = 0; j < S; ++j) A[S - 1][j] = 1.0;
    A[S - 1][S] = 1.0;
    for (std::size_t col = 0; col < S; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < S; ++r)
        if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
      std::swap(A[col], A[piv]);
      for (std::size_t r = 0; r < S; ++r) {
        if (r == col || A[r][col] == 0.0) continue;
        const double f = A[r][col] / A[col][col];
        for (std::size_t j = col; j <= S; ++j) A[r][j] -= f * A[col][j];
      }
    }
    std::vector<double> pi(S);
    for (std::size_t i = 0; i < S; ++i) pi[i] = A[i][S] / A[i][i];
    return pi;
  }
};

// Sum over every path of length n (start weighted by pi) of the path weight,
// handed to visit(path_probability, states_visited).
template <class Visit>
void enumerate_paths(const Chain& c, const std::vector<double>& pi, std::int64_t n, Visit&& visit) {
  const auto P = c.matrix();
  std::vector<std::size_t> path;
  auto rec = [&](auto&& self, std::size_t s, double prob) -> void {
    path.push_back(s);
    if (static_cast<std::int64_t>(path.size()) == n) {
      visit(prob, path);
    } else {
      for (std::size_t t = 0; t < c.states; ++t)
        if (P[s][t] > 0.0) self(self, t, prob * P[s][t]);
    }
    path.pop_back();
  };
  for (std::size_t s = 0; s < c.states; ++s)
    if (pi[s] > 0.0) rec(rec, s, pi[s]);
}

// Law of the number of active steps in a window of n, by path enumeration.
inline std::vector<double> occupancy(const Chain& c, const std::vector<double>& pi,
                                     const std::vector<char>& active, std::int64_t n) {
  std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
  enumerate_paths(c, pi, n, [&](double p, const std::vector<std::size_t>& path) {
    std::size_t m = 0;
    for (auto s : path) m += active[s] ? 1 : 0;
    out[m] += p;
  });
  return out;
}

// Law of S_n = Sum weight(X_i) g_i with P(g = +-1) = a/2, P(g = 0) = 1 - a,
// by enumerating every path and every noise outcome on it.
inline std::map<std::int64_t, double> partial_sum_law(const Chain& c, const std::vector<double>& pi,
                                                      const std::vector<char>& active, double a,
                                                      std::int64_t n) {
  std::map<std::int64_t, double> law;
  const double pg[3] = {a / 2.0, 1.0 - a, a / 2.0};
  enumerate_paths(c, pi, n, [&](double p, const std::vector<std::size_t>& path) {
    std::vector<std::size_t> act;
    for (auto s : path)
      if (active[s]) act.push_back(s);
    std::size_t outcomes = 1;
    for (std::size_t i = 0; i < act.size(); ++i) outcomes *= 3;
    for (std::size_t o = 0; o < outcomes; ++o) {
      std::size_t code = o;
      std::int64_t sum = 0;
      double q = p;
      for (std::size_t i = 0; i < act.size(); ++i) {
        const std::size_t g = code % 3;
        code /= 3;
        sum += static_cast<std::int64_t>(g) - 1;
        q *= pg[g];
      }
      law[sum] += q;
    }
  });
  return law;
}

// m-fold sum of the lattice noise by enumerating all 3^m outcomes.
inline std::map<std::int64_t, double> step_sum(double a, int m) {
  std::map<std::int64_t, double> law;
  const double pg[3] = {a / 2.0, 1.0 - a, a / 2.0};
  std::size_t outcomes = 1;
  for (int i = 0; i < m; ++i) outcomes *= 3;
  for (std::size_t o = 0; o < outcomes; ++o) {
    std::size_t code = o;
    std::int64_t sum = 0;
    double q = 1.0;
    for (int i = 0; i < m; ++i) {
      const std::size_t g = code % 3;
      code /= 3;
      sum += static_cast<std::int64_t>(g) - 1;
      q *= pg[g];
    }
    law[sum] += q;
  }
  return law;
}

// beta(n) = Sum_s pi(s) TV(P^n(s, .), pi) for n = 0..horizon, by dense
// matrix powers.
inline std::vector<double> beta_curve(const Chain& c, const std::vector<double>& pi, std::int64_t horizon) {
  const auto P = c.matrix();
  const std::size_t S = c.states;
  std::vector<std::vector<double>> Q(S, std::vector<double>(S, 0.0)), next = Q;
  for (std::size_t s = 0; s < S; ++s) Q[s][s] = 1.0;
  std::vector<double> out;
  for (std::int64_t n = 0; n <= horizon; ++n) {
    double b = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      double tv = 0.0;
      for (std::size_t t = 0; t < S; ++t) tv += std::abs(Q[s][t] - pi[t]);
      b += pi[s] * tv / 2.0;
    }
    out.push_back(b);
    for (std::size_t s = 0; s < S; ++s) {
      std::fill(next[s].begin(), next[s].end(), 0.0);
      for (std::size_t u = 0; u < S; ++u)
        if (Q[s][u] != 0.0)
          for (std::size_t t = 0; t < S; ++t) next[s][t] += Q[s][u] * P[u][t];
    }
    Q.swap(next);
  }
  return out;
}

}  // namespace oracle
