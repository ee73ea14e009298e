#pragma once

// S-type learning automaton with a multi-action extension: the taken
// actions follow the single-action reward row, the remaining actions share
// the complementary correction split over r - r_hat, using the total taken
// probability p_hat.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace rqa {

struct AutomatonState {
  std::vector<double> p;  // probability per action, sums to 1
  double theta1 = 0.1;
  double theta2 = 0.0;

  int num_actions() const { return static_cast<int>(p.size()); }

  static AutomatonState uniform(int r, double theta1 = 0.1, double theta2 = 0.0) {
    if (r < 1) throw std::invalid_argument("automaton requires at least one action");
    if (theta1 < 0 || theta1 > 1 || theta2 < 0 || theta2 > 1)
      throw std::invalid_argument("learning factors must lie in [0,1]");
    AutomatonState s;
    s.p.assign(static_cast<std::size_t>(r), 1.0 / r);
    s.theta1 = theta1;
    s.theta2 = theta2;
    return s;
  }
};

struct Feedback {
  std::vector<int> taken;  // action indices, the set alpha-hat
  double beta = 0.0;       // environment feedback in [0,1]
};

namespace detail {

inline void check_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("feedback beta must lie in [0,1]");
}

// Clamp to [0,1] and renormalize to the simplex. The raw multi-action
// update does not preserve the simplex for every theta/beta, so the
// normalized form is the published state.
inline std::vector<double> normalize(std::vector<double> p) {
  double sum = 0.0;
  for (double& v : p) {
    v = std::clamp(v, 0.0, 1.0);
    sum += v;
  }
  if (sum <= 1e-12) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    return p;
  }
  // A sum already at 1 up to accumulation noise is left alone so that
  // no-op updates are exact.
  if (std::fabs(sum - 1.0) > 1e-14) {
    for (double& v : p) v /= sum;
  }
  return p;
}

}  // namespace detail

// Single-action update, pre-normalization. Taken action i:
//   p_i += -theta2 (1-beta) p_i + theta1 beta (1 - p_i)
//   p_j += +theta2 (1-beta) (1/(r-1) - p_i) - theta1 beta p_j   (j != i)
inline std::vector<double> update_single_raw(const AutomatonState& s, int i, double beta) {
  detail::check_beta(beta);
  int r = s.num_actions();
  if (i < 0 || i >= r) throw std::invalid_argument("action index out of range");
  if (r == 1) return s.p;
  std::vector<double> q(static_cast<std::size_t>(r));
  double pi = s.p[static_cast<std::size_t>(i)];
  for (int j = 0; j < r; ++j) {
    double pj = s.p[static_cast<std::size_t>(j)];
    if (j == i) {
      q[static_cast<std::size_t>(j)] =
          pj - s.theta2 * (1.0 - beta) * pj + s.theta1 * beta * (1.0 - pj);
    } else {
      q[static_cast<std::size_t>(j)] =
          pj + s.theta2 * (1.0 - beta) * (1.0 / (r - 1) - pi) - s.theta1 * beta * pj;
    }
  }
  return q;
}

inline AutomatonState update_single(const AutomatonState& s, int i, double beta) {
  AutomatonState out = s;
  out.p = detail::normalize(update_single_raw(s, i, beta));
  return out;
}

// Multi-action update, pre-normalization. With r_hat = |taken| and
// p_hat = sum of taken probabilities:
//   taken:     p_j += -theta2 (1-beta) p_j + theta1 beta (1 - p_j)
//   not taken: p_j += -theta2 (1-beta) (1/(r-r_hat) - p_hat)
//                     - theta1 beta (r_hat - p_hat) / (r - r_hat)
// Degenerate feedback sets (r_hat = 0 or r_hat = r) leave p unchanged.
inline std::vector<double> update_multi_raw(const AutomatonState& s, const Feedback& fb) {
  detail::check_beta(fb.beta);
  int r = s.num_actions();
  std::vector<bool> taken(static_cast<std::size_t>(r), false);
  int r_hat = 0;
  for (int i : fb.taken) {
    if (i < 0 || i >= r) throw std::invalid_argument("action index out of range");
    if (!taken[static_cast<std::size_t>(i)]) {
      taken[static_cast<std::size_t>(i)] = true;
      ++r_hat;
    }
  }
  if (r_hat == 0 || r_hat == r) return s.p;

  double p_hat = 0.0;
  for (int j = 0; j < r; ++j)
    if (taken[static_cast<std::size_t>(j)]) p_hat += s.p[static_cast<std::size_t>(j)];

  std::vector<double> q(static_cast<std::size_t>(r));
  double denom = static_cast<double>(r - r_hat);
  for (int j = 0; j < r; ++j) {
    double pj = s.p[static_cast<std::size_t>(j)];
    if (taken[static_cast<std::size_t>(j)]) {
      q[static_cast<std::size_t>(j)] =
          pj - s.theta2 * (1.0 - fb.beta) * pj + s.theta1 * fb.beta * (1.0 - pj);
    } else {
      q[static_cast<std::size_t>(j)] = pj -
                                       s.theta2 * (1.0 - fb.beta) * (1.0 / denom - p_hat) -
                                       s.theta1 * fb.beta / denom * (r_hat - p_hat);
    }
  }
  return q;
}

inline AutomatonState update_multi(const AutomatonState& s, const Feedback& fb) {
  AutomatonState out = s;
  out.p = detail::normalize(update_multi_raw(s, fb));
  return out;
}

// rho_i = 1/M - p_i; zero for the uniform state, sums to zero always.
inline std::vector<double> influence_factors(const AutomatonState& s, int num_clauses) {
  if (s.num_actions() != num_clauses)
    throw std::invalid_argument("automaton size does not match clause count");
  std::vector<double> rho(static_cast<std::size_t>(num_clauses));
  for (int i = 0; i < num_clauses; ++i)
    rho[static_cast<std::size_t>(i)] = 1.0 / num_clauses - s.p[static_cast<std::size_t>(i)];
  return rho;
}

inline nlohmann::json automaton_to_json(const AutomatonState& s) {
  return nlohmann::json{{"p", s.p}, {"theta1", s.theta1}, {"theta2", s.theta2}};
}

inline AutomatonState automaton_from_json(const nlohmann::json& in) {
  AutomatonState s;
  s.p = in.at("p").get<std::vector<double>>();
  s.theta1 = in.at("theta1").get<double>();
  s.theta2 = in.at("theta2").get<double>();
  return s;
}

}  // namespace rqa
