#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "dpgt/randomness.hpp"
#include "dpgt/topology.hpp"

namespace dpgt {

// Inputs of a privacy-budget computation. The adversary observes every
// noised message; the budget depends on the schedule, the gradient bound
// c_grad over the domain, the decision dimension, the self-weights w_ii,
// and the Laplace scales.
struct PrivacyQuery {
  // Number of iterations; nullopt requests the infinite-horizon bound.
  std::optional<int> horizon;
  Schedule schedule;
  double c_grad = 0;  // gradient-norm bound C (> 0)
  int dim = 0;        // decision dimension r
  Vector w_diag;      // self-weights, each in (0, 1)
  double b_eta = 0;
  double b_xi = 0;

  void check() const;  // throws OutOfRange on violated ranges
};

struct PrivacyReport {
  Vector eps_per_agent;
  double eps = 0;  // worst case over agents
  int worst_agent = 0;
  // Per-agent channel contributions (tracker messages vs decision messages).
  Vector s_channel, x_channel;
  bool infinite_horizon = false;
  // Set when a non-integer m forced the tail sums to start at ceil(m)+1.
  bool tail_start_ceiled = false;
};

// c_{k,t} = w_ii^{k-2-t} ((k-t-1) - (k-t) w_ii), the decision-channel
// propagation coefficient. Requires 0 <= t < k (IndexError otherwise) and
// w_ii in (0, 1). c_{t+1,t} = -1 for every w_ii.
double c_coefficient(int k, int t, double w_ii);

// Worst-case l1 sensitivities of the tracker and decision states under a
// single-agent objective swap, index 0..K (entry 0 is 0):
//   ds_k = 2 sqrt(r) C sum_{t<k} w_ii^{k-1-t} gamma_t
//   dx_k = 2 sqrt(r) C sum_{t<k} alpha |c_{k,t}| gamma_t.
struct SensitivityProfile {
  std::vector<double> delta_s, delta_x;
};
SensitivityProfile sensitivity_closed_form(int horizon, const Schedule& sched,
                                           double w_ii, double c_grad, int r);

// Independent oracle for the closed form: propagates the per-term
// coefficients of the swapped gradient through the state recursions
//   ds_{k+1} = w_ii ds_k + gamma_k df_k
//   dx_{k+1} = w_ii dx_k + alpha (1 - w_ii) ds_k - alpha gamma_k df_k
// and takes the l1 worst case over coefficient signs at the end. Never uses
// the c_{k,t} formula.
SensitivityProfile sensitivity_recursion_oracle(int horizon,
                                                const Schedule& sched,
                                                double w_ii, double c_grad,
                                                int r);

// Finite-horizon budget: for each agent,
//   eps_i = 2 sqrt(r) C sum_{k=1}^{K} sum_{t=0}^{k-1}
//             ( w_ii^{k-1-t} / (beta_k b_eta)
//             + alpha |c_{k,t}| / (beta_k b_xi) ) gamma_t,
// reported per agent with the worst case as the headline value.
PrivacyReport finite_horizon_budget(const PrivacyQuery& q);

// eps as a function of the horizon, entries for K = 1..horizon; used for
// monotonicity checks without re-running the double sum.
std::vector<double> budget_by_horizon(const PrivacyQuery& q, int horizon);

// Eulerian polynomial P_n(w): P_0 = 1 and P_n(w) = sum_j <n over j> w^j with
// the Eulerian-number triangle <n,j> = (j+1)<n-1,j> + (n-j)<n-1,j-1>.
double eulerian_polynomial(int order, double w);

// Infinite-horizon budget (requires p >= 0 and q < p - 2, otherwise the tail
// series diverges and HypothesisViolated is thrown):
//   eps_i = 2 sqrt(r) C gamma P_ceil(p)(w_ii) / (m^p (1-w_ii)^{ceil(p)+1})
//           * ( T1 / (b_eta w_ii^m) + alpha T2 / (b_xi w_ii^{m+1}) )
// with tails T1 = sum_{k>m} k^{-(p-q)}, T2 = sum_{k>m} k^{-(p-q-1)} summed
// directly until the term falls below 1e-15 plus a midpoint integral
// remainder (residual below 1e-12). Non-integer m starts the tails at
// ceil(m)+1 and sets tail_start_ceiled.
PrivacyReport infinite_horizon_budget(const PrivacyQuery& q);

// Laplace scales hitting a target budget: the tracker channel contributes
// split * eps and the decision channel (1 - split) * eps at the worst-case
// agent, then both scales are tightened jointly so the returned pair
// round-trips through the budget to target_eps exactly (within 1e-9
// relative). Scales already present in q are ignored.
std::pair<double, double> calibrate_noise(double target_eps, double split,
                                          const PrivacyQuery& q);

}  // namespace dpgt
