#pragma once

#include "model.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>

namespace agv {

enum class NoisePolicy { Zero, UniformRandom, GreedyAdversarial };

NoisePolicy noise_policy_from_string(const std::string& name);
const char* to_string(NoisePolicy p);

/// Closed-loop trace: states x_0..x_H, inputs/outputs d_0..d_H / y_0..y_H,
/// process noise omega_0..omega_{H-1}, measurement noise zeta_0..zeta_H.
struct Trajectory {
  int horizon = 0;
  std::vector<Vector> d, x, y;
  std::vector<Vector> omega, zeta;
  std::vector<double> residuals;  // ||x(k+1) - A x - B d - E omega - w||_inf, k < horizon
};

/// Per-window evaluation of both contract inequality families for k >= m.
struct MonitorReport {
  int m = 0;
  std::vector<bool> assumption_ok;   // indexed by window k - m
  std::vector<bool> guarantee_ok;
  std::vector<Vector> margins;       // g0 - sum_r G^r [d;y](k-m+r), per window
  std::optional<int> first_violation;  // earliest k with a guarantee violation
};

/// Simulates the perturbed system under the given input profile
/// (d_0..d_horizon).  The initial state may be pinned; otherwise a state
/// jointly feasible with d_0 in X0 is computed.  Inputs are checked online
/// against the assumptions; a violating profile is an input error naming the
/// step.  The greedy-adversarial policy picks the noise maximizing the worst
/// upcoming guarantee-row violation through one-step support maximization.
Trajectory simulate(const PerturbedLtiSystem& system, const LtiContract& contract,
                    const std::vector<Vector>& input_profile, NoisePolicy noise,
                    const std::optional<Vector>& x0_choice, int horizon, std::uint64_t seed,
                    const Tolerances& tol);

MonitorReport monitor(const LtiContract& contract, const Trajectory& trajectory,
                      const Tolerances& tol);

/// CSV trace: header, then one row per step with columns
/// k, d[*], x[*], y[*], omega[*], zeta[*], margin[*], residual.
/// Margins are nan before the first full window; omega is nan at the final
/// step (no transition left).  Fixed formatting, byte-stable under a seed.
std::string trajectory_to_csv(const Trajectory& trajectory, const MonitorReport& report);

/// Uniform-ish sample of a perturbation set (boxes per coordinate,
/// ellipsoids radially, V-polytopes barycentrically, H-polytopes by
/// rejection inside the interval hull).
Vector sample_perturbation(const PerturbationSet& set, std::mt19937_64& rng,
                           const Tolerances& tol);

}  // namespace agv
