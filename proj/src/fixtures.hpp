#pragma once

#include "model.hpp"

#include <utility>
#include <vector>

namespace agv {

/// Two-vehicle highway scenario: the follower must keep a velocity-scaled
/// headway behind a leader with bounded acceleration.
struct LeaderFollowerParams {
  double dt = 0.3;           // seconds per step
  double h = 2.0;            // headway in seconds
  double a_max = 9.8;        // leader acceleration bound, m/s^2
  double a_min = 9.8;        // leader deceleration bound, m/s^2
  double phi = 0.29;         // process-noise bound on the follower velocity, m/s
  double init_margin = 0.6;  // initial headway slack, meters
};

/// Displacement-based formation control for double-integrator agents.
/// Node 1 is the leader; edges (i, j) mean agent i measures agent j.
struct FormationParams {
  std::vector<std::pair<int, int>> graph;  // 1-based directed edges
  int dims = 2;                            // spatial dimension D
  double dt = 0.5;
  double a_max = 2.0;
  double a_min = 2.0;
  double mu_diff = 0.1;   // per-step sup-norm bound on displacement changes
  Vector mu_err;          // per-edge-coordinate error band, size D * n_E
  double omega_max = 0.01;  // per-agent noise norm bound
};

std::pair<PerturbedLtiSystem, LtiContract> leader_follower(const LeaderFollowerParams& params);

std::pair<PerturbedLtiSystem, LtiContract> formation(const FormationParams& params);

/// One directed edge per unordered pair: (i, j) for all 1 <= j < i <= n.
std::vector<std::pair<int, int>> complete_graph(int n);

/// Union of two directed paths meeting at the first and last nodes:
/// (i+1, i) for i <= floor(n/2), (i, i+1) for floor(n/2) < i < n, plus (n, 1).
std::vector<std::pair<int, int>> cycle_variant_graph(int n);

/// Leader trace for the highway scenario: cruise, hard sway between slow and
/// fast, cruise again (about 30 s each).  Kinematically consistent with the
/// contract assumptions; d(k) = (position, velocity).
std::vector<Vector> leader_profile(const LeaderFollowerParams& params, int horizon);

/// Follower start matching the scenario: 46 m behind the leader at 80 km/h.
Vector leader_follower_initial_state(const LeaderFollowerParams& params,
                                     const std::vector<Vector>& profile);

}  // namespace agv
