#pragma once

#include "model.hpp"
#include "verify.hpp"

namespace agv {

/// Guarantee-tightening terms for the comparison-based perturbed pipeline.
/// tau_eps[i] = tau_r[i] + tau_p_entry[i] + sum_{s < n_per_row[i]} tau_p_memory[s][i] + epsilon.
struct TauTerms {
  Vector tau_r;                       // measurement-noise term, size n_g
  Vector tau_p_entry;                 // in-window process-noise term, size n_g
  std::vector<Vector> tau_p_memory;   // per memory lag s = 0..max_s-1, each size n_g
  std::vector<int> n_per_row;         // truncation depth N(eps, i) per row
  Vector tau_eps;                     // assembled tightening, size n_g
  double epsilon = 0.0;
  Matrix t_mat;                       // T = sum_r Gy^r C A^r, n_g x n_x
};

/// Support function max_{z in set} b'z.  Closed forms for all variants
/// except H-polytopes, which solve one LP.
double support(const PerturbationSet& set, const Vector& b, const Tolerances& tol);

/// A maximizer of b'z over the set (support argmax).
Vector support_argmax(const PerturbationSet& set, const Vector& b, const Tolerances& tol);

/// max_{z in set} ||z||.  Exact for all variants except H-polytopes, which
/// use the interval-hull over-approximation (sound: it only enlarges the
/// truncation depth).
double max_norm(const PerturbationSet& set, const Tolerances& tol);

/// T = sum_{r=0}^m Gy^r C A^r.
Matrix t_matrix(const Matrix& a, const Matrix& c_out, const LtiContract& contract);

Vector tau_r_vector(const PerturbedLtiSystem& system, const LtiContract& contract,
                    const Tolerances& tol);
Vector tau_p_entry_vector(const PerturbedLtiSystem& system, const LtiContract& contract,
                          const Tolerances& tol);
Vector tau_p_memory_vector(const PerturbedLtiSystem& system, const LtiContract& contract,
                           int varsigma, const Tolerances& tol);

/// Truncation depth for one row at a given contraction exponent n0
/// (requires ||A^{n0}|| < 1).  a_norms must hold ||A^k|| for k = 0..n0.
int n_threshold(const PerturbedLtiSystem& system, const LtiContract& contract, double eps,
                int row, int n0, const std::vector<double>& a_norms, const Tolerances& tol);

/// Scans contraction exponents for the smallest N(eps, row); requires a
/// strictly stable A (spectral radius below 1 - stability_margin).
int optimal_n_threshold(const PerturbedLtiSystem& system, const LtiContract& contract, double eps,
                        int row, const Tolerances& tol);

TauTerms build_tau_eps(const PerturbedLtiSystem& system, const LtiContract& contract, double eps,
                       const Tolerances& tol);

/// Same blocks, guarantee offset g0 - tau_eps; assumptions unchanged.
LtiContract robustified_contract(const LtiContract& contract, const TauTerms& tau);

enum class UnstableDiagnosis { Violated, Inconclusive };

struct UnstableReport {
  UnstableDiagnosis verdict = UnstableDiagnosis::Inconclusive;
  std::vector<std::string> notes;
};

/// For a non-strictly-stable A: certifies contract violation when the noise
/// can excite an unstable output direction against compact guarantees.
UnstableReport unstable_infeasibility_check(const PerturbedLtiSystem& system,
                                            const LtiContract& contract, const Tolerances& tol);

/// Full perturbed pipeline: stability gate, robustified epsilon-contract,
/// then the unperturbed verifier on the nominal system.
VerificationReport verify_perturbed(const PerturbedLtiSystem& system, const LtiContract& contract,
                                    double eps, const Tolerances& tol);

}  // namespace agv
