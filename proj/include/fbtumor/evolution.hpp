#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fbtumor/errors.hpp"
#include "fbtumor/free_boundary.hpp"
#include "fbtumor/model_params.hpp"
#include "fbtumor/numerics.hpp"
#include "fbtumor/ode.hpp"
#include "fbtumor/stationary.hpp"

namespace fbtumor {

enum class TransitionDirection { NecroticToNonnecrotic, NonnecroticToNecrotic };

inline const char* to_string(TransitionDirection d) {
  return d == TransitionDirection::NecroticToNonnecrotic ? "NecroticToNonnecrotic"
                                                         : "NonnecroticToNecrotic";
}

struct Transition {
  double T = 0.0;
  TransitionDirection direction = TransitionDirection::NonnecroticToNecrotic;
};

enum class VerdictKind { Vanishes, ConvergesTo, MaxTimeReached };

inline const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Vanishes: return "Vanishes";
    case VerdictKind::ConvergesTo: return "ConvergesTo";
    default: return "MaxTimeReached";
  }
}

struct Verdict {
  VerdictKind kind = VerdictKind::MaxTimeReached;
  std::optional<double> R_s;  // filled for ConvergesTo
};

struct TrajectorySample {
  double t = 0.0;
  double R = 0.0;
  Phase phase = Phase::Nonnecrotic;
  double dR_dt = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<Transition> transitions;
  Verdict verdict;
  double R0 = 0.0;
  double t_end = 0.0;  // requested horizon, not the (possibly earlier) stop time
  double R_c = 0.0;    // critical radius used for the phase labels
  std::optional<double> R_s;
  double tol = 0.0;
};

struct EvolveOptions {
  double tol = 1e-8;
  long long max_steps = 1'000'000;
  double convergence_eps = 1e-6;
};

/// Step-count overflow during evolution; carries whatever part of the
/// trajectory was completed before the budget ran out.
class EvolveOverflow : public ConvergenceError {
 public:
  EvolveOverflow(const std::string& msg, Trajectory partial_traj)
      : ConvergenceError(msg), partial(std::move(partial_traj)) {}
  Trajectory partial;
};

/**
 * @brief Memo of the growth rate G over visited radii.
 *
 * Append-only map from radius to G. A query between two cached radii whose
 * G-values differ by at most tol is answered by linear interpolation: G is
 * monotone, so the chord deviates from it by no more than that difference.
 * Any other query computes G exactly and caches it, refining the map where
 * the trajectory actually travels. Exact evaluations run the profile solver
 * at a tolerance tightened once below tol and again proportionally to
 * beta * R when that product is small, where the surface residual scale
 * itself shrinks like beta * R and a fixed residual tolerance would let the
 * center value drift.
 */
class GrowthCache {
 public:
  GrowthCache(ModelParams p, double tol) : p_(std::move(p)), tol_(tol) {}

  double operator()(double R) {
    auto hit = memo_.find(R);
    if (hit != memo_.end()) return hit->second;
    auto above = memo_.upper_bound(R);
    if (above != memo_.end() && above != memo_.begin()) {
      auto below = std::prev(above);
      if (std::abs(above->second - below->second) <= tol_) {
        const double w = (R - below->first) / (above->first - below->first);
        return below->second + w * (above->second - below->second);
      }
    }
    const double inner = tol_ / 10.0 * std::min(1.0, p_.beta * R);
    const double g = growth_functional(R, p_, inner);
    memo_.emplace(R, g);
    return g;
  }

  std::size_t size() const { return memo_.size(); }

 private:
  ModelParams p_;
  double tol_;
  std::map<double, double> memo_;
};

namespace detail {

/// Shared machinery behind evolve() and fate(): integrates one horizon with
/// an externally owned cache so repeated runs reuse every G evaluation.
inline Trajectory evolve_horizon(double R0, double t_end, const EvolveOptions& opts,
                                 GrowthCache& G, double R_c,
                                 const std::optional<double>& R_s) {
  Trajectory traj;
  traj.R0 = R0;
  traj.t_end = t_end;
  traj.R_c = R_c;
  traj.R_s = R_s;
  traj.tol = opts.tol;

  const double vanish_floor = 1e-8 * R0;
  const double time_tol = opts.tol * t_end;
  auto phase_of = [&](double R) { return R <= R_c ? Phase::Nonnecrotic : Phase::Necrotic; };

  auto rhs = [&](double, const num::State<1>& y) {
    // Trial stages may probe below the vanish floor where the state is
    // already terminal; freeze the relative rate there so they stay finite.
    const double R = std::max(y[0], 0.1 * vanish_floor);
    return num::State<1>{{y[0] * G(R)}};
  };

  traj.samples.push_back({0.0, R0, phase_of(R0), R0 * G(R0)});

  num::IvpOptions iopt;
  iopt.rtol = 0.5 * opts.tol;
  iopt.atol = 0.5 * opts.tol * R0;
  iopt.max_steps = opts.max_steps;

  auto sink = [&](const num::Step<1>& st) {
    const double Ra = st.y0[0], Rb = st.y1[0];
    const Phase pa = phase_of(Ra), pb = phase_of(Rb);
    if (pa != pb) {
      // Locate the crossing of R_c inside this step on the dense output.
      double t_lo = st.t0, t_hi = st.t1;
      const bool rising = Rb > Ra;
      for (int i = 0; i < 200 && t_hi - t_lo > time_tol; ++i) {
        const double tm = 0.5 * (t_lo + t_hi);
        const double Rm = num::hermite_value(st, tm)[0];
        const bool past = rising ? (Rm > R_c) : (Rm <= R_c);
        (past ? t_hi : t_lo) = tm;
      }
      const double T = 0.5 * (t_lo + t_hi);
      if (T > time_tol) {
        const TransitionDirection dir = pa == Phase::Nonnecrotic
                                            ? TransitionDirection::NonnecroticToNecrotic
                                            : TransitionDirection::NecroticToNonnecrotic;
        traj.transitions.push_back({T, dir});
        // The crossing instant itself belongs to the post-transition phase.
        if (T > st.t0 + time_tol && T < st.t1 - time_tol)
          traj.samples.push_back(
              {T, num::hermite_value(st, T)[0], pb, num::hermite_deriv(st, T)[0]});
      }
    }
    traj.samples.push_back({st.t1, Rb, pb, st.f1[0]});
    if (Rb <= vanish_floor) {
      traj.verdict = {VerdictKind::Vanishes, std::nullopt};
      return num::ControlFlow::Stop;
    }
    if (R_s && std::abs(Rb - *R_s) / *R_s <= opts.convergence_eps) {
      traj.verdict = {VerdictKind::ConvergesTo, *R_s};
      return num::ControlFlow::Stop;
    }
    return num::ControlFlow::Continue;
  };

  traj.verdict = {VerdictKind::MaxTimeReached, std::nullopt};
  try {
    num::integrate<1>(rhs, 0.0, t_end, num::State<1>{{R0}}, iopt, sink);
  } catch (const ConvergenceError& e) {
    throw EvolveOverflow(std::string("evolve: ") + e.what(), std::move(traj));
  }
  return traj;
}

inline std::optional<double> stationary_radius_cached(const ModelParams& p, GrowthCache& G,
                                                      double tol) {
  if (!(p.sigma_bar > p.g.root())) return std::nullopt;
  auto f = [&](double R) { return G(R); };
  const num::Bracket br = num::bracket_decreasing(f, 1.0, 60, "evolve: stationary radius");
  if (br.lo == br.hi) return br.lo;
  num::BisectOptions bo{tol, 1e-14 * std::max(1.0, br.hi), 1e3 * tol, 256};
  return num::bisect(f, br.lo, br.f_lo, br.hi, br.f_hi, bo, "evolve: stationary radius").x;
}

}  // namespace detail

/**
 * @brief Quasi-static radius evolution R'(t) = R G(R) from R0 over [0, t_end].
 *
 * Adaptive Dormand-Prince integration with per-step error at most
 * tol * max(R, R0). Each accepted step appends a sample; a sign change of
 * R - R_c within a step is refined on the dense output to time accuracy
 * tol * t_end and recorded as a phase transition (one at the initial instant
 * is the initial condition's classification, not a transition, and is
 * dropped). Stops early with verdict Vanishes once R falls to 1e-8 * R0, or
 * ConvergesTo(R_s) once |R - R_s| / R_s <= convergence_eps when a dormant
 * radius exists; otherwise runs to t_end with verdict MaxTimeReached.
 */
inline Trajectory evolve(double R0, double t_end, const ModelParams& p,
                         const EvolveOptions& opts = {}) {
  ensure_valid(p);
  if (!(R0 > 0.0) || !std::isfinite(R0)) throw DomainError("evolve: R0 must be positive and finite");
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw DomainError("evolve: t_end must be positive and finite");
  if (!(opts.tol > 0.0)) throw DomainError("evolve: tol must be positive");
  if (!(opts.convergence_eps > 0.0))
    throw DomainError("evolve: convergence_eps must be positive");
  if (opts.max_steps < 1) throw DomainError("evolve: max_steps must be at least 1");

  GrowthCache G(p, opts.tol);
  const double R_c = critical_radius(p, opts.tol);
  const std::optional<double> R_s = detail::stationary_radius_cached(p, G, opts.tol);
  return detail::evolve_horizon(R0, t_end, opts, G, R_c, R_s);
}

struct FateResult {
  Verdict verdict;
  std::optional<double> T_transition;
  double t_end = 0.0;        // horizon of the deciding run
  long long steps_used = 0;  // accepted steps across all runs
  std::string note;          // diagnostics when the budget ran out
};

/**
 * @brief Long-time fate of a tumor started at R0.
 *
 * Runs evolve over doubling horizons until the trajectory terminates with
 * Vanishes or ConvergesTo, sharing one G-cache across runs so each retry
 * costs little more than the new tail. The cumulative accepted-step budget
 * is opts.max_steps; exhausting it (or 60 doublings) yields MaxTimeReached
 * with a diagnostic note.
 */
inline FateResult fate(double R0, const ModelParams& p, const EvolveOptions& opts = {}) {
  ensure_valid(p);
  if (!(R0 > 0.0) || !std::isfinite(R0)) throw DomainError("fate: R0 must be positive and finite");
  if (!(opts.tol > 0.0)) throw DomainError("fate: tol must be positive");

  GrowthCache G(p, opts.tol);
  const double R_c = critical_radius(p, opts.tol);
  const std::optional<double> R_s = detail::stationary_radius_cached(p, G, opts.tol);

  FateResult res;
  double t_end = 1.0;
  long long used = 0;
  for (int round = 0; round < 60; ++round) {
    EvolveOptions o = opts;
    o.max_steps = opts.max_steps - used;
    if (o.max_steps < 1) break;
    Trajectory traj;
    try {
      traj = detail::evolve_horizon(R0, t_end, o, G, R_c, R_s);
    } catch (const EvolveOverflow& e) {
      res.verdict = {VerdictKind::MaxTimeReached, std::nullopt};
      res.t_end = t_end;
      res.steps_used = opts.max_steps;
      res.note = e.what();
      return res;
    }
    used += static_cast<long long>(traj.samples.size()) - 1;
    if (traj.verdict.kind != VerdictKind::MaxTimeReached) {
      res.verdict = traj.verdict;
      if (!traj.transitions.empty()) res.T_transition = traj.transitions.front().T;
      res.t_end = t_end;
      res.steps_used = used;
      return res;
    }
    t_end *= 2.0;
  }
  res.verdict = {VerdictKind::MaxTimeReached, std::nullopt};
  res.t_end = t_end;
  res.steps_used = used;
  res.note = "fate: no terminal verdict within the step budget and horizon cap";
  return res;
}

/**
 * @brief Quasi-static tumor state at an intermediate time of a trajectory.
 *
 * Interpolates R(t) with the cubic Hermite through the two neighboring
 * samples (whose derivatives R G(R) were recorded during integration) and
 * assembles the full state at that radius.
 */
inline TumorState transient_profile(const Trajectory& traj, double t, const ModelParams& p) {
  if (traj.samples.empty()) throw DomainError("transient_profile: empty trajectory");
  const double t_last = traj.samples.back().t;
  if (!(t >= 0.0 && t <= t_last))
    throw DomainError("transient_profile: t must lie within the sampled time range");

  double R = traj.samples.back().R;
  if (t < t_last) {
    auto it = std::upper_bound(traj.samples.begin(), traj.samples.end(), t,
                               [](double v, const TrajectorySample& s) { return v < s.t; });
    const TrajectorySample& b = *it;
    const TrajectorySample& a = *std::prev(it);
    if (t == a.t || b.t == a.t) {
      R = a.R;
    } else {
      num::Step<1> st;
      st.t0 = a.t;
      st.t1 = b.t;
      st.y0 = {{a.R}};
      st.y1 = {{b.R}};
      st.f0 = {{a.dR_dt}};
      st.f1 = {{b.dR_dt}};
      R = num::hermite_value(st, t)[0];
    }
  }
  const double tol = traj.tol > 0.0 ? traj.tol : EvolveOptions{}.tol;
  return assemble_state(R, p, tol);
}

}  // namespace fbtumor
