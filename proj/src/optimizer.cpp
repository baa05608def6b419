#include "reachplan/optimizer.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>

#include "reachplan/banded.hpp"
#include "reachplan/clearance.hpp"

namespace reachplan {

namespace {

// Finite-difference operator of the given order on m samples.
Eigen::MatrixXd difference_operator(Eigen::Index m, int order) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Identity(m, m);
  for (int o = 0; o < order; ++o) {
    const Eigen::Index rows = D.rows() - 1;
    if (rows <= 0) return Eigen::MatrixXd::Zero(0, m);
    D = (D.bottomRows(rows) - D.topRows(rows)).eval();
  }
  return D;
}

Eigen::MatrixXd smoothness_form(Eigen::Index m, const CostWeights& w) {
  const Eigen::MatrixXd D1 = difference_operator(m, 1);
  const Eigen::MatrixXd D2 = difference_operator(m, 2);
  const Eigen::MatrixXd D3 = difference_operator(m, 3);
  Eigen::MatrixXd K = D1.transpose() * D1;
  if (D2.rows() > 0) K += w.acceleration * D2.transpose() * D2;
  if (D3.rows() > 0) K += w.jerk * D3.transpose() * D3;
  return K;
}

Eigen::Matrix<double, 3, 1> goal_residual(const Pose2& ee, const Pose2& goal) {
  return {ee.x() - goal.x(), ee.y() - goal.y(), wrap_angle(ee.phi - goal.phi)};
}

double limit_overshoot(const Arm& arm, const JointConfig& q) {
  return (q - arm.joint_upper).cwiseMax(0.0).sum() + (arm.joint_lower - q).cwiseMax(0.0).sum();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double trajectory_cost(const Trajectory& traj, const Eigen::MatrixXd& fixed_prefix,
                       const CostWeights& weights) {
  if (traj.size() < 2) throw std::invalid_argument("cost needs at least 2 waypoints");
  if (fixed_prefix.rows() > 0 && fixed_prefix.cols() != traj.dof())
    throw std::invalid_argument("prefix dimension does not match trajectory");
  Eigen::MatrixXd rows(fixed_prefix.rows() + traj.size(), traj.dof());
  if (fixed_prefix.rows() > 0) rows.topRows(fixed_prefix.rows()) = fixed_prefix;
  rows.bottomRows(traj.size()) = traj.waypoints;

  double total = 0.0;
  Eigen::MatrixXd diff = rows;
  for (int order = 1; order <= 3 && diff.rows() > 1; ++order) {
    diff = (diff.bottomRows(diff.rows() - 1) - diff.topRows(diff.rows() - 1)).eval();
    const double weight = order == 1 ? 1.0 : order == 2 ? weights.acceleration : weights.jerk;
    total += weight * diff.squaredNorm();
  }
  return total;
}

Trajectory linear_init(const JointConfig& start, const JointConfig& goal_config,
                       Eigen::Index n) {
  return linear_interpolation(start, goal_config, n);
}

Trajectory linear_init(const Arm& arm, const JointConfig& start, const Pose2& goal,
                       Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("init needs at least 2 waypoints");
  if (const auto goal_config = ik_solve(arm, goal, start))
    return linear_interpolation(start, *goal_config, n);
  return Trajectory(start.transpose().replicate(n, 1));
}

ViolationReport measure_violation(const Arm& arm, const Scene& scene, const Pose2& goal,
                                  const Trajectory& traj, double resolution,
                                  double collision_margin) {
  if (traj.size() < 1) throw std::invalid_argument("empty trajectory");
  ViolationReport report;
  const auto residual = goal_residual(forward_kinematics(arm, traj.back()).ee, goal);
  report.goal = std::max(residual.head<2>().norm(), std::abs(residual[2]));

  for (Eigen::Index k = 1; k < traj.size(); ++k) {
    const JointConfig q = traj.waypoint(k);
    const double over = std::max((q - arm.joint_upper).maxCoeff(),
                                 (arm.joint_lower - q).maxCoeff());
    report.joint_limits = std::max(report.joint_limits, over);
  }

  const auto hinge = [&](const JointConfig& q) {
    return collision_margin - config_clearance(arm, q, scene, false).min_distance;
  };
  const bool start_blocked = hinge(traj.front()) > 0.0;
  double worst = 0.0;
  for (Eigen::Index i = 0; i + 1 < traj.size(); ++i) {
    const JointConfig from = traj.waypoint(i);
    const JointConfig to = traj.waypoint(i + 1);
    const double span = (to - from).cwiseAbs().maxCoeff();
    long steps = 1;
    while (span / static_cast<double>(steps) > resolution) steps *= 2;
    const long first = (i == 0 && start_blocked) ? steps : 1;
    for (long s = first; s <= steps; ++s) {
      const double u = static_cast<double>(s) / static_cast<double>(steps);
      const JointConfig q = s == steps ? to : JointConfig((1.0 - u) * from + u * to);
      worst = std::max(worst, hinge(q));
    }
  }
  report.collision = worst;
  return report;
}

PenalizedObjective::PenalizedObjective(const Arm& arm, const Scene& scene,
                                       const SolveQuery& query, const SolverOptions& options)
    : arm_(arm),
      scene_(scene),
      query_(query),
      options_(options),
      dof_(arm.dof()),
      n_(query.waypoints),
      p_(query.fixed_prefix.rows()),
      interp_resolution_(options.interp_resolution) {
  check_dimension(arm, query.start);
  if (n_ < 2) throw std::invalid_argument("query needs at least 2 waypoints");
  if (p_ > 0 && query.fixed_prefix.cols() != dof_)
    throw std::invalid_argument("prefix dimension does not match arm");
  start_in_collision_ =
      options.collision_margin - config_clearance(arm, query.start, scene, false).min_distance >
      0.0;
  K_ = smoothness_form(p_ + n_, options.weights);
}

Eigen::VectorXd PenalizedObjective::pack(const Trajectory& traj) const {
  if (traj.size() != n_ || traj.dof() != dof_)
    throw std::invalid_argument("trajectory shape does not match the query");
  Eigen::VectorXd x(num_variables());
  for (Eigen::Index k = 1; k < n_; ++k) x.segment((k - 1) * dof_, dof_) = traj.waypoints.row(k);
  return x;
}

Trajectory PenalizedObjective::unpack(const Eigen::VectorXd& x) const {
  return Trajectory(full_rows(x));
}

Eigen::MatrixXd PenalizedObjective::full_rows(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd rows(n_, dof_);
  rows.row(0) = query_.start.transpose();
  for (Eigen::Index k = 1; k < n_; ++k) rows.row(k) = x.segment((k - 1) * dof_, dof_).transpose();
  return rows;
}

double PenalizedObjective::cost(const Eigen::VectorXd& x) const {
  return trajectory_cost(unpack(x), query_.fixed_prefix, options_.weights);
}

Eigen::VectorXd PenalizedObjective::cost_gradient(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd all(p_ + n_, dof_);
  if (p_ > 0) all.topRows(p_) = query_.fixed_prefix;
  all.bottomRows(n_) = full_rows(x);
  const Eigen::MatrixXd grad_rows = 2.0 * K_ * all;
  Eigen::VectorXd g(num_variables());
  for (Eigen::Index k = 1; k < n_; ++k)
    g.segment((k - 1) * dof_, dof_) = grad_rows.row(p_ + k).transpose();
  return g;
}

std::vector<PenalizedObjective::Sample> PenalizedObjective::collision_samples(
    const Eigen::MatrixXd& rows) const {
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(n_ * 3));
  for (Eigen::Index k = 1; k < n_; ++k) samples.push_back({static_cast<int>(k), -1, 1.0, 0.0});
  for (Eigen::Index k = 0; k + 1 < n_; ++k) {
    if (k == 0 && start_in_collision_) continue;
    const double span = (rows.row(k + 1) - rows.row(k)).cwiseAbs().maxCoeff();
    const int interior =
        std::clamp(static_cast<int>(std::ceil(span / interp_resolution_)) - 1, 0, 32);
    for (int i = 1; i <= interior; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(interior + 1);
      samples.push_back({static_cast<int>(k), static_cast<int>(k + 1), 1.0 - u, u});
    }
  }
  return samples;
}

template <typename Visitor>
void PenalizedObjective::visit_collisions(const Eigen::MatrixXd& rows, Visitor&& visit) const {
  const double reach = options_.collision_margin + options_.active_distance;
  for (const Sample& sample : collision_samples(rows)) {
    JointConfig q = sample.w0 * rows.row(sample.k0).transpose();
    if (sample.k1 >= 0) q += sample.w1 * rows.row(sample.k1).transpose();
    const auto frames = forward_kinematics(arm_, q);
    for (const auto& obstacle : scene_.obstacles) {
      if (obstacle.is_target) continue;
      for (std::size_t l = 0; l + 1 < frames.points.size(); ++l) {
        const Point2& a = frames.points[l];
        const Point2& b = frames.points[l + 1];
        if (segment_distance_lower_bound(a, b, obstacle) - arm_.link_radius >= reach) continue;
        const auto sd = segment_distance(a, b, obstacle);
        const double hinge = options_.collision_margin - (sd.distance - arm_.link_radius);
        if (hinge <= -options_.active_distance) continue;
        visit(sample, frames, static_cast<Eigen::Index>(l), a + sd.t * (b - a), sd, hinge);
      }
    }
  }
}

double PenalizedObjective::penalty_sum(const Eigen::VectorXd& x) const {
  const Eigen::MatrixXd rows = full_rows(x);
  const auto ee = forward_kinematics(arm_, JointConfig(rows.row(n_ - 1).transpose())).ee;
  double total = goal_residual(ee, query_.goal).cwiseAbs().sum();
  visit_collisions(rows, [&](const Sample&, const ArmFrames<double>&, Eigen::Index,
                             const Point2&, const SegmentDistance<double>&, double hinge) {
    total += std::max(hinge, 0.0);
  });
  for (Eigen::Index k = 1; k < n_; ++k)
    total += limit_overshoot(arm_, JointConfig(rows.row(k).transpose()));
  return total;
}

double PenalizedObjective::value(const Eigen::VectorXd& x, double penalty) const {
  return cost(x) + penalty * penalty_sum(x);
}

Eigen::VectorXd PenalizedObjective::gradient(const Eigen::VectorXd& x, double penalty) const {
  Eigen::VectorXd g = cost_gradient(x);
  const Eigen::MatrixXd rows = full_rows(x);
  const auto add = [&](int k, double w, const JointConfig& grad) {
    if (k >= 1) g.segment((k - 1) * dof_, dof_) += penalty * w * grad;
  };
  for (const Term& term : linearize(x)) {
    const double slope = term.hinge ? (term.value > 0.0 ? 1.0 : 0.0)
                                    : (term.value > 0.0 ? 1.0 : -1.0);
    if (slope == 0.0) continue;
    if (term.k0 >= 0) g.segment(term.k0 * dof_, dof_) += penalty * slope * term.w0 * term.grad;
    if (term.k1 >= 0) g.segment(term.k1 * dof_, dof_) += penalty * slope * term.w1 * term.grad;
  }
  for (Eigen::Index k = 1; k < n_; ++k) {
    JointConfig grad = JointConfig::Zero(dof_);
    for (Eigen::Index j = 0; j < dof_; ++j) {
      if (rows(k, j) > arm_.joint_upper[j]) grad[j] = 1.0;
      if (rows(k, j) < arm_.joint_lower[j]) grad[j] = -1.0;
    }
    add(static_cast<int>(k), 1.0, grad);
  }
  return g;
}

double PenalizedObjective::sampled_violation(const Eigen::VectorXd& x) const {
  const Eigen::MatrixXd rows = full_rows(x);
  const auto ee = forward_kinematics(arm_, JointConfig(rows.row(n_ - 1).transpose())).ee;
  const auto r = goal_residual(ee, query_.goal);
  double worst = std::max(r.head<2>().norm(), std::abs(r[2]));
  visit_collisions(rows, [&](const Sample&, const ArmFrames<double>&, Eigen::Index,
                             const Point2&, const SegmentDistance<double>&, double hinge) {
    worst = std::max(worst, hinge);
  });
  for (Eigen::Index k = 1; k < n_; ++k) {
    const JointConfig q = rows.row(k).transpose();
    worst = std::max(worst, std::max((q - arm_.joint_upper).maxCoeff(),
                                     (arm_.joint_lower - q).maxCoeff()));
  }
  return worst;
}

std::vector<PenalizedObjective::Term> PenalizedObjective::linearize(
    const Eigen::VectorXd& x) const {
  std::vector<Term> terms;
  const Eigen::MatrixXd rows = full_rows(x);
  const JointConfig q_last = rows.row(n_ - 1).transpose();
  const auto ee = forward_kinematics(arm_, q_last).ee;
  const auto r = goal_residual(ee, query_.goal);
  const auto J = jacobian(arm_, q_last);
  for (int c = 0; c < 3; ++c) {
    Term term;
    term.k0 = static_cast<int>(n_ - 2);
    term.w0 = 1.0;
    term.grad = J.row(c).transpose();
    term.value = r[c];
    term.hinge = false;
    terms.push_back(std::move(term));
  }
  visit_collisions(rows, [&](const Sample& sample, const ArmFrames<double>& frames,
                             Eigen::Index link, const Point2& witness,
                             const SegmentDistance<double>& sd, double hinge) {
    Term term;
    term.k0 = sample.k0 >= 1 ? sample.k0 - 1 : -1;
    term.k1 = sample.k1 >= 1 ? sample.k1 - 1 : -1;
    term.w0 = sample.w0;
    term.w1 = sample.w1;
    term.grad = -point_gradient(frames, link, witness, sd.normal);
    term.value = hinge;
    terms.push_back(std::move(term));
  });
  return terms;
}

namespace {

// Value of the convex model of the merit at step `delta`.
double model_value(const PenalizedObjective& objective,
                   const std::vector<PenalizedObjective::Term>& terms,
                   const Eigen::VectorXd& x, const Eigen::VectorXd& delta, double penalty,
                   const Arm& arm) {
  const Eigen::Index dof = objective.dof();
  double total = objective.cost(x + delta);
  for (const auto& term : terms) {
    double u = term.value;
    if (term.k0 >= 0) u += term.w0 * term.grad.dot(delta.segment(term.k0 * dof, dof));
    if (term.k1 >= 0) u += term.w1 * term.grad.dot(delta.segment(term.k1 * dof, dof));
    total += penalty * (term.hinge ? std::max(u, 0.0) : std::abs(u));
  }
  const Eigen::VectorXd moved = x + delta;
  for (Eigen::Index k = 0; k + 1 < objective.waypoints(); ++k)
    total += penalty * limit_overshoot(arm, JointConfig(moved.segment(k * dof, dof)));
  return total;
}

// Minimizes the convex model (quadratic cost plus l1 / hinge penalties on
// linearized terms) by iteratively reweighted least squares.
Eigen::VectorXd solve_model(const PenalizedObjective& objective,
                            const std::vector<PenalizedObjective::Term>& terms,
                            const Eigen::VectorXd& x, double penalty, int iterations) {
  const Eigen::Index dof = objective.dof();
  const Eigen::Index n = objective.num_variables();
  const Eigen::Index p = objective.prefix_rows();
  const Eigen::MatrixXd& K = objective.smoothness_matrix();
  const Eigen::Index bandwidth = 3 * dof;
  const Eigen::VectorXd g_cost = objective.cost_gradient(x);

  BandedSpdMatrix<double> base(n, bandwidth);
  const Eigen::Index free = objective.waypoints() - 1;
  for (Eigen::Index a = 0; a < free; ++a) {
    for (Eigen::Index b = a; b < std::min(free, a + 4); ++b) {
      const double v = 2.0 * K(p + 1 + a, p + 1 + b);
      if (v == 0.0) continue;
      for (Eigen::Index j = 0; j < dof; ++j) base.add(b * dof + j, a * dof + j, v);
    }
  }
  base.add_diagonal(1e-9);

  constexpr double kWeightFloor = 1e-5;
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  for (int it = 0; it < iterations; ++it) {
    BandedSpdMatrix<double> H = base;
    Eigen::VectorXd rhs = -g_cost;
    for (const auto& term : terms) {
      double u = term.value;
      if (term.k0 >= 0) u += term.w0 * term.grad.dot(delta.segment(term.k0 * dof, dof));
      if (term.k1 >= 0) u += term.w1 * term.grad.dot(delta.segment(term.k1 * dof, dof));
      const double c = term.hinge ? 0.5 : 1.0;
      const double l = term.hinge ? 0.5 : 0.0;
      const double weight = penalty * c / std::max(std::abs(u), kWeightFloor);
      const std::array<int, 2> ks{term.k0, term.k1};
      const std::array<double, 2> ws{term.w0, term.w1};
      for (int s = 0; s < 2; ++s) {
        if (ks[static_cast<std::size_t>(s)] < 0) continue;
        const Eigen::Index ka = ks[static_cast<std::size_t>(s)];
        const double wa = ws[static_cast<std::size_t>(s)];
        rhs.segment(ka * dof, dof) -= (weight * term.value + penalty * l) * wa * term.grad;
        for (int t = 0; t < 2; ++t) {
          if (ks[static_cast<std::size_t>(t)] < 0) continue;
          const Eigen::Index kb = ks[static_cast<std::size_t>(t)];
          if (kb < ka) continue;
          const double wb = ws[static_cast<std::size_t>(t)];
          for (Eigen::Index i = 0; i < dof; ++i) {
            for (Eigen::Index j = 0; j < dof; ++j) {
              if (kb == ka && j < i) continue;
              const double v = weight * wa * wb * term.grad[i] * term.grad[j];
              H.add(kb * dof + j, ka * dof + i, v);
            }
          }
        }
      }
    }
    if (!H.factorize()) break;
    delta = H.solve(rhs);
  }
  return delta;
}

}  // namespace

SolveResult solve(const Arm& arm, const Scene& scene, const SolveQuery& query,
                  const SolverOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult result;
  if (query.init.size() != query.waypoints || query.init.dof() != arm.dof() ||
      query.waypoints < 2 || !(query.tolerance >= 0.0)) {
    throw std::invalid_argument("malformed solve query");
  }

  PenalizedObjective objective(arm, scene, query, options);
  Trajectory init = query.init;
  init.waypoints.row(0) = query.start.transpose();
  for (Eigen::Index k = 1; k < init.size(); ++k)
    init.waypoints.row(k) = arm.clamp(init.waypoint(k)).transpose();

  const auto certify = [&](const Trajectory& traj) {
    return measure_violation(arm, scene, query.goal, traj, options.feasibility_resolution,
                             options.collision_margin)
        .max();
  };

  Eigen::VectorXd x = objective.pack(init);
  double penalty = options.initial_penalty;
  double final_violation = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd lo = arm.joint_lower.replicate(query.waypoints - 1, 1);
  const Eigen::VectorXd hi = arm.joint_upper.replicate(query.waypoints - 1, 1);

  for (int phase = 0; phase < options.max_penalty_phases; ++phase) {
    ++result.penalty_phases;
    double trust = options.trust_initial;
    double merit = objective.value(x, penalty);
    for (int it = 0; it < options.max_sqp_iterations; ++it) {
      ++result.sqp_iterations;
      const auto terms = objective.linearize(x);
      const Eigen::VectorXd step = solve_model(objective, terms, x, penalty,
                                               options.irls_iterations);
      const double model_at_zero = model_value(objective, terms, x,
                                               Eigen::VectorXd::Zero(x.size()), penalty, arm);
      const double step_size = step.cwiseAbs().maxCoeff();
      bool converged = false;
      bool accepted = false;
      while (!accepted && !converged) {
        const double scale = step_size > trust ? trust / step_size : 1.0;
        const Eigen::VectorXd candidate = (x + scale * step).cwiseMax(lo).cwiseMin(hi);
        const Eigen::VectorXd delta = candidate - x;
        const double predicted =
            model_at_zero - model_value(objective, terms, x, delta, penalty, arm);
        if (predicted < options.min_model_improve) {
          converged = true;
          break;
        }
        const double trial = objective.value(candidate, penalty);
        if ((merit - trial) / predicted > options.improve_ratio) {
          x = candidate;
          merit = trial;
          trust = std::min(trust * options.trust_expand, options.trust_max);
          accepted = true;
          if (options.record_trace) result.trace.push_back({phase, penalty, merit});
        } else {
          trust *= options.trust_shrink;
          if (trust < options.trust_min) converged = true;
        }
      }
      if (converged) break;
    }

    if (objective.sampled_violation(x) <= query.tolerance) {
      final_violation = certify(objective.unpack(x));
      if (final_violation <= query.tolerance) {
        result.success = true;
        break;
      }
      objective.set_interp_resolution(options.interp_resolution /
                                      std::pow(2.0, static_cast<double>(phase + 1)));
    }
    penalty *= options.penalty_scale;
  }

  result.trajectory = objective.unpack(x);
  result.cost = trajectory_cost(result.trajectory, query.fixed_prefix, options.weights);
  if (!result.success) final_violation = certify(result.trajectory);
  result.max_violation = final_violation;

  // Never hand back something worse than a feasible initial guess.
  const double init_cost = trajectory_cost(init, query.fixed_prefix, options.weights);
  if (!result.success || init_cost < result.cost) {
    const double init_violation = certify(init);
    if (init_violation <= query.tolerance) {
      result.success = true;
      result.trajectory = init;
      result.cost = init_cost;
      result.max_violation = init_violation;
    }
  }
  result.wall_time = seconds_since(t0);
  return result;
}

}  // namespace reachplan
