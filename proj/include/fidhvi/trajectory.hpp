#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fidhvi/csv.hpp"
#include "fidhvi/linalg.hpp"

namespace fidhvi {

/// Partition of [0, T] whose nodes include every impulse instant.
///
/// Impulses are numbered 1..m as in 0 = τ_0 < τ_1 < ... < τ_m < τ_{m+1} = T.
/// A node t belongs to subinterval j when t ∈ (τ_j, τ_{j+1}]; node 0 belongs
/// to subinterval 0.
class TimeGrid {
 public:
  /// Each of the m + 1 subintervals is split into `steps_per_subinterval`
  /// equal steps.
  static TimeGrid uniform(double horizon, std::vector<double> impulse_times,
                          int steps_per_subinterval);

  /// Explicit node set; must start at 0, end at the horizon and contain every
  /// impulse time exactly.
  static TimeGrid from_nodes(std::vector<double> nodes,
                             std::vector<double> impulse_times);

  double horizon() const { return nodes_.back(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& impulse_times() const { return impulse_times_; }
  std::size_t size() const { return nodes_.size(); }
  int impulse_count() const { return static_cast<int>(impulse_times_.size()); }

  int subinterval(std::size_t node) const { return subinterval_.at(node); }

  /// 1-based impulse index when `node` sits on τ_j.
  std::optional<int> impulse_at(std::size_t node) const;

  /// Node index of τ_j, 1 <= j <= m.
  std::size_t impulse_node(int j) const;

  /// Index of the node equal to `t` (to 1e-12 relative); DomainError otherwise.
  std::size_t index_of(double t) const;

  bool operator==(const TimeGrid& other) const {
    return nodes_ == other.nodes_ && impulse_times_ == other.impulse_times_;
  }

 private:
  TimeGrid(std::vector<double> nodes, std::vector<double> impulse_times);

  std::vector<double> nodes_;
  std::vector<double> impulse_times_;
  std::vector<std::size_t> impulse_nodes_;
  std::vector<int> subinterval_;
};

/// Element of IC(Q; R^dim): node values stored with the left-continuous
/// convention (the value at τ_j is z(τ_j⁻)); right limits z(τ_j⁺) are kept
/// per impulse.
class PiecewiseTrajectory {
 public:
  PiecewiseTrajectory(TimeGrid grid, int dim, std::vector<Vec> node_values,
                      std::vector<Vec> right_limits);

  static PiecewiseTrajectory constant(const TimeGrid& grid, const Vec& value);

  /// Rebuild from left values and the jumps z(τ_j⁺) - z(τ_j⁻).
  static PiecewiseTrajectory from_jumps(TimeGrid grid, int dim,
                                        std::vector<Vec> node_values,
                                        const std::vector<Vec>& jumps);

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return dim_; }

  const Vec& left(std::size_t node) const { return values_.at(node); }
  /// Right limit at an impulse node, the node value elsewhere.
  const Vec& right(std::size_t node) const;

  const std::vector<Vec>& node_values() const { return values_; }
  const std::vector<Vec>& right_limits() const { return right_limits_; }

  Vec eval_left(double t) const;
  Vec eval_right(double t) const;

  /// Λz(τ_j) = z(τ_j⁺) - z(τ_j⁻), 1 <= j <= m.
  Vec jump(int j) const;

  /// sup over nodes and right limits of the Euclidean norm.
  double sup_norm() const;

 private:
  TimeGrid grid_;
  int dim_;
  std::vector<Vec> values_;
  std::vector<Vec> right_limits_;
};

/// Single-owner builder; unset entries default to zero.
class TrajectoryBuilder {
 public:
  TrajectoryBuilder(TimeGrid grid, int dim);

  void set_value(std::size_t node, const Vec& v);
  void set_right_limit(int j, const Vec& v);
  PiecewiseTrajectory build() &&;

 private:
  TimeGrid grid_;
  int dim_;
  std::vector<Vec> values_;
  std::vector<Vec> right_limits_;
};

/// Max over nodes (and right limits at impulse nodes) of ‖a - b‖.
/// DomainError when grids or dimensions differ.
double sup_distance(const PiecewiseTrajectory& a, const PiecewiseTrajectory& b);

/// CSV form `t,<name>_1..<name>_dim,is_right_limit`; impulse nodes produce a
/// left row followed by a right-limit row. With dim == 1 and `scalar_column`
/// set, the single value column is named `scalar_column` instead.
csv::Table trajectory_table(const PiecewiseTrajectory& traj,
                            const std::string& prefix = "z",
                            const std::string& scalar_column = "");
PiecewiseTrajectory trajectory_from_table(const csv::Table& table);

void write_trajectory_csv(std::ostream& os, const PiecewiseTrajectory& traj,
                          const std::string& prefix = "z");
PiecewiseTrajectory read_trajectory_csv(std::istream& is);

}  // namespace fidhvi
