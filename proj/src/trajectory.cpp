#include "fidhvi/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "fidhvi/errors.hpp"

namespace fidhvi {

TimeGrid::TimeGrid(std::vector<double> nodes, std::vector<double> impulse_times)
    : nodes_(std::move(nodes)), impulse_times_(std::move(impulse_times)) {
  if (nodes_.size() < 2) throw DomainError("TimeGrid: need at least two nodes");
  if (nodes_.front() != 0.0) throw DomainError("TimeGrid: first node must be 0");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1]) || !std::isfinite(nodes_[i])) {
      throw DomainError("TimeGrid: nodes must be finite and strictly increasing");
    }
  }
  const double horizon = nodes_.back();
  for (std::size_t j = 0; j < impulse_times_.size(); ++j) {
    const double tau = impulse_times_[j];
    if (!(tau > 0.0 && tau < horizon)) {
      throw DomainError("TimeGrid: impulse times must lie in (0, T)");
    }
    if (j > 0 && !(tau > impulse_times_[j - 1])) {
      throw DomainError("TimeGrid: impulse times must be strictly increasing");
    }
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), tau);
    if (it == nodes_.end() || *it != tau) {
      throw DomainError("TimeGrid: impulse time " + std::to_string(tau) +
                        " is not a node");
    }
    impulse_nodes_.push_back(static_cast<std::size_t>(it - nodes_.begin()));
  }
  subinterval_.resize(nodes_.size());
  int j = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    // node i lies in (τ_j, τ_{j+1}] once it is strictly past τ_j
    while (j < impulse_count() && nodes_[i] > impulse_times_[static_cast<std::size_t>(j)]) ++j;
    subinterval_[i] = j;
  }
}

TimeGrid TimeGrid::uniform(double horizon, std::vector<double> impulse_times,
                           int steps_per_subinterval) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("TimeGrid: horizon must be positive");
  }
  if (steps_per_subinterval < 1) {
    throw DomainError("TimeGrid: need at least one step per subinterval");
  }
  std::vector<double> breaks;
  breaks.push_back(0.0);
  for (double tau : impulse_times) breaks.push_back(tau);
  breaks.push_back(horizon);
  std::vector<double> nodes;
  nodes.push_back(0.0);
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = breaks[s];
    const double b = breaks[s + 1];
    for (int i = 1; i < steps_per_subinterval; ++i) {
      nodes.push_back(a + (b - a) * static_cast<double>(i) / steps_per_subinterval);
    }
    nodes.push_back(b);
  }
  return TimeGrid(std::move(nodes), std::move(impulse_times));
}

TimeGrid TimeGrid::from_nodes(std::vector<double> nodes,
                              std::vector<double> impulse_times) {
  return TimeGrid(std::move(nodes), std::move(impulse_times));
}

std::optional<int> TimeGrid::impulse_at(std::size_t node) const {
  const auto it = std::lower_bound(impulse_nodes_.begin(), impulse_nodes_.end(), node);
  if (it != impulse_nodes_.end() && *it == node) {
    return static_cast<int>(it - impulse_nodes_.begin()) + 1;
  }
  return std::nullopt;
}

std::size_t TimeGrid::impulse_node(int j) const {
  if (j < 1 || j > impulse_count()) {
    throw DomainError("TimeGrid: impulse index " + std::to_string(j) + " out of range");
  }
  return impulse_nodes_[static_cast<std::size_t>(j - 1)];
}

std::size_t TimeGrid::index_of(double t) const {
  const double tol = 1e-12 * std::max(1.0, horizon());
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t - tol);
  if (it == nodes_.end() || std::abs(*it - t) > tol) {
    throw DomainError("TimeGrid: " + csv::format_double(t) + " is not a grid node");
  }
  return static_cast<std::size_t>(it - nodes_.begin());
}

PiecewiseTrajectory::PiecewiseTrajectory(TimeGrid grid, int dim,
                                         std::vector<Vec> node_values,
                                         std::vector<Vec> right_limits)
    : grid_(std::move(grid)),
      dim_(dim),
      values_(std::move(node_values)),
      right_limits_(std::move(right_limits)) {
  if (dim_ < 1) throw DomainError("PiecewiseTrajectory: dimension must be positive");
  if (values_.size() != grid_.size()) {
    throw DomainError("PiecewiseTrajectory: one value per node required");
  }
  if (right_limits_.size() != static_cast<std::size_t>(grid_.impulse_count())) {
    throw DomainError("PiecewiseTrajectory: one right limit per impulse required");
  }
  auto check = [this](const Vec& v) {
    if (v.size() != dim_ || !v.allFinite()) {
      throw DomainError("PiecewiseTrajectory: entries must be finite and of the declared dimension");
    }
  };
  for (const auto& v : values_) check(v);
  for (const auto& v : right_limits_) check(v);
}

PiecewiseTrajectory PiecewiseTrajectory::constant(const TimeGrid& grid, const Vec& value) {
  return PiecewiseTrajectory(grid, static_cast<int>(value.size()),
                             std::vector<Vec>(grid.size(), value),
                             std::vector<Vec>(static_cast<std::size_t>(grid.impulse_count()), value));
}

PiecewiseTrajectory PiecewiseTrajectory::from_jumps(TimeGrid grid, int dim,
                                                    std::vector<Vec> node_values,
                                                    const std::vector<Vec>& jumps) {
  if (jumps.size() != static_cast<std::size_t>(grid.impulse_count()) ||
      node_values.size() != grid.size()) {
    throw DomainError("PiecewiseTrajectory::from_jumps: size mismatch");
  }
  std::vector<Vec> right;
  right.reserve(jumps.size());
  for (int j = 1; j <= grid.impulse_count(); ++j) {
    right.push_back(node_values[grid.impulse_node(j)] + jumps[static_cast<std::size_t>(j - 1)]);
  }
  return PiecewiseTrajectory(std::move(grid), dim, std::move(node_values), std::move(right));
}

const Vec& PiecewiseTrajectory::right(std::size_t node) const {
  if (const auto j = grid_.impulse_at(node)) {
    return right_limits_[static_cast<std::size_t>(*j - 1)];
  }
  return values_.at(node);
}

Vec PiecewiseTrajectory::eval_left(double t) const { return values_[grid_.index_of(t)]; }

Vec PiecewiseTrajectory::eval_right(double t) const { return right(grid_.index_of(t)); }

Vec PiecewiseTrajectory::jump(int j) const {
  const std::size_t node = grid_.impulse_node(j);
  return right_limits_[static_cast<std::size_t>(j - 1)] - values_[node];
}

double PiecewiseTrajectory::sup_norm() const {
  double s = 0.0;
  for (const auto& v : values_) s = std::max(s, v.norm());
  for (const auto& v : right_limits_) s = std::max(s, v.norm());
  return s;
}

TrajectoryBuilder::TrajectoryBuilder(TimeGrid grid, int dim)
    : grid_(std::move(grid)),
      dim_(dim),
      values_(grid_.size(), Vec::Zero(dim)),
      right_limits_(static_cast<std::size_t>(grid_.impulse_count()), Vec::Zero(dim)) {}

void TrajectoryBuilder::set_value(std::size_t node, const Vec& v) { values_.at(node) = v; }

void TrajectoryBuilder::set_right_limit(int j, const Vec& v) {
  if (j < 1 || j > grid_.impulse_count()) {
    throw DomainError("TrajectoryBuilder: impulse index out of range");
  }
  right_limits_[static_cast<std::size_t>(j - 1)] = v;
}

PiecewiseTrajectory TrajectoryBuilder::build() && {
  return PiecewiseTrajectory(std::move(grid_), dim_, std::move(values_), std::move(right_limits_));
}

double sup_distance(const PiecewiseTrajectory& a, const PiecewiseTrajectory& b) {
  if (a.dim() != b.dim()) throw DomainError("sup_distance: dimension mismatch");
  if (!(a.grid() == b.grid())) throw DomainError("sup_distance: grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.grid().size(); ++i) {
    s = std::max(s, (a.left(i) - b.left(i)).norm());
  }
  for (std::size_t j = 0; j < a.right_limits().size(); ++j) {
    s = std::max(s, (a.right_limits()[j] - b.right_limits()[j]).norm());
  }
  return s;
}

csv::Table trajectory_table(const PiecewiseTrajectory& traj, const std::string& prefix,
                            const std::string& scalar_column) {
  csv::Table table;
  table.header.push_back("t");
  if (traj.dim() == 1 && !scalar_column.empty()) {
    table.header.push_back(scalar_column);
  } else {
    for (int k = 1; k <= traj.dim(); ++k) table.header.push_back(prefix + "_" + std::to_string(k));
  }
  table.header.push_back("is_right_limit");
  const auto& nodes = traj.grid().nodes();
  auto row = [&](double t, const Vec& v, bool right) {
    std::vector<std::string> cells;
    cells.push_back(csv::format_double(t));
    for (int k = 0; k < v.size(); ++k) cells.push_back(csv::format_double(v[k]));
    cells.emplace_back(right ? "1" : "0");
    table.add_row(std::move(cells));
  };
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    row(nodes[i], traj.left(i), false);
    if (traj.grid().impulse_at(i)) row(nodes[i], traj.right(i), true);
  }
  return table;
}

PiecewiseTrajectory trajectory_from_table(const csv::Table& table) {
  if (table.header.size() < 3 || table.header.front() != "t" ||
      table.header.back() != "is_right_limit") {
    throw ConfigError("trajectory csv: header must be t,<values>,is_right_limit");
  }
  const int dim = static_cast<int>(table.header.size()) - 2;
  std::vector<double> nodes;
  std::vector<double> impulses;
  std::vector<Vec> values;
  std::vector<Vec> right;
  for (const auto& r : table.rows) {
    const double t = csv::parse_double(r[0]);
    Vec v(dim);
    for (int k = 0; k < dim; ++k) v[k] = csv::parse_double(r[static_cast<std::size_t>(k) + 1]);
    const std::string& flag = r.back();
    if (flag == "0") {
      nodes.push_back(t);
      values.push_back(std::move(v));
    } else if (flag == "1") {
      if (nodes.empty() || nodes.back() != t) {
        throw ConfigError("trajectory csv: right-limit row must follow its left row");
      }
      impulses.push_back(t);
      right.push_back(std::move(v));
    } else {
      throw ConfigError("trajectory csv: is_right_limit must be 0 or 1");
    }
  }
  try {
    return PiecewiseTrajectory(TimeGrid::from_nodes(std::move(nodes), std::move(impulses)), dim,
                               std::move(values), std::move(right));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("trajectory csv: ") + e.what());
  }
}

void write_trajectory_csv(std::ostream& os, const PiecewiseTrajectory& traj,
                          const std::string& prefix) {
  csv::write_table(os, trajectory_table(traj, prefix));
}

PiecewiseTrajectory read_trajectory_csv(std::istream& is) {
  return trajectory_from_table(csv::read_table(is));
}

}  // namespace fidhvi
