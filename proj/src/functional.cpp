#include "fidhvi/functional.hpp"

#include <algorithm>
#include <cmath>

#include "fidhvi/errors.hpp"

namespace fidhvi {

MonotoneOperator MonotoneOperator::linear_spd(const Mat& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DomainError("MonotoneOperator: matrix must be square and nonempty");
  }
  if (!m.isApprox(m.transpose(), 1e-12)) {
    throw DomainError("MonotoneOperator: matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(m);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) throw DomainError("MonotoneOperator: matrix must be positive definite");
  MonotoneOperator op;
  op.dim = static_cast<int>(m.rows());
  op.apply = [m](double, ConstVecRef y, VecRef out) { out.noalias() = m * y; };
  op.strong_monotonicity = lo;
  op.lipschitz = hi;
  op.matrix = m;
  return op;
}

MonotoneOperator MonotoneOperator::scaled_identity(int dim, double a) {
  if (!(a > 0.0)) throw DomainError("MonotoneOperator: scale must be positive");
  MonotoneOperator op;
  op.dim = dim;
  op.apply = [a](double, ConstVecRef y, VecRef out) { out = a * y; };
  op.strong_monotonicity = a;
  op.lipschitz = a;
  op.matrix = a * Mat::Identity(dim, dim);
  return op;
}

TraceMap::TraceMap(Mat matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() == 0 || matrix_.cols() == 0) {
    throw DomainError("TraceMap: matrix must be nonempty");
  }
  if (matrix_.rows() > matrix_.cols()) {
    throw DomainError("TraceMap: more rows than columns cannot have full row rank");
  }
  Eigen::JacobiSVD<Mat> svd(matrix_);
  const auto& sv = svd.singularValues();
  norm_ = sv(0);
  if (!(sv(sv.size() - 1) > 1e-12 * norm_)) {
    throw DomainError("TraceMap: matrix must have full row rank");
  }
}

TraceMap TraceMap::identity(int dim) { return TraceMap(Mat::Identity(dim, dim)); }

// ---------------------------------------------------------------------------

ScalarLaw::ScalarLaw(std::string name, std::vector<double> breakpoints,
                     std::vector<Piece> pieces, double selection_weight)
    : name_(std::move(name)),
      breakpoints_(std::move(breakpoints)),
      pieces_(std::move(pieces)),
      selection_weight_(selection_weight) {
  if (pieces_.size() != breakpoints_.size() + 1) {
    throw DomainError("ScalarLaw: need exactly one more piece than breakpoints");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw DomainError("ScalarLaw: breakpoints must be strictly increasing");
    }
  }
  if (!(selection_weight_ >= 0.0 && selection_weight_ <= 1.0)) {
    throw DomainError("ScalarLaw: selection weight must lie in [0, 1]");
  }

  // Potential constants so that v_i + c_i r + k_i r²/2 is continuous.
  value_offsets_.assign(pieces_.size(), 0.0);
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    const double b = breakpoints_[i];
    const auto& lp = pieces_[i];
    const auto& rp = pieces_[i + 1];
    value_offsets_[i + 1] = value_offsets_[i] + (lp.offset - rp.offset) * b +
                            0.5 * (lp.curvature - rp.curvature) * b * b;
  }

  // Growth: on each piece (and each sign half of it) |c + k r| / (1 + |r|) is
  // a Möbius transform, hence monotone, so its sup sits at an endpoint or at
  // infinity where it tends to |k|.
  auto ratio = [](const Piece& p, double r) {
    return std::abs(p.offset + p.curvature * r) / (1.0 + std::abs(r));
  };
  growth_ = 0.0;
  relaxed_ = 0.0;
  lipschitz_ = 0.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& p = pieces_[i];
    const bool has_lo = i > 0;
    const bool has_hi = i < breakpoints_.size();
    const double lo = has_lo ? breakpoints_[i - 1] : -kInfinity;
    const double hi = has_hi ? breakpoints_[i] : kInfinity;
    if (has_lo) growth_ = std::max(growth_, ratio(p, lo));
    if (has_hi) growth_ = std::max(growth_, ratio(p, hi));
    if (lo < 0.0 && hi > 0.0) growth_ = std::max(growth_, ratio(p, 0.0));
    if (!has_lo || !has_hi) growth_ = std::max(growth_, std::abs(p.curvature));
    relaxed_ = std::max(relaxed_, -p.curvature);
    lipschitz_ = std::max(lipschitz_, std::abs(p.curvature));
  }
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    const double b = breakpoints_[i];
    const double left = pieces_[i].offset + pieces_[i].curvature * b;
    const double right = pieces_[i + 1].offset + pieces_[i + 1].curvature * b;
    // Rounding in the piece offsets is not a jump.
    const double slack = 1e-12 * std::max({1.0, std::abs(left), std::abs(right)});
    if (right < left - slack) relaxed_ = kInfinity;
    if (std::abs(right - left) > slack) lipschitz_ = kInfinity;
  }
}

ScalarLaw ScalarLaw::zero() { return ScalarLaw("zero", {}, {Piece{}}); }

ScalarLaw ScalarLaw::absolute(double scale) {
  return ScalarLaw("absolute", {0.0}, {Piece{-scale, 0.0}, Piece{scale, 0.0}});
}

ScalarLaw ScalarLaw::quadratic(double a) { return ScalarLaw("quadratic", {}, {Piece{0.0, a}}); }

ScalarLaw ScalarLaw::linear(double b) { return ScalarLaw("linear", {}, {Piece{b, 0.0}}); }

ScalarLaw ScalarLaw::normal_compliance(double stiffness, double onset, double width,
                                       double softening) {
  if (!(stiffness >= 0.0 && onset > 0.0 && width > 0.0 && softening >= 0.0)) {
    throw DomainError("normal_compliance: need stiffness, softening >= 0 and onset, width > 0");
  }
  const double k = stiffness;
  const double b = softening;
  return ScalarLaw("normal_compliance", {0.0, onset, onset + width},
                   {Piece{0.0, 0.0}, Piece{0.0, k}, Piece{(k + b) * onset, -b},
                    Piece{-(k + b) * width, k}});
}

ScalarLaw ScalarLaw::friction_weakening(double mu, double reg, double weakening,
                                        double width) {
  if (!(mu >= 0.0 && reg > 0.0 && weakening >= 0.0 && width > 0.0 &&
        weakening * width < 1.0)) {
    throw DomainError(
        "friction_weakening: need mu, weakening >= 0, reg, width > 0 and weakening*width < 1");
  }
  const double e = reg;
  const double w = width;
  const double b = weakening;
  return ScalarLaw("friction_weakening", {-e - w, -e, e, e + w},
                   {Piece{-mu * (1.0 - b * w), 0.0}, Piece{-mu * (1.0 + b * e), -mu * b},
                    Piece{0.0, mu / e}, Piece{mu * (1.0 + b * e), -mu * b},
                    Piece{mu * (1.0 - b * w), 0.0}});
}

ScalarLaw ScalarLaw::sawtooth(double drop, double period, int periods) {
  if (!(drop > 0.0 && period > 0.0 && periods >= 0)) {
    throw DomainError("sawtooth: need drop, period > 0 and periods >= 0");
  }
  std::vector<double> bps;
  std::vector<Piece> pieces;
  pieces.push_back(Piece{drop, 0.0});
  for (int i = -periods; i <= periods; ++i) {
    bps.push_back(i * period);
    if (i < periods) pieces.push_back(Piece{-drop * i, drop / period});
  }
  pieces.push_back(Piece{0.0, 0.0});
  return ScalarLaw("sawtooth", std::move(bps), std::move(pieces));
}

std::size_t ScalarLaw::left_piece(double r) const {
  return static_cast<std::size_t>(
      std::lower_bound(breakpoints_.begin(), breakpoints_.end(), r) - breakpoints_.begin());
}

std::size_t ScalarLaw::right_piece(double r) const {
  return static_cast<std::size_t>(
      std::upper_bound(breakpoints_.begin(), breakpoints_.end(), r) - breakpoints_.begin());
}

double ScalarLaw::value(double r) const {
  const auto i = right_piece(r);
  const auto& p = pieces_[i];
  return value_offsets_[i] + p.offset * r + 0.5 * p.curvature * r * r;
}

double ScalarLaw::left_derivative(double r) const {
  const auto& p = pieces_[left_piece(r)];
  return p.offset + p.curvature * r;
}

double ScalarLaw::right_derivative(double r) const {
  const auto& p = pieces_[right_piece(r)];
  return p.offset + p.curvature * r;
}

std::pair<double, double> ScalarLaw::subdifferential(double r) const {
  const double a = left_derivative(r);
  const double b = right_derivative(r);
  return {std::min(a, b), std::max(a, b)};
}

double ScalarLaw::selection(double r) const {
  const double a = left_derivative(r);
  const double b = right_derivative(r);
  if (a == b) return a;
  return a + selection_weight_ * (b - a);
}

double ScalarLaw::directional(double r, double d) const {
  const auto [lo, hi] = subdifferential(r);
  return std::max(lo * d, hi * d);
}

bool ScalarLaw::is_kink(double r) const { return left_derivative(r) != right_derivative(r); }

double ScalarLaw::resolvent(double lambda, double s) const {
  if (!(lambda > 0.0) || !(lambda * relaxed_ < 1.0)) {
    throw DomainError("ScalarLaw::resolvent: need 0 < lambda < 1 / relaxed_monotonicity");
  }
  // r ↦ r + lambda j'(r) is strictly increasing with upward jumps only, so
  // walk the pieces until s falls inside a piece's range or a jump's gap.
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& p = pieces_[i];
    const double slope = 1.0 + lambda * p.curvature;
    if (i < breakpoints_.size()) {
      const double b = breakpoints_[i];
      const double below = b + lambda * (p.offset + p.curvature * b);
      if (s < below) return (s - lambda * p.offset) / slope;
      const auto& q = pieces_[i + 1];
      const double above = b + lambda * (q.offset + q.curvature * b);
      if (s <= above) return b;
    } else {
      return (s - lambda * p.offset) / slope;
    }
  }
  return s;  // unreachable: the last piece always returns
}

ScalarLaw ScalarLaw::scaled(double factor) const {
  auto pieces = pieces_;
  for (auto& p : pieces) {
    p.offset *= factor;
    p.curvature *= factor;
  }
  return ScalarLaw(name_, breakpoints_, std::move(pieces), selection_weight_);
}

ScalarLaw ScalarLaw::plus(const ScalarLaw& other) const {
  std::vector<double> bps = breakpoints_;
  bps.insert(bps.end(), other.breakpoints_.begin(), other.breakpoints_.end());
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i <= bps.size(); ++i) {
    double probe;
    if (bps.empty()) {
      probe = 0.0;
    } else if (i == 0) {
      probe = bps.front() - 1.0;
    } else if (i == bps.size()) {
      probe = bps.back() + 1.0;
    } else {
      probe = 0.5 * (bps[i - 1] + bps[i]);
    }
    const auto& a = pieces_[right_piece(probe)];
    const auto& b = other.pieces_[other.right_piece(probe)];
    pieces.push_back(Piece{a.offset + b.offset, a.curvature + b.curvature});
  }
  return ScalarLaw(name_ + "+" + other.name_, std::move(bps), std::move(pieces),
                   selection_weight_);
}

// ---------------------------------------------------------------------------

NonsmoothFunctional NonsmoothFunctional::zero(int dim) {
  return separable(dim, {}, "zero");
}

NonsmoothFunctional NonsmoothFunctional::separable(int dim, std::vector<LawTerm> terms,
                                                   std::string name) {
  if (dim < 1) throw DomainError("NonsmoothFunctional: dimension must be positive");
  std::vector<double> growth(static_cast<std::size_t>(dim), 0.0);
  std::vector<double> relaxed(static_cast<std::size_t>(dim), 0.0);
  std::vector<double> lip(static_cast<std::size_t>(dim), 0.0);
  for (const auto& term : terms) {
    if (term.component < 0 || term.component >= dim) {
      throw DomainError("NonsmoothFunctional: term component out of range");
    }
    const auto c = static_cast<std::size_t>(term.component);
    growth[c] += term.law.growth();
    relaxed[c] += term.law.relaxed_monotonicity();
    lip[c] += term.law.derivative_lipschitz();
  }

  NonsmoothFunctional j;
  j.dim = dim;
  j.name = std::move(name);
  j.terms = terms;
  j.growth = std::sqrt(static_cast<double>(dim)) * *std::max_element(growth.begin(), growth.end());
  j.relaxed_monotonicity = *std::max_element(relaxed.begin(), relaxed.end());
  j.subgradient_lipschitz = *std::max_element(lip.begin(), lip.end());

  j.value = [terms](double, ConstVecRef x) {
    double s = 0.0;
    for (const auto& term : terms) s += term.law.value(x[term.component]);
    return s;
  };
  j.subgradient = [terms](double, ConstVecRef x, VecRef out) {
    out.setZero();
    for (const auto& term : terms) out[term.component] += term.law.selection(x[term.component]);
  };
  j.is_kink = [terms](double, ConstVecRef x) {
    for (const auto& term : terms) {
      if (term.law.is_kink(x[term.component])) return true;
    }
    return false;
  };
  j.directional = [terms](double, ConstVecRef x, ConstVecRef d) {
    double s = 0.0;
    for (const auto& term : terms) s += term.law.directional(x[term.component], d[term.component]);
    return s;
  };
  return j;
}

NonsmoothFunctional NonsmoothFunctional::with_terms(const std::vector<LawTerm>& extra) const {
  if (directional == nullptr || (terms.empty() && name != "zero")) {
    throw DomainError("NonsmoothFunctional::with_terms: only separable functionals compose");
  }
  auto all = terms;
  all.insert(all.end(), extra.begin(), extra.end());
  return separable(dim, std::move(all), name);
}

}  // namespace fidhvi
