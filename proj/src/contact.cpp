#include "fidhvi/contact.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "fidhvi/errors.hpp"

namespace fidhvi {

namespace {

// φ is declared on this ball; F is affine and unbounded globally.
constexpr double kDynamicsBallRadius = 10.0;

void check_geometry(const ContactModel& m) {
  if (!(m.length > 0.0)) throw DomainError("contact: rod length must be positive");
  if (!(m.ea > 0.0)) throw DomainError("contact: EA must be positive");
  if (m.elements < 1) throw DomainError("contact: need at least one element");
  if (m.contact_node != -1 && (m.contact_node < 1 || m.contact_node > m.elements)) {
    throw DomainError("contact: contact node must lie in 1..elements");
  }
}

double lambda_min(const Mat& k) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(k, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace

int ContactModel::contact_index() const {
  check_geometry(*this);
  return (contact_node == -1 ? elements : contact_node) - 1;
}

Mat assemble_stiffness(const ContactModel& model) {
  check_geometry(model);
  const int n = model.elements;
  const double s = model.ea / model.step();
  Mat k = Mat::Zero(n, n);
  // Element e joins nodes e and e+1; node 0 is clamped and dropped.
  for (int e = 0; e < n; ++e) {
    const int a = e - 1;
    const int b = e;
    if (a >= 0) {
      k(a, a) += s;
      k(a, b) -= s;
      k(b, a) -= s;
    }
    k(b, b) += s;
  }
  return k;
}

double element_energy_product(const ContactModel& model, const Vec& u, const Vec& v) {
  check_geometry(model);
  if (u.size() != model.elements || v.size() != model.elements) {
    throw DomainError("element_energy_product: vectors must have one entry per free node");
  }
  const double h = model.step();
  double sum = 0.0;
  for (int e = 0; e < model.elements; ++e) {
    const double du = u[e] - (e > 0 ? u[e - 1] : 0.0);
    const double dv = v[e] - (e > 0 ? v[e - 1] : 0.0);
    sum += model.ea * (du / h) * (dv / h) * h;
  }
  return sum;
}

Vec assemble_load(const ContactModel& model, double /*t*/, const Vec& traction) {
  check_geometry(model);
  if (traction.size() != 1) throw DomainError("assemble_load: traction must be a scalar");
  const int n = model.elements;
  const double h = model.step();
  Vec load = Vec::Constant(n, model.body_force * h);
  load[n - 1] = 0.5 * model.body_force * h;
  load[n - 1] += traction[0];
  return load;
}

TraceMap discrete_trace(const ContactModel& model) {
  check_geometry(model);
  Mat g = Mat::Zero(1, model.elements);
  g(0, model.contact_index()) = 1.0;
  return TraceMap(g);
}

ScalarLaw normal_law(const ContactModel& m) {
  return ScalarLaw::normal_compliance(m.normal_stiffness, m.normal_onset, m.normal_width,
                                      m.normal_softening);
}

ScalarLaw friction_law(const ContactModel& m) {
  if (m.friction == 0.0) return ScalarLaw::zero();
  return ScalarLaw::friction_weakening(m.friction, m.friction_reg, m.friction_weakening,
                                       m.friction_width);
}

NonsmoothFunctional contact_functional(const ContactModel& model) {
  return NonsmoothFunctional::separable(
      1, {LawTerm{0, normal_law(model)}, LawTerm{0, friction_law(model)}}, "contact");
}

ContactConstants contact_constants(const ContactModel& model) {
  ContactConstants c;
  c.lambda_min = lambda_min(assemble_stiffness(model));
  if (model.declared_m_a) {
    if (*model.declared_m_a > c.lambda_min * (1.0 + 1e-12)) {
      throw ConstantViolation("declared m_A must not exceed lambda_min(K)", *model.declared_m_a,
                              c.lambda_min);
    }
    if (!(*model.declared_m_a > 0.0)) throw DomainError("contact: declared m_A must be positive");
    c.m_a = *model.declared_m_a;
  } else {
    c.m_a = c.lambda_min;
  }
  c.alpha_normal = normal_law(model).relaxed_monotonicity();
  c.alpha_friction = friction_law(model).relaxed_monotonicity();
  c.c0 = discrete_trace(model).norm();
  c.m1 = std::max(std::abs(model.traction_decay), std::abs(model.displacement_coupling));
  c.m_g = 1.0;
  return c;
}

TimeGrid contact_grid(const ContactModel& model, int steps_per_subinterval) {
  return TimeGrid::uniform(model.horizon, model.impulse_times, steps_per_subinterval);
}

ProblemSpec to_problem_spec(const ContactModel& model, const TimeGrid& grid) {
  const ContactConstants c = contact_constants(model);
  const double budget = (c.alpha_normal + c.alpha_friction) * c.c0 * c.c0;
  if (!(c.m_a > budget)) {
    throw ConstantViolation("contact coercivity: m_A must exceed (alpha_nu + alpha_tau) c0²", c.m_a, budget);
  }
  if (grid.impulse_times() != model.impulse_times) {
    throw DomainError("contact: grid impulse times differ from the model");
  }

  ProblemSpec spec{.name = "contact_rod",
                   .order = model.order,
                   .grid = grid,
                   .z0 = Vec::Constant(1, model.initial_traction),
                   .f = {},
                   .impulses = {},
                   .a = MonotoneOperator::linear_spd(assemble_stiffness(model)),
                   .n = discrete_trace(model),
                   .j = contact_functional(model),
                   .g = {}};
  spec.a.strong_monotonicity = c.m_a;

  const int ci = model.contact_index();
  const double a = model.traction_decay;
  const double b = model.displacement_coupling;
  const double s = model.traction_source;
  spec.f.eval = [a, b, s, ci](double, ConstVecRef z, ConstVecRef y, VecRef out) {
    out[0] = -a * z[0] + b * y[ci] + s;
  };
  spec.f.lipschitz = c.m1;
  spec.f.bound = [a, b, s](double) {
    return std::abs(s) + (std::abs(a) + std::abs(b)) * kDynamicsBallRadius;
  };

  const double js = model.jump_scale;
  const double jt = model.jump_shift;
  for (std::size_t i = 0; i < model.impulse_times.size(); ++i) {
    spec.impulses.push_back(ImpulseMap{
        .eval = [js, jt](ConstVecRef z, VecRef out) { out[0] = js * z[0] + jt; },
        .lipschitz = std::abs(js)});
  }

  spec.g.eval = [model](double t, ConstVecRef z, VecRef out) {
    out = assemble_load(model, t, Vec(z));
  };
  spec.g.lipschitz = c.m_g;
  spec.validate();
  return spec;
}

ContactModel family_base(const ContactModel& model, ContactFamilyKind kind) {
  ContactModel base = model;
  if (kind == ContactFamilyKind::friction_to_zero) base.friction = 0.0;
  return base;
}

PerturbationFamily contact_family(const ContactModel& model, ContactFamilyKind kind) {
  const ContactConstants c = contact_constants(model);
  PerturbationFamily fam;
  fam.state_scaled = true;
  fam.measure = 1.0;
  // Every δ in [0, 1] keeps c_Jδ at or below the full model's budget.
  fam.m_a0 = 0.5 * (c.m_a + (c.alpha_normal + c.alpha_friction) * c.c0 * c.c0);

  const NonsmoothFunctional base = contact_functional(family_base(model, kind));
  switch (kind) {
    case ContactFamilyKind::normal_quadratic:
      fam.name = "normal_quadratic";
      fam.make = [base](double d) {
        if (d == 0.0) return base;
        return base.with_terms({LawTerm{0, ScalarLaw::quadratic(d)}});
      };
      fam.modulus = [](double d) { return d; };
      break;
    case ContactFamilyKind::friction_to_zero: {
      fam.name = "friction_to_zero";
      const ContactModel m = model;
      fam.make = [m](double d) {
        ContactModel md = m;
        md.friction = d * m.friction;
        return contact_functional(md);
      };
      const double slope = model.friction / model.friction_reg;
      fam.modulus = [slope](double d) { return d * slope; };
      break;
    }
    case ContactFamilyKind::normal_absolute:
      fam.name = "normal_absolute";
      fam.make = [base](double d) {
        if (d == 0.0) return base;
        return base.with_terms({LawTerm{0, ScalarLaw::absolute(d)}});
      };
      fam.modulus = [](double d) { return d; };
      break;
  }
  return fam;
}

PerturbationStudy run_contact_perturbation(const ContactModel& model, ContactFamilyKind kind,
                                           const std::vector<double>& deltas,
                                           int steps_per_subinterval,
                                           const PerturbationOptions& options) {
  const ContactModel base = family_base(model, kind);
  const ProblemSpec spec = to_problem_spec(base, contact_grid(base, steps_per_subinterval));
  return run_perturbation_study(spec, contact_family(model, kind), deltas, options);
}

csv::Table displacement_table(const PiecewiseTrajectory& u) {
  csv::Table t;
  t.header.push_back("t");
  for (int i = 1; i <= u.dim(); ++i) t.header.push_back("u_" + std::to_string(i));
  const auto& nodes = u.grid().nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    std::vector<std::string> row{csv::format_double(nodes[k])};
    for (int i = 0; i < u.dim(); ++i) row.push_back(csv::format_double(u.left(k)[i]));
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace fidhvi
