#include "fidhvi/presets.hpp"

#include <cmath>
#include <set>

#include "fidhvi/errors.hpp"

namespace fidhvi {

namespace {

// φ is declared on a ball of this radius around the origin.
constexpr double kBallRadius = 10.0;

class Params {
 public:
  Params(const std::string& preset, const PresetOverrides& o) : preset_(preset), o_(o) {}

  double get(const std::string& key, double fallback) {
    used_.insert(key);
    auto it = o_.values.find(key);
    return it == o_.values.end() ? fallback : it->second;
  }

  int get_int(const std::string& key, int fallback) {
    const double v = get(key, fallback);
    if (v != std::floor(v)) throw ConfigError(preset_ + ": " + key + " must be an integer");
    return static_cast<int>(v);
  }

  std::vector<double> impulse_times(std::vector<double> fallback) {
    allow_impulses_ = true;
    return o_.impulse_times ? *o_.impulse_times : fallback;
  }

  void finish() const {
    for (const auto& [k, v] : o_.values) {
      if (!used_.count(k)) throw ConfigError(preset_ + ": unknown parameter " + k);
    }
    if (o_.impulse_times && !allow_impulses_) {
      throw ConfigError(preset_ + ": preset has no impulse maps to place");
    }
  }

 private:
  std::string preset_;
  const PresetOverrides& o_;
  std::set<std::string> used_;
  bool allow_impulses_ = false;
};

CouplingMap identity_coupling(const Vec& shift = Vec()) {
  CouplingMap g;
  g.eval = [shift](double, ConstVecRef z, VecRef out) {
    out = z;
    if (shift.size() > 0) out += shift;
  };
  g.lipschitz = 1.0;
  return g;
}

void check_order(const std::string& name, double order) {
  if (!(order > 0.0 && order <= 1.0)) throw ConfigError(name + ": order must lie in (0, 1]");
}

TimeGrid grid_for(double horizon, std::vector<double> times, int steps) {
  if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
  try {
    return TimeGrid::uniform(horizon, std::move(times), steps);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

// f = -rate (z + y) on a scalar problem with A = a y, J = -(c/2) x².
ProblemSpec linear_family(const std::string& name, Params& p, std::vector<double> times,
                          int steps) {
  const double order = p.get("order", 0.5);
  check_order(name, order);
  const double horizon = p.get("horizon", 1.0);
  const double rate = p.get("rate", 0.1);
  const double a = p.get("a", 2.0);
  const double c = p.get("c", 0.5);
  const double z0 = p.get("z0", 1.0);
  const bool impulsive = !times.empty();
  const double jump_scale = impulsive ? p.get("jump_scale", 0.25) : 0.0;
  const double jump_shift = impulsive ? p.get("jump_shift", 0.1) : 0.0;
  if (impulsive) times = p.impulse_times(times);

  ProblemSpec spec{.name = name,
                   .order = order,
                   .grid = grid_for(horizon, times, steps),
                   .z0 = Vec::Constant(1, z0),
                   .f = {},
                   .impulses = {},
                   .a = MonotoneOperator::scaled_identity(1, a),
                   .n = TraceMap::identity(1),
                   .j = c == 0.0 ? NonsmoothFunctional::zero(1)
                                 : NonsmoothFunctional::separable(
                                       1, {LawTerm{0, ScalarLaw::quadratic(-c)}}, "concave"),
                   .g = identity_coupling()};
  spec.f.eval = [rate](double, ConstVecRef z, ConstVecRef y, VecRef out) {
    out[0] = -rate * (z[0] + y[0]);
  };
  spec.f.lipschitz = std::abs(rate);
  spec.f.bound = [rate](double) { return 2.0 * std::abs(rate) * kBallRadius; };
  for (std::size_t i = 0; i < times.size(); ++i) {
    spec.impulses.push_back(ImpulseMap{
        .eval = [jump_scale, jump_shift](ConstVecRef z, VecRef out) {
          out[0] = jump_scale * z[0] + jump_shift;
        },
        .lipschitz = std::abs(jump_scale)});
  }
  return spec;
}

ProblemSpec zero_dynamics(Params& p, int steps) {
  const double order = p.get("order", 0.5);
  check_order("zero_dynamics", order);
  const double horizon = p.get("horizon", 1.0);
  const double z0 = p.get("z0", 1.0);
  const double a = p.get("a", 2.0);
  ProblemSpec spec{.name = "zero_dynamics",
                   .order = order,
                   .grid = grid_for(horizon, {}, steps),
                   .z0 = Vec::Constant(1, z0),
                   .f = {},
                   .impulses = {},
                   .a = MonotoneOperator::scaled_identity(1, a),
                   .n = TraceMap::identity(1),
                   .j = NonsmoothFunctional::zero(1),
                   .g = identity_coupling()};
  spec.f.eval = [](double, ConstVecRef, ConstVecRef, VecRef out) { out.setZero(); };
  spec.f.lipschitz = 0.0;
  spec.f.bound = [](double) { return 0.0; };
  return spec;
}

// f = -lambda z, y decoupled from the dynamics.
ProblemSpec scalar_decay(Params& p, int steps) {
  const double order = p.get("order", 0.5);
  check_order("scalar_decay", order);
  const double horizon = p.get("horizon", 1.0);
  const double lambda = p.get("lambda", 1.0);
  const double z0 = p.get("z0", 1.0);
  const double a = p.get("a", 4.0);
  ProblemSpec spec{.name = "scalar_decay",
                   .order = order,
                   .grid = grid_for(horizon, {}, steps),
                   .z0 = Vec::Constant(1, z0),
                   .f = {},
                   .impulses = {},
                   .a = MonotoneOperator::scaled_identity(1, a),
                   .n = TraceMap::identity(1),
                   .j = NonsmoothFunctional::zero(1),
                   .g = identity_coupling()};
  spec.f.eval = [lambda](double, ConstVecRef z, ConstVecRef, VecRef out) {
    out[0] = -lambda * z[0];
  };
  spec.f.lipschitz = std::abs(lambda);
  spec.f.bound = [lambda](double) { return std::abs(lambda) * kBallRadius; };
  return spec;
}

ProblemSpec friction_2d(Params& p, int steps) {
  const double order = p.get("order", 0.7);
  check_order("friction_2d", order);
  const double horizon = p.get("horizon", 1.0);
  const double mu = p.get("mu", 0.5);
  const double reg = p.get("reg", 0.05);
  const double weakening = p.get("weakening", 1.0);
  const double width = p.get("width", 0.5);
  const double adhesion = p.get("adhesion", 0.2);
  const double damping = p.get("damping", 0.3);
  const double coupling = p.get("coupling", 0.1);
  const double push = p.get("push", 0.5);
  const double jump_scale = p.get("jump_scale", -0.5);
  const auto times = p.impulse_times({0.5});

  Mat a(2, 2);
  a << 3.0, 1.0, 1.0, 2.0;
  ProblemSpec spec{
      .name = "friction_2d",
      .order = order,
      .grid = grid_for(horizon, times, steps),
      .z0 = Vec{{1.0, -0.5}},
      .f = {},
      .impulses = {},
      .a = MonotoneOperator::linear_spd(a),
      .n = TraceMap::identity(2),
      .j = NonsmoothFunctional::separable(
          2,
          {LawTerm{0, ScalarLaw::friction_weakening(mu, reg, weakening, width)},
           LawTerm{1, ScalarLaw::absolute(adhesion)}},
          "friction"),
      .g = identity_coupling(Vec{{push, 0.0}})};
  spec.f.eval = [damping, coupling](double, ConstVecRef z, ConstVecRef y, VecRef out) {
    out[0] = -damping * z[0] + coupling * std::sin(y[0]);
    out[1] = -damping * z[1] + coupling * std::sin(y[1]);
  };
  spec.f.lipschitz = std::max(std::abs(damping), std::abs(coupling));
  spec.f.bound = [damping, coupling](double) {
    return std::sqrt(2.0) * (std::abs(damping) * kBallRadius + std::abs(coupling));
  };
  for (std::size_t i = 0; i < times.size(); ++i) {
    spec.impulses.push_back(ImpulseMap{
        .eval = [jump_scale](ConstVecRef z, VecRef out) { out = jump_scale * z; },
        .lipschitz = std::abs(jump_scale)});
  }
  return spec;
}

// A J law whose derivative drops at every kink, declared with the
// curvature of its smooth pieces only.
ProblemSpec sawtooth_law(Params& p, int steps) {
  const double drop = p.get("drop", 0.5);
  const double period = p.get("period", 0.25);
  const int periods = p.get_int("periods", 8);
  const PresetOverrides none;
  Params inner("sawtooth_law", none);
  ProblemSpec spec = linear_family("sawtooth_law", inner, {}, steps);
  spec.order = p.get("order", 0.5);
  check_order("sawtooth_law", spec.order);
  spec.a = MonotoneOperator::scaled_identity(1, p.get("a", 2.0));
  spec.j = NonsmoothFunctional::separable(1, {LawTerm{0, ScalarLaw::sawtooth(drop, period, periods)}},
                                          "sawtooth");
  spec.j.relaxed_monotonicity = 0.0;
  return spec;
}

ContactModel contact_model(Params& p, bool violate) {
  ContactModel m;
  m.length = p.get("length", m.length);
  m.ea = p.get("ea", m.ea);
  m.elements = p.get_int("elements", m.elements);
  m.contact_node = p.get_int("contact_node", m.contact_node);
  m.order = p.get("order", m.order);
  check_order("contact", m.order);
  m.horizon = p.get("horizon", m.horizon);
  m.impulse_times = p.impulse_times({0.5});
  m.body_force = p.get("body_force", m.body_force);
  m.initial_traction = p.get("initial_traction", m.initial_traction);
  m.traction_decay = p.get("traction_decay", m.traction_decay);
  m.displacement_coupling = p.get("displacement_coupling", m.displacement_coupling);
  m.traction_source = p.get("traction_source", m.traction_source);
  m.jump_scale = p.get("jump_scale", m.jump_scale);
  m.jump_shift = p.get("jump_shift", m.jump_shift);
  m.normal_stiffness = p.get("normal_stiffness", m.normal_stiffness);
  m.normal_onset = p.get("normal_onset", m.normal_onset);
  m.normal_width = p.get("normal_width", m.normal_width);
  m.normal_softening = p.get("normal_softening", violate ? 1.0 : m.normal_softening);
  m.friction = p.get("friction", m.friction);
  m.friction_reg = p.get("friction_reg", m.friction_reg);
  m.friction_weakening = p.get("friction_weakening", m.friction_weakening);
  m.friction_width = p.get("friction_width", m.friction_width);
  const double declared = p.get("m_a", 0.0);
  if (declared != 0.0) m.declared_m_a = declared;
  return m;
}

const std::vector<std::string> kContactParams = {
    "length", "ea", "elements", "contact_node", "order", "horizon", "body_force",
    "initial_traction", "traction_decay", "displacement_coupling", "traction_source",
    "jump_scale", "jump_shift", "normal_stiffness", "normal_onset", "normal_width",
    "normal_softening", "friction", "friction_reg", "friction_weakening", "friction_width",
    "m_a"};

}  // namespace

const std::vector<PresetInfo>& preset_catalog() {
  static const std::vector<PresetInfo> catalog = {
      {"zero_dynamics", "f = 0, A = a y, J = 0, g = z", {"order", "horizon", "z0", "a"},
       false, false, false, true},
      {"scalar_decay", "f = -lambda z, A = a y, J = 0, g = z",
       {"order", "horizon", "lambda", "z0", "a"}, false, false, false, true},
      {"linear_decay", "f = -rate (z + y), A = a y, J = -c x²/2, g = z",
       {"order", "horizon", "rate", "a", "c", "z0"}, false, false, false, true},
      {"impulsive_linear", "linear_decay with jumps jump_scale z + jump_shift",
       {"order", "horizon", "rate", "a", "c", "z0", "jump_scale", "jump_shift"}, false, false,
       true, false},
      {"friction_2d", "2-D slip-weakening friction plus adhesion, one impulse",
       {"order", "horizon", "mu", "reg", "weakening", "width", "adhesion", "damping",
        "coupling", "push", "jump_scale"},
       false, false, true, false},
      {"contact_rod", "clamped rod, normal compliance and friction at the free end",
       kContactParams, true, false, true, false},
      {"violate_HO", "m_A = 0.4 below c_J = 0.5", {"order", "horizon"}, false, true, false,
       false},
      {"contact_violate_H0", "contact_rod with a softening beyond lambda_min(K)", kContactParams,
       true, true, true, false},
      {"sawtooth_law", "J with downward derivative jumps declared c_J = 0",
       {"order", "a", "drop", "period", "periods"}, false, true, false, false},
  };
  return catalog;
}

const PresetInfo& preset_info(const std::string& name) {
  for (const auto& p : preset_catalog()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown preset " + name);
}

ContactModel build_contact_model(const std::string& name, const PresetOverrides& overrides) {
  if (!preset_info(name).contact) throw ConfigError(name + " is not a contact preset");
  Params p(name, overrides);
  ContactModel m = contact_model(p, name == "contact_violate_H0");
  p.finish();
  return m;
}

ProblemSpec build_preset(const std::string& name, const PresetOverrides& overrides,
                         int steps_per_subinterval) {
  const PresetInfo& info = preset_info(name);
  if (steps_per_subinterval < 1) throw ConfigError("steps per subinterval must be positive");
  if (info.contact) {
    const ContactModel m = build_contact_model(name, overrides);
    ProblemSpec spec = to_problem_spec(m, grid_for(m.horizon, m.impulse_times,
                                                   steps_per_subinterval));
    spec.name = name;
    return spec;
  }
  Params p(name, overrides);
  const int steps = steps_per_subinterval;
  ProblemSpec spec = [&] {
    if (name == "zero_dynamics") return zero_dynamics(p, steps);
    if (name == "scalar_decay") return scalar_decay(p, steps);
    if (name == "linear_decay") return linear_family(name, p, {}, steps);
    if (name == "impulsive_linear") return linear_family(name, p, {0.3, 0.7}, steps);
    if (name == "friction_2d") return friction_2d(p, steps);
    if (name == "sawtooth_law") return sawtooth_law(p, steps);
    PresetOverrides base;
    base.values = {{"a", 0.4}, {"c", 0.5}, {"order", p.get("order", 0.5)},
                   {"horizon", p.get("horizon", 1.0)}};
    Params inner(name, base);
    return linear_family(name, inner, {}, steps);
  }();
  p.finish();
  spec.validate();
  return spec;
}

}  // namespace fidhvi
