#pragma once

#include "isslab/spectral.hpp"

#include <string>

namespace isslab {

/// Sigma(A,B): diagonal generator plus control operator on the same modes.
/// Construction verifies that B is bounded into X_{-alpha} for its declared
/// alpha (checked against the unshifted spectrum, which is always positive).
struct System {
  Generator gen;
  Control control;
  std::string label;

  System() = default;
  System(Generator g, Control b, std::string name = {});

  Index modes() const { return gen.modes(); }
  Index input_dim() const { return control.input_dim(); }
  double alpha() const { return control.alpha(); }
  bool stable() const { return gen.stable(); }

  /// Skips the regularity check; for derived operators such as A B that live
  /// in X_{-1-alpha}.
  static System unchecked(Generator g, Control b, std::string name = {}) {
    System s;
    s.gen = std::move(g);
    s.control = std::move(b);
    s.label = std::move(name);
    if (s.control.modes() != s.gen.modes()) throw std::invalid_argument("control operator and generator disagree on mode count");
    return s;
  }

  System with_generator(Generator g) const { return {std::move(g), control, label}; }
  System with_control(Control b) const { return {gen, std::move(b), label}; }
};

inline System::System(Generator g, Control b, std::string name)
    : gen(std::move(g)), control(std::move(b)), label(std::move(name)) {
  if (control.modes() != gen.modes())
    throw std::invalid_argument("control operator has " + std::to_string(control.modes()) +
                                " modes, generator has " + std::to_string(gen.modes()));
  control_regularity_norm(gen.with_shift(0.0), control);
}

}  // namespace isslab
