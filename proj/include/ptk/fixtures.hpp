#pragma once

#include "ptk/state_space.hpp"

#include <string>
#include <vector>

namespace ptk {

/// Fig. 1 left: RL/RC bridge, x = (i1, i2, v3, v4), H = 1, uncontrollable
/// and unobservable, D + D^T = 2.
StateSpaceSystem circuit1();

/// Fig. 1 right (hat coordinates): x = (i1+i2, v3+v4, i2, v4), lossless,
/// H = 2 xi / (xi^2 + 1).
StateSpaceSystem circuit2();

/// Observable 2-state part of circuit2.
StateSpaceSystem circuit2_observable();

/// Scalar (-1, 1, 1, 1): regular ARE with X_ = 3 - 2 sqrt(2).
StateSpaceSystem scalar_regular();

/// Scalar (-1, 1, 1, 0): singular feedthrough, X_ = 1 via the chain.
StateSpaceSystem scalar_singular();

struct FixtureCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Reruns the worked examples from the source material at their stated
/// tolerances; this is the regression gate behind the `fixtures` subcommand.
std::vector<FixtureCheck> run_paper_fixtures();

}  // namespace ptk
