#pragma once

// Built-in models used by the default experiments and the test suites.

#include "tpl/bounds.hpp"

#include <string>
#include <variant>
#include <vector>

namespace tpl {

using Model = std::variant<FiniteChain, GaussianModel>;

struct FixtureInfo {
  std::string name;
  std::string description;
  std::string citation;
};

/// Stable, ordered catalog.
const std::vector<FixtureInfo>& fixture_catalog();

/// Throws ModelError for an unknown name.
Model load_fixture(const std::string& name);

/// Named fields on a finite chain:
///   "constant"          f = 0 (1 x 1)
///   "indicator"         f = 1 on the last state, 0 elsewhere (1 x 1)
///   "gap-eigenfunction" the eigenvector of the spectral gap, mapped back by
///                       D^{-1/2} (1 x 1)
///   "pauli"             f(z) = (z odd ? 1 : -1) diag(1, -1) + [[0, 1], [1, 0]] z / n
/// Throws ModelError for an unknown name.
FiniteField named_field(const FiniteChain& chain, const std::string& name);
std::vector<std::string> named_field_names();

}  // namespace tpl
