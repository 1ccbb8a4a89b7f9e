#pragma once

#include <string>

#include "ast.hpp"

namespace lacuna {

// Canonical concrete syntax. Numerals, list literals, cons chains, the
// append/eq operators, and Bool cases resugar to the forms the parser
// accepts, so parse(pretty(x)) round-trips.
std::string pretty(const TermPtr& t);
std::string pretty(const TypePtr& t);
std::string pretty(const ExPtr& e);
std::string pretty(const Program& p);

}  // namespace lacuna
