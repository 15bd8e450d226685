#pragma once

#include <string>

#include "smoothlab/symbol.hpp"

namespace smoothlab {

/// Parses the symbol mini-language.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('+' | '-') unary | power
///   power   := primary ('^' unary)?            (right associative)
///   primary := number | 'xi1' | 'xi2' | 'xi3' | 'rho'
///            | '(' expr ')' | 'radial' '(' expr ')' | 'catalog:' name
///
/// Expressions in xi_k are polynomials (non-negative integer exponents, division
/// by constants only). Expressions in rho define a radial symbol f(|xi|); integer
/// powers give an exact polynomial profile, anything else is evaluated with
/// forward-mode second-order jets. `catalog:<name>` must be the whole input.
///
/// `dimension` = 0 infers it: the largest xi index used, or 2 for radial symbols.
/// Throws ParseError with the character offset on malformed input.
Symbol parse_symbol(const std::string& text, int dimension = 0);

}  // namespace smoothlab
