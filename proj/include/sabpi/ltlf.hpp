#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sabpi {

/// A set of atomic propositions, one bit per AP index (|AP| <= 16).
using ApSet = std::uint32_t;

/// A finite word over 2^AP.
using Word = std::vector<ApSet>;

enum class LtlfOp {
  True,
  False,
  Atom,
  Not,
  And,
  Or,
  Implies,
  Next,
  Until,
  Eventually,
  Globally,
};

/// Expression tree for an LTLf formula. Derived operators (And, Implies,
/// Eventually, Globally, False) are kept as-is for display and normalized to
/// the core grammar (True, Atom, Not, Or, Next, Until) on demand.
struct LtlfFormula {
  LtlfOp op = LtlfOp::True;
  std::string atom;     // Atom only
  int atom_index = -1;  // index into the declared AP list
  std::vector<LtlfFormula> children;

  static LtlfFormula constant(bool v);
  static LtlfFormula make_atom(std::string name, int index);
  static LtlfFormula unary(LtlfOp op, LtlfFormula child);
  static LtlfFormula binary(LtlfOp op, LtlfFormula lhs, LtlfFormula rhs);
};

struct LtlfParseError : std::runtime_error {
  LtlfParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)),
        offset(offset) {}
  std::size_t offset;
};

/// Parses the infix grammar:
///   implies := or ('->' implies)?
///   or      := and ('|' and)*
///   and     := until ('&' until)*
///   until   := unary ('U' until)?
///   unary   := ('!' | 'X' | 'F' | 'G') unary | primary
///   primary := '(' implies ')' | 'true' | 'false' | atom
/// Atom names must appear in `ap`; violations throw LtlfParseError.
LtlfFormula parse_ltlf(const std::string& text, const std::vector<std::string>& ap);

/// Rewrites to the core grammar: True, Atom, Not, Or, Next, Until.
LtlfFormula normalize(const LtlfFormula& f);

/// Direct recursive LTLf semantics on a nonempty finite word, evaluated from
/// position `pos`. Strong Next: X phi requires a successor position.
bool evaluate_trace(const LtlfFormula& f, const Word& word, std::size_t pos = 0);

std::string to_string(const LtlfFormula& f);

/// Structural key usable for deduplication.
std::string structural_key(const LtlfFormula& f);

}  // namespace sabpi
