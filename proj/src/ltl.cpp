#include "habs/ltl.hpp"

#include <stdexcept>

namespace habs {

int Alphabet::mode_index(const std::string& name) const {
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (modes[i] == name) return static_cast<int>(i);
  return -1;
}

int Alphabet::label_index(const std::string& name) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

LtlPtr make(LtlOp op, LtlPtr a = nullptr, LtlPtr b = nullptr) {
  auto node = std::make_shared<LtlNode>();
  node->op = op;
  node->a = std::move(a);
  node->b = std::move(b);
  return node;
}

}  // namespace

LtlPtr ltl_true() {
  static const LtlPtr v = make(LtlOp::tt);
  return v;
}

LtlPtr ltl_false() {
  static const LtlPtr v = make(LtlOp::ff);
  return v;
}

LtlPtr ltl_atom(std::int32_t mode, std::int32_t label) {
  if (mode < 0 || label < 0) throw std::invalid_argument("atom indices must be non-negative");
  auto node = std::make_shared<LtlNode>();
  node->op = LtlOp::atom;
  node->mode = mode;
  node->label = label;
  return node;
}

LtlPtr ltl_not(LtlPtr a) { return make(LtlOp::negation, std::move(a)); }
LtlPtr ltl_and(LtlPtr a, LtlPtr b) { return make(LtlOp::conj, std::move(a), std::move(b)); }
LtlPtr ltl_or(LtlPtr a, LtlPtr b) { return make(LtlOp::disj, std::move(a), std::move(b)); }
LtlPtr ltl_next(LtlPtr a) { return make(LtlOp::next, std::move(a)); }
LtlPtr ltl_until(LtlPtr a, LtlPtr b) { return make(LtlOp::until, std::move(a), std::move(b)); }
LtlPtr ltl_release(LtlPtr a, LtlPtr b) { return make(LtlOp::release, std::move(a), std::move(b)); }

namespace {

LtlPtr nnf(const LtlPtr& phi, bool negated) {
  switch (phi->op) {
    case LtlOp::tt:
      return negated ? ltl_false() : phi;
    case LtlOp::ff:
      return negated ? ltl_true() : phi;
    case LtlOp::atom:
      return negated ? ltl_not(phi) : phi;
    case LtlOp::negation:
      return nnf(phi->a, !negated);
    case LtlOp::conj:
      return negated ? ltl_or(nnf(phi->a, true), nnf(phi->b, true))
                     : ltl_and(nnf(phi->a, false), nnf(phi->b, false));
    case LtlOp::disj:
      return negated ? ltl_and(nnf(phi->a, true), nnf(phi->b, true))
                     : ltl_or(nnf(phi->a, false), nnf(phi->b, false));
    case LtlOp::next:
      return ltl_next(nnf(phi->a, negated));
    case LtlOp::until:
      return negated ? ltl_release(nnf(phi->a, true), nnf(phi->b, true))
                     : ltl_until(nnf(phi->a, false), nnf(phi->b, false));
    case LtlOp::release:
      return negated ? ltl_until(nnf(phi->a, true), nnf(phi->b, true))
                     : ltl_release(nnf(phi->a, false), nnf(phi->b, false));
  }
  throw std::logic_error("unreachable");
}

}  // namespace

LtlPtr to_nnf(const LtlPtr& phi) { return nnf(phi, false); }

namespace {

// Parenthesizes every binary operator, so precedence never matters here.
void print(const LtlPtr& phi, const Alphabet& alpha, std::string& out) {
  switch (phi->op) {
    case LtlOp::tt:
      out += "true";
      return;
    case LtlOp::ff:
      out += "false";
      return;
    case LtlOp::atom:
      out += "(" + alpha.modes.at(phi->mode) + "," + alpha.labels.at(phi->label) + ")";
      return;
    case LtlOp::negation:
      out += "!";
      print(phi->a, alpha, out);
      return;
    case LtlOp::next:
      out += "X ";
      print(phi->a, alpha, out);
      return;
    case LtlOp::conj:
    case LtlOp::disj:
    case LtlOp::until:
    case LtlOp::release: {
      const char* sep = phi->op == LtlOp::conj    ? " & "
                        : phi->op == LtlOp::disj  ? " | "
                        : phi->op == LtlOp::until ? " U "
                                                  : " R ";
      out += "(";
      print(phi->a, alpha, out);
      out += sep;
      print(phi->b, alpha, out);
      out += ")";
      return;
    }
  }
}

}  // namespace

std::string ltl_to_string(const LtlPtr& phi, const Alphabet& alphabet) {
  std::string out;
  print(phi, alphabet, out);
  return out;
}

}  // namespace habs
