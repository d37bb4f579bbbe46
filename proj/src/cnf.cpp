#include <cstdlib>
#include <stdexcept>
#include <string>

#include "habs/cnf.hpp"

namespace habs {

void validate_cnf(const CnfFormula& cnf) {
  if (cnf.num_vars < 0) throw std::invalid_argument("cnf: negative variable count");
  for (const auto& clause : cnf.clauses) {
    if (clause.empty()) throw std::invalid_argument("cnf: empty clause");
    for (int lit : clause) {
      if (lit == 0) throw std::invalid_argument("cnf: zero literal");
      if (std::abs(lit) > cnf.num_vars)
        throw std::invalid_argument("cnf: literal " + std::to_string(lit) +
                                    " exceeds variable count " + std::to_string(cnf.num_vars));
    }
  }
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string dimacs_export(const CnfFormula& cnf) {
  validate_cnf(cnf);
  static const char* digits = "0123456789abcdef";
  std::string hex(16, '0');
  std::uint64_t h = fnv1a64(cnf.var_map_note);
  for (int i = 15; i >= 0; --i, h >>= 4) hex[static_cast<std::size_t>(i)] = digits[h & 0xf];

  std::string out;
  out.reserve(32 + cnf.clauses.size() * 16);
  out += "c vmap " + hex + "\n";
  out += "p cnf " + std::to_string(cnf.num_vars) + " " + std::to_string(cnf.clauses.size()) + "\n";
  for (const auto& clause : cnf.clauses) {
    for (int lit : clause) {
      out += std::to_string(lit);
      out += ' ';
    }
    out += "0\n";
  }
  return out;
}

}  // namespace habs
