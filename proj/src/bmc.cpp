#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "habs/bmc.hpp"

namespace habs {

namespace {

constexpr int lit_true = 1;
constexpr int lit_false = -1;

/// Tseitin gate factory with structural hashing and constant folding. Gates
/// carry full (two-sided) equivalences, so in any model every gate variable
/// equals the truth value of its definition; the decoder relies on that.
class GateBuilder {
 public:
  explicit GateBuilder(CnfFormula& cnf) : cnf_(cnf) {}

  int mk_or(std::vector<int> kids) {
    std::vector<int> flat;
    for (int kid : kids) {
      if (kid == lit_true) return lit_true;
      if (kid != lit_false) flat.push_back(kid);
    }
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
    for (std::size_t i = 0; i + 1 < flat.size(); ++i)
      if (flat[i] == -flat[i + 1]) return lit_true;
    if (flat.empty()) return lit_false;
    if (flat.size() == 1) return flat.front();

    std::string key = "|";
    for (int kid : flat) key += std::to_string(kid) + ",";
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    const int g = ++cnf_.num_vars;
    std::vector<int> def{-g};
    def.insert(def.end(), flat.begin(), flat.end());
    cnf_.clauses.push_back(std::move(def));
    for (int kid : flat) cnf_.clauses.push_back({g, -kid});
    cache_.emplace(std::move(key), g);
    return g;
  }

  int mk_and(std::vector<int> kids) {
    for (int& kid : kids) kid = -kid;
    return -mk_or(std::move(kids));
  }

 private:
  CnfFormula& cnf_;
  std::unordered_map<std::string, int> cache_;
};

/// Splits a transition-system output "mode,label" against the alphabet.
/// Tries every comma so mode names containing commas stay representable.
std::pair<int, int> parse_output_pair(const std::string& output, const Alphabet& alphabet) {
  for (std::size_t pos = output.find(','); pos != std::string::npos;
       pos = output.find(',', pos + 1)) {
    const int m = alphabet.mode_index(output.substr(0, pos));
    const int l = alphabet.label_index(output.substr(pos + 1));
    if (m >= 0 && l >= 0) return {m, l};
  }
  throw std::invalid_argument("encode_bmc: output '" + output +
                              "' does not name a (mode,label) pair of the formula alphabet");
}

class Encoder {
 public:
  Encoder(const TransitionSystem& ts, const LtlPtr& phi, const Alphabet& alphabet,
          std::uint32_t bound, std::vector<StateId> initials)
      : ts_(ts),
        k_(bound),
        S_(ts.num_states()),
        initials_(std::move(initials)),
        gb_(cnf_),
        phi_(phi),
        alphabet_(alphabet) {
    pair_of_state_.reserve(S_);
    std::vector<std::pair<int, int>> pair_of_output;
    for (const auto& label : ts.output_labels())
      pair_of_output.push_back(parse_output_pair(label, alphabet));
    for (StateId q = 0; q < S_; ++q) pair_of_state_.push_back(pair_of_output[ts.output_index(q)]);

    std::sort(initials_.begin(), initials_.end());
    initials_.erase(std::unique(initials_.begin(), initials_.end()), initials_.end());
    for (StateId q : initials_)
      if (q >= S_) throw std::invalid_argument("encode_bmc: initial state out of range");
  }

  BmcEncoding build() {
    cnf_.num_vars = 1 + static_cast<int>((k_ + 1) * S_) + static_cast<int>(k_ + 1);
    cnf_.clauses.push_back({lit_true});
    path_clauses();

    const LtlPtr psi = to_nnf(ltl_not(phi_));
    lp_memo_.resize(k_ + 1);
    std::vector<int> root_kids;
    {
      std::vector<int> no_loop;
      for (std::uint32_t j = 0; j <= k_; ++j) no_loop.push_back(-loop_lit(j));
      no_loop.push_back(nl(psi.get(), 0));
      root_kids.push_back(gb_.mk_and(std::move(no_loop)));
    }
    for (std::uint32_t ell = 0; ell <= k_; ++ell)
      root_kids.push_back(gb_.mk_and({loop_lit(ell), lp(psi.get(), 0, ell)}));
    cnf_.clauses.push_back({gb_.mk_or(std::move(root_kids))});

    BmcEncoding enc;
    enc.num_states = S_;
    enc.bound = k_;
    enc.phi = phi_;
    enc.alphabet = alphabet_;
    cnf_.var_map_note = "bmc layout v1: states=" + std::to_string(S_) +
                        " bound=" + std::to_string(k_) +
                        " property=" + ltl_to_string(phi_, alphabet_) +
                        "; var 1 constant-true; state(i,q)=2+i*states+q for steps 0..bound;" +
                        " loop(j)=2+(bound+1)*states+j; gates above";
    enc.cnf = std::move(cnf_);
    return enc;
  }

 private:
  int state_lit(std::uint32_t i, StateId q) const {
    return 2 + static_cast<int>(i * S_ + q);
  }
  int loop_lit(std::uint32_t j) const {
    return 2 + static_cast<int>((k_ + 1) * S_ + j);
  }

  void path_clauses() {
    for (std::uint32_t i = 0; i <= k_; ++i) {
      std::vector<int> alo;
      for (StateId q = 0; q < S_; ++q) alo.push_back(state_lit(i, q));
      cnf_.clauses.push_back(std::move(alo));
      for (StateId q1 = 0; q1 < S_; ++q1)
        for (StateId q2 = q1 + 1; q2 < S_; ++q2)
          cnf_.clauses.push_back({-state_lit(i, q1), -state_lit(i, q2)});
    }
    for (std::uint32_t i = 0; i < k_; ++i)
      for (StateId q = 0; q < S_; ++q) {
        const auto succ = ts_.successors(q);
        std::vector<int> clause{-state_lit(i, q)};
        for (StateId t : succ) clause.push_back(state_lit(i + 1, t));
        cnf_.clauses.push_back(std::move(clause));
      }
    // A selected loop point j forces the step after k to be step j: the
    // state at j must then be reachable from the state at k in one move.
    for (std::uint32_t j = 0; j <= k_; ++j)
      for (StateId q = 0; q < S_; ++q) {
        const auto succ = ts_.successors(q);
        std::vector<int> clause{-loop_lit(j), -state_lit(k_, q)};
        for (StateId t : succ) clause.push_back(state_lit(j, t));
        cnf_.clauses.push_back(std::move(clause));
      }
    for (std::uint32_t j1 = 0; j1 <= k_; ++j1)
      for (std::uint32_t j2 = j1 + 1; j2 <= k_; ++j2)
        cnf_.clauses.push_back({-loop_lit(j1), -loop_lit(j2)});
    if (!initials_.empty()) {
      std::vector<int> clause;
      for (StateId q : initials_) clause.push_back(state_lit(0, q));
      cnf_.clauses.push_back(std::move(clause));
    }
  }

  int atom_gate(int mode, int label, std::uint32_t i, bool negated) {
    // Under the exactly-one state constraint, the negation of an atom is the
    // disjunction of the non-matching states, keeping gates loop-free.
    std::vector<int> kids;
    for (StateId q = 0; q < S_; ++q) {
      const bool match = pair_of_state_[q].first == mode && pair_of_state_[q].second == label;
      if (match != negated) kids.push_back(state_lit(i, q));
    }
    return gb_.mk_or(std::move(kids));
  }

  // Loop-free (pessimistic) translation at step i.
  int nl(const LtlNode* n, std::uint32_t i) {
    if (auto it = nl_memo_.find(n); it != nl_memo_.end() && it->second[i] != 0)
      return it->second[i];
    int g = 0;
    switch (n->op) {
      case LtlOp::tt:
        g = lit_true;
        break;
      case LtlOp::ff:
        g = lit_false;
        break;
      case LtlOp::atom:
        g = atom_gate(n->mode, n->label, i, false);
        break;
      case LtlOp::negation:
        if (n->a->op != LtlOp::atom)
          throw std::logic_error("encode_bmc: negation above non-atom after NNF");
        g = atom_gate(n->a->mode, n->a->label, i, true);
        break;
      case LtlOp::conj:
        g = gb_.mk_and({nl(n->a.get(), i), nl(n->b.get(), i)});
        break;
      case LtlOp::disj:
        g = gb_.mk_or({nl(n->a.get(), i), nl(n->b.get(), i)});
        break;
      case LtlOp::next:
        g = i < k_ ? nl(n->a.get(), i + 1) : lit_false;
        break;
      case LtlOp::until: {
        const int tail = i < k_ ? nl(n, i + 1) : lit_false;
        g = gb_.mk_or({nl(n->b.get(), i), gb_.mk_and({nl(n->a.get(), i), tail})});
        break;
      }
      case LtlOp::release: {
        const int tail = i < k_ ? nl(n, i + 1) : lit_false;
        g = gb_.mk_and({nl(n->b.get(), i), gb_.mk_or({nl(n->a.get(), i), tail})});
        break;
      }
    }
    auto& slots = nl_memo_[n];
    if (slots.empty()) slots.assign(k_ + 1, 0);
    slots[i] = g;
    return g;
  }

  // Lasso translation at step i with the loop closing from k back to ell.
  // Until and release expand to the quadratic sums over explicit positions,
  // which is exact for infinite-word semantics on the induced lasso.
  int lp(const LtlNode* n, std::uint32_t i, std::uint32_t ell) {
    if (auto it = lp_memo_[ell].find(n); it != lp_memo_[ell].end() && it->second[i] != 0)
      return it->second[i];
    int g = 0;
    switch (n->op) {
      case LtlOp::tt:
        g = lit_true;
        break;
      case LtlOp::ff:
        g = lit_false;
        break;
      case LtlOp::atom:
        g = atom_gate(n->mode, n->label, i, false);
        break;
      case LtlOp::negation:
        if (n->a->op != LtlOp::atom)
          throw std::logic_error("encode_bmc: negation above non-atom after NNF");
        g = atom_gate(n->a->mode, n->a->label, i, true);
        break;
      case LtlOp::conj:
        g = gb_.mk_and({lp(n->a.get(), i, ell), lp(n->b.get(), i, ell)});
        break;
      case LtlOp::disj:
        g = gb_.mk_or({lp(n->a.get(), i, ell), lp(n->b.get(), i, ell)});
        break;
      case LtlOp::next:
        g = lp(n->a.get(), i < k_ ? i + 1 : ell, ell);
        break;
      case LtlOp::until: {
        std::vector<int> any;
        for (std::uint32_t j = i; j <= k_; ++j) {
          std::vector<int> all{lp(n->b.get(), j, ell)};
          for (std::uint32_t t = i; t < j; ++t) all.push_back(lp(n->a.get(), t, ell));
          any.push_back(gb_.mk_and(std::move(all)));
        }
        for (std::uint32_t j = ell; j < i; ++j) {
          std::vector<int> all{lp(n->b.get(), j, ell)};
          for (std::uint32_t t = i; t <= k_; ++t) all.push_back(lp(n->a.get(), t, ell));
          for (std::uint32_t t = ell; t < j; ++t) all.push_back(lp(n->a.get(), t, ell));
          any.push_back(gb_.mk_and(std::move(all)));
        }
        g = gb_.mk_or(std::move(any));
        break;
      }
      case LtlOp::release: {
        std::vector<int> any;
        {
          std::vector<int> all;
          for (std::uint32_t j = std::min(i, ell); j <= k_; ++j)
            all.push_back(lp(n->b.get(), j, ell));
          any.push_back(gb_.mk_and(std::move(all)));
        }
        for (std::uint32_t j = i; j <= k_; ++j) {
          std::vector<int> all{lp(n->a.get(), j, ell)};
          for (std::uint32_t t = i; t <= j; ++t) all.push_back(lp(n->b.get(), t, ell));
          any.push_back(gb_.mk_and(std::move(all)));
        }
        for (std::uint32_t j = ell; j < i; ++j) {
          std::vector<int> all{lp(n->a.get(), j, ell)};
          for (std::uint32_t t = i; t <= k_; ++t) all.push_back(lp(n->b.get(), t, ell));
          for (std::uint32_t t = ell; t <= j; ++t) all.push_back(lp(n->b.get(), t, ell));
          any.push_back(gb_.mk_and(std::move(all)));
        }
        g = gb_.mk_or(std::move(any));
        break;
      }
    }
    auto& slots = lp_memo_[ell][n];
    if (slots.empty()) slots.assign(k_ + 1, 0);
    slots[i] = g;
    return g;
  }

  const TransitionSystem& ts_;
  std::uint32_t k_;
  std::uint32_t S_;
  std::vector<StateId> initials_;
  CnfFormula cnf_;
  GateBuilder gb_;
  LtlPtr phi_;
  Alphabet alphabet_;
  std::vector<std::pair<int, int>> pair_of_state_;
  std::unordered_map<const LtlNode*, std::vector<int>> nl_memo_;
  std::vector<std::unordered_map<const LtlNode*, std::vector<int>>> lp_memo_;
};

}  // namespace

BmcEncoding encode_bmc(const TransitionSystem& ts, const LtlPtr& phi, const Alphabet& alphabet,
                       std::uint32_t bound, const std::vector<StateId>& initial_states) {
  if (!phi) throw std::invalid_argument("encode_bmc: null formula");
  if (bound < 1) throw std::invalid_argument("encode_bmc: bound must be at least 1");
  Encoder encoder(ts, phi, alphabet, bound, initial_states);
  return encoder.build();
}

std::vector<StateId> decode_state_path(const BmcEncoding& enc, const std::vector<bool>& assignment) {
  if (assignment.size() < static_cast<std::size_t>(enc.cnf.num_vars) + 1)
    throw std::invalid_argument("decode: assignment shorter than the variable count");
  std::vector<StateId> path;
  for (std::uint32_t i = 0; i <= enc.bound; ++i) {
    int found = -1;
    for (StateId q = 0; q < enc.num_states; ++q) {
      if (!assignment[static_cast<std::size_t>(enc.state_var(i, q))]) continue;
      if (found >= 0)
        throw std::logic_error("decode: one-hot violated at step " + std::to_string(i));
      found = static_cast<int>(q);
    }
    if (found < 0) throw std::logic_error("decode: no state set at step " + std::to_string(i));
    path.push_back(static_cast<StateId>(found));
  }
  return path;
}

std::optional<std::uint32_t> decode_loop_back(const BmcEncoding& enc,
                                              const std::vector<bool>& assignment) {
  if (assignment.size() < static_cast<std::size_t>(enc.cnf.num_vars) + 1)
    throw std::invalid_argument("decode: assignment shorter than the variable count");
  std::optional<std::uint32_t> loop;
  for (std::uint32_t j = 0; j <= enc.bound; ++j) {
    if (!assignment[static_cast<std::size_t>(enc.loop_var(j))]) continue;
    if (loop) throw std::logic_error("decode: multiple loop selectors set");
    loop = j;
  }
  return loop;
}

Trace decode_witness(const BmcEncoding& enc, const std::vector<bool>& assignment,
                     const TransitionSystem& ts) {
  if (ts.num_states() != enc.num_states)
    throw std::invalid_argument("decode: system does not match the encoding");
  const auto path = decode_state_path(enc, assignment);
  const auto loop = decode_loop_back(enc, assignment);
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    if (!ts.has_edge(path[i], path[i + 1]))
      throw std::logic_error("decode: witness step " + std::to_string(i) +
                             " is not a transition of the system");
  if (loop && !ts.has_edge(path.back(), path[*loop]))
    throw std::logic_error("decode: witness loop edge is not a transition of the system");

  Trace trace;
  trace.loop_back = loop;
  for (StateId q : path) {
    const auto [m, l] = parse_output_pair(ts.output(q), enc.alphabet);
    trace.steps.push_back({static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(l)});
  }
  if (!eval_trace(ltl_not(enc.phi), trace))
    throw std::logic_error("decode: witness does not violate the property");
  return trace;
}

}  // namespace habs
