#include "support/oracles.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace testsup {

habs::TransitionSystem random_ts(Rng& rng, std::uint32_t num_states,
                                 const std::vector<std::string>& outputs_pool, double edge_prob,
                                 bool force_total) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_out(0, outputs_pool.size() - 1);
  std::uniform_int_distribution<std::uint32_t> pick_state(0, num_states - 1);

  std::vector<std::string> names, outputs;
  for (std::uint32_t s = 0; s < num_states; ++s) {
    names.push_back("s" + std::to_string(s));
    outputs.push_back(outputs_pool[pick_out(rng)]);
  }
  std::vector<habs::Edge> edges;
  std::vector<char> has_succ(num_states, 0);
  for (std::uint32_t i = 0; i < num_states; ++i)
    for (std::uint32_t j = 0; j < num_states; ++j)
      if (coin(rng) < edge_prob) {
        edges.push_back({i, j});
        has_succ[i] = 1;
      }
  if (force_total)
    for (std::uint32_t i = 0; i < num_states; ++i)
      if (!has_succ[i]) edges.push_back({i, pick_state(rng)});
  return habs::TransitionSystem(std::move(names), std::move(outputs), std::move(edges));
}

habs::CnfFormula random_cnf(Rng& rng, int num_vars, int num_clauses, int width) {
  std::uniform_int_distribution<int> pick_var(1, num_vars);
  std::uniform_int_distribution<int> pick_sign(0, 1);
  habs::CnfFormula cnf;
  cnf.num_vars = num_vars;
  for (int c = 0; c < num_clauses; ++c) {
    std::vector<int> clause;
    while (static_cast<int>(clause.size()) < width) {
      const int v = pick_var(rng);
      bool dup = false;
      for (int lit : clause) dup = dup || std::abs(lit) == v;
      if (!dup) clause.push_back(pick_sign(rng) ? v : -v);
    }
    cnf.clauses.push_back(std::move(clause));
  }
  return cnf;
}

habs::LtlPtr random_ltl(Rng& rng, const habs::Alphabet& alphabet, int size) {
  std::uniform_int_distribution<int> pick_mode(0, static_cast<int>(alphabet.modes.size()) - 1);
  std::uniform_int_distribution<int> pick_label(0, static_cast<int>(alphabet.labels.size()) - 1);
  std::uniform_int_distribution<int> pick_op(0, 9);
  std::function<habs::LtlPtr(int)> gen = [&](int budget) -> habs::LtlPtr {
    if (budget <= 0) {
      const int leaf = pick_op(rng);
      if (leaf == 0) return habs::ltl_true();
      if (leaf == 1) return habs::ltl_false();
      return habs::ltl_atom(pick_mode(rng), pick_label(rng));
    }
    switch (pick_op(rng)) {
      case 0:
      case 1:
        return habs::ltl_not(gen(budget - 1));
      case 2:
      case 3:
        return habs::ltl_or(gen(budget / 2), gen(budget / 2));
      case 4:
        return habs::ltl_and(gen(budget / 2), gen(budget / 2));
      case 5:
      case 6:
        return habs::ltl_next(gen(budget - 1));
      case 7:
      case 8:
        return habs::ltl_until(gen(budget / 2), gen(budget / 2));
      default:
        return habs::ltl_atom(pick_mode(rng), pick_label(rng));
    }
  };
  return gen(size);
}

std::optional<std::vector<bool>> brute_force_sat(const habs::CnfFormula& cnf) {
  if (cnf.num_vars > 24) throw std::invalid_argument("brute_force_sat: too many variables");
  const std::uint64_t total = 1ull << cnf.num_vars;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    std::vector<bool> assignment(static_cast<std::size_t>(cnf.num_vars) + 1, false);
    for (int v = 1; v <= cnf.num_vars; ++v) assignment[v] = (mask >> (v - 1)) & 1u;
    bool ok = true;
    for (const auto& clause : cnf.clauses) ok = ok && clause_satisfied(clause, assignment);
    if (ok) return assignment;
  }
  return std::nullopt;
}

bool clause_satisfied(const std::vector<int>& clause, const std::vector<bool>& assignment) {
  for (int lit : clause) {
    const int v = std::abs(lit);
    if (assignment[v] == (lit > 0)) return true;
  }
  return false;
}

namespace {

// Shared recursive core of the two naive evaluators. Positions are always
// canonical (strictly inside the trace); `next_pos` returns the canonical
// successor or nullopt past a loop-free end.
struct NaiveEval {
  const std::vector<habs::TraceStep>& steps;
  std::optional<std::uint32_t> loop;
  std::unordered_map<const habs::LtlNode*, std::vector<signed char>> memo;
  std::unordered_map<const habs::LtlNode*, std::vector<signed char>> memo_neg;

  std::uint32_t len() const { return static_cast<std::uint32_t>(steps.size()); }
  std::optional<std::uint32_t> next_pos(std::uint32_t i) const {
    if (i + 1 < len()) return i + 1;
    return loop;
  }
  // Every canonical position reachable from i is visited within this many
  // forward steps (all of the trace plus one full period).
  std::uint32_t horizon() const { return 2 * len() + 2; }

  bool eval(const habs::LtlPtr& phi, std::uint32_t pos) {
    auto& slot = memo[phi.get()];
    if (slot.empty()) slot.assign(len(), -1);
    if (slot[pos] >= 0) return slot[pos] != 0;
    const bool value = compute(phi, pos);
    slot[pos] = value ? 1 : 0;
    return value;
  }

  bool compute(const habs::LtlPtr& phi, std::uint32_t pos) {
    switch (phi->op) {
      case habs::LtlOp::tt:
        return true;
      case habs::LtlOp::ff:
        return false;
      case habs::LtlOp::atom:
        return steps[pos].mode == static_cast<std::uint32_t>(phi->mode) &&
               steps[pos].label == static_cast<std::uint32_t>(phi->label);
      case habs::LtlOp::negation:
        // Exact semantics on a lasso is closed under complement. On a
        // loop-free trace the pessimistic semantics is not, so negation is
        // pushed inward through the duals instead (matching an evaluator
        // that rewrites to negation normal form up front).
        return loop ? !eval(phi->a, pos) : evalneg(phi->a, pos);
      case habs::LtlOp::conj:
        return eval(phi->a, pos) && eval(phi->b, pos);
      case habs::LtlOp::disj:
        return eval(phi->a, pos) || eval(phi->b, pos);
      case habs::LtlOp::next: {
        const auto nxt = next_pos(pos);
        return nxt ? eval(phi->a, *nxt) : false;
      }
      case habs::LtlOp::until: {
        // Forward scan: succeed at the first b, fail at the first !a.
        std::optional<std::uint32_t> p = pos;
        for (std::uint32_t step = 0; step <= horizon() && p; ++step) {
          if (eval(phi->b, *p)) return true;
          if (!eval(phi->a, *p)) return false;
          p = next_pos(*p);
        }
        return false;
      }
      case habs::LtlOp::release: {
        // Forward scan: fail at the first !b, succeed at the first a (with b
        // checked first). Surviving the whole horizon means b holds on every
        // reachable position; that is a success only on a lasso.
        std::optional<std::uint32_t> p = pos;
        for (std::uint32_t step = 0; step <= horizon() && p; ++step) {
          if (!eval(phi->b, *p)) return false;
          if (eval(phi->a, *p)) return true;
          p = next_pos(*p);
        }
        return loop.has_value();
      }
    }
    throw std::logic_error("naive eval: bad op");
  }

  // Pessimistic loop-free value of "not phi" at pos, by dualization:
  // negation flips atoms in place, swaps and/or, keeps next strong (false
  // past the end), and exchanges until with release.
  bool evalneg(const habs::LtlPtr& phi, std::uint32_t pos) {
    auto& slot = memo_neg[phi.get()];
    if (slot.empty()) slot.assign(len(), -1);
    if (slot[pos] >= 0) return slot[pos] != 0;
    const bool value = compute_neg(phi, pos);
    slot[pos] = value ? 1 : 0;
    return value;
  }

  bool compute_neg(const habs::LtlPtr& phi, std::uint32_t pos) {
    switch (phi->op) {
      case habs::LtlOp::tt:
        return false;
      case habs::LtlOp::ff:
        return true;
      case habs::LtlOp::atom:
        return !(steps[pos].mode == static_cast<std::uint32_t>(phi->mode) &&
                 steps[pos].label == static_cast<std::uint32_t>(phi->label));
      case habs::LtlOp::negation:
        return eval(phi->a, pos);
      case habs::LtlOp::conj:
        return evalneg(phi->a, pos) || evalneg(phi->b, pos);
      case habs::LtlOp::disj:
        return evalneg(phi->a, pos) && evalneg(phi->b, pos);
      case habs::LtlOp::next: {
        const auto nxt = next_pos(pos);
        return nxt ? evalneg(phi->a, *nxt) : false;
      }
      case habs::LtlOp::until: {
        // not (a U b) = (not a) R (not b): b must stay refuted until the
        // refutation of a discharges the obligation inside the trace. Both
        // sides go through the same dualized evaluation: the pessimistic
        // value of "not psi" is not the complement of psi's value.
        std::optional<std::uint32_t> p = pos;
        for (std::uint32_t step = 0; step <= horizon() && p; ++step) {
          if (!evalneg(phi->b, *p)) return false;
          if (evalneg(phi->a, *p)) return true;
          p = next_pos(*p);
        }
        return loop.has_value();
      }
      case habs::LtlOp::release: {
        // not (a R b) = (not a) U (not b): the payoff must occur inside.
        std::optional<std::uint32_t> p = pos;
        for (std::uint32_t step = 0; step <= horizon() && p; ++step) {
          if (evalneg(phi->b, *p)) return true;
          if (!evalneg(phi->a, *p)) return false;
          p = next_pos(*p);
        }
        return false;
      }
    }
    throw std::logic_error("naive eval: bad op");
  }
};

}  // namespace

bool naive_eval_finite(const habs::LtlPtr& phi, const std::vector<habs::TraceStep>& steps) {
  if (steps.empty()) throw std::invalid_argument("naive eval: empty trace");
  NaiveEval ev{steps, std::nullopt, {}};
  return ev.eval(phi, 0);
}

bool naive_eval_lasso(const habs::LtlPtr& phi, const std::vector<habs::TraceStep>& steps,
                      std::uint32_t loop_back) {
  if (steps.empty() || loop_back >= steps.size())
    throw std::invalid_argument("naive eval: bad lasso");
  NaiveEval ev{steps, loop_back, {}};
  return ev.eval(phi, 0);
}

bool naive_eval(const habs::LtlPtr& phi, const habs::Trace& trace) {
  return trace.loop_back ? naive_eval_lasso(phi, trace.steps, *trace.loop_back)
                         : naive_eval_finite(phi, trace.steps);
}

habs::TraceStep parse_output(const std::string& output, const habs::Alphabet& alphabet) {
  for (std::size_t cut = 0; cut < output.size(); ++cut) {
    if (output[cut] != ',') continue;
    const int mi = alphabet.mode_index(output.substr(0, cut));
    const int li = alphabet.label_index(output.substr(cut + 1));
    if (mi >= 0 && li >= 0)
      return {static_cast<std::uint32_t>(mi), static_cast<std::uint32_t>(li)};
  }
  throw std::invalid_argument("output '" + output + "' is not a (mode,label) pair");
}

bool bmc_exists_counterexample(const habs::TransitionSystem& ts, const habs::LtlPtr& phi,
                               const habs::Alphabet& alphabet, std::uint32_t bound,
                               const std::vector<habs::StateId>& initial_states) {
  const habs::LtlPtr bad = habs::ltl_not(phi);
  std::vector<habs::StateId> starts = initial_states;
  if (starts.empty())
    for (habs::StateId s = 0; s < ts.num_states(); ++s) starts.push_back(s);

  std::vector<habs::StateId> path;
  std::vector<habs::TraceStep> trace;
  std::function<bool()> extend = [&]() -> bool {
    if (path.size() == bound + 1u) {
      if (naive_eval_finite(bad, trace)) return true;
      for (std::uint32_t l = 0; l <= bound; ++l)
        if (ts.has_edge(path.back(), path[l]) && naive_eval_lasso(bad, trace, l)) return true;
      return false;
    }
    for (habs::StateId next : ts.successors(path.back())) {
      path.push_back(next);
      trace.push_back(parse_output(ts.output(next), alphabet));
      if (extend()) return true;
      path.pop_back();
      trace.pop_back();
    }
    return false;
  };

  for (habs::StateId s : starts) {
    path.assign(1, s);
    trace.assign(1, parse_output(ts.output(s), alphabet));
    if (extend()) return true;
  }
  return false;
}

std::vector<double> chain_flow(const std::vector<double>& x0, double u, double t) {
  const std::size_t n = x0.size();
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0, power = 1.0, factorial = 1.0;
    for (std::size_t m = 0; j + m < n; ++m) {
      if (m > 0) {
        power *= t;
        factorial *= static_cast<double>(m);
      }
      acc += x0[j + m] * power / factorial;
    }
    const std::size_t top = n - j;  // u enters at derivative order n - j
    power *= t;
    factorial *= static_cast<double>(top);
    acc += u * power / factorial;
    x[j] = acc;
  }
  return x;
}

namespace {

bool inside_box(const habs::BnfChain& chain, const std::vector<double>& x) {
  if (x[0] < chain.x1_lo || x[0] >= chain.x1_hi) return false;
  for (std::size_t j = 1; j < x.size(); ++j)
    if (std::abs(x[j]) > chain.orthant_bound) return false;
  return true;
}

int state_distance(const habs::SliceState& a, const habs::SliceState& b) {
  int d = a.i == b.i ? 0 : 1;
  for (std::size_t j = 0; j < a.s.size(); ++j) d += a.s[j] != b.s[j];
  return d;
}

}  // namespace

std::optional<habs::SliceState> first_crossing(const habs::BnfChain& chain,
                                               const std::vector<double>& x0, double u,
                                               double horizon) {
  const habs::SliceState start = bnf_slice_partition(chain, x0);
  const int grid = 4096;
  double t_in = 0.0;  // flow at t_in is still in the start state
  for (int g = 1; g <= grid; ++g) {
    const double t = horizon * g / grid;
    const auto x = chain_flow(x0, u, t);
    if (!inside_box(chain, x)) {
      // Left the domain box: bisect to check no interior crossing hides in
      // the last grid interval, then end the trial.
      double lo = t_in, hi = t;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto xm = chain_flow(x0, u, mid);
        if (inside_box(chain, xm) && state_distance(bnf_slice_partition(chain, xm), start) == 0)
          lo = mid;
        else
          hi = mid;
      }
      const auto xh = chain_flow(x0, u, hi);
      if (!inside_box(chain, xh)) return std::nullopt;
      const habs::SliceState after = bnf_slice_partition(chain, xh);
      return state_distance(after, start) == 1 ? std::optional(after) : std::nullopt;
    }
    const habs::SliceState at_t = bnf_slice_partition(chain, x);
    if (state_distance(at_t, start) == 0) {
      t_in = t;
      continue;
    }
    // Crossed at least one boundary inside (t_in, t]: bisect down to it.
    double lo = t_in, hi = t;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto xm = chain_flow(x0, u, mid);
      if (!inside_box(chain, xm)) {
        hi = mid;
        continue;
      }
      if (state_distance(bnf_slice_partition(chain, xm), start) == 0)
        lo = mid;
      else
        hi = mid;
    }
    const auto xh = chain_flow(x0, u, hi);
    if (!inside_box(chain, xh)) return std::nullopt;
    const habs::SliceState after = bnf_slice_partition(chain, xh);
    return state_distance(after, start) == 1 ? std::optional(after) : std::nullopt;
  }
  return std::nullopt;
}

std::vector<double> sample_in_cell(Rng& rng, const habs::BnfChain& chain,
                                   const habs::SliceState& state) {
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  std::vector<double> x(chain.n);
  x[0] = chain.x1_lo + (state.i + unit(rng)) * chain.epsilon;
  for (std::uint32_t j = 1; j < chain.n; ++j) {
    const double magnitude = unit(rng) * chain.orthant_bound;
    x[j] = state.s[j - 1] > 0 ? magnitude : -magnitude;
  }
  return x;
}

bool edge_has_witness(Rng& rng, const habs::BnfChain& chain, const habs::SliceState& from,
                      const habs::SliceState& to, int max_trials) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u_max = 4.0 * std::max(chain.orthant_bound, chain.epsilon);
  const double horizon = 4.0 * (chain.epsilon + chain.orthant_bound) / u_max + 1.0;

  // Which partition coordinate must move?
  const bool slice_move = from.i != to.i;
  std::size_t flip = 0;  // index into the sign vector when !slice_move
  for (std::size_t j = 0; j < from.s.size(); ++j)
    if (from.s[j] != to.s[j]) flip = j;

  for (int trial = 0; trial < max_trials; ++trial) {
    std::vector<double> x = sample_in_cell(rng, chain, from);
    double u = (unit(rng) < 0.5 ? -1.0 : 1.0) * u_max;
    if (slice_move) {
      // Start close to the shared slice face so the x1 motion wins the race.
      const double face = chain.x1_lo + std::max(from.i, to.i) * chain.epsilon;
      const double inset = (0.02 + 0.1 * unit(rng)) * chain.epsilon;
      x[0] = to.i > from.i ? face - inset : face + inset;
    } else {
      // Start with the flipping coordinate near zero; drive its derivative
      // toward the target sign (directly via u when it is the last one).
      x[flip + 1] = from.s[flip] * (0.01 + 0.05 * unit(rng)) * chain.orthant_bound;
      if (flip + 2 < chain.n)
        x[flip + 2] = to.s[flip] * (0.3 + 0.5 * unit(rng)) * chain.orthant_bound;
      else
        u = to.s[flip] * u_max;
    }
    const habs::SliceState start = bnf_slice_partition(chain, x);
    if (start.i != from.i || start.s != from.s) continue;
    const auto hit = first_crossing(chain, x, u, horizon);
    if (hit && hit->i == to.i && hit->s == to.s) return true;
  }
  return false;
}

int run_command(const std::string& command_line, std::string& output) {
  output.clear();
  FILE* pipe = popen((command_line + " 2>&1").c_str(), "r");
  if (!pipe) return -1;
  char buffer[4096];
  std::size_t got = 0;
  while ((got = fread(buffer, 1, sizeof buffer, pipe)) > 0) output.append(buffer, got);
  const int status = pclose(pipe);
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace testsup
