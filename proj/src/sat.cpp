#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "habs/sat.hpp"

namespace habs {

namespace {

// Internal literal encoding: 2*var + (negative ? 1 : 0), variables 0-based.
using Lit = std::int32_t;

Lit mk_lit(int var, bool negative) { return 2 * var + (negative ? 1 : 0); }
Lit negate_lit(Lit l) { return l ^ 1; }
int var_of(Lit l) { return l >> 1; }
bool is_negative(Lit l) { return (l & 1) != 0; }

enum class Val : std::int8_t { unassigned = 0, yes = 1, no = 2 };

struct Watcher {
  std::uint32_t clause;
  Lit blocker;
};

constexpr int no_reason = -1;

class Solver {
 public:
  explicit Solver(const CnfFormula& cnf) : n_(cnf.num_vars) {
    assigns_.assign(n_, Val::unassigned);
    saved_phase_.assign(n_, 0);
    level_.assign(n_, 0);
    reason_.assign(n_, no_reason);
    activity_.assign(n_, 0.0);
    seen_.assign(n_, 0);
    watches_.assign(2 * static_cast<std::size_t>(n_), {});
    heap_.reserve(n_);
    pos_.assign(n_, -1);
    for (int v = 0; v < n_; ++v) {
      pos_[v] = static_cast<int>(heap_.size());
      heap_.push_back(v);
    }

    // Register all watches before assigning anything, so no watched literal
    // is already false; unit clauses are enqueued afterwards.
    std::vector<Lit> units;
    std::vector<Lit> c;
    for (const auto& clause : cnf.clauses) {
      c.clear();
      for (int lit : clause) c.push_back(mk_lit(std::abs(lit) - 1, lit < 0));
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
      bool tautology = false;
      for (std::size_t i = 0; i + 1 < c.size(); ++i)
        if (c[i] == negate_lit(c[i + 1])) tautology = true;
      if (tautology) continue;
      if (c.empty()) {
        contradiction_ = true;
        return;
      }
      if (c.size() == 1) {
        units.push_back(c[0]);
        continue;
      }
      const auto idx = static_cast<std::uint32_t>(clauses_.size());
      clauses_.push_back(c);
      watches_[static_cast<std::size_t>(c[0])].push_back({idx, c[1]});
      watches_[static_cast<std::size_t>(c[1])].push_back({idx, c[0]});
    }
    for (Lit u : units) {
      if (value(u) == Val::no) {
        contradiction_ = true;
        return;
      }
      if (value(u) == Val::unassigned) enqueue(u, no_reason);
    }
  }

  SatResult solve(const CnfFormula& cnf, const SatOptions& opts) {
    SatResult res;
    auto finish = [&](SatStatus st) {
      res.status = st;
      res.conflicts = conflicts_;
      res.decisions = decisions_;
      res.propagations = propagations_;
      return res;
    };
    if (contradiction_) return finish(SatStatus::unsatisfiable);

    double restart_limit = 100.0;
    std::uint64_t conflicts_at_restart = 0;
    std::vector<Lit> learnt;
    for (;;) {
      const int confl = propagate();
      if (confl != no_reason) {
        ++conflicts_;
        if (decision_level() == 0) return finish(SatStatus::unsatisfiable);
        int bt_level = 0;
        analyze(confl, learnt, bt_level);
        backtrack(bt_level);
        if (learnt.size() == 1) {
          enqueue(learnt[0], no_reason);
        } else {
          const auto idx = static_cast<std::uint32_t>(clauses_.size());
          clauses_.push_back(learnt);
          watches_[static_cast<std::size_t>(learnt[0])].push_back({idx, learnt[1]});
          watches_[static_cast<std::size_t>(learnt[1])].push_back({idx, learnt[0]});
          enqueue(learnt[0], static_cast<int>(idx));
        }
        var_inc_ /= 0.95;
        if (opts.max_conflicts > 0 && conflicts_ >= opts.max_conflicts)
          return finish(SatStatus::cap_exceeded);
        if (conflicts_ - conflicts_at_restart >= static_cast<std::uint64_t>(restart_limit)) {
          backtrack(0);
          restart_limit *= 1.5;
          conflicts_at_restart = conflicts_;
        }
      } else {
        const int v = pick_branch_var();
        if (v < 0) {
          res.assignment.assign(static_cast<std::size_t>(n_) + 1, false);
          for (int w = 0; w < n_; ++w) res.assignment[w + 1] = assigns_[w] == Val::yes;
          verify_model(cnf, res.assignment);
          return finish(SatStatus::satisfiable);
        }
        ++decisions_;
        trail_lim_.push_back(trail_.size());
        enqueue(mk_lit(v, saved_phase_[v] == 0), no_reason);
      }
    }
  }

 private:
  Val value(Lit l) const {
    const Val v = assigns_[static_cast<std::size_t>(var_of(l))];
    if (v == Val::unassigned || !is_negative(l)) return v;
    return v == Val::yes ? Val::no : Val::yes;
  }

  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void enqueue(Lit p, int reason) {
    const auto v = static_cast<std::size_t>(var_of(p));
    assigns_[v] = is_negative(p) ? Val::no : Val::yes;
    saved_phase_[v] = assigns_[v] == Val::yes ? 1 : 0;
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back(p);
  }

  // Returns the index of a conflicting clause, or no_reason.
  int propagate() {
    int conflict = no_reason;
    while (qhead_ < trail_.size() && conflict == no_reason) {
      const Lit p = trail_[qhead_++];
      ++propagations_;
      const Lit false_lit = negate_lit(p);
      auto& ws = watches_[static_cast<std::size_t>(false_lit)];
      std::size_t i = 0, j = 0;
      while (i < ws.size()) {
        const Watcher w = ws[i];
        if (value(w.blocker) == Val::yes) {
          ws[j++] = ws[i++];
          continue;
        }
        auto& c = clauses_[w.clause];
        if (c[0] == false_lit) std::swap(c[0], c[1]);
        ++i;
        if (value(c[0]) == Val::yes) {
          ws[j++] = {w.clause, c[0]};
          continue;
        }
        bool rewatched = false;
        for (std::size_t t = 2; t < c.size(); ++t) {
          if (value(c[t]) != Val::no) {
            std::swap(c[1], c[t]);
            watches_[static_cast<std::size_t>(c[1])].push_back({w.clause, c[0]});
            rewatched = true;
            break;
          }
        }
        if (rewatched) continue;
        ws[j++] = {w.clause, c[0]};
        if (value(c[0]) == Val::no) {
          conflict = static_cast<int>(w.clause);
          qhead_ = trail_.size();
          while (i < ws.size()) ws[j++] = ws[i++];
        } else {
          enqueue(c[0], static_cast<int>(w.clause));
        }
      }
      ws.resize(j);
    }
    return conflict;
  }

  // First-UIP learning. learnt[0] is the asserting literal; bt_level is the
  // second-highest decision level in the clause.
  void analyze(int confl, std::vector<Lit>& learnt, int& bt_level) {
    learnt.assign(1, 0);
    int path = 0;
    Lit p = -1;
    std::size_t index = trail_.size();
    std::vector<int> to_clear;
    do {
      const auto& c = clauses_[static_cast<std::size_t>(confl)];
      for (std::size_t j = (p == -1) ? 0 : 1; j < c.size(); ++j) {
        const int v = var_of(c[j]);
        if (seen_[static_cast<std::size_t>(v)] || level_[static_cast<std::size_t>(v)] == 0)
          continue;
        seen_[static_cast<std::size_t>(v)] = 1;
        to_clear.push_back(v);
        bump(v);
        if (level_[static_cast<std::size_t>(v)] >= decision_level())
          ++path;
        else
          learnt.push_back(c[j]);
      }
      while (!seen_[static_cast<std::size_t>(var_of(trail_[--index]))]) {
      }
      p = trail_[index];
      confl = reason_[static_cast<std::size_t>(var_of(p))];
      seen_[static_cast<std::size_t>(var_of(p))] = 0;
      --path;
    } while (path > 0);
    learnt[0] = negate_lit(p);

    bt_level = 0;
    if (learnt.size() > 1) {
      std::size_t best = 1;
      for (std::size_t j = 2; j < learnt.size(); ++j)
        if (level_[static_cast<std::size_t>(var_of(learnt[j]))] >
            level_[static_cast<std::size_t>(var_of(learnt[best]))])
          best = j;
      std::swap(learnt[1], learnt[best]);
      bt_level = level_[static_cast<std::size_t>(var_of(learnt[1]))];
    }
    for (int v : to_clear) seen_[static_cast<std::size_t>(v)] = 0;
  }

  void backtrack(int target_level) {
    if (decision_level() <= target_level) return;
    const std::size_t bound = trail_lim_[static_cast<std::size_t>(target_level)];
    for (std::size_t i = trail_.size(); i-- > bound;) {
      const auto v = static_cast<std::size_t>(var_of(trail_[i]));
      assigns_[v] = Val::unassigned;
      reason_[v] = no_reason;
      heap_insert(static_cast<int>(v));
    }
    trail_.resize(bound);
    trail_lim_.resize(static_cast<std::size_t>(target_level));
    qhead_ = bound;
  }

  int pick_branch_var() {
    while (!heap_.empty()) {
      const int v = heap_pop();
      if (assigns_[static_cast<std::size_t>(v)] == Val::unassigned) return v;
    }
    return -1;
  }

  void verify_model(const CnfFormula& cnf, const std::vector<bool>& model) const {
    for (const auto& clause : cnf.clauses) {
      bool ok = false;
      for (int lit : clause)
        if (model[static_cast<std::size_t>(std::abs(lit))] == (lit > 0)) {
          ok = true;
          break;
        }
      if (!ok) throw std::logic_error("sat_solve: produced model violates a clause");
    }
  }

  // --- activity-ordered variable heap -------------------------------------

  bool heap_lt(int u, int v) const {
    const double au = activity_[static_cast<std::size_t>(u)];
    const double av = activity_[static_cast<std::size_t>(v)];
    return au > av || (au == av && u < v);
  }

  void heap_up(std::size_t i) {
    const int v = heap_[i];
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (!heap_lt(v, heap_[parent])) break;
      heap_[i] = heap_[parent];
      pos_[static_cast<std::size_t>(heap_[i])] = static_cast<int>(i);
      i = parent;
    }
    heap_[i] = v;
    pos_[static_cast<std::size_t>(v)] = static_cast<int>(i);
  }

  void heap_down(std::size_t i) {
    const int v = heap_[i];
    for (;;) {
      std::size_t child = 2 * i + 1;
      if (child >= heap_.size()) break;
      if (child + 1 < heap_.size() && heap_lt(heap_[child + 1], heap_[child])) ++child;
      if (!heap_lt(heap_[child], v)) break;
      heap_[i] = heap_[child];
      pos_[static_cast<std::size_t>(heap_[i])] = static_cast<int>(i);
      i = child;
    }
    heap_[i] = v;
    pos_[static_cast<std::size_t>(v)] = static_cast<int>(i);
  }

  void heap_insert(int v) {
    if (pos_[static_cast<std::size_t>(v)] >= 0) return;
    pos_[static_cast<std::size_t>(v)] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    heap_up(heap_.size() - 1);
  }

  int heap_pop() {
    const int v = heap_[0];
    pos_[static_cast<std::size_t>(v)] = -1;
    heap_[0] = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
      pos_[static_cast<std::size_t>(heap_[0])] = 0;
      heap_down(0);
    }
    return v;
  }

  void bump(int v) {
    activity_[static_cast<std::size_t>(v)] += var_inc_;
    if (activity_[static_cast<std::size_t>(v)] > 1e100) {
      for (auto& a : activity_) a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    if (pos_[static_cast<std::size_t>(v)] >= 0)
      heap_up(static_cast<std::size_t>(pos_[static_cast<std::size_t>(v)]));
  }

  int n_;
  bool contradiction_ = false;
  std::vector<std::vector<Lit>> clauses_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<Val> assigns_;
  std::vector<char> saved_phase_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  std::vector<double> activity_;
  double var_inc_ = 1.0;
  std::vector<int> heap_;
  std::vector<int> pos_;
  std::vector<char> seen_;
  std::uint64_t conflicts_ = 0;
  std::uint64_t decisions_ = 0;
  std::uint64_t propagations_ = 0;
};

}  // namespace

SatResult sat_solve(const CnfFormula& cnf, const SatOptions& opts) {
  validate_cnf(cnf);
  Solver solver(cnf);
  return solver.solve(cnf, opts);
}

}  // namespace habs
