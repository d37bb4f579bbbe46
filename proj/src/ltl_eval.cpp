#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "habs/ltl.hpp"

namespace habs {

namespace {

using Bits = std::vector<char>;

/// Evaluates an NNF formula at every position of a trace. Loop-free traces
/// use pessimistic bounded semantics (anything promised beyond the end is
/// false); lassos get the exact infinite-word value via fixpoint iteration.
class Evaluator {
 public:
  explicit Evaluator(const Trace& trace)
      : trace_(trace), n_(trace.steps.size()), lasso_(trace.loop_back.has_value()) {}

  const Bits& eval(const LtlPtr& phi) {
    auto it = memo_.find(phi.get());
    if (it != memo_.end()) return it->second;
    Bits v(n_, 0);
    switch (phi->op) {
      case LtlOp::tt:
        std::fill(v.begin(), v.end(), 1);
        break;
      case LtlOp::ff:
        break;
      case LtlOp::atom:
        for (std::size_t i = 0; i < n_; ++i)
          v[i] = trace_.steps[i].mode == static_cast<std::uint32_t>(phi->mode) &&
                 trace_.steps[i].label == static_cast<std::uint32_t>(phi->label);
        break;
      case LtlOp::negation: {
        // NNF keeps negation on atoms only, where pointwise flip is exact.
        const Bits& a = eval(phi->a);
        for (std::size_t i = 0; i < n_; ++i) v[i] = !a[i];
        break;
      }
      case LtlOp::conj: {
        const Bits& a = eval(phi->a);
        const Bits& b = eval(phi->b);
        for (std::size_t i = 0; i < n_; ++i) v[i] = a[i] && b[i];
        break;
      }
      case LtlOp::disj: {
        const Bits& a = eval(phi->a);
        const Bits& b = eval(phi->b);
        for (std::size_t i = 0; i < n_; ++i) v[i] = a[i] || b[i];
        break;
      }
      case LtlOp::next: {
        const Bits& a = eval(phi->a);
        for (std::size_t i = 0; i + 1 < n_; ++i) v[i] = a[i + 1];
        v[n_ - 1] = lasso_ ? a[*trace_.loop_back] : 0;
        break;
      }
      case LtlOp::until:
        v = fixpoint(eval(phi->a), eval(phi->b), /*until=*/true);
        break;
      case LtlOp::release:
        v = fixpoint(eval(phi->a), eval(phi->b), /*until=*/false);
        break;
    }
    return memo_.emplace(phi.get(), std::move(v)).first->second;
  }

 private:
  Bits fixpoint(const Bits& a, const Bits& b, bool until) const {
    Bits v(n_, 0);
    if (!lasso_) {
      // Backward sweep with "false" past the end: until needs its payoff
      // inside the trace, release fails once the obligation can escape.
      char next = 0;
      for (std::size_t i = n_; i-- > 0; next = v[i])
        v[i] = until ? (b[i] || (a[i] && next)) : (b[i] && (a[i] || next));
      return v;
    }
    // Lasso: least fixpoint for until (start false), greatest for release
    // (start true). Each pass propagates one step around the loop, so n
    // sweeps reach stability; we stop as soon as nothing changes.
    std::fill(v.begin(), v.end(), until ? 0 : 1);
    const std::size_t loop = *trace_.loop_back;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = n_; i-- > 0;) {
        const char next = (i + 1 < n_) ? v[i + 1] : v[loop];
        const char nu = until ? (b[i] || (a[i] && next)) : (b[i] && (a[i] || next));
        if (nu != v[i]) {
          v[i] = nu;
          changed = true;
        }
      }
    }
    return v;
  }

  const Trace& trace_;
  std::size_t n_;
  bool lasso_;
  std::unordered_map<const LtlNode*, Bits> memo_;
};

}  // namespace

bool eval_trace(const LtlPtr& phi, const Trace& trace) {
  if (!phi) throw std::invalid_argument("eval_trace: null formula");
  if (trace.steps.empty()) throw std::invalid_argument("eval_trace: empty trace");
  if (trace.loop_back && *trace.loop_back >= trace.steps.size())
    throw std::invalid_argument("eval_trace: loop_back out of range");
  Evaluator ev(trace);
  return ev.eval(to_nnf(phi)).front() != 0;
}

}  // namespace habs
