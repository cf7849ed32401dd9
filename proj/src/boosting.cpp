#include "abdd/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <unordered_map>

#include "abdd/error.hpp"

namespace abdd {

// --- nets -----------------------------------------------------------------

Net::Net(std::vector<double> breakpoints, double delta, double lambda)
    : bp_(std::move(breakpoints)), delta_(delta), lambda_(lambda) {
  if (bp_.size() < 2 || bp_.front() != 0.0 || bp_.back() != 1.0)
    throw DomainError("net must start at 0 and end at 1");
  for (std::size_t i = 1; i < bp_.size(); ++i)
    if (!(bp_[i] > bp_[i - 1])) throw DomainError("net breakpoints must increase strictly");
}

std::size_t Net::interval_of(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("interval_of: q outside [0,1]");
  auto it = std::lower_bound(bp_.begin() + 1, bp_.end(), q);
  return static_cast<std::size_t>(it - bp_.begin()) - 1;
}

double max_pseudo_entropy(double a, double b) {
  if (a <= 0.5 && b >= 0.5) return 1.0;
  return std::max(pseudo_entropy(a), pseudo_entropy(b));
}

Net build_net(double delta, double lambda) {
  if (!(delta > 0.0) || !(lambda > 0.0 && lambda < 1.0))
    throw DomainError("build_net: need delta > 0 and 0 < lambda < 1");
  if (delta >= 1.0) return Net({0.0, 1.0}, delta, lambda);
  std::vector<double> bp{0.0, 0.5, 1.0};
  // Each interval is tight in exact arithmetic, so a rounded preimage can
  // overshoot its level. Nudge it a few ulps away from 1/2, and take the next
  // level from the breakpoint actually placed so rounding never accumulates.
  const auto ladder = [&](bool upper) {
    const double toward = upper ? 1.0 : 0.0;
    for (double g = delta; g < 1.0;) {
      const double r = std::sqrt(1.0 - g * g);
      double q = upper ? 0.5 * (1.0 + r) : g * g / (2.0 * (1.0 + r));  // (1-r)/2 without cancellation
      for (int i = 0; i < 64 && pseudo_entropy(q) > g; ++i) q = std::nextafter(q, toward);
      const bool inside = q > 0.0 && q < 1.0 && q != 0.5;
      if (inside) bp.push_back(q);
      g = (1.0 + lambda) * (inside ? std::min(g, pseudo_entropy(q)) : g);
    }
  };
  ladder(false);
  ladder(true);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  return Net(std::move(bp), delta, lambda);
}

std::size_t default_max_iterations(double epsilon, std::optional<double> margin) {
  if (!margin || !(*margin > 0.0)) return 1000;
  const double k = std::ceil(4.0 * std::log(1.0 / epsilon) / (*margin * *margin));
  return 10 * static_cast<std::size_t>(std::max(1.0, k));
}

// --- frontier bookkeeping ---------------------------------------------------

namespace {

struct FrontierNode {
  NodeId id = 0;
  std::vector<std::size_t> samples;
  std::size_t pos = 0;

  std::size_t neg() const { return samples.size() - pos; }
  bool pure() const { return pos == 0 || pos == samples.size(); }
  double q() const {
    return samples.empty() ? 0.0
                           : static_cast<double>(pos) / static_cast<double>(samples.size());
  }
  NodeId majority() const { return 2 * pos >= samples.size() && pos > 0 ? kTrueLeaf : kFalseLeaf; }
};

using Frontier = std::vector<FrontierNode>;

double frontier_entropy_of(const Frontier& fr, std::size_t m) {
  double h = 0.0;
  for (const auto& u : fr) {
    if (u.samples.empty()) continue;
    h += static_cast<double>(u.samples.size()) / static_cast<double>(m) * pseudo_entropy(u.q());
  }
  return h;
}

double majority_error_of(const Frontier& fr, std::size_t m) {
  std::size_t wrong = 0;
  for (const auto& u : fr) wrong += std::min(u.pos, u.neg());
  return static_cast<double>(wrong) / static_cast<double>(m);
}

Frontier frontier_from_routing(const Diagram& t, const LabeledSample& s) {
  const auto ids = frontier(t);
  const auto st = stats(t, s);
  Frontier fr;
  for (auto id : ids) {
    FrontierNode u{id, st[id].sample_ids, 0};
    for (auto i : u.samples) u.pos += s[i].y > 0;
    fr.push_back(std::move(u));
  }
  return fr;
}

// p'_u = p_u G(q_u) / sum; the normalizer runs over the frontier.
std::vector<double> mixture_weights(const Frontier& fr, std::size_t m) {
  std::vector<double> w(fr.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < fr.size(); ++k) {
    const auto& u = fr[k];
    if (u.samples.empty()) continue;
    w[k] = static_cast<double>(u.samples.size()) / static_cast<double>(m) * pseudo_entropy(u.q());
    total += w[k];
  }
  if (!(total > 0.0)) throw WeakLearnerFailure("split: frontier has zero entropy");
  for (auto& x : w) x /= total;
  return w;
}

// Edge of h under the balanced distribution d^u of one node.
double node_edge(const FrontierNode& u, const LabeledSample& s, const Hypothesis& h) {
  long agree_pos = 0, agree_neg = 0;
  for (auto i : u.samples) {
    const int v = s[i].y * h(s[i].x);
    (s[i].y > 0 ? agree_pos : agree_neg) += v;
  }
  return 0.5 * static_cast<double>(agree_pos) / static_cast<double>(u.pos) +
         0.5 * static_cast<double>(agree_neg) / static_cast<double>(u.neg());
}

SplitChoice select_on(const Frontier& fr, std::span<const Hypothesis> hyps,
                      const LabeledSample& s) {
  if (fr.empty()) throw WeakLearnerFailure("split: empty frontier");
  if (hyps.empty()) throw DomainError("split: empty hypothesis set");
  for (const auto& u : fr)
    if (u.pure()) throw PureNode("split: frontier node " + std::to_string(u.id) + " is pure");
  const auto pw = mixture_weights(fr, s.size());
  std::vector<double> dhat(s.size(), 0.0);
  for (std::size_t k = 0; k < fr.size(); ++k) {
    const auto& u = fr[k];
    const double wp = pw[k] * 0.5 / static_cast<double>(u.pos);
    const double wn = pw[k] * 0.5 / static_cast<double>(u.neg());
    for (auto i : u.samples) dhat[i] = s[i].y > 0 ? wp : wn;
  }
  // Signed weights a_i = d_i y_i; edge(h) = sum a_i h(x_i).
  std::vector<std::size_t> support;
  std::vector<double> signed_w;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (dhat[i] == 0.0) continue;
    support.push_back(i);
    signed_w.push_back(dhat[i] * s[i].y);
  }
  std::size_t best = 0;
  double best_edge = -2.0;
  for (std::size_t j = 0; j < hyps.size(); ++j) {
    double e = 0.0;
    for (std::size_t k = 0; k < support.size(); ++k) e += signed_w[k] * hyps[j](s[support[k]].x);
    if (e > best_edge) {
      best_edge = e;
      best = j;
    }
  }
  if (!(best_edge > 0.0))
    throw WeakLearnerFailure("split: no hypothesis has positive edge (best " +
                             std::to_string(best_edge) + ")");
  double jensen = 0.0;
  for (std::size_t k = 0; k < fr.size(); ++k) {
    const double g = node_edge(fr[k], s, hyps[best]);
    jensen += pw[k] * g * g;
  }
  // Renormalize to absorb rounding before handing out a Distribution.
  double total = 0.0;
  for (double x : dhat) total += x;
  for (double& x : dhat) x /= total;
  return SplitChoice{hyps[best], Distribution(std::move(dhat)), best_edge, jensen};
}

Frontier split_on(Diagram& t, const Frontier& fr, std::span<const Hypothesis> labels,
                  const LabeledSample& s) {
  Frontier children;
  children.reserve(2 * fr.size());
  for (std::size_t k = 0; k < fr.size(); ++k) {
    const auto& u = fr[k];
    const Hypothesis& h = labels[k];
    FrontierNode lo, hi;
    for (auto i : u.samples) {
      auto& c = h(s[i].x) > 0 ? hi : lo;
      c.samples.push_back(i);
      c.pos += s[i].y > 0;
    }
    const auto depth = t.node(u.id).depth + 1;
    lo.id = t.add_open(depth, lo.majority());
    hi.id = t.add_open(depth, hi.majority());
    t.expand(u.id, h, lo.id, hi.id);
    children.push_back(std::move(lo));
    children.push_back(std::move(hi));
  }
  return children;
}

Frontier merge_on(Diagram& t, Frontier children, const Net* net, std::size_t* absorbed) {
  std::unordered_map<NodeId, NodeId> remap;
  std::map<std::size_t, std::vector<std::size_t>> groups;  // interval -> child slots
  std::size_t pure_count = 0;
  for (std::size_t k = 0; k < children.size(); ++k) {
    const auto& c = children[k];
    if (c.pure()) {
      remap.emplace(c.id, c.pos > 0 ? kTrueLeaf : kFalseLeaf);
      ++pure_count;
    } else if (net) {
      groups[net->interval_of(c.q())].push_back(k);
    } else {
      groups[k].push_back(k);  // no net: keep every node
    }
  }
  Frontier merged;
  for (auto& [interval, slots] : groups) {
    (void)interval;
    std::sort(slots.begin(), slots.end(),
              [&](std::size_t a, std::size_t b) { return children[a].id < children[b].id; });
    FrontierNode rep = std::move(children[slots.front()]);
    for (std::size_t j = 1; j < slots.size(); ++j) {
      auto& other = children[slots[j]];
      remap.emplace(other.id, rep.id);
      rep.samples.insert(rep.samples.end(), other.samples.begin(), other.samples.end());
      rep.pos += other.pos;
    }
    std::sort(rep.samples.begin(), rep.samples.end());
    t.set_majority(rep.id, rep.majority());
    merged.push_back(std::move(rep));
  }
  t.redirect(remap);
  std::sort(merged.begin(), merged.end(),
            [](const FrontierNode& a, const FrontierNode& b) { return a.id < b.id; });
  if (absorbed) *absorbed = pure_count;
  return merged;
}

enum class Selection { Aligned, PerNode };

BoostResult run_boost(const LabeledSample& s, const BoostConfig& cfg, Selection mode) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw DomainError("boost: epsilon must lie in (0,1)");
  if (cfg.hypotheses.empty()) throw DomainError("boost: empty hypothesis set");
  for (const auto& h : cfg.hypotheses)
    if (h.is_projection() && h.index >= s.dimension())
      throw DomainError("boost: hypothesis index out of range");
  const auto kind = mode == Selection::Aligned ? DiagramKind::ABDD : DiagramKind::BDD;
  const std::size_t m = s.size();

  if (s.positives() == 0 || s.positives() == m)
    return BoostResult{Diagram::constant(s.dimension(), s.positives() > 0, kind), {},
                       BoostStatus::Converged, 0.0};

  BoostResult result{Diagram::open_root(s.dimension(), kTrueLeaf, kind), {},
                     BoostStatus::Converged, 0.0};
  Diagram& t = result.diagram;
  Frontier fr(1);
  fr[0].id = t.root();
  fr[0].samples.resize(m);
  for (std::size_t i = 0; i < m; ++i) fr[0].samples[i] = i;
  fr[0].pos = s.positives();
  t.set_majority(t.root(), fr[0].majority());

  double h = frontier_entropy_of(fr, m);
  while (!(h < cfg.epsilon)) {
    if (result.trace.size() >= cfg.max_iterations) {
      result.status = BoostStatus::Diverged;
      break;
    }
    IterationRecord rec;
    rec.iter = result.trace.size() + 1;
    rec.h_before = h;
    rec.error_before = majority_error_of(fr, m);

    std::vector<Hypothesis> labels;
    if (mode == Selection::Aligned) {
      const auto choice = select_on(fr, cfg.hypotheses, s);
      labels.assign(fr.size(), choice.hypothesis);
      rec.hypothesis = choice.hypothesis.to_string();
      rec.edge = choice.edge;
      rec.jensen = choice.jensen;
    } else {
      const auto pw = mixture_weights(fr, m);
      for (std::size_t k = 0; k < fr.size(); ++k) {
        std::size_t best = 0;
        double best_edge = -2.0;
        for (std::size_t j = 0; j < cfg.hypotheses.size(); ++j) {
          const double e = node_edge(fr[k], s, cfg.hypotheses[j]);
          if (e > best_edge) {
            best_edge = e;
            best = j;
          }
        }
        labels.push_back(cfg.hypotheses[best]);
        rec.edge += pw[k] * best_edge;
        rec.jensen += pw[k] * best_edge * best_edge;
      }
      rec.hypothesis = fr.size() == 1 ? labels.front().to_string() : "per-node";
    }

    Frontier children = split_on(t, fr, labels, s);
    rec.h_split = frontier_entropy_of(children, m);
    rec.lambda_hat = 1.0 - rec.h_split / h;

    std::optional<Net> net;
    const bool any_impure =
        std::any_of(children.begin(), children.end(), [](const auto& c) { return !c.pure(); });
    if (!(rec.lambda_hat > 0.0)) {
      if (mode == Selection::Aligned)
        throw WeakLearnerFailure("boost: split made no entropy progress at iteration " +
                                 std::to_string(rec.iter));
      // Per-node selection may need a zero-progress layer (e.g. parity); skip
      // merging and let the iteration cap bound it.
    } else if (any_impure) {
      rec.delta_hat = rec.lambda_hat * h / 6.0;
      net = build_net(rec.delta_hat, rec.lambda_hat / 3.0);
      rec.net_length = net->length();
    }
    fr = merge_on(t, std::move(children), net ? &*net : nullptr, &rec.absorbed);
    h = frontier_entropy_of(fr, m);
    rec.h_merged = h;
    rec.width = fr.size();
    result.trace.push_back(rec);
    if (cfg.observer) cfg.observer(t, result.trace.back());
  }
  result.final_entropy = h;
  if (result.status == BoostStatus::Converged) t.close_frontier();
  return result;
}

}  // namespace

SplitChoice split_select(const Diagram& t, std::span<const Hypothesis> hypotheses,
                         const LabeledSample& s) {
  return select_on(frontier_from_routing(t, s), hypotheses, s);
}

Diagram split_frontier(const Diagram& t, const Hypothesis& h, const LabeledSample& s) {
  Diagram out = t;
  const auto fr = frontier_from_routing(out, s);
  if (fr.empty()) throw WeakLearnerFailure("split: empty frontier");
  std::vector<Hypothesis> labels(fr.size(), h);
  split_on(out, fr, labels, s);
  return out;
}

Diagram merge_frontier(const Diagram& split, const LabeledSample& s, const Net& net) {
  Diagram out = split;
  merge_on(out, frontier_from_routing(out, s), &net, nullptr);
  return out;
}

BoostResult boost(const LabeledSample& s, const BoostConfig& cfg) {
  return run_boost(s, cfg, Selection::Aligned);
}

BoostResult boost_mm_baseline(const LabeledSample& s, const BoostConfig& cfg) {
  return run_boost(s, cfg, Selection::PerNode);
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  out << "iter,hypothesis,edge,lambda_hat,delta_hat,H_before,H_split,H_merged,width\n";
  const auto old = out.precision(17);
  for (const auto& r : trace)
    out << r.iter << ',' << r.hypothesis << ',' << r.edge << ',' << r.lambda_hat << ','
        << r.delta_hat << ',' << r.h_before << ',' << r.h_split << ',' << r.h_merged << ','
        << r.width << '\n';
  out.precision(old);
}

}  // namespace abdd
