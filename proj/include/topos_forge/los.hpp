#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "topos_forge/colimits.hpp"
#include "topos_forge/error.hpp"
#include "topos_forge/factorization.hpp"
#include "topos_forge/filter.hpp"
#include "topos_forge/filtered_product.hpp"
#include "topos_forge/formula.hpp"
#include "topos_forge/semantics.hpp"
#include "topos_forge/structure.hpp"
#include "topos_forge/subobject.hpp"

namespace topos {

struct EpiEntry {
  IndexSet set = 0;
  bool epi = true;
  std::vector<std::string> failing_sorts;
};

struct EpiReport {
  std::vector<EpiEntry> entries;
  bool all_epi = true;
  /// Whether every μ_J is epic; computed only when all_epi holds.
  std::optional<bool> cocone_epi;
};

/// Surjectivity of every p_{I,J}, J ∈ F, sort by sort.
inline EpiReport projections_epi_check(const FilteredProductResult& R) {
  EpiReport rep;
  const std::size_t whole = R.whole_stage();
  const auto& sorts = R.product->sig->sorts;
  for (std::size_t k = 0; k < R.stages.sets.size(); ++k) {
    EpiEntry e{R.stages.sets[k], true, {}};
    StructureMorphism p = R.stages.projection(whole, k);
    for (const auto& s : sorts) {
      if (!is_epi(p.components.at(s))) {
        e.epi = false;
        e.failing_sorts.push_back(s);
      }
    }
    rep.all_epi = rep.all_epi && e.epi;
    rep.entries.push_back(std::move(e));
  }
  if (rep.all_epi) {
    bool ok = true;
    for (const auto& mu : R.cocone) {
      for (const auto& s : sorts) ok = ok && is_epi(mu.components.at(s));
    }
    rep.cocone_epi = ok;
  }
  return rep;
}

struct LosOptions {
  bool advisory = false;  ///< run even when hypotheses fail, tagging the report
  std::size_t max_subobjects = kDefaultSubobjectCap;
  bool trace = true;
};

/// One Łoś comparison at a generalized element α : U ↣ (∏_I M)_x⃗.
struct LosReport {
  std::string formula;
  Context context;
  std::string alpha;
  std::string filter;
  bool lhs = false;
  IndexSet rhs_set = 0;
  std::string rhs_text;
  bool rhs_in_filter = false;
  bool agree = false;
  bool advisory = false;
  bool image_factorized = false;
  std::vector<std::string> failed_hypotheses;
  std::vector<std::string> trace;
  /// Noetherian witness: |Sub(U)|, enumerated under the cap.
  std::size_t subobjects_of_domain = 0;
  /// fp witness: the stage through which (μ_I)_x⃗ ∘ α factors.
  std::string fp_stage;
  /// fp witness: a stage where that factorization meets the one at I.
  std::string fp_agreement_stage;
};

/// Precomputed data for Łoś runs over one filter and family.
class LosHarness {
 public:
  LosHarness(FilterFin F, std::vector<StructureRef> family, LosOptions opt = {},
             std::shared_ptr<InterpCache> cache = nullptr)
      : opt_(opt),
        R_(filtered_product(F, std::move(family))),
        cache_(cache ? std::move(cache) : std::make_shared<InterpCache>()) {
    whole_ = R_.whole_stage();
    epi_ = projections_epi_check(R_);
    if (!is_ultrafilter(R_.filter)) failed_.push_back("the filter is not an ultrafilter");
    if (!epi_.all_epi) {
      for (const auto& e : epi_.entries) {
        if (!e.epi) {
          std::string sorts;
          for (const auto& s : e.failing_sorts) sorts += (sorts.empty() ? "" : ",") + s;
          failed_.push_back("projection onto " + R_.filter.set_text(e.set) + " is not epi (sort " + sorts + ")");
        }
      }
    }
    if (!failed_.empty() && !opt_.advisory) throw HypothesisError("hypothesis failed: " + failed_.front());
    limit_ = std::make_unique<Interpreter>(R_.product, cache_);
    whole_interp_ = std::make_unique<Interpreter>(R_.stages.products[whole_].product, cache_);
    for (const auto& M : R_.family) factors_.push_back(std::make_unique<Interpreter>(M, cache_));
  }

  const FilteredProductResult& result() const { return R_; }
  const EpiReport& epi_report() const { return epi_; }
  const std::vector<std::string>& failed_hypotheses() const { return failed_; }
  const StructureRef& whole_product() const { return R_.stages.products[whole_].product; }

  /// (∏_I M)_x⃗.
  const ProductCone& domain_object(const Context& ctx) { return whole_interp_->context_object(ctx); }

  /// Every subobject inclusion into (∏_I M)_x⃗.
  std::vector<PresheafMap> alphas(const Context& ctx) {
    std::vector<PresheafMap> out;
    for (const auto& S : sub_enumerate(domain_object(ctx).apex(), opt_.max_subobjects).elements) {
      out.push_back(as_presheaf(S).legs[0]);
    }
    return out;
  }

  LosReport check(const Context& ctx, const Formula& f, const PresheafMap& alpha_in) {
    typecheck(*R_.product->sig, ctx, f);
    const ProductCone& X = domain_object(ctx);
    if (!same_presheaf(alpha_in.dst, X.apex())) throw ContextError("α does not land in (∏_I M)" + context_text(ctx));
    LosReport rep;
    rep.formula = to_string(f);
    rep.context = ctx;
    rep.filter = filter_text();
    rep.advisory = !failed_.empty();
    rep.failed_hypotheses = failed_;
    PresheafMap alpha = alpha_in;
    if (!is_mono(alpha)) {
      alpha = image_factorize(alpha).mono;
      rep.image_factorized = true;
    }
    rep.alpha = describe(alpha);

    // Noetherian witness: Sub(U) is finite.
    rep.subobjects_of_domain = sub_enumerate(alpha.src, opt_.max_subobjects).size();
    // fp witness: the element factors through a stage of A_F, essentially uniquely.
    const ContextColimit& CC = context_colimit(ctx);
    PresheafMap u = compose(CC.colimit.leg(whole_), alpha);
    StageFactorization sf = factor_through_colimit_stage(u, CC.diagram, CC.colimit);
    if (!(compose(CC.colimit.leg(sf.stage), sf.map) == u)) throw Error("stage factorization does not commute");
    auto agree_at = essential_uniqueness_stage(CC.diagram, sf, StageFactorization{whole_, alpha});
    if (!agree_at) throw Error("stage factorizations are not essentially unique");
    rep.fp_stage = CC.diagram.stages[sf.stage];
    rep.fp_agreement_stage = CC.diagram.stages[*agree_at];

    rep.lhs = lhs_at(ctx, f, alpha);
    rep.rhs_set = rhs_at(ctx, f, alpha);
    rep.rhs_text = R_.filter.set_text(rep.rhs_set);
    rep.rhs_in_filter = R_.filter.contains(rep.rhs_set);
    rep.agree = rep.lhs == rep.rhs_in_filter;
    if (opt_.trace) trace(ctx, f, alpha, rep.trace);
    return rep;
  }

  /// The empty-context case, α the identity of the terminal object.
  LosReport sentence(const Formula& f) {
    Suitability s = suitable_context(f, {});
    if (!s.suitable) throw ContextError("not a sentence: free variable " + *s.free.begin());
    return check({}, f, identity_map(domain_object({}).apex()));
  }

  std::string filter_text() const {
    std::string out = "principal at " + R_.filter.set_text(R_.filter.generator()) + " over " +
                      R_.filter.set_text(R_.filter.whole());
    return out;
  }

 private:
  struct ContextColimit {
    DirectedDiagram diagram;
    DirectedColimit colimit;
  };

  /// (A_F)_x⃗ and its colimit.
  const ContextColimit& context_colimit(const Context& ctx) {
    std::string key = context_text(ctx);
    auto it = ctx_colimits_.find(key);
    if (it != ctx_colimits_.end()) return it->second;
    const auto& sets = R_.stages.sets;
    const std::size_t n = sets.size();
    ContextColimit CC;
    std::vector<ProductCone> objs;
    for (std::size_t k = 0; k < n; ++k) {
      objs.push_back(k == whole_ ? domain_object(ctx) : context_object(*R_.stages.products[k].product, ctx));
      CC.diagram.stages.push_back(R_.filter.set_text(sets[k]));
      CC.diagram.nodes.push_back(objs.back().apex());
    }
    CC.diagram.arrows.assign(n, std::vector<std::optional<PresheafMap>>(n));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (subset_of(sets[b], sets[a])) {
          CC.diagram.arrows[a][b] = context_map(R_.stages.projection(a, b), ctx, objs[a], objs[b]);
        }
      }
    }
    CC.colimit = directed_colimit(CC.diagram);
    return ctx_colimits_.emplace(key, std::move(CC)).first->second;
  }

  PresheafMap mu_whole(const Context& ctx) {
    return context_map(R_.cocone[whole_], ctx, domain_object(ctx), limit_->context_object(ctx));
  }

  PresheafMap to_factor(const Context& ctx, std::size_t i) {
    const StructureProduct& P = R_.stages.products[whole_];
    return context_map(P.projections[i], ctx, domain_object(ctx), factors_[i]->context_object(ctx));
  }

  bool lhs_at(const Context& ctx, const Formula& f, const PresheafMap& alpha) {
    return forced(compose(mu_whole(ctx), alpha), limit_->formula(ctx, f));
  }

  IndexSet rhs_at(const Context& ctx, const Formula& f, const PresheafMap& alpha) {
    IndexSet out = 0;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (forced(compose(to_factor(ctx, i), alpha), factors_[i]->formula(ctx, f))) out |= IndexSet{1} << i;
    }
    return out;
  }

  std::string describe(const PresheafMap& alpha) const {
    const FinCategory& C = alpha.category();
    std::string out;
    for (ObjectId c = 0; c < C.object_count(); ++c) {
      if (c) out += " ";
      out += C.object_name(c) + ":{";
      for (Elem u = 0; u < alpha.src->size(c); ++u) {
        if (u) out += ",";
        out += alpha.dst->id(c, alpha(c, u));
      }
      out += "}";
    }
    return out;
  }

  void trace(const Context& ctx, const Formula& f, const PresheafMap& alpha, std::vector<std::string>& out) {
    using K = Formula::Kind;
    bool l = lhs_at(ctx, f, alpha);
    IndexSet r = rhs_at(ctx, f, alpha);
    std::string head = to_string(f) + ": lhs=" + (l ? "true" : "false") + " rhs=" + R_.filter.set_text(r);
    out.push_back(head);
    if (f.kind == K::Or && l) {
      // Canonical cover of U by the two disjunct subobjects.
      PresheafMap a = compose(mu_whole(ctx), alpha);
      Subfunctor V = base_change(a, limit_->formula(ctx, f.lhs()));
      Subfunctor W = base_change(a, limit_->formula(ctx, f.rhs()));
      out.push_back("  or-witness: V has " + std::to_string(V.count()) + " elements, W has " +
                    std::to_string(W.count()) + ", U has " + std::to_string(alpha.src->total_size()));
    }
    if (f.kind == K::Exists && l) out.push_back("  " + descend_exists(ctx, f, alpha));
    if (f.is_binary()) {
      trace(ctx, f.lhs(), alpha, out);
      trace(ctx, f.rhs(), alpha, out);
    } else if (f.kind == K::Not) {
      trace(ctx, f.body(), alpha, out);
    }
  }

  /// The canonical existential witness in ∏_F M, with β descended along
  /// the epi μ_I to ∏_I M.
  std::string descend_exists(const Context& ctx, const Formula& f, const PresheafMap& alpha) {
    Context inner = extend_context(ctx, f.symbol, f.sort);
    const ProductCone& Y = limit_->context_object(inner);
    const ProductCone& X = limit_->context_object(ctx);
    Subfunctor body = limit_->formula(inner, f.body());
    PresheafMap a = compose(mu_whole(ctx), alpha);
    const PresheafRef& U = alpha.src;
    const FinCategory& C = U->category();
    const PresheafRef& Ms = R_.product->sort(f.sort);
    ProductCone UM(U->base, {U, Ms});
    Subfunctor Vs = bottom(UM.apex());
    for (ObjectId c = 0; c < C.object_count(); ++c) {
      for (Elem w = 0; w < UM.apex()->size(c); ++w) {
        std::vector<Elem> coords = X.decode(c, a(c, UM.coordinate(c, w, 0)));
        coords.push_back(UM.coordinate(c, w, 1));
        Vs.parts[c][w] = body.contains(c, Y.encode(c, coords));
      }
    }
    Cone V = as_presheaf(Vs);
    PresheafMap p = compose(UM.leg(0), V.legs[0]);
    PresheafMap beta = compose(UM.leg(1), V.legs[0]);
    std::string out = "exists-witness: p is " + std::string(is_epi(p) ? "epi" : "not epi");
    const PresheafMap& mu_s = R_.cocone[whole_].components.at(f.sort);
    if (!is_epi(mu_s)) return out + "; descent skipped, μ_I is not epi on sort " + f.sort;
    auto lifted = factor_through_epi(beta, mu_s);
    if (!lifted) return out + "; β does not descend along μ_I";
    // Indices whose factor forces the body at the descended element.
    IndexSet holds = 0;
    const PresheafMap ap = compose(alpha, p);
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      const ProductCone& Yi = factors_[i]->context_object(inner);
      PresheafMap xi = compose(to_factor(ctx, i), ap);
      const ProductCone& Xi = factors_[i]->context_object(ctx);
      std::vector<PresheafMap> legs;
      for (std::size_t k = 0; k < Xi.arity(); ++k) legs.push_back(compose(Xi.leg(k), xi));
      legs.push_back(compose(R_.stages.products[whole_].projections[i].components.at(f.sort), *lifted));
      if (forced(Yi.pairing(V.apex, legs), factors_[i]->formula(inner, f.body()))) holds |= IndexSet{1} << i;
    }
    return out + "; β descends along μ_I; body holds at the descended witness in " + R_.filter.set_text(holds);
  }

  LosOptions opt_;
  FilteredProductResult R_;
  std::shared_ptr<InterpCache> cache_;
  std::size_t whole_ = 0;
  EpiReport epi_;
  std::vector<std::string> failed_;
  std::unique_ptr<Interpreter> limit_;
  std::unique_ptr<Interpreter> whole_interp_;
  std::vector<std::unique_ptr<Interpreter>> factors_;
  std::map<std::string, ContextColimit> ctx_colimits_;
};

inline LosReport los_check(const FilterFin& F, const std::vector<StructureRef>& family, const Context& ctx,
                           const Formula& f, const PresheafMap& alpha, const LosOptions& opt = {}) {
  LosHarness H(F, family, opt);
  return H.check(ctx, f, alpha);
}

inline LosReport sentence_check(const FilterFin& F, const std::vector<StructureRef>& family, const Formula& f,
                                const LosOptions& opt = {}) {
  Suitability s = suitable_context(f, {});
  if (!s.suitable) throw ContextError("not a sentence: free variable " + *s.free.begin());
  LosHarness H(F, family, opt);
  return H.sentence(f);
}

/// One unit of a sweep: a formula in context, at the identity of
/// (∏_I M)_x⃗ or at the k-th subobject inclusion.
struct SweepItem {
  Context context;
  Formula formula;
};

struct SweepOptions {
  LosOptions los;
  bool all_alphas = false;
  std::size_t threads = 1;
};

/// Runs every (item, α) pair, parallel over workers that each own a harness
/// and share one memo table. Reports come back in job order.
inline std::vector<LosReport> los_sweep(const FilterFin& F, const std::vector<StructureRef>& family,
                                        const std::vector<SweepItem>& items, const SweepOptions& opt = {}) {
  auto cache = std::make_shared<InterpCache>();
  LosHarness master(F, family, opt.los, cache);
  struct Job {
    std::size_t item;
    std::optional<std::size_t> alpha;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < items.size(); ++k) {
    typecheck(*family.front()->sig, items[k].context, items[k].formula);
    if (!opt.all_alphas) {
      jobs.push_back({k, std::nullopt});
      continue;
    }
    std::size_t n = sub_enumerate(master.domain_object(items[k].context).apex(), opt.los.max_subobjects).size();
    for (std::size_t a = 0; a < n; ++a) jobs.push_back({k, a});
  }
  std::vector<LosReport> out(jobs.size());
  auto run = [&](LosHarness& H, std::map<std::string, std::vector<PresheafMap>>& alphas, const Job& job) {
    const SweepItem& it = items[job.item];
    if (!job.alpha) return H.check(it.context, it.formula, identity_map(H.domain_object(it.context).apex()));
    std::string key = context_text(it.context);
    auto found = alphas.find(key);
    if (found == alphas.end()) found = alphas.emplace(key, H.alphas(it.context)).first;
    return H.check(it.context, it.formula, found->second.at(*job.alpha));
  };
  std::size_t threads = std::max<std::size_t>(1, std::min(opt.threads, jobs.size()));
  if (threads == 1) {
    std::map<std::string, std::vector<PresheafMap>> alphas;
    for (std::size_t j = 0; j < jobs.size(); ++j) out[j] = run(master, alphas, jobs[j]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      try {
        LosHarness H(F, family, opt.los, cache);
        std::map<std::string, std::vector<PresheafMap>> alphas;
        for (std::size_t j; (j = next++) < jobs.size();) out[j] = run(H, alphas, jobs[j]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!error) error = std::current_exception();
        next = jobs.size();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

/// Comparison of {x⃗ | φ} in ∏_J M with the product of the {x⃗ | φ}_{M_j}.
struct LemmaProbe {
  bool equal = true;
  std::size_t in_product = 0;      ///< |{x⃗ | φ}_{∏_J M}|
  std::size_t product_of = 0;      ///< |∏_J {x⃗ | φ}_{M_j}|
  std::optional<std::string> stage;
  std::optional<std::string> element;
  bool element_in_product = false;  ///< side membership of the counterexample
  bool element_in_product_of = false;
};

inline LemmaProbe lemma_probe(IndexSet J, const std::vector<StructureRef>& family, const Context& ctx, const Formula& f) {
  if (J == 0) throw PreconditionError("lemma_probe: the index set is empty");
  StructureProduct P;
  StructureRef prod = subfamily_product(family, J, &P);
  Interpreter IP(prod);
  Subfunctor A = IP.formula(ctx, f);
  const ProductCone& X = IP.context_object(ctx);
  Subfunctor B = top(X.apex());
  std::vector<std::size_t> idx = members_of(J);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    Interpreter Ij(family[idx[k]]);
    PresheafMap pj = context_map(P.projections[k], ctx, X, Ij.context_object(ctx));
    B = meet(B, base_change(pj, Ij.formula(ctx, f)));
  }
  LemmaProbe out;
  out.in_product = A.count();
  out.product_of = B.count();
  const FinCategory& C = *prod->base;
  for (ObjectId c = 0; c < C.object_count() && out.equal; ++c) {
    for (Elem x = 0; x < X.apex()->size(c); ++x) {
      if (A.contains(c, x) != B.contains(c, x)) {
        out.equal = false;
        out.stage = C.object_name(c);
        out.element = X.apex()->id(c, x);
        out.element_in_product = A.contains(c, x);
        out.element_in_product_of = B.contains(c, x);
        break;
      }
    }
  }
  return out;
}

}  // namespace topos
