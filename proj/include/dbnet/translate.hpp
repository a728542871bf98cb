#pragma once

// DB-net → ν-CPN compilation. Every DB-net transition T becomes a gadget
// guarded by a global lock:
//
//   enter → ComputeV_1 … ComputeV_m → cond | cancel → del/add components
//     → constraint checks → EmptyNoOpPlaces → commit
//                         ↘ undo components → rollback
//
// Gadget places carry the bindings accumulated so far; relation places hold
// one token per database fact.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dbnet/dbnet.hpp"
#include "dbnet/nucpn.hpp"

namespace dbnet {

enum class MutationKind { DropRevert, SwapAddPriority, SkipConstraint, ForgetCancelLock, ConsumeReadArc, ReorderDelAdd };

inline const char* mutation_name(MutationKind k) {
  switch (k) {
    case MutationKind::DropRevert: return "drop-revert";
    case MutationKind::SwapAddPriority: return "swap-add-priority";
    case MutationKind::SkipConstraint: return "skip-constraint";
    case MutationKind::ForgetCancelLock: return "forget-cancel-lock";
    case MutationKind::ConsumeReadArc: return "consume-read-arc";
    case MutationKind::ReorderDelAdd: return "reorder-del-add";
  }
  return "?";
}

inline const std::vector<MutationKind>& all_mutations() {
  static const std::vector<MutationKind> all{MutationKind::DropRevert,       MutationKind::SwapAddPriority,
                                             MutationKind::SkipConstraint,   MutationKind::ForgetCancelLock,
                                             MutationKind::ConsumeReadArc,   MutationKind::ReorderDelAdd};
  return all;
}

/// A deliberate defect injected at the site-th occurrence of its kind.
struct Mutation {
  MutationKind kind;
  std::size_t site = 0;
};

struct TranslateOptions {
  std::optional<Mutation> mutation;
};

struct Provenance {
  std::string element;
  bool is_place = false;
  std::string source;  // DB-net transition, empty for shared places
  std::string phase;
};

struct TranslationOutput {
  NuCpn net;
  std::map<std::string, PlaceClass> place_classes;
  std::map<std::string, LabelSpec> label_map;
  std::vector<Provenance> provenance;
  std::string lock_place;
  std::size_t mutation_sites = 0;  // occurrences of the requested mutation kind
  bool mutation_applied = false;

  std::vector<std::string> places_of_class(PlaceClass c) const {
    std::vector<std::string> out;
    for (const auto& p : net.places)
      if (p.cls == c) out.push_back(p.name);
    return out;
  }
  std::size_t count_phase(std::string_view source, std::string_view phase, bool places = false) const {
    std::size_t n = 0;
    for (const auto& p : provenance)
      if (p.source == source && p.phase == phase && p.is_place == places) ++n;
    return n;
  }
};

/// Rejects nets outside the translatable fragment.
inline void require_translatable(const DbNet& net) {
  require_valid(net);
  for (const auto& v : net.views) {
    const auto* q = net.query(v.query);
    for (std::size_t d = 0; d < q->disjuncts.size(); ++d)
      for (const auto& f : q->disjuncts[d].filters)
        if (f.pred != Predicate::Eq)
          throw UnsupportedError("view " + v.name + ", query " + q->name + ", disjunct " + std::to_string(d + 1) +
                                 ": filter '" + f.text() + "' is outside UCQ with inequalities");
  }
}

namespace detail {

class Translator {
 public:
  Translator(const DbNet& net, const Snapshot& s0, const TranslateOptions& opt) : src_(net), s0_(s0), opt_(opt) {}

  TranslationOutput run() {
    require_translatable(src_);
    auto& cpn = out_.net;
    cpn.types = src_.types();
    cpn.policy = src_.policy;
    for (const auto& p : src_.places) add_place(p.name, p.color, PlaceClass::Control, "", "control");
    for (const auto& r : src_.schema->relations) add_place(r.name, r.types(), PlaceClass::Relation, "", "relation");
    std::string lock = "Lock";
    while (taken(lock)) lock += "_";
    out_.lock_place = lock;
    add_place(lock, {}, PlaceClass::Lock, "", "lock");

    for (const auto& e : s0_.marking.entries()) cpn.initial.add(e.slot, e.tuple(), e.count);
    auto P = static_cast<std::uint32_t>(src_.places.size());
    for (const auto& e : s0_.instance.bag().entries()) cpn.initial.add(P + e.slot, e.tuple(), e.count);
    cpn.initial.add(*cpn.place_index(lock), {});

    for (std::size_t k = 0; k < src_.transitions.size(); ++k) gadget(k);
    for (const auto& t : cpn.transitions) out_.label_map[t.name] = t.label;
    return std::move(out_);
  }

 private:
  bool taken(const std::string& n) const { return out_.place_classes.count(n) > 0; }

  void add_place(const std::string& name, std::vector<TypeId> color, PlaceClass cls, const std::string& source,
                 const std::string& phase) {
    if (taken(name)) throw UnsupportedError("translation would create two places named '" + name + "'");
    out_.net.places.push_back({name, std::move(color), cls});
    out_.place_classes[name] = cls;
    out_.provenance.push_back({name, true, source, phase});
  }

  void add_transition(CpnTransition t, const std::string& phase) {
    if (!transition_names_.insert(t.name).second)
      throw UnsupportedError("translation would create two transitions named '" + t.name + "'");
    out_.provenance.push_back({t.name, false, current_, phase});
    out_.net.transitions.push_back(std::move(t));
  }

  bool mutate(MutationKind k) {
    if (!opt_.mutation || opt_.mutation->kind != k) return false;
    bool hit = counter_[k]++ == opt_.mutation->site;
    if (hit) out_.mutation_applied = true;
    out_.mutation_sites = counter_[k];
    return hit;
  }

  static std::vector<Term> var_terms(const std::vector<std::string>& vs) {
    std::vector<Term> out;
    for (const auto& v : vs) out.push_back(Term::variable(v));
    return out;
  }

  std::vector<TypeId> color_of(const std::vector<std::string>& vs) const {
    std::vector<TypeId> out;
    for (const auto& v : vs) out.push_back(var_types_.at(v));
    return out;
  }

  std::string stage(const std::string& name, const std::string& phase) {
    std::string full = prefix_ + name;
    add_place(full, color_of(carrier_), PlaceClass::Aux, current_, phase);
    return full;
  }

  NetArc carrier_arc(const std::string& place) const { return {place, var_terms(carrier_)}; }

  static std::vector<Term> fresh_vars(const std::string& base, std::size_t n) {
    std::vector<Term> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(Term::variable(base + std::to_string(i)));
    return out;
  }

  // Action fact template with parameters replaced by the transition's argument terms.
  std::vector<Term> instantiate(const FactTemplate& f) const {
    std::vector<Term> out;
    for (const auto& a : f.args) {
      if (a.is_var()) {
        auto it = action_args_.find(a.var);
        out.push_back(it->second);
      } else {
        out.push_back(a);
      }
    }
    return out;
  }

  // The arcs that give back what enter took: input tokens and the lock.
  std::vector<NetArc> restore_arcs(const DbTransition& t, bool with_lock) const {
    std::vector<NetArc> out = t.inputs;
    if (with_lock) out.push_back({out_.lock_place, {}});
    return out;
  }

  void gadget(std::size_t k) {
    const auto& t = src_.transitions[k];
    current_ = t.name;
    prefix_ = t.name + "_";
    auto compiled = compile_db_transition(src_, t);
    var_types_.clear();
    for (const auto& v : compiled.rule.vars) var_types_[v.name] = v.type;
    bool forget_lock = mutate(MutationKind::ForgetCancelLock);

    // Variables bound at enter: inputs, fresh and external ones.
    std::set<std::string> entered;
    for (const auto& a : t.inputs)
      for (const auto& term : a.terms)
        if (term.is_var()) entered.insert(term.var);
    for (auto v : compiled.rule.fresh) entered.insert(compiled.rule.vars[v].name);
    for (auto v : compiled.rule.external) entered.insert(compiled.rule.vars[v].name);
    carrier_.assign(entered.begin(), entered.end());

    std::string cur = stage("Entered", "enter");
    {
      CpnTransition enter{prefix_ + "enter", t.inputs, {}, {carrier_arc(cur)}, Guard::truth(), t.fresh,
                          Priority::Normal, LabelSpec::silent()};
      enter.inputs.push_back({out_.lock_place, {}});
      add_transition(std::move(enter), "enter");
    }

    // Binding net: one compute stage per view read, in declaration order.
    for (std::size_t j = 0; j < t.reads.size(); ++j) {
      const auto& read = t.reads[j];
      const auto& view = src_.views[*src_.view_index(read.place)];
      const auto& q = *src_.query(view.query);
      auto before = carrier_;
      std::set<std::string> added;
      for (const auto& term : read.terms)
        if (term.is_var() && !std::count(carrier_.begin(), carrier_.end(), term.var)) added.insert(term.var);
      carrier_.insert(carrier_.end(), added.begin(), added.end());
      std::string tag = "V" + std::to_string(j + 1);
      std::string prev = cur;
      cur = stage(tag + "Computed", "binding");
      for (std::size_t d = 0; d < q.disjuncts.size(); ++d) {
        const auto& c = q.disjuncts[d];
        std::map<std::string, Term> sub;
        for (std::size_t i = 0; i < q.free_vars.size(); ++i) sub.emplace(q.free_vars[i].name, read.terms[i]);
        auto rename = [&](const Term& x) {
          if (!x.is_var()) return x;
          auto it = sub.find(x.var);
          if (it != sub.end()) return it->second;
          return Term::variable("__" + tag + "_" + x.var);
        };
        CpnTransition compute{prefix_ + "Compute" + tag + (q.disjuncts.size() > 1 ? "_" + std::to_string(d + 1) : ""),
                              {{prev, var_terms(before)}},
                              {},
                              {carrier_arc(cur)},
                              Guard::truth(),
                              {},
                              Priority::Normal,
                              LabelSpec::silent()};
        for (const auto& a : c.atoms) {
          NetArc arc{a.relation, {}};
          for (const auto& x : a.args) arc.terms.push_back(rename(x));
          if (mutate(MutationKind::ConsumeReadArc)) compute.inputs.push_back(std::move(arc));
          else compute.reads.push_back(std::move(arc));
        }
        std::vector<Guard> filters;
        for (const auto& f : c.filters) filters.push_back(Guard::literal({f.pred, rename(f.lhs), rename(f.rhs), f.negated}));
        compute.guard = Guard::conjunction(std::move(filters));
        add_transition(std::move(compute), "binding");
      }
      add_transition({prefix_ + "Cancel" + tag, {{prev, var_terms(before)}}, {}, restore_arcs(t, !forget_lock),
                      Guard::truth(), {}, Priority::Low, LabelSpec::silent()},
                     "cancel");
    }

    // Guard stage.
    std::string bound = cur;
    bool has_action = t.action.has_value();
    cur = stage(has_action ? "GuardOk" : "ConstrOk", "guard");
    add_transition({prefix_ + "cond", {carrier_arc(bound)}, {}, {carrier_arc(cur)}, t.guard, {}, Priority::High,
                    LabelSpec::silent()},
                   "guard");
    add_transition({prefix_ + "cancel", {carrier_arc(bound)}, {}, restore_arcs(t, !forget_lock), Guard::truth(), {},
                    Priority::Low, LabelSpec::silent()},
                   "cancel");

    std::vector<std::string> done_places;
    if (has_action) {
      const auto& action = *src_.action(t.action->action);
      action_args_.clear();
      for (std::size_t i = 0; i < action.params.size(); ++i) action_args_.emplace(action.params[i].name, t.action->args[i]);
      cur = update_net(action, cur, done_places);
      std::string viol = prefix_ + "ConstrViol";
      add_place(viol, color_of(carrier_), PlaceClass::Aux, current_, "check");
      cur = check_net(cur, viol);
      std::string rollback = undo_net(action, viol);
      CpnTransition rb{prefix_ + "rollback", {carrier_arc(rollback)}, {}, t.rollbacks, Guard::truth(), {},
                       Priority::Normal, LabelSpec::observable(t.name, "rollback")};
      rb.outputs.push_back({out_.lock_place, {}});
      add_transition(std::move(rb), "finish");
    }

    // Consume net and commit.
    std::string commit_stage = stage("DoCommit", "finish");
    CpnTransition empty{prefix_ + "EmptyNoOpPlaces", {carrier_arc(cur)}, {}, {carrier_arc(commit_stage)},
                        Guard::truth(), {}, Priority::Normal, LabelSpec::silent()};
    for (std::size_t i = 0; i < done_places.size(); ++i)
      empty.inputs.push_back({done_places[i], {Term::variable("__b" + std::to_string(i))}});
    add_transition(std::move(empty), "finish");
    CpnTransition commit{prefix_ + "commit", {carrier_arc(commit_stage)}, {}, t.outputs, Guard::truth(), {},
                         Priority::Normal, LabelSpec::observable(t.name, "commit")};
    commit.outputs.push_back({out_.lock_place, {}});
    add_transition(std::move(commit), "finish");
  }

  std::string update_net(const Action& action, std::string cur, std::vector<std::string>& done_places) {
    bool reorder = false;
    if (!action.dels.empty() && !action.adds.empty()) reorder = mutate(MutationKind::ReorderDelAdd);
    auto bool_const = [](bool b) { return Term::constant(Value::boolean(b)); };
    auto del_component = [&](std::size_t i) {
      const auto& f = action.dels[i];
      std::string n = std::to_string(i + 1);
      std::string done = prefix_ + "DoneD" + n;
      add_place(done, {TypeDomain::Bool}, PlaceClass::Aux, current_, "update");
      done_places.push_back(done);
      std::string next = stage("D" + n + "Done", "update");
      NetArc fact{f.relation, instantiate(f)};
      add_transition({prefix_ + "ExistsD" + n, {carrier_arc(cur), fact}, {}, {carrier_arc(next), {done, {bool_const(true)}}},
                      Guard::truth(), {}, Priority::High, LabelSpec::silent()},
                     "update");
      add_transition({prefix_ + "NotExistsD" + n, {carrier_arc(cur)}, {}, {carrier_arc(next), {done, {bool_const(false)}}},
                      Guard::truth(), {}, Priority::Low, LabelSpec::silent()},
                     "update");
      cur = next;
    };
    auto add_component = [&](std::size_t i) {
      const auto& f = action.adds[i];
      std::string n = std::to_string(i + 1);
      std::string done = prefix_ + "DoneA" + n;
      add_place(done, {TypeDomain::Bool}, PlaceClass::Aux, current_, "update");
      done_places.push_back(done);
      std::string next = stage("A" + n + "Done", "update");
      NetArc fact{f.relation, instantiate(f)};
      bool swap = mutate(MutationKind::SwapAddPriority);
      CpnTransition exists{prefix_ + "ExistsA" + n, {carrier_arc(cur)}, {fact}, {carrier_arc(next), {done, {bool_const(false)}}},
                           Guard::truth(), {}, swap ? Priority::Low : Priority::High, LabelSpec::silent()};
      if (mutate(MutationKind::ConsumeReadArc)) {
        exists.inputs.push_back(fact);
        exists.reads.clear();
      }
      add_transition(std::move(exists), "update");
      add_transition({prefix_ + "NotExistsA" + n, {carrier_arc(cur)}, {},
                      {carrier_arc(next), fact, {done, {bool_const(true)}}}, Guard::truth(), {},
                      swap ? Priority::High : Priority::Low, LabelSpec::silent()},
                     "update");
      cur = next;
    };
    if (!reorder) {
      for (std::size_t i = 0; i < action.dels.size(); ++i) del_component(i);
      for (std::size_t i = 0; i < action.adds.size(); ++i) add_component(i);
    } else {
      for (std::size_t i = 0; i < action.adds.size(); ++i) add_component(i);
      for (std::size_t i = 0; i < action.dels.size(); ++i) del_component(i);
    }
    return cur;
  }

  std::string check_net(std::string cur, const std::string& viol) {
    const auto& schema = *src_.schema;
    const auto& cs = schema.constraints;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      std::string n = std::to_string(i + 1);
      if (mutate(MutationKind::SkipConstraint)) continue;
      std::string next = stage("C" + n + "Ok", "check");
      const auto& c = cs[i];
      auto carrier_in = carrier_arc(cur);
      if (auto* pk = std::get_if<PrimaryKey>(&c)) {
        const auto& r = schema.relation(pk->relation);
        auto y = fresh_vars("__y", r.arity());
        auto w = fresh_vars("__w", r.arity());
        std::vector<Guard> same, differ;
        for (std::size_t j = 0; j < r.arity(); ++j) {
          bool key = std::count(pk->columns.begin(), pk->columns.end(), j) > 0;
          (key ? same : differ).push_back(Guard::literal({Predicate::Eq, y[j], w[j], !key}));
        }
        same.push_back(Guard::disjunction(std::move(differ)));
        bool consume = mutate(MutationKind::ConsumeReadArc);
        CpnTransition rep{prefix_ + "RepeatedKey" + n, {carrier_in}, {{r.name, y}, {r.name, w}}, {carrier_arc(viol)},
                          Guard::conjunction(std::move(same)), {}, Priority::High, LabelSpec::silent()};
        if (consume) {
          rep.inputs.push_back(rep.reads.front());
          rep.reads.erase(rep.reads.begin());
        }
        add_transition(std::move(rep), "check");
        add_transition({prefix_ + "NoRepeatedKey" + n, {carrier_in}, {}, {carrier_arc(next)}, Guard::truth(), {},
                        Priority::Low, LabelSpec::silent()},
                       "check");
      } else if (auto* d = std::get_if<DomainConstraint>(&c)) {
        const auto& r = schema.relation(d->relation);
        auto y = fresh_vars("__y", r.arity());
        std::vector<Guard> outside;
        for (const auto& v : d->allowed) outside.push_back(Guard::literal({Predicate::Eq, y[d->column], Term::constant(v), true}));
        CpnTransition wrong{prefix_ + "WrongValue" + n, {carrier_in}, {{r.name, y}}, {carrier_arc(viol)},
                            Guard::conjunction(std::move(outside)), {}, Priority::High, LabelSpec::silent()};
        if (mutate(MutationKind::ConsumeReadArc)) {
          wrong.inputs.push_back(wrong.reads.front());
          wrong.reads.clear();
        }
        add_transition(std::move(wrong), "check");
        add_transition({prefix_ + "NoWrongValue" + n, {carrier_in}, {}, {carrier_arc(next)}, Guard::truth(), {},
                        Priority::Low, LabelSpec::silent()},
                       "check");
      } else {
        fk_stage(std::get<ForeignKey>(c), n, cur, next, viol);
      }
      cur = next;
    }
    return cur;
  }

  // Iterated scan: every source token matched by a target token is parked in
  // Scanned; a leftover token means a violation. Parked tokens go back before
  // the stage hands on.
  void fk_stage(const ForeignKey& fk, const std::string& n, const std::string& cur, const std::string& next,
                const std::string& viol) {
    const auto& schema = *src_.schema;
    const auto& s = schema.relation(fk.source);
    const auto& tg = schema.relation(fk.target);
    auto y = fresh_vars("__y", s.arity());
    auto w = fresh_vars("__w", tg.arity());
    for (std::size_t j = 0; j < fk.source_columns.size(); ++j) w[fk.target_columns[j]] = y[fk.source_columns[j]];
    std::string scanned = prefix_ + "FK" + n + "Scanned";
    add_place(scanned, s.types(), PlaceClass::Aux, current_, "check");
    std::string failed = stage("FK" + n + "Failed", "check");
    std::string passed = stage("FK" + n + "Passed", "check");
    auto stage_read = carrier_arc(cur);
    auto silent = LabelSpec::silent();
    add_transition({prefix_ + "FKExists" + n, {{s.name, y}}, {stage_read, {tg.name, w}}, {{scanned, y}}, Guard::truth(),
                    {}, Priority::High, silent},
                   "check");
    if (fk.source == fk.target)
      add_transition({prefix_ + "FKExistsScanned" + n, {{s.name, y}}, {stage_read, {scanned, w}}, {{scanned, y}},
                      Guard::truth(), {}, Priority::High, silent},
                     "check");
    add_transition({prefix_ + "FKNotExists" + n, {carrier_arc(cur)}, {{s.name, y}}, {carrier_arc(failed)},
                    Guard::truth(), {}, Priority::Normal, silent},
                   "check");
    add_transition({prefix_ + "FKScanDone" + n, {carrier_arc(cur)}, {}, {carrier_arc(passed)}, Guard::truth(), {},
                    Priority::Low, silent},
                   "check");
    add_transition({prefix_ + "FKRestoreFailed" + n, {{scanned, y}}, {carrier_arc(failed)}, {{s.name, y}},
                    Guard::truth(), {}, Priority::High, silent},
                   "check");
    add_transition({prefix_ + "FKRestorePassed" + n, {{scanned, y}}, {carrier_arc(passed)}, {{s.name, y}},
                    Guard::truth(), {}, Priority::High, silent},
                   "check");
    add_transition({prefix_ + "FKViolated" + n, {carrier_arc(failed)}, {}, {carrier_arc(viol)}, Guard::truth(), {},
                    Priority::Low, silent},
                   "check");
    add_transition({prefix_ + "FKOk" + n, {carrier_arc(passed)}, {}, {carrier_arc(next)}, Guard::truth(), {},
                    Priority::Low, silent},
                   "check");
  }

  std::string undo_net(const Action& action, std::string cur) {
    auto bool_const = [](bool b) { return Term::constant(Value::boolean(b)); };
    auto silent = LabelSpec::silent();
    for (std::size_t i = action.adds.size(); i-- > 0;) {
      if (mutate(MutationKind::DropRevert)) continue;
      std::string n = std::to_string(i + 1);
      std::string next = stage("RA" + n + "Done", "undo");
      std::string done = prefix_ + "DoneA" + n;
      NetArc fact{action.adds[i].relation, instantiate(action.adds[i])};
      add_transition({prefix_ + "DoRevertA" + n, {carrier_arc(cur), {done, {bool_const(true)}}, fact}, {},
                      {carrier_arc(next)}, Guard::truth(), {}, Priority::Normal, silent},
                     "undo");
      add_transition({prefix_ + "SkipRevertA" + n, {carrier_arc(cur), {done, {bool_const(false)}}}, {},
                      {carrier_arc(next)}, Guard::truth(), {}, Priority::Normal, silent},
                     "undo");
      cur = next;
    }
    for (std::size_t i = action.dels.size(); i-- > 0;) {
      if (mutate(MutationKind::DropRevert)) continue;
      std::string n = std::to_string(i + 1);
      std::string next = stage("RD" + n + "Done", "undo");
      std::string done = prefix_ + "DoneD" + n;
      NetArc fact{action.dels[i].relation, instantiate(action.dels[i])};
      add_transition({prefix_ + "DoRevertD" + n, {carrier_arc(cur), {done, {bool_const(true)}}}, {},
                      {carrier_arc(next), fact}, Guard::truth(), {}, Priority::Normal, silent},
                     "undo");
      add_transition({prefix_ + "SkipRevertD" + n, {carrier_arc(cur), {done, {bool_const(false)}}}, {},
                      {carrier_arc(next)}, Guard::truth(), {}, Priority::Normal, silent},
                     "undo");
      cur = next;
    }
    return cur;
  }

  const DbNet& src_;
  const Snapshot& s0_;
  const TranslateOptions& opt_;
  TranslationOutput out_;
  std::set<std::string> transition_names_;
  std::map<MutationKind, std::size_t> counter_;
  std::string current_;
  std::string prefix_;
  std::vector<std::string> carrier_;
  std::map<std::string, TypeId> var_types_;
  std::map<std::string, Term> action_args_;
};

}  // namespace detail

inline TranslationOutput translate(const DbNet& net, const Snapshot& s0, const TranslateOptions& opt = {}) {
  return detail::Translator(net, s0, opt).run();
}

inline TranslationOutput translate(const DbNet& net, const TranslateOptions& opt = {}) {
  return translate(net, net.initial, opt);
}

}  // namespace dbnet
