// Acceptance gate: one PASS/FAIL line per criterion.
// usage: acceptance <path-to-dbnet-cli> <scratch-dir>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dbnet/cli.hpp"
#include "dbnet/equivalence.hpp"
#include "dbnet/fo_oracle.hpp"
#include "dbnet/query.hpp"

using namespace dbnet;
namespace fs = std::filesystem;

namespace {

const std::string models = DBNET_MODELS;
constexpr std::size_t state_cap = 100'000;

struct Config {
  std::string model;
  dsl::ParamOverrides params;
  std::string fresh;

  std::string text() const {
    std::string s = fs::path(model).stem().string();
    for (const auto& [k, v] : params) s += " " + k + "=" + std::to_string(v);
    return s + " " + fresh;
  }
};

struct Certified {
  Config config;
  DbNet net;
  CertifyResult result;
  double seconds = 0;
};

DbNet load(const Config& c) {
  auto m = cli::load_model(models + "/" + c.model, c.params);
  m.dbnet->policy.set_mode(c.fresh);
  return *m.dbnet;
}

Certified certify(const Config& c, const TranslateOptions& opt = {}) {
  Certified out{c, load(c), {}, 0};
  auto t0 = std::chrono::steady_clock::now();
  out.result = certify_translation(out.net, out.net.initial, out.net.policy, Limits{state_cap, SIZE_MAX, 1}, opt);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void report(int n, bool ok, const std::string& what, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << n << ": " << what << " -- " << detail << std::endl;
}

// ---------------------------------------------------------------------------
// Constraint checks written directly over tuples.

bool constraints_hold(const Instance& inst, std::string& why) {
  const auto& schema = inst.schema();
  for (const auto& c : schema.constraints) {
    if (auto* pk = std::get_if<PrimaryKey>(&c)) {
      auto ts = inst.tuples(pk->relation);
      for (std::size_t i = 0; i < ts.size(); ++i)
        for (std::size_t j = i + 1; j < ts.size(); ++j) {
          bool same = true;
          for (auto k : pk->columns) same = same && ts[i][k] == ts[j][k];
          if (same) {
            why = "key of " + pk->relation + " repeated by " + tuple_text(ts[i]) + " and " + tuple_text(ts[j]);
            return false;
          }
        }
    } else if (auto* fk = std::get_if<ForeignKey>(&c)) {
      auto targets = inst.tuples(fk->target);
      for (const auto& t : inst.tuples(fk->source)) {
        bool found = std::any_of(targets.begin(), targets.end(), [&](const Tuple& u) {
          for (std::size_t k = 0; k < fk->source_columns.size(); ++k)
            if (!(t[fk->source_columns[k]] == u[fk->target_columns[k]])) return false;
          return true;
        });
        if (!found) {
          why = fk->source + tuple_text(t) + " has no match in " + fk->target;
          return false;
        }
      }
    } else if (auto* d = std::get_if<DomainConstraint>(&c)) {
      for (const auto& t : inst.tuples(d->relation))
        if (std::find(d->allowed.begin(), d->allowed.end(), t[d->column]) == d->allowed.end()) {
          why = d->relation + tuple_text(t) + " has a value outside the allowed domain";
          return false;
        }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Random UCQ≠ queries and a brute-force evaluator over the active domain.

struct RandomQueries {
  std::mt19937_64 rng{20240611};

  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng() % n); }
  bool coin() { return rng() & 1; }

  Value random_value(TypeId t) {
    if (t == TypeDomain::Int) return Value::integer(static_cast<std::int64_t>(pick(3)));
    static const char* names[] = {"a", "b", "c"};
    return Value::string(names[pick(3)]);
  }

  std::shared_ptr<Schema> schema() {
    auto s = std::make_shared<Schema>();
    auto n = 1 + pick(3);
    for (std::size_t r = 0; r < n; ++r) {
      RelationSchema rs{"R" + std::to_string(r), {}};
      auto arity = 1 + pick(3);
      for (std::size_t a = 0; a < arity; ++a)
        rs.attributes.push_back({"a" + std::to_string(a), coin() ? TypeDomain::Int : TypeDomain::String, false});
      s->add_relation(rs);
    }
    return s;
  }

  Instance instance(const std::shared_ptr<Schema>& s) {
    Instance inst(s);
    for (std::uint32_t r = 0; r < s->relations.size(); ++r) {
      auto n = pick(6);
      for (std::size_t i = 0; i < n; ++i) {
        Tuple t;
        for (auto ty : s->relation(r).types()) t.push_back(random_value(ty));
        inst.insert(r, t);
      }
    }
    return inst;
  }

  std::string var_name(TypeId t, std::size_t i) { return (t == TypeDomain::Int ? "i" : "s") + std::to_string(i); }

  std::optional<UcqQuery> query(const Schema& s) {
    UcqQuery q{"Q", {}, {}};
    auto nfree = pick(3);
    for (std::size_t i = 0; i < nfree; ++i) {
      auto t = coin() ? TypeDomain::Int : TypeDomain::String;
      auto name = var_name(t, i);
      if (std::none_of(q.free_vars.begin(), q.free_vars.end(), [&](const TypedVar& v) { return v.name == name; }))
        q.free_vars.push_back({name, t});
    }
    auto ndis = 1 + pick(2);
    for (std::size_t d = 0; d < ndis; ++d) {
      std::optional<Conjunct> found;
      for (int attempt = 0; attempt < 50 && !found; ++attempt) {
        Conjunct c;
        std::map<std::string, TypeId> seen;
        auto natoms = 1 + pick(3);
        for (std::size_t a = 0; a < natoms; ++a) {
          const auto& rel = s.relations[pick(s.relations.size())];
          Atom atom{rel.name, {}};
          for (auto ty : rel.types()) {
            if (pick(5) == 0) {
              atom.args.push_back(Term::constant(random_value(ty)));
            } else {
              auto name = var_name(ty, pick(3));
              seen[name] = ty;
              atom.args.push_back(Term::variable(name));
            }
          }
          c.atoms.push_back(atom);
        }
        bool safe = std::all_of(q.free_vars.begin(), q.free_vars.end(), [&](const TypedVar& v) { return seen.count(v.name); });
        if (!safe) continue;
        std::vector<std::pair<std::string, TypeId>> vars(seen.begin(), seen.end());
        auto nfilters = vars.empty() ? 0 : pick(3);
        for (std::size_t f = 0; f < nfilters; ++f) {
          auto [x, tx] = vars[pick(vars.size())];
          Term rhs = Term::constant(random_value(tx));
          std::vector<std::string> same;
          for (const auto& [y, ty] : vars)
            if (ty == tx) same.push_back(y);
          if (coin()) rhs = Term::variable(same[pick(same.size())]);
          c.filters.push_back({Predicate::Eq, Term::variable(x), rhs, coin()});
        }
        found = c;
      }
      if (!found) return std::nullopt;
      q.disjuncts.push_back(*found);
    }
    infer_existentials(s, q);
    if (!query_problems(s, q).empty()) return std::nullopt;
    return q;
  }
};

std::set<Tuple> brute_force(const UcqQuery& q, const Instance& inst) {
  std::set<Tuple> rows;
  for (const auto& c : q.disjuncts) {
    std::vector<TypedVar> vars = q.free_vars;
    for (const auto& e : c.existentials) vars.push_back(e);
    std::map<TypeId, std::vector<Value>> domain;
    for (const auto& v : vars) {
      if (domain.count(v.type)) continue;
      auto ad = active_domain(inst, v.type);
      for (const auto& a : c.atoms)
        for (const auto& t : a.args)
          if (!t.is_var() && t.value.type() == v.type) ad.insert(t.value);
      for (const auto& f : c.filters)
        for (const auto* t : {&f.lhs, &f.rhs})
          if (!t->is_var() && t->value.type() == v.type) ad.insert(t->value);
      domain[v.type].assign(ad.begin(), ad.end());
    }
    Substitution theta;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == vars.size()) {
        for (const auto& a : c.atoms)
          if (!inst.contains(a.relation, resolve_terms(a.args, theta))) return;
        for (const auto& f : c.filters) {
          bool eq = resolve_term(f.lhs, theta) == resolve_term(f.rhs, theta);
          if (eq == f.negated) return;
        }
        Tuple row;
        for (const auto& v : q.free_vars) row.push_back(theta.at(v.name));
        rows.insert(row);
        return;
      }
      for (const auto& val : domain[vars[i].type]) {
        theta[vars[i].name] = val;
        rec(i + 1);
      }
      theta.erase(vars[i].name);
    };
    rec(0);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Marking checks for translated nets.

std::set<std::uint32_t> slots_of(const TranslationOutput& tr, PlaceClass c) {
  std::set<std::uint32_t> out;
  for (std::uint32_t i = 0; i < tr.net.places.size(); ++i)
    if (tr.net.places[i].cls == c) out.insert(i);
  return out;
}

std::string phase_of(const TranslationOutput& tr, const std::string& element) {
  for (const auto& p : tr.provenance)
    if (!p.is_place && p.element == element) return p.phase;
  return "";
}

std::size_t tokens_on(const Marking& m, std::uint32_t slot) {
  std::size_t n = 0;
  for (const auto& e : m.range(slot)) n += e.count;
  return n;
}

bool run(const std::string& cmd) { return std::system(cmd.c_str()) == 0; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <dbnet-cli> <scratch-dir>\n";
    return 2;
  }
  const std::string cli_path = argv[1];
  const fs::path scratch = argv[2];
  fs::create_directories(scratch);
  int failures = 0;
  auto record = [&](int n, bool ok, const std::string& what, const std::string& detail) {
    report(n, ok, what, detail);
    if (!ok) ++failures;
  };

  // 1. Certification of the shopping-cart grid.
  std::vector<Certified> corpus;
  {
    bool ok = true;
    std::string bad;
    double total = 0, slowest = 0;
    std::size_t biggest = 0;
    for (std::int64_t users : {1, 2})
      for (std::int64_t products : {1, 2})
        for (const char* fresh : {"bounded:1", "recycling"}) {
          Config c{"shopping-cart.dbn", {{"users", users}, {"products", products}}, fresh};
          auto cert = certify(c);
          const auto& r = cert.result.result;
          auto address = cert.net.schema->types.find("address");
          auto* dest = address ? cert.net.policy.sample(*address) : nullptr;
          std::size_t na = cert.result.dbnet_lts.states.size(), nb = cert.result.cpn_lts.states.size();
          bool good = r.bisimilar && r.verified && dest && dest->size() == 1 && na <= state_cap && nb <= state_cap &&
                      !cert.result.dbnet_lts.truncated && !cert.result.cpn_lts.truncated && cert.seconds <= 120;
          if (!good && bad.empty()) bad = c.text() + ": " + r.verdict() + " " + r.reason;
          ok = ok && good;
          total += cert.seconds;
          slowest = std::max(slowest, cert.seconds);
          biggest = std::max({biggest, na, nb});
          corpus.push_back(std::move(cert));
        }
    std::ostringstream d;
    d << corpus.size() << " configurations bisimilar, largest LTS " << biggest << " states, slowest " << slowest
      << " s, total " << total << " s";
    record(1, ok, "shopping-cart certification (users 1-2, products 1-2, bounded:1 and recycling)",
           ok ? d.str() : bad);
  }
  for (std::int64_t desks : {1, 2}) corpus.push_back(certify({"staff-desk.dbn", {{"desks", desks}}, "recycling"}));

  // 2. Mutation kill.
  {
    std::vector<Config> targets{{"shopping-cart.dbn", {{"users", 1}, {"products", 1}}, "bounded:1"},
                                {"shopping-cart.dbn", {{"users", 2}, {"products", 1}}, "bounded:1"},
                                {"staff-desk.dbn", {{"desks", 1}}, "recycling"}};
    bool ok = true;
    std::string detail;
    for (auto kind : all_mutations()) {
      std::string killed;
      for (const auto& c : targets) {
        for (std::size_t site = 0; killed.empty(); ++site) {
          auto cert = certify(c, TranslateOptions{Mutation{kind, site}});
          if (!cert.result.translation.mutation_applied) break;
          const auto& r = cert.result.result;
          if (!r.bisimilar && !r.trace.empty() && !r.witness_label.empty() && r.reason.rfind("refused", 0) != 0)
            killed = c.text() + " site " + std::to_string(site) + " (trace of " + std::to_string(r.trace.size()) +
                     " steps)";
        }
        if (!killed.empty()) break;
      }
      if (killed.empty()) ok = false;
      detail += std::string(detail.empty() ? "" : "; ") + mutation_name(kind) + ": " +
                (killed.empty() ? "SURVIVED" : killed);
    }
    record(2, ok, "each translation mutation yields not-bisimilar with a witness trace", detail);
  }

  // 3. Random UCQ≠ queries against the FO evaluator and a brute-force oracle.
  {
    RandomQueries gen;
    std::size_t checked = 0, agree = 0;
    std::string first_bad;
    while (checked < 1000) {
      auto schema = gen.schema();
      auto q = gen.query(*schema);
      if (!q) continue;
      auto inst = gen.instance(schema);
      auto fast = eval_ucq(*q, inst);
      auto fo = eval_fo_oracle(to_fo(*q), q->free_vars, inst);
      auto brute = brute_force(*q, inst);
      ++checked;
      if (fast.rows == fo.rows && fast.rows == brute) {
        ++agree;
      } else if (first_bad.empty()) {
        first_bad = "disagreement on query over " + std::to_string(schema->relations.size()) + " relations";
      }
    }
    record(3, agree == checked, "random UCQ≠ queries agree with the FO oracle",
           std::to_string(agree) + "/" + std::to_string(checked) + " agree" + (first_bad.empty() ? "" : "; " + first_bad));
  }

  // 4. Transactionality over every explored DB-net state space.
  {
    std::size_t states = 0, rollbacks = 0, violations = 0;
    std::string first;
    for (const auto& c : corpus) {
      const auto& lts = c.result.dbnet_lts;
      for (const auto& s : lts.states) {
        ++states;
        std::string why;
        if (!constraints_hold(s.instance, why)) {
          ++violations;
          if (first.empty()) first = c.config.text() + ": " + why;
        }
      }
      for (const auto& e : lts.edges) {
        const auto& label = lts.labels[e.label];
        if (label.size() < 9 || label.compare(label.size() - 9, 9, "/rollback") != 0) continue;
        ++rollbacks;
        if (!(lts.states[e.from].instance == lts.states[e.to].instance)) {
          ++violations;
          if (first.empty()) first = c.config.text() + ": rollback " + label + " changed the facts";
        }
      }
    }
    record(4, violations == 0, "constraints hold everywhere and rollbacks leave facts unchanged",
           std::to_string(states) + " states, " + std::to_string(rollbacks) + " rollback edges, " +
               std::to_string(violations) + " violations" + (first.empty() ? "" : "; " + first));
  }

  // 5. Set semantics on relation places and priority discipline.
  {
    std::size_t markings = 0, firings = 0, violations = 0;
    std::string first;
    for (const auto& c : corpus) {
      const auto& tr = c.result.translation;
      const auto& lts = c.result.cpn_lts;
      auto relation_slots = slots_of(tr, PlaceClass::Relation);
      CpnEngine engine(tr.net, c.net.policy, tr.label_map);
      auto off = lts.out_offsets();
      for (std::uint32_t s = 0; s < lts.states.size(); ++s) {
        const auto& m = lts.states[s];
        ++markings;
        for (auto slot : relation_slots)
          for (const auto& e : m.range(slot))
            if (e.count != 1) {
              ++violations;
              if (first.empty()) first = c.config.text() + ": duplicate " + fact_text(tr.net.places[slot].name, e.tuple());
            }
        if (off[s] == off[s + 1]) continue;
        int top = -1;
        for (const auto& b : engine.token_enabled(m))
          top = std::max(top, static_cast<int>(tr.net.transitions[b.transition].priority));
        for (auto i = off[s]; i < off[s + 1]; ++i) {
          const auto& e = lts.edges[i];
          ++firings;
          if (static_cast<int>(tr.net.transitions[e.transition].priority) < top) {
            ++violations;
            if (first.empty())
              first = c.config.text() + ": " + tr.net.transitions[e.transition].name + " fired beside a higher priority";
          }
        }
      }
    }
    record(5, violations == 0, "relation places stay duplicate-free and no lower priority fires over a higher one",
           std::to_string(markings) + " markings, " + std::to_string(firings) + " firings, " +
               std::to_string(violations) + " violations" + (first.empty() ? "" : "; " + first));
  }

  // 6. ε-convergence inside gadgets.
  {
    std::size_t interior_total = 0, violations = 0;
    std::string first;
    auto fail = [&](const std::string& why) {
      ++violations;
      if (first.empty()) first = why;
    };
    for (const auto& c : corpus) {
      const auto& tr = c.result.translation;
      const auto& lts = c.result.cpn_lts;
      auto lock = *tr.net.place_index(tr.lock_place);
      auto off = lts.out_offsets();
      auto interior = [&](std::uint32_t s) { return lts.states[s].empty(lock); };
      std::vector<std::uint32_t> indeg(lts.states.size(), 0);
      for (std::uint32_t s = 0; s < lts.states.size(); ++s) {
        if (!interior(s)) continue;
        ++interior_total;
        if (off[s] == off[s + 1]) fail(c.config.text() + ": interior marking without successors");
        for (auto i = off[s]; i < off[s + 1]; ++i) {
          const auto& e = lts.edges[i];
          const auto& name = tr.net.transitions[e.transition].name;
          auto phase = phase_of(tr, name);
          bool exit = !interior(e.to);
          bool commit_or_rollback = e.label != 0;
          if (exit && !(commit_or_rollback || phase == "cancel"))
            fail(c.config.text() + ": " + name + " leaves a gadget without commit, rollback or cancel");
          if (!exit && e.label != 0) fail(c.config.text() + ": observable " + name + " stays inside a gadget");
          if (!exit) ++indeg[e.to];
        }
      }
      // Kahn's algorithm over the interior subgraph: leftovers lie on a cycle.
      std::vector<std::uint32_t> work;
      for (std::uint32_t s = 0; s < lts.states.size(); ++s)
        if (interior(s) && indeg[s] == 0) work.push_back(s);
      std::size_t removed = 0;
      while (!work.empty()) {
        auto s = work.back();
        work.pop_back();
        ++removed;
        for (auto i = off[s]; i < off[s + 1]; ++i) {
          auto t = lts.edges[i].to;
          if (interior(t) && --indeg[t] == 0) work.push_back(t);
        }
      }
      std::size_t count = 0;
      for (std::uint32_t s = 0; s < lts.states.size(); ++s) count += interior(s);
      if (removed != count) fail(c.config.text() + ": ε-cycle among " + std::to_string(count - removed) + " markings");
    }
    record(6, violations == 0, "every ε-path inside a gadget ends in commit, cancel or rollback",
           std::to_string(interior_total) + " interior markings, " + std::to_string(violations) + " violations" +
               (first.empty() ? "" : "; " + first));
  }

  // 7. Lock exclusion.
  {
    std::size_t markings = 0, violations = 0;
    std::string first;
    for (const auto& c : corpus) {
      const auto& tr = c.result.translation;
      auto lock = *tr.net.place_index(tr.lock_place);
      auto aux = slots_of(tr, PlaceClass::Aux);
      for (const auto& m : c.result.cpn_lts.states) {
        ++markings;
        auto locks = tokens_on(m, lock);
        bool busy = std::any_of(aux.begin(), aux.end(), [&](std::uint32_t s) { return !m.empty(s); });
        if (locks > 1 || (locks == 1) == busy) {
          ++violations;
          if (first.empty()) first = c.config.text() + ": " + marking_text(tr.net, m).body();
        }
      }
    }
    record(7, violations == 0, "lock token present exactly when no gadget is in progress",
           std::to_string(markings) + " markings, " + std::to_string(violations) + " violations" +
               (first.empty() ? "" : "; " + first));
  }

  // 8. Determinism of the command-line tool.
  {
    const std::string model = models + "/shopping-cart.dbn";
    bool ok = true;
    std::string detail;
    std::vector<fs::path> dirs;
    for (const char* jobs : {"1", "1", "4"}) {
      auto dir = scratch / ("run" + std::to_string(dirs.size()));
      fs::remove_all(dir);
      fs::create_directories(dir);
      auto prefix = (dir / "cert").string();
      std::string cmd = "\"" + cli_path + "\" certify \"" + model +
                        "\" --users 2 --products 1 --fresh recycling --seed 42 --jobs " + jobs + " -o \"" + prefix +
                        "\" > \"" + (dir / "stdout").string() + "\"";
      std::string sim = "\"" + cli_path + "\" simulate \"" + model + "\" --users 2 --products 2 --seed 42 --steps 30 > \"" +
                        (dir / "simulate").string() + "\"";
      if (!run(cmd) || !run(sim)) {
        ok = false;
        detail = "command failed: " + cmd;
      }
      dirs.push_back(dir);
    }
    std::size_t compared = 0;
    for (const char* f : {"cert.dbnet.lts", "cert.cpn.lts", "cert.result", "stdout", "simulate"}) {
      auto ref = slurp(dirs[0] / f);
      if (ref.empty()) ok = false;
      for (std::size_t i = 1; i < dirs.size(); ++i) {
        ++compared;
        if (slurp(dirs[i] / f) != ref) {
          ok = false;
          if (detail.empty()) detail = std::string(f) + " differs between runs";
        }
      }
    }
    if (detail.empty()) detail = std::to_string(compared) + " file comparisons byte-identical (3 runs, seed 42)";
    record(8, ok, "identical seeds give byte-identical LTS and result files", detail);
  }

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
