#pragma once

// Command-line driver: validate, simulate, translate, statespace, certify and
// export-dot over .dbn (DB-net) and .cpn (ν-CPN) model files.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dbnet/dot.hpp"
#include "dbnet/dsl/elaborate.hpp"
#include "dbnet/dsl/parser.hpp"
#include "dbnet/equivalence.hpp"
#include "dbnet/translate.hpp"

namespace dbnet::cli {

/// Parses model text and rejects empty models and duplicate declarations.
inline dsl::ModelFile parse_model(std::string_view text) {
  auto m = dsl::parse_model_text(text);
  dsl::check_model(m);
  return m;
}

struct LoadedModel {
  std::optional<DbNet> dbnet;
  std::optional<NuCpn> cpn;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline LoadedModel load_model(const std::string& path, const dsl::ParamOverrides& params) {
  auto model = parse_model(read_file(path));
  LoadedModel out;
  if (dsl::is_cpn_path(path))
    out.cpn = dsl::elaborate_cpn(model, params);
  else
    out.dbnet = dsl::elaborate_dbnet(model, params);
  return out;
}

inline std::optional<Mutation> parse_mutation(std::string_view text) {
  auto colon = text.find(':');
  auto name = text.substr(0, colon);
  for (auto k : all_mutations()) {
    if (name != mutation_name(k)) continue;
    Mutation m{k, 0};
    if (colon != std::string_view::npos) m.site = std::stoul(std::string(text.substr(colon + 1)));
    return m;
  }
  return std::nullopt;
}

using LogFn = std::function<void(const std::string&)>;

struct Options {
  std::string model;
  std::uint64_t seed = 0;
  std::string fresh;
  std::size_t max_states = Limits{}.max_states;
  std::size_t max_depth = Limits{}.max_depth;
  unsigned jobs = 1;
  std::string output;
  std::optional<std::int64_t> users, products;
  std::vector<std::string> params;
  std::size_t steps = 20;
  std::string mutation;
  std::string dot;
};

namespace detail {

struct Failure {
  int code;
  std::string message;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Failure{2, "cannot write '" + path + "'"};
  f << text;
}

inline std::string stem_of(const std::string& path) {
  std::filesystem::path p(path);
  return (p.parent_path() / p.stem()).string();
}

class Driver {
 public:
  Driver(const Options& o, std::ostream& out, std::ostream& err, LogFn log)
      : o_(o), out_(out), err_(err), log_(std::move(log)) {}

  LoadedModel load() const {
    dsl::ParamOverrides params;
    if (o_.users) params["users"] = *o_.users;
    if (o_.products) params["products"] = *o_.products;
    for (const auto& p : o_.params) {
      auto eq = p.find('=');
      if (eq == std::string::npos) throw Failure{2, "--param expects name=value, got '" + p + "'"};
      try {
        params[p.substr(0, eq)] = std::stoll(p.substr(eq + 1));
      } catch (const std::exception&) {
        throw Failure{2, "--param " + p + ": value is not an integer"};
      }
    }
    auto m = load_model(o_.model, params);
    if (!o_.fresh.empty()) {
      try {
        if (m.dbnet) m.dbnet->policy.set_mode(o_.fresh);
        if (m.cpn) m.cpn->policy.set_mode(o_.fresh);
      } catch (const ValidationError& e) {
        throw Failure{2, std::string("--fresh: ") + e.what()};
      }
    }
    log("loaded " + o_.model);
    return m;
  }

  Limits limits() const { return {o_.max_states, o_.max_depth, std::max(1u, o_.jobs)}; }

  const DbNet& need_dbnet(const LoadedModel& m, const char* cmd) const {
    if (!m.dbnet) throw Failure{2, std::string(cmd) + " needs a DB-net (.dbn) model"};
    return *m.dbnet;
  }

  int validate_cmd() {
    auto m = load();
    std::vector<Violation> vs = m.dbnet ? validate(*m.dbnet) : cpn_validate(*m.cpn);
    for (const auto& v : vs) out_ << "violation: " << v.text() << "\n";
    out_ << (vs.empty() ? "valid" : "invalid") << "\n";
    return vs.empty() ? 0 : 1;
  }

  int simulate_cmd() {
    auto m = load();
    std::mt19937_64 rng(o_.seed);
    auto run = [&](auto& engine, auto state, auto&& text) {
      out_ << "seed " << o_.seed << "\n";
      std::size_t i = 0;
      for (; i < o_.steps; ++i) {
        auto steps = engine.successors(state);
        if (steps.empty()) {
          out_ << "deadlock after " << i << " steps\n";
          break;
        }
        auto& st = steps[rng() % steps.size()];
        out_ << "step " << (i + 1) << " " << (st.label.empty() ? epsilon_label() : st.label) << "\n";
        state = std::move(st.target);
      }
      out_ << "final " << text(state).body() << "\n";
    };
    if (m.dbnet) {
      require_valid(*m.dbnet);
      DbNetEngine engine(*m.dbnet, m.dbnet->policy);
      run(engine, m.dbnet->initial, [&](const Snapshot& s) { return snapshot_text(*m.dbnet, s); });
    } else {
      require_valid_cpn(*m.cpn);
      CpnEngine engine(*m.cpn, m.cpn->policy);
      run(engine, m.cpn->initial, [&](const Marking& s) { return marking_text(*m.cpn, s); });
    }
    return 0;
  }

  static void require_valid_cpn(const NuCpn& net) {
    auto vs = cpn_validate(net);
    if (!vs.empty()) throw ValidationError(vs.front().text());
  }

  TranslateOptions translate_options() const {
    TranslateOptions opt;
    if (!o_.mutation.empty()) {
      opt.mutation = parse_mutation(o_.mutation);
      if (!opt.mutation) throw Failure{2, "unknown mutation '" + o_.mutation + "'"};
    }
    return opt;
  }

  static std::string provenance_lines(const TranslationOutput& tr) {
    std::string s;
    for (const auto& p : tr.provenance) {
      nlohmann::ordered_json j;
      j["element"] = p.element;
      j["kind"] = p.is_place ? "place" : "transition";
      j["source"] = p.source;
      j["phase"] = p.phase;
      s += j.dump() + "\n";
    }
    return s;
  }

  int translate_cmd() {
    auto m = load();
    const auto& net = need_dbnet(m, "translate");
    TranslationOutput tr;
    try {
      tr = translate(net, translate_options());
    } catch (const UnsupportedError& e) {
      err_ << "rejected: " << e.what() << "\n";
      return 1;
    }
    auto dsl_text = dsl::print_cpn(tr.net);
    std::ostringstream dot;
    write_cpn_dot(dot, tr.net);
    auto prov = provenance_lines(tr);
    if (o_.output.empty()) {
      out_ << dsl_text << "\n" << dot.str() << "\n" << prov;
    } else {
      auto stem = stem_of(o_.output);
      write_text(o_.output, dsl_text);
      write_text(stem + ".dot", dot.str());
      write_text(stem + ".prov.jsonl", prov);
      out_ << "wrote " << o_.output << ", " << stem << ".dot, " << stem << ".prov.jsonl\n";
    }
    out_ << "places " << tr.net.places.size() << " transitions " << tr.net.transitions.size() << "\n";
    return 0;
  }

  int statespace_cmd() {
    auto m = load();
    std::ostringstream lts_text, dot;
    std::size_t states = 0, edges = 0;
    bool truncated = false;
    std::string why;
    auto t0 = std::chrono::steady_clock::now();
    auto emit = [&](const auto& lts, auto&& text) {
      write_lts(lts_text, lts, text);
      if (!o_.dot.empty()) write_lts_dot(dot, lts, text);
      states = lts.states.size();
      edges = lts.edges.size();
      truncated = lts.truncated;
      why = lts.truncation;
    };
    if (m.dbnet) {
      require_valid(*m.dbnet);
      auto lts = build_lts(*m.dbnet, m.dbnet->initial, m.dbnet->policy, limits());
      emit(lts, [&](const Snapshot& s) { return snapshot_text(*m.dbnet, s); });
    } else {
      require_valid_cpn(*m.cpn);
      auto lts = cpn_build_lts(*m.cpn, m.cpn->policy, limits());
      emit(lts, [&](const Marking& s) { return marking_text(*m.cpn, s); });
    }
    log("explored in " + elapsed(t0));
    if (o_.output.empty())
      out_ << lts_text.str();
    else
      write_text(o_.output, lts_text.str());
    if (!o_.dot.empty()) write_text(o_.dot, dot.str());
    out_ << "states " << states << " edges " << edges << " truncated " << (truncated ? "yes" : "no") << "\n";
    if (truncated) err_ << "truncated: " << why << "\n";
    return truncated ? 1 : 0;
  }

  int certify_cmd() {
    auto m = load();
    const auto& net = need_dbnet(m, "certify");
    auto opt = translate_options();
    require_translatable(net);
    auto t0 = std::chrono::steady_clock::now();
    auto c = certify_translation(net, net.initial, net.policy, limits(), opt);
    log("certified in " + elapsed(t0));
    const auto& r = c.result;
    std::ostringstream summary;
    summary << "fresh " << net.policy.mode_text() << "\n";
    summary << "seed " << o_.seed << "\n";
    if (opt.mutation)
      summary << "mutation " << mutation_name(opt.mutation->kind) << ":" << opt.mutation->site
              << (c.translation.mutation_applied ? "" : " (no such site)") << "\n";
    summary << "dbnet states " << c.dbnet_lts.states.size() << " edges " << c.dbnet_lts.edges.size() << " truncated "
            << (c.dbnet_lts.truncated ? "yes" : "no") << "\n";
    summary << "cpn states " << c.cpn_lts.states.size() << " edges " << c.cpn_lts.edges.size() << " truncated "
            << (c.cpn_lts.truncated ? "yes" : "no") << "\n";
    summary << "observation points " << r.observed_a << " " << r.observed_b << " blocks " << r.blocks << "\n";
    if (!r.reason.empty()) summary << "reason " << r.reason << "\n";
    summary << "verdict " << r.verdict() << "\n";
    out_ << summary.str();
    if (!o_.output.empty()) {
      const auto& prefix = o_.output;
      std::ostringstream a, b, cex;
      write_lts(a, c.dbnet_lts, [&](const Snapshot& s) { return snapshot_text(net, s); });
      write_lts(b, c.cpn_lts, [&](const Marking& s) { return marking_text(c.translation.net, s); });
      write_text(prefix + ".dbnet.lts", a.str());
      write_text(prefix + ".cpn.lts", b.str());
      write_text(prefix + ".result", summary.str());
      if (!r.bisimilar) {
        write_counterexample(cex, r);
        write_text(prefix + ".cex", cex.str());
      }
    } else if (!r.bisimilar) {
      write_counterexample(out_, r);
    }
    return r.bisimilar ? 0 : 1;
  }

  int export_dot_cmd() {
    auto m = load();
    std::ostringstream dot;
    if (m.dbnet)
      write_dbnet_dot(dot, *m.dbnet);
    else
      write_cpn_dot(dot, *m.cpn);
    if (o_.output.empty())
      out_ << dot.str();
    else
      write_text(o_.output, dot.str());
    return 0;
  }

 private:
  void log(const std::string& msg) const {
    if (log_) log_(msg);
  }
  static std::string elapsed(std::chrono::steady_clock::time_point t0) {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    return std::to_string(ms) + " ms";
  }

  const Options& o_;
  std::ostream& out_;
  std::ostream& err_;
  LogFn log_;
};

}  // namespace detail

/// Runs one command line (without the program name). Exit codes: 0 success,
/// 1 negative result (invalid model, rejection, truncation, not bisimilar),
/// 2 usage, syntax or I/O errors.
inline int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr, LogFn log = {}) {
  CLI::App app{"DB-net to ν-CPN translation toolkit", "dbnet"};
  app.require_subcommand(1);
  Options o;
  using Cmd = int (detail::Driver::*)();
  std::vector<std::pair<CLI::App*, Cmd>> commands;
  auto add = [&](const char* name, const char* help, Cmd fn) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("model", o.model, "model file (.dbn or .cpn)")->required();
    sub->add_option("--param", o.params, "override a model parameter, name=value");
    sub->add_option("--users", o.users, "shorthand for --param users=N");
    sub->add_option("--products", o.products, "shorthand for --param products=N");
    sub->add_option("--fresh", o.fresh, "fresh-value policy: unbounded, recycling or bounded:k");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("-o,--output", o.output, "output path");
    commands.emplace_back(sub, fn);
    return sub;
  };
  auto limits = [&](CLI::App* sub) {
    sub->add_option("--max-states", o.max_states, "state limit");
    sub->add_option("--max-depth", o.max_depth, "depth limit");
    sub->add_option("--jobs", o.jobs, "worker threads for exploration");
  };
  add("validate", "check a model for well-formedness", &detail::Driver::validate_cmd);
  add("simulate", "fire random enabled bindings", &detail::Driver::simulate_cmd)
      ->add_option("--steps", o.steps, "number of firings");
  add("translate", "translate a DB-net into a ν-CPN", &detail::Driver::translate_cmd)
      ->add_option("--mutation", o.mutation, "inject a translation defect, kind[:site]");
  auto* ss = add("statespace", "explore the reachable state space", &detail::Driver::statespace_cmd);
  limits(ss);
  ss->add_option("--dot", o.dot, "also write the LTS as DOT");
  auto* cert = add("certify", "check the translation for weak bisimilarity", &detail::Driver::certify_cmd);
  limits(cert);
  cert->add_option("--mutation", o.mutation, "inject a translation defect, kind[:site]");
  add("export-dot", "render the net as DOT", &detail::Driver::export_dot_cmd);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  detail::Driver driver(o, out, err, std::move(log));
  try {
    for (auto& [sub, fn] : commands)
      if (sub->parsed()) return (driver.*fn)();
  } catch (const detail::Failure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  } catch (const ValidationError& e) {
    err << "invalid: " << e.what() << "\n";
    return 1;
  } catch (const SchemaError& e) {
    err << "invalid: " << e.what() << "\n";
    return 1;
  } catch (const TypeError& e) {
    err << "invalid: " << e.what() << "\n";
    return 1;
  } catch (const UnsupportedError& e) {
    err << "rejected: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace dbnet::cli
