#pragma once

// Graphviz renderings of DB-nets and ν-CPNs.

#include <ostream>
#include <string>

#include "dbnet/dbnet.hpp"
#include "dbnet/nucpn.hpp"

namespace dbnet {

namespace detail {

inline std::string color_text(const TypeDomain& types, const std::vector<TypeId>& c) {
  std::string s = "(";
  for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + types.name(c[i]);
  return s + ")";
}

inline void dot_arc(std::ostream& os, const std::string& from, const std::string& to, const std::vector<Term>& terms,
                    std::string_view style = "") {
  os << "  \"" << dot_escape(from) << "\" -> \"" << dot_escape(to) << "\" [label=\"" << dot_escape(terms_text(terms))
     << "\"" << style << "];\n";
}

}  // namespace detail

inline void write_dbnet_dot(std::ostream& os, const DbNet& net) {
  using detail::dot_arc;
  const auto& types = net.schema->types;
  os << "digraph dbnet {\n  rankdir=LR;\n  node [fontsize=10];\n";
  for (const auto& p : net.places)
    os << "  \"p:" << dot_escape(p.name) << "\" [shape=circle, label=\"" << dot_escape(p.name) << "\\n"
       << dot_escape(detail::color_text(types, p.color)) << "\"];\n";
  for (const auto& v : net.views)
    os << "  \"p:" << dot_escape(v.name) << "\" [shape=doublecircle, label=\"" << dot_escape(v.name) << "\\n:= "
       << dot_escape(v.query) << "\"];\n";
  for (const auto& t : net.transitions) {
    std::string label = t.name;
    if (!t.guard.is_true()) label += "\\n[" + dot_escape(t.guard.text()) + "]";
    if (t.action) label += "\\n" + dot_escape(t.action->action + terms_text(t.action->args));
    os << "  \"t:" << dot_escape(t.name) << "\" [shape=box, label=\"" << label << "\"];\n";
    for (const auto& a : t.inputs) dot_arc(os, "p:" + a.place, "t:" + t.name, a.terms);
    for (const auto& a : t.reads) dot_arc(os, "p:" + a.place, "t:" + t.name, a.terms, ", style=dashed, arrowhead=none");
    for (const auto& a : t.outputs) dot_arc(os, "t:" + t.name, "p:" + a.place, a.terms);
    for (const auto& a : t.rollbacks) dot_arc(os, "t:" + t.name, "p:" + a.place, a.terms, ", color=red, style=dotted");
  }
  os << "}\n";
}

inline void write_cpn_dot(std::ostream& os, const NuCpn& net) {
  using detail::dot_arc;
  os << "digraph nucpn {\n  rankdir=LR;\n  node [fontsize=10];\n";
  for (const auto& p : net.places) {
    const char* shape = p.cls == PlaceClass::Relation ? "cylinder" : p.cls == PlaceClass::Lock ? "octagon" : "circle";
    os << "  \"p:" << dot_escape(p.name) << "\" [shape=" << shape << ", label=\"" << dot_escape(p.name) << "\\n"
       << dot_escape(detail::color_text(net.types, p.color)) << "\"];\n";
  }
  for (const auto& t : net.transitions) {
    std::string label = t.name;
    if (t.priority != Priority::Normal) label += std::string(" «") + priority_name(t.priority) + "»";
    if (!t.guard.is_true()) label += "\\n[" + dot_escape(t.guard.text()) + "]";
    const char* fill = t.label.kind == LabelSpec::Kind::Observable ? ", style=filled, fillcolor=lightgrey" : "";
    os << "  \"t:" << dot_escape(t.name) << "\" [shape=box, label=\"" << label << "\"" << fill << "];\n";
    for (const auto& a : t.inputs) dot_arc(os, "p:" + a.place, "t:" + t.name, a.terms);
    for (const auto& a : t.reads) dot_arc(os, "p:" + a.place, "t:" + t.name, a.terms, ", style=dashed, arrowhead=none");
    for (const auto& a : t.outputs) dot_arc(os, "t:" + t.name, "p:" + a.place, a.terms);
  }
  os << "}\n";
}

}  // namespace dbnet
