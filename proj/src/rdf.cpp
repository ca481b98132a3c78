#include "placeorigin/rdf.hpp"

#include <algorithm>

#include "placeorigin/error.hpp"
#include "placeorigin/xml.hpp"

namespace placeorigin::rdf {

PrefixMap PrefixMap::defaults() {
  PrefixMap pm;
  pm.add("rdf", std::string(kRdfNs));
  pm.add("rdfs", std::string(kRdfsNs));
  pm.add("xsd", std::string(kXsdNs));
  pm.add("owl", "http://www.w3.org/2002/07/owl#");
  pm.add("foaf", "http://xmlns.com/foaf/0.1/");
  pm.add("geo", "http://www.w3.org/2003/01/geo/wgs84_pos#");
  pm.add("georss", "http://www.georss.org/georss/");
  pm.add("dct", "http://purl.org/dc/terms/");
  pm.add("dbo", "http://dbpedia.org/ontology/");
  pm.add("dbp", "http://dbpedia.org/property/");
  pm.add("dbr", "http://dbpedia.org/resource/");
  return pm;
}

void PrefixMap::add(std::string prefix, std::string ns) {
  if (!xml::is_ncname(prefix)) {
    throw Error(ErrorCode::InvalidArgument, "prefix '" + prefix + "' is not an NCName");
  }
  const auto p = by_prefix_.find(prefix);
  const auto n = by_ns_.find(ns);
  if (p != by_prefix_.end() && n != by_ns_.end() && p->second == ns) return;
  if (p != by_prefix_.end()) {
    throw Error(ErrorCode::InvalidArgument, "prefix '" + prefix + "' already bound");
  }
  if (n != by_ns_.end()) {
    throw Error(ErrorCode::InvalidArgument, "namespace <" + ns + "> already bound");
  }
  by_ns_.emplace(ns, prefix);
  by_prefix_.emplace(std::move(prefix), std::move(ns));
}

std::optional<std::string> PrefixMap::namespace_of(std::string_view prefix) const {
  const auto it = by_prefix_.find(prefix);
  if (it == by_prefix_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> PrefixMap::prefix_of(std::string_view ns) const {
  const auto it = by_ns_.find(ns);
  if (it == by_ns_.end()) return std::nullopt;
  return it->second;
}

bool PrefixMap::has_prefix(std::string_view prefix) const {
  return by_prefix_.find(prefix) != by_prefix_.end();
}

std::optional<std::pair<std::string, std::string>> PrefixMap::longest_match(
    std::string_view iri) const {
  std::optional<std::pair<std::string, std::string>> best;
  for (const auto& [ns, prefix] : by_ns_) {
    if (ns.size() < iri.size() && iri.starts_with(ns) &&
        (!best || ns.size() > best->second.size())) {
      best = std::make_pair(prefix, ns);
    }
  }
  return best;
}

std::string PrefixMap::compact(std::string_view iri) const {
  if (const auto m = longest_match(iri)) {
    return m->first + ":" + std::string(iri.substr(m->second.size()));
  }
  return std::string(iri);
}

void sort_unique(std::vector<Triple>& triples) {
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
}

namespace {

std::string namespace_guess(std::string_view iri) {
  const auto cut = iri.find_last_of("/#");
  if (cut == std::string_view::npos || cut + 1 >= iri.size()) return std::string(iri);
  return std::string(iri.substr(0, cut + 1));
}

}  // namespace

Compactor::Compactor(const std::vector<Triple>& triples, const PrefixMap& pm) : pm_(pm) {
  if (!pm_.prefix_of(kRdfNs)) pm_.add("rdf", std::string(kRdfNs));
  if (pm_.prefix_of(kRdfNs) != "rdf") {
    throw Error(ErrorCode::InvalidArgument, "prefix map must bind rdf to the RDF namespace");
  }
  xmlns_.emplace("rdf", std::string(kRdfNs));

  for (const auto& t : triples) {
    if (qnames_.contains(t.predicate)) continue;
    std::string ns;
    std::string local;
    if (const auto m = pm_.longest_match(t.predicate);
        m && xml::is_ncname(std::string_view(t.predicate).substr(m->second.size()))) {
      ns = m->second;
      local = t.predicate.substr(ns.size());
    } else {
      // Shortest namespace whose remainder is a valid NCName.
      std::size_t k = 0;
      for (; k < t.predicate.size(); ++k) {
        if (xml::is_ncname(std::string_view(t.predicate).substr(k))) break;
      }
      if (k == 0 || k >= t.predicate.size()) {
        throw Error(ErrorCode::InvalidArgument,
                    "predicate <" + t.predicate + "> has no RDF/XML element form");
      }
      ns = t.predicate.substr(0, k);
      local = t.predicate.substr(k);
    }
    const auto prefix = assign(ns);
    xmlns_.emplace(prefix, ns);
    qnames_.emplace(t.predicate, prefix + ":" + local);
  }

  auto note_node = [&](const std::string& iri) {
    if (iri.starts_with("_:")) return;
    std::string ns;
    if (const auto m = pm_.longest_match(iri)) {
      ns = m->second;
    } else {
      ns = namespace_guess(iri);
      if (ns == iri) return;  // nothing to factor out; written in full
    }
    entities_.emplace(assign(ns), ns);
  };
  for (const auto& t : triples) {
    note_node(t.subject);
    if (t.object_kind == TermKind::iri) note_node(t.object);
    if (t.object_kind == TermKind::literal && t.object_datatype && !t.object_lang) {
      note_node(*t.object_datatype);
    }
  }
}

std::string Compactor::assign(std::string_view ns) {
  if (auto p = pm_.prefix_of(ns)) return *p;
  std::string prefix;
  do {
    prefix = "ns" + std::to_string(++generated_);
  } while (pm_.has_prefix(prefix));
  pm_.add(prefix, std::string(ns));
  return prefix;
}

const std::string& Compactor::predicate_qname(const std::string& iri) const {
  return qnames_.at(iri);
}

std::string Compactor::attribute_iri(std::string_view iri) const {
  if (const auto m = pm_.longest_match(iri); m && entities_.contains(m->first)) {
    return "&" + m->first + ";" + xml::escape_attribute(iri.substr(m->second.size()));
  }
  return xml::escape_attribute(iri);
}

namespace {

std::string entity_value(std::string_view ns) {
  std::string out;
  for (char c : ns) {
    switch (c) {
      case '&': out += "&#38;"; break;
      case '%': out += "&#37;"; break;
      case '"': out += "&#34;"; break;
      case '<': out += "&#60;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

void render_description(std::string& out, const Compactor& c,
                        const std::vector<Triple>& triples, std::size_t begin,
                        std::size_t end) {
  const auto& s = triples[begin].subject;
  out += "  <rdf:Description ";
  if (s.starts_with("_:")) {
    out += "rdf:nodeID=\"" + xml::escape_attribute(s.substr(2)) + "\"";
  } else {
    out += "rdf:about=\"" + c.attribute_iri(s) + "\"";
  }
  out += ">\n";
  for (std::size_t i = begin; i < end; ++i) {
    const auto& t = triples[i];
    const auto& q = c.predicate_qname(t.predicate);
    out += "    <" + q;
    switch (t.object_kind) {
      case TermKind::iri:
        out += " rdf:resource=\"" + c.attribute_iri(t.object) + "\"/>\n";
        continue;
      case TermKind::blank:
        out += " rdf:nodeID=\"" + xml::escape_attribute(
                                      std::string_view(t.object).substr(
                                          t.object.starts_with("_:") ? 2 : 0)) +
               "\"/>\n";
        continue;
      case TermKind::literal:
        if (t.object_lang) {
          out += " xml:lang=\"" + xml::escape_attribute(*t.object_lang) + "\"";
        } else if (t.object_datatype) {
          out += " rdf:datatype=\"" + c.attribute_iri(*t.object_datatype) + "\"";
        }
        out += ">" + xml::escape_text(t.object) + "</" + q + ">\n";
        continue;
    }
  }
  out += "  </rdf:Description>\n";
}

template <typename F>
void for_each_subject(const std::vector<Triple>& triples, F&& f) {
  std::size_t begin = 0;
  while (begin < triples.size()) {
    std::size_t end = begin + 1;
    while (end < triples.size() && triples[end].subject == triples[begin].subject) ++end;
    f(begin, end);
    begin = end;
  }
}

}  // namespace

std::string compact_and_serialize(std::vector<Triple> triples, const PrefixMap& pm) {
  sort_unique(triples);
  const Compactor c(triples, pm);

  std::string out = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n";
  if (!c.entity_namespaces().empty()) {
    out += "<!DOCTYPE rdf:RDF [\n";
    for (const auto& [prefix, ns] : c.entity_namespaces()) {
      out += "  <!ENTITY " + prefix + " \"" + entity_value(ns) + "\">\n";
    }
    out += "]>\n";
  }
  out += "<rdf:RDF";
  for (const auto& [prefix, ns] : c.element_namespaces()) {
    out += "\n    xmlns:" + prefix + "=\"" + xml::escape_attribute(ns) + "\"";
  }
  if (triples.empty()) {
    out += "/>\n";
    return out;
  }
  out += ">\n";
  for_each_subject(triples, [&](std::size_t b, std::size_t e) {
    render_description(out, c, triples, b, e);
  });
  out += "</rdf:RDF>\n";
  return out;
}

std::vector<SubjectFragment> subject_fragments(std::vector<Triple> triples,
                                               const PrefixMap& pm) {
  sort_unique(triples);
  const Compactor c(triples, pm);
  std::vector<SubjectFragment> out;
  for_each_subject(triples, [&](std::size_t b, std::size_t e) {
    SubjectFragment f;
    f.subject = triples[b].subject;
    render_description(f.text, c, triples, b, e);
    f.triples.assign(triples.begin() + static_cast<std::ptrdiff_t>(b),
                     triples.begin() + static_cast<std::ptrdiff_t>(e));
    out.push_back(std::move(f));
  });
  return out;
}

namespace {

class RdfXmlReader {
 public:
  std::vector<Triple> read(const xml::Document& doc) {
    const auto scope = xml::NamespaceScope{}.enter(doc.root);
    const auto root = scope.expand(doc.root.name);
    if (root == std::string(kRdfNs) + "RDF") {
      const auto lang = inherited_lang(doc.root, std::nullopt);
      for (const auto& child : doc.root.children) {
        node(child, scope, lang);
      }
    } else {
      node(doc.root, xml::NamespaceScope{}, std::nullopt);
    }
    sort_unique(out_);
    return std::move(out_);
  }

 private:
  static std::optional<std::string> inherited_lang(const xml::Element& e,
                                                   std::optional<std::string> parent) {
    if (const auto* l = e.attribute("xml:lang")) {
      if (l->empty()) return std::nullopt;
      return *l;
    }
    return parent;
  }

  std::string rdf(std::string_view local) const { return std::string(kRdfNs) + std::string(local); }

  std::string expand_or_fail(const xml::NamespaceScope& scope, std::string_view qname) const {
    auto iri = scope.expand(qname);
    if (!iri || xml::split_qname(qname).first.empty()) {
      throw Error(ErrorCode::ParseError, "unqualified or undeclared name '" +
                                             std::string(qname) + "'");
    }
    return *iri;
  }

  /// Returns the node's identifier.
  std::string node(const xml::Element& e, const xml::NamespaceScope& parent_scope,
                   std::optional<std::string> parent_lang) {
    const auto scope = parent_scope.enter(e);
    const auto lang = inherited_lang(e, parent_lang);
    std::string subject;
    const std::string type = expand_or_fail(scope, e.name);

    for (const auto& [k, v] : e.attributes) {
      if (k.starts_with("xmlns") || k == "xml:lang") continue;
      const auto name = expand_or_fail(scope, k);
      if (name == rdf("about")) {
        subject = v;
      } else if (name == rdf("nodeID")) {
        subject = "_:" + v;
      }
    }
    if (subject.empty()) subject = "_:genid" + std::to_string(++blank_counter_);

    if (type != rdf("Description")) {
      out_.push_back(Triple{subject, rdf("type"), TermKind::iri, type, std::nullopt, std::nullopt});
    }
    for (const auto& [k, v] : e.attributes) {
      if (k.starts_with("xmlns") || k.starts_with("xml:")) continue;
      const auto name = expand_or_fail(scope, k);
      if (name == rdf("about") || name == rdf("nodeID") || name == rdf("ID")) continue;
      if (name == rdf("type")) {
        out_.push_back(Triple{subject, name, TermKind::iri, v, std::nullopt, std::nullopt});
      } else {
        out_.push_back(Triple{subject, name, TermKind::literal, v, lang, std::nullopt});
      }
    }
    for (const auto& child : e.children) property(child, scope, lang, subject);
    return subject;
  }

  void property(const xml::Element& e, const xml::NamespaceScope& parent_scope,
                const std::optional<std::string>& parent_lang, const std::string& subject) {
    const auto scope = parent_scope.enter(e);
    const auto lang = inherited_lang(e, parent_lang);
    const auto predicate = expand_or_fail(scope, e.name);

    std::optional<std::string> resource;
    std::optional<std::string> node_id;
    std::optional<std::string> datatype;
    std::optional<std::string> parse_type;
    for (const auto& [k, v] : e.attributes) {
      if (k.starts_with("xmlns") || k.starts_with("xml:")) continue;
      const auto name = expand_or_fail(scope, k);
      if (name == rdf("resource")) {
        resource = v;
      } else if (name == rdf("nodeID")) {
        node_id = v;
      } else if (name == rdf("datatype")) {
        datatype = v;
      } else if (name == rdf("parseType")) {
        parse_type = v;
      } else {
        throw Error(ErrorCode::ParseError, "unsupported property attribute " + k);
      }
    }
    if (parse_type) throw Error(ErrorCode::ParseError, "rdf:parseType is not supported");

    if (resource) {
      out_.push_back(Triple{subject, predicate, TermKind::iri, *resource, std::nullopt, std::nullopt});
    } else if (node_id) {
      out_.push_back(Triple{subject, predicate, TermKind::blank, "_:" + *node_id, std::nullopt,
                            std::nullopt});
    } else if (!e.children.empty()) {
      if (e.children.size() != 1) {
        throw Error(ErrorCode::ParseError, "property element with several nodes");
      }
      const auto object = node(e.children.front(), scope, lang);
      out_.push_back(Triple{subject, predicate,
                            object.starts_with("_:") ? TermKind::blank : TermKind::iri,
                            object, std::nullopt, std::nullopt});
    } else if (datatype) {
      out_.push_back(Triple{subject, predicate, TermKind::literal, e.text, std::nullopt, datatype});
    } else {
      out_.push_back(Triple{subject, predicate, TermKind::literal, e.text, lang, std::nullopt});
    }
  }

  std::vector<Triple> out_;
  std::size_t blank_counter_ = 0;
};

}  // namespace

std::vector<Triple> parse_rdfxml(std::string_view document) {
  return RdfXmlReader{}.read(xml::parse(document));
}

}  // namespace placeorigin::rdf
