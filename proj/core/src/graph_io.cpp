#include "nodality/graph_io.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace nodality {
namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string xml_unescape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    auto rest = s.substr(i);
    if (rest.rfind("&amp;", 0) == 0) { out += '&'; i += 4; }
    else if (rest.rfind("&lt;", 0) == 0) { out += '<'; i += 3; }
    else if (rest.rfind("&gt;", 0) == 0) { out += '>'; i += 3; }
    else if (rest.rfind("&quot;", 0) == 0) { out += '"'; i += 5; }
    else if (rest.rfind("&apos;", 0) == 0) { out += '\''; i += 5; }
    else throw std::runtime_error("graphml: unknown entity near \"" + rest.substr(0, 8) + "\"");
  }
  return out;
}

// Just enough XML to round-trip our own writer output.
struct XmlElement {
  std::string tag;
  std::map<std::string, std::string> attrs;
  std::vector<XmlElement> children;
  std::string text;

  const std::string& attr(const std::string& name) const {
    auto it = attrs.find(name);
    if (it == attrs.end()) throw std::runtime_error("graphml: <" + tag + "> lacks " + name);
    return it->second;
  }
};

class XmlParser {
 public:
  explicit XmlParser(std::string text) : text_(std::move(text)) {}

  XmlElement parse_document() {
    skip_misc();
    XmlElement root = parse_element();
    skip_misc();
    if (pos_ != text_.size()) fail("trailing content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw std::runtime_error("graphml: " + message + " at offset " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void skip_misc() {
    for (;;) {
      skip_space();
      if (text_.compare(pos_, 5, "<?xml") == 0 || text_.compare(pos_, 2, "<?") == 0) {
        auto end = text_.find("?>", pos_);
        if (end == std::string::npos) fail("unterminated declaration");
        pos_ = end + 2;
      } else if (text_.compare(pos_, 4, "<!--") == 0) {
        auto end = text_.find("-->", pos_);
        if (end == std::string::npos) fail("unterminated comment");
        pos_ = end + 3;
      } else {
        return;
      }
    }
  }

  std::string parse_name() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
            text_[pos_] == '-' || text_[pos_] == '.' || text_[pos_] == ':'))
      ++pos_;
    if (pos_ == start) fail("expected a name");
    return text_.substr(start, pos_ - start);
  }

  XmlElement parse_element() {
    if (pos_ >= text_.size() || text_[pos_] != '<') fail("expected '<'");
    ++pos_;
    XmlElement el;
    el.tag = parse_name();
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) fail("unterminated tag");
      if (text_[pos_] == '/') {
        if (text_.compare(pos_, 2, "/>") != 0) fail("bad empty-element tag");
        pos_ += 2;
        return el;
      }
      if (text_[pos_] == '>') {
        ++pos_;
        break;
      }
      std::string name = parse_name();
      skip_space();
      if (pos_ >= text_.size() || text_[pos_] != '=') fail("expected '='");
      ++pos_;
      skip_space();
      if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\''))
        fail("expected a quoted attribute value");
      const char quote = text_[pos_++];
      auto end = text_.find(quote, pos_);
      if (end == std::string::npos) fail("unterminated attribute value");
      el.attrs[name] = xml_unescape(text_.substr(pos_, end - pos_));
      pos_ = end + 1;
    }
    // content: interleaved text and child elements, until </tag>
    for (;;) {
      if (pos_ >= text_.size()) fail("unterminated element <" + el.tag + ">");
      if (text_[pos_] == '<') {
        if (text_.compare(pos_, 2, "</") == 0) {
          pos_ += 2;
          std::string closing = parse_name();
          if (closing != el.tag) fail("mismatched </" + closing + ">");
          skip_space();
          if (pos_ >= text_.size() || text_[pos_] != '>') fail("expected '>'");
          ++pos_;
          return el;
        }
        if (text_.compare(pos_, 4, "<!--") == 0) {
          auto end = text_.find("-->", pos_);
          if (end == std::string::npos) fail("unterminated comment");
          pos_ = end + 3;
          continue;
        }
        el.children.push_back(parse_element());
      } else {
        std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '<') ++pos_;
        el.text += xml_unescape(text_.substr(start, pos_ - start));
      }
    }
  }

  std::string text_;
  std::size_t pos_ = 0;
};

std::string trimmed(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

void write_data(std::ostream& out, const char* indent, const std::string& key,
                const std::string& value) {
  out << indent << "<data key=\"" << key << "\">" << xml_escape(value) << "</data>\n";
}

}  // namespace

void write_graphml(std::ostream& out, const DiscourseGraph& graph,
                   const std::map<std::string, NodeAttributes>& attributes) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
  const struct { const char* id; const char* domain; const char* type; } keys[] = {
      {"weight", "edge", "long"},          {"kind", "node", "string"},
      {"role", "node", "string"},          {"party", "node", "string"},
      {"follower_count", "node", "long"},  {"cluster", "node", "string"},
      {"topic", "graph", "string"},        {"graph_kind", "graph", "string"},
      {"window_start", "graph", "string"}, {"window_end", "graph", "string"},
  };
  for (const auto& k : keys)
    out << "  <key id=\"" << k.id << "\" for=\"" << k.domain << "\" attr.name=\"" << k.id
        << "\" attr.type=\"" << k.type << "\"/>\n";
  out << "  <graph id=\"G\" edgedefault=\"directed\">\n";
  write_data(out, "    ", "topic", graph.topic());
  write_data(out, "    ", "graph_kind", to_string(graph.kind()));
  write_data(out, "    ", "window_start", format_iso8601(graph.window().start));
  write_data(out, "    ", "window_end", format_iso8601(graph.window().end));
  for (const std::string& id : graph.nodes()) {
    auto it = attributes.find(id);
    if (it == attributes.end()) {
      out << "    <node id=\"" << xml_escape(id) << "\"/>\n";
      continue;
    }
    out << "    <node id=\"" << xml_escape(id) << "\">\n";
    const NodeAttributes& a = it->second;
    if (!a.kind.empty()) write_data(out, "      ", "kind", a.kind);
    if (!a.role.empty()) write_data(out, "      ", "role", a.role);
    if (!a.party.empty()) write_data(out, "      ", "party", a.party);
    if (a.follower_count >= 0)
      write_data(out, "      ", "follower_count", std::to_string(a.follower_count));
    if (!a.cluster.empty()) write_data(out, "      ", "cluster", a.cluster);
    out << "    </node>\n";
  }
  for (const GraphEdge& e : graph.edges()) {
    out << "    <edge source=\"" << xml_escape(graph.node(static_cast<std::size_t>(e.src)))
        << "\" target=\"" << xml_escape(graph.node(static_cast<std::size_t>(e.dst))) << "\">\n";
    write_data(out, "      ", "weight", std::to_string(e.weight));
    out << "    </edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

void write_graphml_file(const std::string& path, const DiscourseGraph& graph,
                        const std::map<std::string, NodeAttributes>& attributes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_graphml(out, graph, attributes);
}

GraphRecord read_graphml(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  XmlElement root = XmlParser(buf.str()).parse_document();
  if (root.tag != "graphml") throw std::runtime_error("graphml: root is <" + root.tag + ">");

  const XmlElement* graph_el = nullptr;
  for (const auto& child : root.children)
    if (child.tag == "graph") graph_el = &child;
  if (!graph_el) throw std::runtime_error("graphml: no <graph> element");

  auto data_of = [](const XmlElement& el) {
    std::map<std::string, std::string> values;
    for (const auto& child : el.children)
      if (child.tag == "data") values[child.attr("key")] = trimmed(child.text);
    return values;
  };

  auto graph_data = data_of(*graph_el);
  std::string topic = graph_data.count("topic") ? graph_data["topic"] : "";
  GraphKind kind = graph_data["graph_kind"] == "null" ? GraphKind::null : GraphKind::topic;
  TimeWindow window;
  if (graph_data.count("window_start")) {
    auto start = parse_iso8601(graph_data["window_start"]);
    auto end = parse_iso8601(graph_data["window_end"]);
    if (!start || !end) throw std::runtime_error("graphml: bad window timestamps");
    window = {*start, *end};
  }

  GraphRecord record;
  std::vector<std::tuple<std::string, std::string, std::int64_t>> edges;
  for (const auto& child : graph_el->children) {
    if (child.tag == "node") {
      auto values = data_of(child);
      if (values.empty()) continue;
      NodeAttributes a;
      a.kind = values.count("kind") ? values["kind"] : "";
      a.role = values.count("role") ? values["role"] : "";
      a.party = values.count("party") ? values["party"] : "";
      a.cluster = values.count("cluster") ? values["cluster"] : "";
      if (values.count("follower_count")) a.follower_count = std::stoll(values["follower_count"]);
      record.attributes[child.attr("id")] = a;
    } else if (child.tag == "edge") {
      auto values = data_of(child);
      if (!values.count("weight")) throw std::runtime_error("graphml: edge without weight");
      edges.emplace_back(child.attr("source"), child.attr("target"),
                         std::stoll(values["weight"]));
    }
  }
  record.graph = DiscourseGraph(std::move(edges), kind, topic, window);
  return record;
}

GraphRecord read_graphml_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_graphml(in);
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

void write_dot(std::ostream& out, const DiscourseGraph& graph,
               const std::map<std::string, NodeAttributes>& attributes) {
  out << "digraph discourse {\n";
  out << "  // topic=" << graph.topic() << " kind=" << to_string(graph.kind()) << "\n";
  for (const std::string& id : graph.nodes()) {
    out << "  \"" << dot_escape(id) << "\"";
    auto it = attributes.find(id);
    if (it != attributes.end()) {
      const NodeAttributes& a = it->second;
      out << " [";
      bool first = true;
      auto emit = [&](const char* name, const std::string& value) {
        if (value.empty()) return;
        if (!first) out << ", ";
        out << name << "=\"" << dot_escape(value) << "\"";
        first = false;
      };
      emit("kind", a.kind);
      emit("role", a.role);
      emit("party", a.party);
      emit("cluster", a.cluster);
      if (a.follower_count >= 0) emit("follower_count", std::to_string(a.follower_count));
      out << "]";
    }
    out << ";\n";
  }
  for (const GraphEdge& e : graph.edges())
    out << "  \"" << dot_escape(graph.node(static_cast<std::size_t>(e.src))) << "\" -> \""
        << dot_escape(graph.node(static_cast<std::size_t>(e.dst))) << "\" [weight=" << e.weight
        << "];\n";
  out << "}\n";
}

void write_dot_file(const std::string& path, const DiscourseGraph& graph,
                    const std::map<std::string, NodeAttributes>& attributes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_dot(out, graph, attributes);
}

}  // namespace nodality
