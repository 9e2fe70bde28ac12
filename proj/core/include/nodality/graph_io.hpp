#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "nodality/graph.hpp"

namespace nodality {

/// Optional per-node metadata carried into exports so external renderers can
/// color and size nodes. follower_count = -1 means "not set".
struct NodeAttributes {
  std::string kind;
  std::string role;
  std::string party;
  std::string cluster;
  std::int64_t follower_count = -1;

  bool operator==(const NodeAttributes&) const = default;
};

struct GraphRecord {
  DiscourseGraph graph;
  std::map<std::string, NodeAttributes> attributes;
};

/// GraphML with edge weights, node attributes, and graph-level topic/kind/
/// window metadata.
void write_graphml(std::ostream& out, const DiscourseGraph& graph,
                   const std::map<std::string, NodeAttributes>& attributes = {});
void write_graphml_file(const std::string& path, const DiscourseGraph& graph,
                        const std::map<std::string, NodeAttributes>& attributes = {});

/// Reads GraphML as emitted by write_graphml (a strict subset of XML:
/// declaration, comments, elements, attributes, and the five standard
/// entities).
GraphRecord read_graphml(std::istream& in);
GraphRecord read_graphml_file(const std::string& path);

/// Graphviz export, write-only.
void write_dot(std::ostream& out, const DiscourseGraph& graph,
               const std::map<std::string, NodeAttributes>& attributes = {});
void write_dot_file(const std::string& path, const DiscourseGraph& graph,
                    const std::map<std::string, NodeAttributes>& attributes = {});

}  // namespace nodality
