#include "afp/semantic_graph.hpp"

#include "afp/errors.hpp"
#include "afp/ingest.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <set>

namespace afp {

using nlohmann::json;

void GraphSource::validate() const
{
  if (kind == GraphSourceKind::llm_fallback && (!endpoint || endpoint->empty()))
    throw ValidationError("llm_fallback graph source requires an endpoint");
}

namespace {

std::string require_string(const json& v, const char* what)
{
  if (!v.is_string())
    throw ParseError(std::string(what) + " must be a string");
  std::string s = v.get<std::string>();
  if (s.empty())
    throw ValidationError(std::string(what) + " must be non-empty");
  return s;
}

} // namespace

SemanticGraph parse_graph(std::string_view text,
                          std::vector<std::string>& warnings)
{
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ParseError(std::string("graph is not valid JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw ParseError("graph root must be an object");

  const json empty = json::array();
  const json& nodes = doc.contains("nodes") ? doc.at("nodes") : empty;
  const json& triplets = doc.contains("triplets") ? doc.at("triplets") : empty;
  if (!nodes.is_array() || !triplets.is_array())
    throw ParseError("graph 'nodes' and 'triplets' must be arrays");

  SemanticGraph g;
  std::set<std::string> known;
  for (const json& n : nodes) {
    std::string name = require_string(n, "graph node");
    if (!known.insert(name).second) {
      warnings.push_back("graph: duplicate node '" + name + "' dropped");
      continue;
    }
    g.nodes.push_back(std::move(name));
  }

  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const json& t : triplets) {
    if (!t.is_array() || t.size() != 3)
      throw ParseError("graph triplet must be an array of three strings");
    Triplet tr{ require_string(t[0], "triplet subject"),
                require_string(t[1], "triplet relation"),
                require_string(t[2], "triplet object") };
    if (!seen.emplace(tr.subject, tr.relation, tr.object).second) {
      warnings.push_back("graph: duplicate triplet (" + tr.subject + ", " +
                         tr.relation + ", " + tr.object + ") dropped");
      continue;
    }
    for (const std::string* endpoint : { &tr.subject, &tr.object }) {
      if (known.insert(*endpoint).second) {
        warnings.push_back("graph: node '" + *endpoint +
                           "' referenced by a triplet was added");
        g.nodes.push_back(*endpoint);
      }
    }
    g.triplets.push_back(std::move(tr));
  }
  return g;
}

SemanticGraph load_graph(const std::filesystem::path& path,
                         std::vector<std::string>& warnings)
{
  return parse_graph(read_text_file(path), warnings);
}

std::string serialize_graph(const SemanticGraph& g)
{
  json triplets = json::array();
  for (const Triplet& t : g.triplets)
    triplets.push_back({ t.subject, t.relation, t.object });
  json doc;
  doc["nodes"] = g.nodes;
  doc["triplets"] = std::move(triplets);
  return doc.dump();
}

std::string textualize_g1(const SemanticGraph& g)
{
  if (g.empty())
    return {};
  std::string out = "Semantic graph:\nNodes: ";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (i)
      out += ", ";
    out += g.nodes[i];
  }
  for (const Triplet& t : g.triplets)
    out += "\n(" + t.subject + ", " + t.relation + ", " + t.object + ")";
  return out;
}

std::string fallback_request_text(const std::string& question,
                                  const std::vector<std::string>& options)
{
  std::string msg =
    "From the question and answer options below, infer the key entities and "
    "their relationships that are most likely visible in the video. Reply with "
    "only a JSON object of the form "
    "{\"nodes\": [\"entity\", ...], \"triplets\": [[\"subject\", \"relation\", "
    "\"object\"], ...]} and nothing else.\n\nQuestion: ";
  msg += question;
  if (!options.empty()) {
    msg += "\nOptions:";
    for (std::size_t i = 0; i < options.size(); ++i) {
      msg += "\n";
      msg += static_cast<char>('A' + static_cast<int>(i % 26));
      msg += ") " + options[i];
    }
  }
  return msg;
}

SemanticGraph generate_graph_fallback(const std::string& question,
                                      const std::vector<std::string>& options,
                                      ChatClient& client,
                                      std::vector<std::string>& warnings)
{
  if (question.empty())
    throw ValidationError("graph fallback needs a non-empty question");
  const std::string reply = client.complete(fallback_request_text(question, options));
  std::vector<std::string> parse_warnings;
  SemanticGraph g;
  try {
    g = parse_graph(reply, parse_warnings);
  } catch (const ParseError& e) {
    throw MalformedResponseError(std::string("graph fallback reply: ") + e.what());
  } catch (const ValidationError& e) {
    throw MalformedResponseError(std::string("graph fallback reply: ") + e.what());
  }
  warnings.insert(warnings.end(), parse_warnings.begin(), parse_warnings.end());
  return g;
}

} // namespace afp
