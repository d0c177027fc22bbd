#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace afp {

struct Triplet
{
  std::string subject;
  std::string relation;
  std::string object;

  bool operator==(const Triplet&) const = default;
};

struct SemanticGraph
{
  std::vector<std::string> nodes;
  std::vector<Triplet> triplets;

  bool empty() const noexcept { return nodes.empty() && triplets.empty(); }
  bool operator==(const SemanticGraph&) const = default;
};

enum class GraphSourceKind
{
  repurposed_file,
  llm_fallback
};

struct GraphSource
{
  GraphSourceKind kind = GraphSourceKind::repurposed_file;
  std::optional<std::string> endpoint;

  void validate() const;
};

//! Parses `{ "nodes": [str], "triplets": [[s, r, o]] }`.
//!
//! Triplet endpoints missing from the node list are appended to it, and
//! repeated nodes or triplets are dropped; each repair adds a warning.
//! Throws ParseError on malformed documents and ValidationError on empty
//! strings.
SemanticGraph parse_graph(std::string_view text,
                          std::vector<std::string>& warnings);
SemanticGraph load_graph(const std::filesystem::path& path,
                         std::vector<std::string>& warnings);

std::string serialize_graph(const SemanticGraph& g);

//! Concise triplet rendering:
//!
//!     Semantic graph:
//!     Nodes: a, b
//!     (a, rel, b)
//!
//! Lines are joined by '\n' without a trailing newline; an empty graph
//! renders as "".
std::string textualize_g1(const SemanticGraph& g);

//! Minimal chat-completion transport. Implementations throw TransportError
//! when the service cannot be reached or does not answer in time.
class ChatClient
{
public:
  virtual ~ChatClient() = default;

  //! Sends one user message and returns the reply's text payload.
  virtual std::string complete(const std::string& user_message) = 0;
};

//! HTTP transport: POST {"messages":[{"role":"user","content":...}]} to the
//! endpoint URL, bearer auth from AFP_LLM_API_KEY when set. The response body
//! is the text payload.
class HttpChatClient : public ChatClient
{
public:
  explicit HttpChatClient(std::string endpoint_url,
                          std::chrono::milliseconds timeout =
                            std::chrono::seconds(30),
                          std::optional<std::string> api_key = std::nullopt);

  //! Same, with the key taken from the AFP_LLM_API_KEY environment variable.
  static HttpChatClient from_environment(std::string endpoint_url,
                                         std::chrono::milliseconds timeout =
                                           std::chrono::seconds(30));

  std::string complete(const std::string& user_message) override;

  static std::string request_body(const std::string& user_message);

private:
  std::string scheme_host_port_;
  std::string path_;
  std::chrono::milliseconds timeout_;
  std::optional<std::string> api_key_;
};

inline constexpr const char* kApiKeyEnv = "AFP_LLM_API_KEY";

//! The single message sent by generate_graph_fallback. Carries only the
//! question, the options and a fixed instruction.
std::string fallback_request_text(const std::string& question,
                                  const std::vector<std::string>& options);

//! Infers a graph from the question text alone with one request. Throws
//! TransportError or MalformedResponseError.
SemanticGraph generate_graph_fallback(const std::string& question,
                                      const std::vector<std::string>& options,
                                      ChatClient& client,
                                      std::vector<std::string>& warnings);

} // namespace afp
