#pragma once

#include "afp/clustering.hpp"
#include "afp/distance.hpp"
#include "afp/fusion.hpp"
#include "afp/ingest.hpp"
#include "afp/prompt_budget.hpp"
#include "afp/selection.hpp"
#include "afp/semantic_graph.hpp"
#include "afp/threshold.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace afp {

struct PruneConfig
{
  double alpha = 0.6;
  double beta = 0.9;
  KdeConfig kde;
  bool refine = true;
  SelectionStrategy strategy = SelectionStrategy::centroid;
  ProjectionSpec projection;
  TokenCostModel cost;

  void validate() const;
  nlohmann::json to_json() const;
};

struct PromptBundle
{
  std::string video_id;
  std::vector<FrameRef> frame_refs;
  std::string graph_text;
  std::string question_text;
  std::vector<std::string> options_text;
  std::string prompt_text;
  CostReport report;
  std::optional<ThresholdReport> threshold;
  std::vector<std::vector<std::string>> clusters;
  nlohmann::json config;
  std::vector<std::string> warnings;

  // Intermediate results kept for debug dumps; not serialized.
  DistanceTables tables;
  ClusterSet cluster_set;

  nlohmann::json to_json() const;
  //! Canonical serialized form (sorted keys, 2-space indent, trailing newline).
  std::string serialize() const;
};

//! Full pruning pass over one video: fuse, distance tables, adaptive
//! threshold, agglomerate, refine, select, textualize, assemble, report.
//!
//! A single-frame manifest skips thresholding and clustering and reports no
//! tau. An empty question yields an empty prompt_text (with a warning), so
//! the token report then covers frames only. Stage failures are rethrown as
//! StageError.
PromptBundle run_pipeline(const Manifest& manifest,
                          const std::optional<SemanticGraph>& graph,
                          const std::string& question,
                          const std::vector<std::string>& options,
                          const PruneConfig& cfg);

//! Case-2 graph generation with graceful degradation: transport or parse
//! failures return nullopt and append a warning.
std::optional<SemanticGraph> fallback_graph_or_none(
  const std::string& question,
  const std::vector<std::string>& options,
  ChatClient& client,
  std::vector<std::string>& warnings);

//! Text dump of both distance matrices.
std::string format_distance_tables(const DistanceTables& t);

struct BatchStats
{
  std::size_t videos = 0;
  double avg_frames_in = 0.0;
  double avg_frames_out = 0.0;
  double avg_token_reduction_pct = 0.0;

  //! Frame reduction of the averages, 100 * (1 - avg_out / avg_in).
  double frame_reduction_pct_of_averages() const noexcept;

  bool operator==(const BatchStats&) const = default;
  nlohmann::json to_json() const;
};

//! Per-video figures in any order; the sums are taken over sorted values so
//! the result does not depend on processing order.
BatchStats aggregate_batch(const std::vector<CostReport>& reports);

struct BatchError
{
  std::string file;
  std::string message;
};

struct BatchOptions
{
  //! Case-2 endpoint used for manifests that have a question but no graph.
  std::optional<std::string> graph_endpoint;
  std::chrono::milliseconds graph_timeout = std::chrono::seconds(30);
  unsigned jobs = 0; // 0 = hardware concurrency
};

struct BatchResult
{
  BatchStats stats;
  std::vector<std::string> processed; // manifest stems, sorted
  std::vector<BatchError> errors;
  std::vector<std::string> warnings;

  bool ok() const noexcept { return errors.empty(); }
};

//! Processes every `<stem>.manifest.json` in manifest_dir, picking up optional
//! `<stem>.graph.json` and `<stem>.qa.json` siblings. Writes
//! `<stem>.bundle.json` per video plus `batch_stats.json` and `errors.json`
//! into out_dir. A failing video is recorded and the rest still run.
BatchResult run_batch(const std::filesystem::path& manifest_dir,
                      const PruneConfig& cfg,
                      const std::filesystem::path& out_dir,
                      const BatchOptions& opts = {});

struct QaSpec
{
  std::string question;
  std::vector<std::string> options;
};

//! `{ "question": str, "options": [str] }`
QaSpec load_qa(const std::filesystem::path& path);

} // namespace afp
