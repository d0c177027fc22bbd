#include "afp/pipeline.hpp"

#include "afp/errors.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <mutex>
#include <thread>

namespace afp {

using nlohmann::json;

namespace {

template<typename F>
auto stage(const char* name, F&& f) -> decltype(f())
{
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string_view projection_name(ProjectionKind k)
{
  switch (k) {
    case ProjectionKind::identity_truncate:
      return "identity_truncate";
    case ProjectionKind::seeded_random_orthonormal:
      return "seeded_random_orthonormal";
    case ProjectionKind::external_matrix:
      return "external_matrix";
  }
  return "unknown";
}

std::string format_real(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return { buf, res.ptr };
}

double sorted_sum(std::vector<double> values)
{
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values)
    s += v;
  return s;
}

} // namespace

void PruneConfig::validate() const
{
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw RangeError("alpha must lie in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0))
    throw RangeError("beta must lie in [0, 1]");
  kde.validate();
  cost.validate();
  if (projection.kind == ProjectionKind::external_matrix &&
      (!projection.resnet_matrix || !projection.clip_matrix))
    throw ValidationError("external_matrix projection needs both matrices");
}

json PruneConfig::to_json() const
{
  json projection_json = { { "kind", projection_name(projection.kind) } };
  if (projection.kind == ProjectionKind::seeded_random_orthonormal)
    projection_json["seed"] = projection.seed;
  if (projection.kind == ProjectionKind::external_matrix &&
      projection.resnet_matrix && projection.clip_matrix)
    projection_json["shapes"] = {
      { projection.resnet_matrix->rows(), projection.resnet_matrix->cols() },
      { projection.clip_matrix->rows(), projection.clip_matrix->cols() }
    };

  json bandwidth = kde.fixed_bandwidth ? json(*kde.fixed_bandwidth) : json("scott");
  return {
    { "alpha", alpha },
    { "beta", beta },
    { "kde",
      { { "offset", kde.offset },
        { "grid_points", kde.grid_points },
        { "bandwidth", bandwidth } } },
    { "refine", refine },
    { "strategy", to_string(strategy) },
    { "projection", projection_json },
    { "cost",
      { { "tokens_per_frame", cost.tokens_per_frame },
        { "tokens_per_text_char", cost.tokens_per_text_char } } },
  };
}

json PromptBundle::to_json() const
{
  json frames = json::array();
  for (const FrameRef& f : frame_refs)
    frames.push_back({ { "frame_id", f.frame_id }, { "timestamp_s", f.timestamp_s } });

  json rep = {
    { "frames_in", report.frames_in },
    { "frames_out", report.frames_out },
    { "frame_reduction_pct", report.frame_reduction_pct },
    { "tokens_in_est", report.tokens_in_est },
    { "tokens_out_est", report.tokens_out_est },
    { "token_reduction_pct", report.token_reduction_pct },
    { "tau", report.tau ? json(*report.tau) : json(nullptr) },
    { "strategy", report.strategy },
  };

  json thr = nullptr;
  if (threshold)
    thr = { { "tau", threshold->tau },
            { "peak_p", threshold->peak_p },
            { "bandwidth", threshold->bandwidth },
            { "sample_count", threshold->sample_count } };

  return {
    { "video_id", video_id },
    { "frames", frames },
    { "prompt_text", prompt_text },
    { "graph_text", graph_text },
    { "question", question_text },
    { "options", options_text },
    { "report", rep },
    { "threshold_report", thr },
    { "clusters", clusters },
    { "config", config },
    { "warnings", warnings },
  };
}

std::string PromptBundle::serialize() const
{
  return to_json().dump(2) + "\n";
}

PromptBundle run_pipeline(const Manifest& manifest,
                          const std::optional<SemanticGraph>& graph,
                          const std::string& question,
                          const std::vector<std::string>& options,
                          const PruneConfig& cfg)
{
  stage("config", [&] { cfg.validate(); });
  if (manifest.frames.empty())
    throw StageError("ingest", "manifest has no frames");

  PromptBundle b;
  b.video_id = manifest.video_id;
  b.config = cfg.to_json();
  b.warnings = manifest.warnings;
  b.question_text = question;
  b.options_text = options;

  const std::size_t n = manifest.frames.size();
  std::vector<std::string> ids;
  std::vector<double> timestamps;
  std::vector<double> scores;
  ids.reserve(n);
  timestamps.reserve(n);
  scores.reserve(n);
  for (const FrameRecord& f : manifest.frames) {
    ids.push_back(f.frame_id);
    timestamps.push_back(f.timestamp_s);
    scores.push_back(f.score);
  }

  const auto features =
    stage("fusion", [&] { return fuse_manifest(manifest, cfg.projection, cfg.alpha); });
  b.tables = stage("distance",
                   [&] { return build_tables(features, timestamps, cfg.beta); });

  if (n == 1) {
    b.cluster_set.clusters = { { 0 } };
  } else {
    const auto samples = b.tables.cos_upper_triangle();
    b.threshold =
      stage("threshold", [&] { return adaptive_threshold(samples, cfg.kde); });
    b.cluster_set = stage("clustering", [&] {
      const ClusterSet raw = agglomerate(b.tables.d_comb, b.threshold->tau);
      return refine_clusters(raw, b.tables.d_cos, cfg.refine);
    });
  }

  const PrunedSet pruned = stage("selection", [&] {
    return select_representatives(b.cluster_set, cfg.strategy, ids, timestamps,
                                  scores, b.tables.d_cos);
  });

  for (const Cluster& c : b.cluster_set.clusters) {
    std::vector<std::string> members;
    members.reserve(c.size());
    for (std::size_t idx : c)
      members.push_back(ids[idx]);
    b.clusters.push_back(std::move(members));
  }
  for (const Representative& r : pruned.representatives)
    b.frame_refs.push_back({ r.frame_id, timestamps[r.frame_index] });

  if (graph)
    b.graph_text = textualize_g1(*graph);

  std::string baseline_text;
  stage("prompt", [&] {
    if (question.empty()) {
      b.warnings.push_back("no question supplied; prompt text omitted");
      return;
    }
    std::vector<FrameRef> all;
    all.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      all.push_back({ ids[i], timestamps[i] });
    b.prompt_text = assemble_prompt(b.frame_refs, b.graph_text, question, options);
    baseline_text = assemble_prompt(all, "", question, options);
  });

  b.report = stage("report", [&] {
    return compute_report(static_cast<std::int64_t>(n),
                          static_cast<std::int64_t>(b.frame_refs.size()),
                          b.prompt_text, baseline_text, cfg.cost);
  });
  if (b.threshold)
    b.report.tau = b.threshold->tau;
  b.report.strategy = std::string(to_string(cfg.strategy));
  return b;
}

std::optional<SemanticGraph> fallback_graph_or_none(
  const std::string& question,
  const std::vector<std::string>& options,
  ChatClient& client,
  std::vector<std::string>& warnings)
{
  try {
    return generate_graph_fallback(question, options, client, warnings);
  } catch (const TransportError& e) {
    warnings.push_back(std::string("graph fallback unavailable, continuing "
                                   "without a semantic graph: ") +
                       e.what());
  } catch (const MalformedResponseError& e) {
    warnings.push_back(std::string("graph fallback reply unusable, continuing "
                                   "without a semantic graph: ") +
                       e.what());
  }
  return std::nullopt;
}

std::string format_distance_tables(const DistanceTables& t)
{
  std::string out;
  const auto block = [&](const char* name, const Eigen::MatrixXd& m) {
    out += std::string("# ") + name + ' ' + std::to_string(t.n) + 'x' +
           std::to_string(t.n) + '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j)
          out += ' ';
        out += format_real(m(i, j));
      }
      out += '\n';
    }
  };
  block("d_cos", t.d_cos);
  block("d_comb", t.d_comb);
  return out;
}

double BatchStats::frame_reduction_pct_of_averages() const noexcept
{
  return reduction_pct(avg_frames_in, avg_frames_out);
}

json BatchStats::to_json() const
{
  return { { "videos", videos },
           { "avg_frames_in", avg_frames_in },
           { "avg_frames_out", avg_frames_out },
           { "avg_token_reduction_pct", avg_token_reduction_pct },
           { "frame_reduction_pct_of_averages", frame_reduction_pct_of_averages() } };
}

BatchStats aggregate_batch(const std::vector<CostReport>& reports)
{
  BatchStats s;
  s.videos = reports.size();
  if (reports.empty())
    return s;
  std::vector<double> in;
  std::vector<double> out;
  std::vector<double> tok;
  for (const CostReport& r : reports) {
    in.push_back(static_cast<double>(r.frames_in));
    out.push_back(static_cast<double>(r.frames_out));
    tok.push_back(r.token_reduction_pct);
  }
  const double count = static_cast<double>(reports.size());
  s.avg_frames_in = sorted_sum(std::move(in)) / count;
  s.avg_frames_out = sorted_sum(std::move(out)) / count;
  s.avg_token_reduction_pct = sorted_sum(std::move(tok)) / count;
  return s;
}

QaSpec load_qa(const std::filesystem::path& path)
{
  const std::string text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("question") || !doc.at("question").is_string())
    throw ParseError("'" + path.string() + "' needs a string 'question'");
  QaSpec qa;
  qa.question = doc.at("question").get<std::string>();
  if (doc.contains("options")) {
    const json& opts = doc.at("options");
    if (!opts.is_array())
      throw ParseError("'" + path.string() + "': 'options' must be an array");
    for (const json& o : opts) {
      if (!o.is_string())
        throw ParseError("'" + path.string() + "': options must be strings");
      qa.options.push_back(o.get<std::string>());
    }
  }
  return qa;
}

namespace {

constexpr std::string_view kManifestSuffix = ".manifest.json";

struct VideoOutcome
{
  std::optional<CostReport> report;
  std::optional<BatchError> error;
  std::vector<std::string> warnings;
};

VideoOutcome process_one(const std::filesystem::path& dir,
                         const std::string& stem,
                         const PruneConfig& cfg,
                         const std::filesystem::path& out_dir,
                         const BatchOptions& opts)
{
  VideoOutcome outcome;
  const auto manifest_path = dir / (stem + std::string(kManifestSuffix));
  try {
    const Manifest m = load_manifest(manifest_path);

    QaSpec qa;
    if (const auto qa_path = dir / (stem + ".qa.json"); std::filesystem::exists(qa_path))
      qa = load_qa(qa_path);

    std::vector<std::string> graph_warnings;
    std::optional<SemanticGraph> graph;
    if (const auto graph_path = dir / (stem + ".graph.json");
        std::filesystem::exists(graph_path)) {
      graph = load_graph(graph_path, graph_warnings);
    } else if (opts.graph_endpoint && !qa.question.empty()) {
      auto client =
        HttpChatClient::from_environment(*opts.graph_endpoint, opts.graph_timeout);
      graph = fallback_graph_or_none(qa.question, qa.options, client, graph_warnings);
    }

    PromptBundle b = run_pipeline(m, graph, qa.question, qa.options, cfg);
    b.warnings.insert(b.warnings.end(), graph_warnings.begin(), graph_warnings.end());
    write_text_file(out_dir / (stem + ".bundle.json"), b.serialize());
    for (const std::string& w : b.warnings)
      outcome.warnings.push_back(stem + ": " + w);
    outcome.report = b.report;
  } catch (const std::exception& e) {
    outcome.error = BatchError{ manifest_path.filename().string(), e.what() };
  }
  return outcome;
}

} // namespace

BatchResult run_batch(const std::filesystem::path& manifest_dir,
                      const PruneConfig& cfg,
                      const std::filesystem::path& out_dir,
                      const BatchOptions& opts)
{
  cfg.validate();
  if (!std::filesystem::is_directory(manifest_dir))
    throw ValidationError("'" + manifest_dir.string() + "' is not a directory");
  std::filesystem::create_directories(out_dir);

  std::vector<std::string> stems;
  for (const auto& entry : std::filesystem::directory_iterator(manifest_dir)) {
    if (!entry.is_regular_file())
      continue;
    const std::string name = entry.path().filename().string();
    if (name.size() > kManifestSuffix.size() && name.ends_with(kManifestSuffix))
      stems.push_back(name.substr(0, name.size() - kManifestSuffix.size()));
  }
  std::sort(stems.begin(), stems.end());

  std::vector<VideoOutcome> outcomes(stems.size());
  unsigned jobs = opts.jobs ? opts.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(1, stems.size())));
  std::atomic<std::size_t> next{ 0 };
  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < jobs; ++w)
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < stems.size(); i = next++)
          outcomes[i] = process_one(manifest_dir, stems[i], cfg, out_dir, opts);
      });
  }

  BatchResult result;
  std::vector<CostReport> reports;
  for (std::size_t i = 0; i < stems.size(); ++i) {
    VideoOutcome& o = outcomes[i];
    result.warnings.insert(result.warnings.end(), o.warnings.begin(), o.warnings.end());
    if (o.error) {
      result.errors.push_back(std::move(*o.error));
    } else {
      reports.push_back(*o.report);
      result.processed.push_back(stems[i]);
    }
  }
  if (stems.empty())
    result.warnings.push_back("empty batch: no *.manifest.json files in '" +
                              manifest_dir.string() + "'");
  result.stats = aggregate_batch(reports);

  json errors = json::array();
  for (const BatchError& e : result.errors)
    errors.push_back({ { "file", e.file }, { "error", e.message } });
  write_text_file(out_dir / "errors.json", errors.dump(2) + "\n");
  json stats = result.stats.to_json();
  stats["config"] = cfg.to_json();
  stats["warnings"] = result.warnings;
  write_text_file(out_dir / "batch_stats.json", stats.dump(2) + "\n");
  return result;
}

} // namespace afp
