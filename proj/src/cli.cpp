#include "afp/cli.hpp"

#include "afp/errors.hpp"
#include "afp/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <iostream>

namespace afp {

namespace {

struct ConfigFlags
{
  double alpha = 0.6;
  double beta = 0.9;
  double kde_offset = 0.15;
  std::string kde_bandwidth = "scott";
  int kde_grid = 512;
  bool no_refine = false;
  std::string strategy = "centroid";
  long long tokens_per_frame = 255;
  double tokens_per_char = 0.25;
  std::string projection = "seeded";
  std::uint64_t projection_seed = 0;
  std::string resnet_matrix;
  std::string clip_matrix;
  std::string graph_endpoint;
  long long graph_timeout_ms = 30000;

  void attach(CLI::App& app)
  {
    app.add_option("--alpha", alpha, "Fusion ratio toward the CLIP branch");
    app.add_option("--beta", beta, "Weight of visual vs temporal distance");
    app.add_option("--kde-offset", kde_offset, "Offset added to the KDE peak");
    app.add_option("--kde-bandwidth", kde_bandwidth, "scott or a fixed bandwidth");
    app.add_option("--kde-grid", kde_grid, "KDE evaluation grid size");
    app.add_flag("--no-refine", no_refine, "Keep singleton clusters");
    app.add_option("--strategy", strategy, "centroid | highest-score");
    app.add_option("--tokens-per-frame", tokens_per_frame, "Token cost per frame");
    app.add_option("--tokens-per-char", tokens_per_char, "Token cost per text char");
    app.add_option("--projection", projection, "seeded | identity | external");
    app.add_option("--projection-seed", projection_seed, "Seed for seeded projection");
    app.add_option("--resnet-matrix", resnet_matrix, "Projection matrix file (resnet)");
    app.add_option("--clip-matrix", clip_matrix, "Projection matrix file (clip)");
    app.add_option("--graph-endpoint", graph_endpoint,
                   "Chat endpoint for text-only graph generation");
    app.add_option("--graph-timeout-ms", graph_timeout_ms, "Graph endpoint timeout");
  }

  PruneConfig build() const
  {
    PruneConfig cfg;
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.kde.offset = kde_offset;
    cfg.kde.grid_points = kde_grid;
    if (kde_bandwidth != "scott") {
      double h = 0.0;
      const auto* end = kde_bandwidth.data() + kde_bandwidth.size();
      const auto res = std::from_chars(kde_bandwidth.data(), end, h);
      if (res.ec != std::errc() || res.ptr != end)
        throw ValidationError("--kde-bandwidth must be 'scott' or a number");
      cfg.kde.fixed_bandwidth = h;
    }
    cfg.refine = !no_refine;
    cfg.strategy = parse_strategy(strategy);
    cfg.cost.tokens_per_frame = tokens_per_frame;
    cfg.cost.tokens_per_text_char = tokens_per_char;
    if (projection == "seeded") {
      cfg.projection.kind = ProjectionKind::seeded_random_orthonormal;
      cfg.projection.seed = projection_seed;
    } else if (projection == "identity") {
      cfg.projection.kind = ProjectionKind::identity_truncate;
    } else if (projection == "external") {
      if (resnet_matrix.empty() || clip_matrix.empty())
        throw ValidationError(
          "--projection external needs --resnet-matrix and --clip-matrix");
      cfg.projection.kind = ProjectionKind::external_matrix;
      cfg.projection.resnet_matrix = load_matrix(resnet_matrix);
      cfg.projection.clip_matrix = load_matrix(clip_matrix);
    } else {
      throw ValidationError("--projection must be seeded, identity or external");
    }
    if (graph_timeout_ms <= 0)
      throw ValidationError("--graph-timeout-ms must be positive");
    cfg.validate();
    return cfg;
  }
};

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err)
{
  for (const std::string& w : warnings)
    err << "warning: " << w << '\n';
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Adaptive frame pruning for keyframe sets", "afp" };
  app.require_subcommand(1);

  ConfigFlags flags;

  auto* run = app.add_subcommand("run", "Prune one manifest into a prompt bundle");
  std::string manifest_path;
  std::string graph_path;
  std::string question;
  std::vector<std::string> options;
  std::string out_path;
  std::string dump_distances;
  std::string dump_dendrogram;
  run->add_option("--manifest", manifest_path, "Frame manifest")->required();
  run->add_option("--graph", graph_path, "Semantic graph document");
  run->add_option("--question", question, "Question text");
  run->add_option("--options", options, "Comma-separated answer options")
    ->delimiter(',');
  run->add_option("--out", out_path, "Output bundle path")->required();
  run->add_option("--dump-distances", dump_distances, "Write distance matrices");
  run->add_option("--dump-dendrogram", dump_dendrogram, "Write merge log");
  flags.attach(*run);

  auto* batch = app.add_subcommand("batch", "Prune every manifest in a directory");
  std::string in_dir;
  std::string out_dir;
  unsigned jobs = 0;
  batch->add_option("--in", in_dir, "Manifest directory")->required();
  batch->add_option("--out", out_dir, "Output directory")->required();
  batch->add_option("--jobs", jobs, "Worker threads (0 = all cores)");
  ConfigFlags batch_flags;
  batch_flags.attach(*batch);

  auto* fallback =
    app.add_subcommand("graph-fallback", "Infer a semantic graph from question text");
  std::string fb_question;
  std::vector<std::string> fb_options;
  std::string fb_endpoint;
  std::string fb_out;
  long long fb_timeout_ms = 30000;
  fallback->add_option("--question", fb_question, "Question text")->required();
  fallback->add_option("--options", fb_options, "Comma-separated answer options")
    ->delimiter(',');
  fallback->add_option("--endpoint", fb_endpoint, "Chat endpoint URL")->required();
  fallback->add_option("--timeout-ms", fb_timeout_ms, "Request timeout");
  fallback->add_option("--out", fb_out, "Write the graph here instead of stdout");

  std::vector<std::string> argv{ args.rbegin(), args.rend() };
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (run->parsed()) {
    PruneConfig cfg;
    try {
      cfg = flags.build();
    } catch (const ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kExitFailure;
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    }
    try {
      const Manifest m = load_manifest(manifest_path);
      std::vector<std::string> graph_warnings;
      std::optional<SemanticGraph> graph;
      if (!graph_path.empty()) {
        graph = load_graph(graph_path, graph_warnings);
      } else if (!flags.graph_endpoint.empty()) {
        if (question.empty()) {
          graph_warnings.push_back("graph endpoint given without a question; skipped");
        } else {
          auto client = HttpChatClient::from_environment(
            flags.graph_endpoint, std::chrono::milliseconds(flags.graph_timeout_ms));
          graph = fallback_graph_or_none(question, options, client, graph_warnings);
        }
      }
      PromptBundle b = run_pipeline(m, graph, question, options, cfg);
      b.warnings.insert(b.warnings.end(), graph_warnings.begin(), graph_warnings.end());
      write_text_file(out_path, b.serialize());
      if (!dump_distances.empty())
        write_text_file(dump_distances, format_distance_tables(b.tables));
      if (!dump_dendrogram.empty())
        write_text_file(dump_dendrogram, format_dendrogram(b.cluster_set));
      print_warnings(b.warnings, err);
      out << b.video_id << ": " << b.report.frames_in << " -> "
          << b.report.frames_out << " frames\n";
      return kExitOk;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitFailure;
    }
  }

  if (batch->parsed()) {
    PruneConfig cfg;
    BatchOptions opts;
    try {
      cfg = batch_flags.build();
      if (!batch_flags.graph_endpoint.empty())
        opts.graph_endpoint = batch_flags.graph_endpoint;
      opts.graph_timeout = std::chrono::milliseconds(batch_flags.graph_timeout_ms);
      opts.jobs = jobs;
    } catch (const ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kExitFailure;
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    }
    try {
      const BatchResult r = run_batch(in_dir, cfg, out_dir, opts);
      print_warnings(r.warnings, err);
      for (const BatchError& e : r.errors)
        err << "error: " << e.file << ": " << e.message << '\n';
      out << r.stats.to_json().dump() << '\n';
      return r.ok() ? kExitOk : kExitFailure;
    } catch (const ValidationError& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitFailure;
    }
  }

  // graph-fallback
  try {
    if (fb_timeout_ms <= 0)
      throw ValidationError("--timeout-ms must be positive");
    auto client = HttpChatClient::from_environment(
      fb_endpoint, std::chrono::milliseconds(fb_timeout_ms));
    std::vector<std::string> warnings;
    const SemanticGraph g = generate_graph_fallback(fb_question, fb_options, client, warnings);
    print_warnings(warnings, err);
    if (fb_out.empty())
      out << serialize_graph(g) << '\n';
    else
      write_text_file(fb_out, serialize_graph(g) + "\n");
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

} // namespace afp
