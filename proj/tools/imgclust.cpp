// imgclust: batch driver for every pipeline stage plus the review server.
// Stages hand off through files: scan -> dedup -> (exclude) -> embed ->
// cluster -> report. Logs go to stderr, data only to --out files.

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>

#include "imgclust/ann/kd_forest.hpp"
#include "imgclust/ann/neighbors.hpp"
#include "imgclust/ann/precision.hpp"
#include "imgclust/common/errors.hpp"
#include "imgclust/common/text.hpp"
#include "imgclust/corpus/corpus.hpp"
#include "imgclust/corpus/manifest.hpp"
#include "imgclust/embedding/vectors_file.hpp"
#include "imgclust/kmeans/kmeans.hpp"
#include "imgclust/kmeans/model_file.hpp"
#include "imgclust/kmeans/summary.hpp"
#include "imgclust/review/http_api.hpp"
#include "imgclust/review/pipeline.hpp"
#include "imgclust/review/report.hpp"
#include "imgclust/review/service.hpp"
#include "imgclust/review/tag_log.hpp"

namespace fs = std::filesystem;
using namespace imgclust;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int verbosity = 1;  // 0 quiet, 1 info, 2 debug

void log_info(const std::string& msg) {
  if (verbosity >= 1) std::cerr << "[imgclust] " << msg << "\n";
}
void log_debug(const std::string& msg) {
  if (verbosity >= 2) std::cerr << "[imgclust] " << msg << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string default_data_dir() {
  if (const char* env = std::getenv("IMGCLUST_DATA_DIR"); env && *env) return env;
  return "imgclust-data";
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  write_file_atomic(path, text);
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot read " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  }
  return lines;
}

// Integer >= 1; CLI11's PositiveNumber reports a floating-point range.
const CLI::Validator kPositive(
    [](std::string& value) {
      const bool digits = !value.empty() && value.find_first_not_of("0123456789") == std::string::npos;
      if (!digits || value.find_first_not_of('0') == std::string::npos) {
        return "must be a positive integer, got '" + value + "'";
      }
      return std::string();
    },
    "POSITIVE");

struct ForestFlags {
  std::size_t trees = ann::ForestParams{}.tree_count;
  std::size_t leaf_size = ann::ForestParams{}.leaf_size;
  std::size_t checks = ann::ForestParams{}.checks;
  bool exhaustive = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--trees", trees, "Randomized k-d trees in the forest")->check(kPositive)->capture_default_str();
    cmd->add_option("--leaf-size", leaf_size, "Maximum points per leaf")->check(kPositive)->capture_default_str();
    cmd->add_option("--checks", checks, "Leaf visits per query")->check(kPositive)->capture_default_str();
    cmd->add_flag("--exhaustive", exhaustive, "Visit every leaf (exact results)");
  }
  ann::ForestParams params(std::uint64_t seed) const {
    ann::ForestParams p;
    p.tree_count = trees;
    p.leaf_size = leaf_size;
    p.checks = exhaustive ? ann::kExhaustiveChecks : checks;
    p.seed = seed;
    return p;
  }
};

// Uniform [0, 1) vectors for benchmarking without a corpus.
FeatureMatrix random_vectors(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  FeatureMatrix m(dim);
  m.reserve(n);
  std::vector<float> row(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : row) v = dist(rng);
    m.append(i, row);
  }
  return m;
}

review::HttpApi* active_server = nullptr;

extern "C" void stop_server(int) {
  if (active_server) active_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image clustering for document review: corpus ingest, embedding, k-means, similarity search, "
               "categorization reports and the review server."};
  app.require_subcommand(1);
  app.fallthrough();
  std::string data_dir = default_data_dir();
  bool quiet = false;
  int verbose = 0;
  std::size_t workers = 0;
  app.add_option("--data-dir", data_dir, "Project data directory (env IMGCLUST_DATA_DIR)")->capture_default_str();
  app.add_flag("-q,--quiet", quiet, "Only log errors");
  app.add_flag("-v,--verbose", verbose, "More logging");
  app.add_option("--workers", workers, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  // scan
  auto* scan = app.add_subcommand("scan", "Walk a corpus and write the image manifest (JSON lines)");
  std::string scan_root, scan_out, scan_hash = "sha256", scan_ext;
  bool no_recurse = false;
  scan->add_option("--root", scan_root, "Corpus root directory")->required();
  scan->add_option("--out", scan_out, "Manifest output path")->required();
  scan->add_option("--hash", scan_hash, "Content hash algorithm")->check(CLI::IsMember({"sha256", "md5"}))->capture_default_str();
  scan->add_option("--ext", scan_ext, "Comma-separated extensions (default png,jpg,jpeg,gif,bmp,tiff)");
  scan->add_flag("--no-recurse", no_recurse, "Only the top-level directory");

  // dedup
  auto* dedup = app.add_subcommand("dedup", "Group byte-identical images and write the groups file");
  std::string dedup_manifest, dedup_out;
  dedup->add_option("--manifest", dedup_manifest, "Manifest from scan")->required()->check(CLI::ExistingFile);
  dedup->add_option("--out", dedup_out, "Groups output path")->required();

  // tally
  auto* tally = app.add_subcommand("tally", "Write the content-hash frequency tally, most frequent first");
  std::string tally_manifest, tally_groups, tally_out;
  std::size_t tally_top = 10;
  tally->add_option("--manifest", tally_manifest, "Manifest")->required()->check(CLI::ExistingFile);
  tally->add_option("--groups", tally_groups, "Groups from dedup")->required()->check(CLI::ExistingFile);
  tally->add_option("--out", tally_out, "Tally CSV output path")->required();
  tally->add_option("--top", tally_top, "Rows to log")->capture_default_str();

  // exclude
  auto* exclude = app.add_subcommand("exclude", "Mark high-frequency images as excluded before clustering");
  std::string ex_manifest, ex_groups, ex_out, ex_hashes;
  std::optional<std::size_t> ex_min;
  exclude->add_option("--manifest", ex_manifest, "Manifest")->required()->check(CLI::ExistingFile);
  exclude->add_option("--groups", ex_groups, "Groups from dedup")->required()->check(CLI::ExistingFile);
  exclude->add_option("--out", ex_out, "Updated manifest output path")->required();
  auto* min_opt = exclude->add_option("--min-frequency", ex_min, "Exclude groups with at least this many copies")
                      ->check(kPositive);
  exclude->add_option("--hashes", ex_hashes, "File with one content hash per line to exclude")
      ->check(CLI::ExistingFile)
      ->excludes(min_opt);

  // embed
  auto* embed = app.add_subcommand("embed", "Embed one representative per dedup group into a vectors file");
  std::string em_manifest, em_groups, em_root, em_out, em_backend = "reference", em_command, em_norm = "none";
  std::string em_manifest_out, em_groups_out;
  std::size_t em_dim = embedding::kDefaultDim, em_batch = embedding::kDefaultBatchSize;
  embed->add_option("--manifest", em_manifest, "Manifest")->required()->check(CLI::ExistingFile);
  embed->add_option("--groups", em_groups, "Groups from dedup")->required()->check(CLI::ExistingFile);
  embed->add_option("--root", em_root, "Corpus root the manifest paths are relative to")->required()->check(CLI::ExistingDirectory);
  embed->add_option("--out", em_out, "Vectors output path")->required();
  embed->add_option("--backend", em_backend, "Embedder backend")->check(CLI::IsMember({"reference", "external"}))->capture_default_str();
  embed->add_option("--command", em_command, "External embedder command");
  embed->add_option("--dim", em_dim, "Vector dimension")->check(kPositive)->capture_default_str();
  embed->add_option("--batch-size", em_batch, "Images per embedder call")->check(kPositive)->capture_default_str();
  embed->add_option("--normalize", em_norm, "Vector normalization")->check(CLI::IsMember({"none", "l2"}))->capture_default_str();
  embed->add_option("--manifest-out", em_manifest_out,
                    "Where to write the manifest with unembeddable groups marked invalid (default: --manifest)");
  embed->add_option("--groups-out", em_groups_out, "Where to write the surviving groups (default: --groups)");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Fit k-means on a vectors file");
  std::string cl_vectors, cl_out, cl_manifest, cl_groups, cl_summaries;
  std::optional<std::size_t> cl_k;
  std::uint64_t cl_seed = 0;
  std::size_t cl_iters = 100;
  double cl_tol = 1e-4;
  cluster->add_option("--vectors", cl_vectors, "Vectors file")->required()->check(CLI::ExistingFile);
  cluster->add_option("--out", cl_out, "Model output path")->required();
  cluster->add_option("--k", cl_k, "Cluster count (default 150, capped at the vector count)")->check(kPositive);
  cluster->add_option("--seed", cl_seed, "Random seed")->capture_default_str();
  cluster->add_option("--max-iters", cl_iters, "Iteration limit")->check(kPositive)->capture_default_str();
  cluster->add_option("--tol", cl_tol, "Relative inertia improvement to stop at")->check(CLI::NonNegativeNumber)->capture_default_str();
  auto* sum_opt = cluster->add_option("--summaries", cl_summaries, "Also write cluster summaries (needs --manifest, --groups)");
  cluster->add_option("--manifest", cl_manifest, "Manifest, for summaries")->check(CLI::ExistingFile)->needs(sum_opt);
  cluster->add_option("--groups", cl_groups, "Groups, for summaries")->check(CLI::ExistingFile)->needs(sum_opt);

  // knn
  auto* knn = app.add_subcommand("knn", "Nearest neighbours of vectors-file rows, as CSV");
  std::string kn_vectors, kn_out;
  std::vector<std::size_t> kn_rows;
  std::size_t kn_k = ann::kDefaultPrecisionK;
  std::uint64_t kn_seed = 0;
  bool kn_exact = false;
  ForestFlags kn_forest;
  knn->add_option("--vectors", kn_vectors, "Vectors file")->required()->check(CLI::ExistingFile);
  knn->add_option("--out", kn_out, "CSV output path")->required();
  knn->add_option("--k", kn_k, "Neighbours per query")->check(kPositive)->capture_default_str();
  knn->add_option("--rows", kn_rows, "Query rows (default: all)")->delimiter(',');
  knn->add_option("--seed", kn_seed, "Forest seed")->capture_default_str();
  knn->add_flag("--exact", kn_exact, "Brute-force search instead of the forest");
  kn_forest.add(knn);

  // precision
  auto* precision = app.add_subcommand("precision", "Per-rank precision of the forest against brute force");
  std::string pr_vectors, pr_out;
  std::optional<std::size_t> pr_random;
  std::size_t pr_dim = 128, pr_k = ann::kDefaultPrecisionK, pr_queries = 100;
  std::uint64_t pr_seed = 0;
  ForestFlags pr_forest;
  auto* pr_vec_opt = precision->add_option("--vectors", pr_vectors, "Vectors file")->check(CLI::ExistingFile);
  precision->add_option("--random", pr_random, "Use this many uniform random vectors instead of a file")
      ->check(kPositive)
      ->excludes(pr_vec_opt);
  precision->add_option("--dim", pr_dim, "Dimension for --random")->check(kPositive)->capture_default_str();
  precision->add_option("--out", pr_out, "CSV output path")->required();
  precision->add_option("--k", pr_k, "Neighbours compared")->check(kPositive)->capture_default_str();
  precision->add_option("--queries", pr_queries, "Sampled query points")->check(kPositive)->capture_default_str();
  precision->add_option("--seed", pr_seed, "Seed for the forest, sampling and --random")->capture_default_str();
  pr_forest.add(precision);

  // report
  auto* report = app.add_subcommand("report", "Cluster categorization report, from stage files or a project round");
  std::string rp_manifest, rp_groups, rp_vectors, rp_model, rp_tags, rp_project, rp_out, rp_format = "csv";
  std::uint32_t rp_round = 1;
  auto* rp_project_opt = report->add_option("--project", rp_project, "Project id in --data-dir");
  report->add_option("--manifest", rp_manifest, "Manifest")->check(CLI::ExistingFile)->excludes(rp_project_opt);
  report->add_option("--groups", rp_groups, "Groups")->check(CLI::ExistingFile)->excludes(rp_project_opt);
  report->add_option("--vectors", rp_vectors, "Vectors file")->check(CLI::ExistingFile)->excludes(rp_project_opt);
  report->add_option("--model", rp_model, "Model file")->check(CLI::ExistingFile)->excludes(rp_project_opt);
  report->add_option("--tags", rp_tags, "Tag event log (default: everything untagged)")->check(CLI::ExistingFile)->excludes(rp_project_opt);
  report->add_option("--round", rp_round, "Round number")->check(kPositive)->capture_default_str();
  report->add_option("--format", rp_format, "Output format")->check(CLI::IsMember({"csv", "structured"}))->capture_default_str();
  report->add_option("--out", rp_out, "Output path ('-' for stdout)")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Run the review HTTP API");
  std::string sv_host = "127.0.0.1";
  int sv_port = 8080;
  serve->add_option("--host", sv_host, "Bind address")->capture_default_str();
  serve->add_option("--port", sv_port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (app.get_subcommands().empty()) std::cerr << app.help();
    return kExitValidation;
  }
  verbosity = quiet ? 0 : 1 + verbose;
  const auto t0 = std::chrono::steady_clock::now();

  try {
    if (*scan) {
      corpus::ScanOptions opts;
      opts.recurse = !no_recurse;
      opts.hash = corpus::parse_hash_algorithm(scan_hash);
      opts.workers = workers;
      if (!scan_ext.empty()) opts.extensions = split(scan_ext, ',');
      const auto records = corpus::scan_corpus(scan_root, opts);
      corpus::write_manifest(scan_out, records);
      const auto counts = corpus::count_records(records);
      log_info("scanned " + std::to_string(counts.total) + " files (" + std::to_string(counts.invalid) +
               " invalid) in " + std::to_string(seconds_since(t0)) + " s");
    } else if (*dedup) {
      const auto records = corpus::read_manifest(dedup_manifest);
      const auto groups = corpus::deduplicate(records);
      corpus::write_groups(dedup_out, groups);
      log_info(std::to_string(groups.size()) + " distinct images among " +
               std::to_string(corpus::count_records(records).total - corpus::count_records(records).invalid) +
               " valid files");
    } else if (*tally) {
      const auto records = corpus::read_manifest(tally_manifest);
      const auto groups = corpus::read_groups(tally_groups);
      const auto rows = corpus::tally_frequencies(groups, records);
      corpus::write_tally(tally_out, rows);
      for (std::size_t i = 0; i < rows.size() && i < tally_top; ++i) {
        log_info(std::to_string(rows[i].frequency) + "x " + rows[i].content_hash + " " + rows[i].sample_path);
      }
    } else if (*exclude) {
      const auto records = corpus::read_manifest(ex_manifest);
      const auto groups = corpus::read_groups(ex_groups);
      corpus::ExclusionCriterion crit;
      if (ex_min) {
        crit = corpus::ExclusionCriterion::threshold(*ex_min);
      } else if (!ex_hashes.empty()) {
        crit = corpus::ExclusionCriterion::hashes(read_lines(ex_hashes));
      } else {
        throw ValidationError("exclude needs --min-frequency or --hashes");
      }
      const auto out = corpus::exclude_high_frequency(records, groups, crit);
      corpus::write_manifest(ex_out, out);
      log_info("excluded " + std::to_string(corpus::count_records(out).excluded_high_frequency) + " images");
    } else if (*embed) {
      embedding::EmbedderConfig config;
      config.backend = embedding::parse_backend(em_backend);
      config.dim = em_dim;
      config.batch_size = em_batch;
      config.normalize = embedding::parse_normalization(em_norm);
      config.external_command = em_command;
      config.validate();
      auto records = corpus::read_manifest(em_manifest);
      auto groups = corpus::read_groups(em_groups);
      const fs::path out = em_out;
      const fs::path scratch = (out.has_parent_path() ? out.parent_path() : fs::path(".")) / (out.filename().string() + ".job");
      std::size_t failures = 0;
      const auto vectors = review::embed_representatives(records, groups, em_root, config, workers, scratch, &failures);
      std::error_code ec;
      fs::remove_all(scratch, ec);
      embedding::write_vectors(out, vectors);
      if (failures > 0) {
        corpus::write_manifest(em_manifest_out.empty() ? em_manifest : em_manifest_out, records);
        corpus::write_groups(em_groups_out.empty() ? em_groups : em_groups_out, groups);
        log_info(std::to_string(failures) + " images could not be embedded; their groups are now invalid");
      } else {
        if (!em_manifest_out.empty()) corpus::write_manifest(em_manifest_out, records);
        if (!em_groups_out.empty()) corpus::write_groups(em_groups_out, groups);
      }
      log_info("embedded " + std::to_string(vectors.rows()) + " images at dim " + std::to_string(vectors.dim()) +
               " in " + std::to_string(seconds_since(t0)) + " s");
    } else if (*cluster) {
      const auto vectors = embedding::read_vectors(cl_vectors);
      if (vectors.empty()) throw ValidationError("vectors file has no rows");
      if (!cl_summaries.empty() && (cl_manifest.empty() || cl_groups.empty())) {
        throw ValidationError("--summaries needs --manifest and --groups");
      }
      kmeans::FitOptions opts;
      opts.k = kmeans::resolve_cluster_count(cl_k, vectors.rows());
      opts.seed = cl_seed;
      opts.max_iters = cl_iters;
      opts.tol = cl_tol;
      opts.workers = workers;
      const auto model = kmeans::kmeans_fit(vectors, opts);
      kmeans::write_model(cl_out, model);
      log_info("k=" + std::to_string(model.k) + " inertia=" + std::to_string(model.inertia) + " after " +
               std::to_string(model.iterations_run) + " iterations, " + std::to_string(seconds_since(t0)) + " s");
      if (!cl_summaries.empty()) {
        const auto records = corpus::read_manifest(cl_manifest);
        const auto groups = corpus::read_groups(cl_groups);
        write_text(cl_summaries, review::summaries_json(kmeans::summarize_clusters(model, vectors, records, groups)));
      }
    } else if (*knn) {
      const auto vectors = embedding::read_vectors(kn_vectors);
      std::vector<std::size_t> rows = kn_rows;
      if (rows.empty()) {
        rows.resize(vectors.rows());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
      }
      std::optional<ann::KdForest> forest;
      if (!kn_exact) {
        forest.emplace(ann::KdForest::build(vectors, kn_forest.params(kn_seed)));
        log_debug("forest built in " + std::to_string(seconds_since(t0)) + " s");
      }
      std::string csv = "query_row,query_ordinal,rank,neighbor_row,neighbor_ordinal,distance\n";
      for (std::size_t r : rows) {
        const auto list = kn_exact ? ann::exact_knn(vectors, r, kn_k) : ann::query_knn(*forest, vectors, r, kn_k);
        for (std::size_t i = 0; i < list.neighbors.size(); ++i) {
          const auto& n = list.neighbors[i];
          char dist[32];
          std::snprintf(dist, sizeof dist, "%.9g", n.distance);
          csv += std::to_string(r) + "," + std::to_string(vectors.ordinal(r)) + "," + std::to_string(i + 1) + "," +
                 std::to_string(n.index) + "," + std::to_string(vectors.ordinal(n.index)) + "," + dist + "\n";
        }
      }
      write_text(kn_out, csv);
      log_info(std::to_string(rows.size()) + " queries in " + std::to_string(seconds_since(t0)) + " s");
    } else if (*precision) {
      if (!pr_random && pr_vectors.empty()) throw ValidationError("precision needs --vectors or --random");
      const auto vectors = pr_random ? random_vectors(*pr_random, pr_dim, pr_seed) : embedding::read_vectors(pr_vectors);
      const auto tb = std::chrono::steady_clock::now();
      const auto forest = ann::KdForest::build(vectors, pr_forest.params(pr_seed));
      const double build = seconds_since(tb);
      const auto rep = ann::precision_at_k(vectors, forest, pr_k, pr_queries, pr_seed, build);
      write_text(pr_out, ann::precision_csv(rep));
      const std::size_t half = std::max<std::size_t>(1, rep.k / 2);
      std::string summary = "mean precision ranks 1-" + std::to_string(half) + ": " + std::to_string(rep.mean_precision(1, half));
      if (half < rep.k) {
        summary += ", ranks " + std::to_string(half + 1) + "-" + std::to_string(rep.k) + ": " +
                   std::to_string(rep.mean_precision(half + 1, rep.k));
      }
      log_info(summary);
      log_info("similarity matrix " + std::to_string(rep.similarity_matrix_bytes) + " bytes, forest " +
               std::to_string(rep.index_bytes) + " bytes");
    } else if (*report) {
      review::CategorizationReport result;
      if (!rp_project.empty()) {
        fs::create_directories(data_dir);
        review::ReviewService service(data_dir);
        result = service.report(rp_project, rp_round);
      } else {
        if (rp_manifest.empty() || rp_groups.empty() || rp_vectors.empty() || rp_model.empty()) {
          throw ValidationError("report needs --project, or all of --manifest --groups --vectors --model");
        }
        const auto records = corpus::read_manifest(rp_manifest);
        const auto groups = corpus::read_groups(rp_groups);
        const auto vectors = embedding::read_vectors(rp_vectors);
        const auto model = kmeans::read_model(rp_model);
        const auto summaries = kmeans::summarize_clusters(model, vectors, records, groups);
        std::vector<review::ClusterLabel> labels(model.k);
        if (!rp_tags.empty()) {
          for (const auto& [key, label] : review::replay(review::read_events(rp_tags))) {
            if (key.first != rp_round) continue;
            if (key.second >= model.k) {
              throw ValidationError("tag log names cluster " + std::to_string(key.second) + " but k=" +
                                    std::to_string(model.k));
            }
            labels[key.second] = label;
          }
        }
        result = review::build_report(rp_round, records, summaries, labels);
      }
      write_text(rp_out, rp_format == "csv" ? review::report_csv(result) : review::report_json(result));
      const auto& t = result.totals;
      log_info("responsive " + std::to_string(t.images_responsive) + ", not responsive " +
               std::to_string(t.images_not_responsive) + ", further review " + std::to_string(t.images_further_review) +
               ", untagged " + std::to_string(t.images_untagged) + ", excluded " +
               std::to_string(t.images_excluded_prefilter) + ", invalid " + std::to_string(t.images_invalid));
    } else if (*serve) {
      fs::create_directories(data_dir);
      review::ReviewService service(data_dir);
      review::HttpApi api(service);
      const int port = api.bind(sv_host, sv_port);
      active_server = &api;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      // Scripts can read the chosen port from this line.
      log_info("listening on http://" + sv_host + ":" + std::to_string(port) + " (data " + data_dir + ")");
      api.listen();
      active_server = nullptr;
      log_info("stopped");
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NotFoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
