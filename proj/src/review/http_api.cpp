#include "imgclust/review/http_api.hpp"

#include <charconv>
#include <httplib.h>
#include <json.hpp>

#include "imgclust/common/errors.hpp"
#include "imgclust/common/text.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace imgclust::review {
namespace {

constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", {{"code", code}, {"message", message}}}}.dump(), kJson);
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(2), kJson);
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const ConflictError& e) {
      send_error(res, 409, "conflict", e.what());
    } catch (const ValidationError& e) {
      send_error(res, 400, "invalid_argument", e.what());
    } catch (const NotFoundError& e) {
      send_error(res, 404, "not_found", e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "invalid_json", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

std::uint64_t parse_number(const std::string& text, const char* what) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ValidationError(std::string(what) + " must be a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::uint32_t parse_u32(const std::string& text, const char* what) {
  const auto v = parse_number(text, what);
  if (v > std::numeric_limits<std::uint32_t>::max()) throw ValidationError(std::string(what) + " out of range");
  return static_cast<std::uint32_t>(v);
}

std::size_t query_number(const httplib::Request& req, const char* name, std::size_t fallback) {
  if (!req.has_param(name)) return fallback;
  return static_cast<std::size_t>(parse_number(req.get_param_value(name), name));
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body);
  if (!body.is_object()) throw ValidationError("request body must be a JSON object");
  return body;
}

std::string thumbnail_url(const std::string& hash) { return hash.empty() ? "" : "/api/thumbnails/" + hash; }

json image_json(const ImageView& v, bool with_cluster) {
  const auto& r = *v.record;
  json j;
  j["image_id"] = r.image_id;
  j["path"] = r.path;
  j["content_hash"] = r.content_hash;
  j["format"] = r.format;
  j["width"] = r.width;
  j["height"] = r.height;
  j["distance"] = v.distance;
  if (with_cluster) {
    j["cluster_index"] = v.cluster_index;
    j["label"] = std::string(label_name(v.label));
  }
  j["thumbnail"] = thumbnail_url(r.content_hash);
  return j;
}

json event_json(const TagEvent& e) {
  return json{{"sequence", e.sequence},   {"round", e.round},   {"cluster_index", e.cluster_index},
              {"label", std::string(label_name(e.label))}, {"note", e.note}, {"author", e.author},
              {"timestamp", e.timestamp}};
}

json job_json(const JobStatus& s) {
  json j;
  j["job_id"] = s.job_id;
  j["project_id"] = s.project_id;
  j["round"] = s.round;
  j["state"] = std::string(job_state_name(s.state));
  j["stage"] = s.stage;
  j["created_at"] = s.created_at;
  j["finished_at"] = s.finished_at;
  if (s.state == JobState::failed) j["error"] = {{"code", s.error_code}, {"message", s.error}};
  j["status_url"] = "/api/jobs/" + s.job_id;
  return j;
}

json totals_json(const ReportTotals& t) {
  return json{{"images_responsive", t.images_responsive},
              {"images_not_responsive", t.images_not_responsive},
              {"images_further_review", t.images_further_review},
              {"images_untagged", t.images_untagged},
              {"images_excluded_prefilter", t.images_excluded_prefilter},
              {"images_invalid", t.images_invalid}};
}

RoundConfig parse_round_config(const json& body) {
  RoundConfig c;
  if (body.contains("k") && !body.at("k").is_null()) c.k = body.at("k").get<std::size_t>();
  c.seed = body.value("seed", std::uint64_t{0});
  c.max_iters = body.value("max_iters", std::size_t{100});
  if (body.contains("embedder")) {
    const auto& e = body.at("embedder");
    c.embedder.backend = embedding::parse_backend(e.value("backend", std::string("reference")));
    c.embedder.dim = e.value("dim", embedding::kDefaultDim);
    c.embedder.batch_size = e.value("batch_size", embedding::kDefaultBatchSize);
    c.embedder.normalize = embedding::parse_normalization(e.value("normalize", std::string("none")));
    c.embedder.external_command = e.value("command", std::string());
  }
  if (body.contains("prefilter") && !body.at("prefilter").is_null()) {
    const auto& p = body.at("prefilter");
    if (p.contains("min_frequency")) c.prefilter.emplace().min_frequency = p.at("min_frequency").get<std::size_t>();
    if (p.contains("content_hashes")) {
      if (!c.prefilter) c.prefilter.emplace();
      c.prefilter->content_hashes = p.at("content_hashes").get<std::vector<std::string>>();
    }
    if (!c.prefilter) throw ValidationError("prefilter needs min_frequency or content_hashes");
  }
  if (body.contains("forest")) {
    const auto& f = body.at("forest");
    c.forest.tree_count = f.value("tree_count", c.forest.tree_count);
    c.forest.leaf_size = f.value("leaf_size", c.forest.leaf_size);
    c.forest.checks = f.value("checks", c.forest.checks);
  }
  return c;
}

}  // namespace

struct HttpApi::Impl {
  explicit Impl(ReviewService& s) : service(s) {}
  void routes();

  ReviewService& service;
  httplib::Server server;
};

void HttpApi::Impl::routes() {
  ReviewService& svc = service;
  const std::string project = R"(/api/projects/([0-9a-f]+))";
  const std::string round = project + R"(/rounds/(\d+))";
  const std::string cluster = round + R"(/clusters/(\d+))";

  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.body.empty()) {
      send_error(res, res.status, res.status == 404 ? "not_found" : "http_error",
                 "no route for " + req.method + " " + req.path);
    }
  });

  server.Post("/api/projects", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.contains("name") || !body.contains("corpus_root")) {
      throw ValidationError("body needs name and corpus_root");
    }
    const Project p = svc.create_project(body.at("name").get<std::string>(),
                                         body.at("corpus_root").get<std::string>());
    send_json(res, json::parse(project_json(p)), 201);
  }));
  server.Get("/api/projects", guarded([&svc](const httplib::Request&, httplib::Response& res) {
    json arr = json::array();
    for (const auto& p : svc.projects()) arr.push_back(json::parse(project_json(p)));
    send_json(res, json{{"projects", arr}});
  }));
  server.Get(project, guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, json::parse(project_json(svc.project(req.matches[1]))));
  }));

  server.Post(project + "/rounds", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const JobStatus job = svc.submit_round(req.matches[1], parse_round_config(parse_body(req)));
    res.set_header("Location", "/api/jobs/" + job.job_id);
    send_json(res, job_json(job), 202);
  }));
  server.Get(project + "/rounds", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const json p = json::parse(project_json(svc.project(req.matches[1])));
    send_json(res, json{{"rounds", p.at("rounds")}, {"current_round", p.at("current_round")}});
  }));
  server.Get(round, guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const Project p = svc.project(req.matches[1]);
    const RoundInfo* info = p.find_round(parse_u32(req.matches[2], "round"));
    if (!info) throw NotFoundError("no round " + std::string(req.matches[2]));
    send_json(res, json::parse(round_info_json(*info)));
  }));
  server.Get(R"(/api/jobs/([A-Za-z0-9-]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    send_json(res, job_json(svc.job(req.matches[1])));
  }));

  server.Get(round + "/clusters", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string pid = req.matches[1];
    const auto n = parse_u32(req.matches[2], "round");
    const std::string sort = req.has_param("sort") ? req.get_param_value("sort") : "size";
    if (sort != "size" && sort != "index") throw ValidationError("sort must be size or index");
    const auto data = svc.round_data(pid, n);
    json arr = json::array();
    for (const auto& c : svc.clusters(pid, n, sort == "size")) {
      auto hash_of = [&](const std::string& id) {
        auto it = data->ordinal_of.find(id);
        return it == data->ordinal_of.end() ? std::string() : data->manifest[it->second].content_hash;
      };
      json samples = json::array();
      for (const auto& id : c.summary.sample_image_ids) {
        samples.push_back({{"image_id", id}, {"thumbnail", thumbnail_url(hash_of(id))}});
      }
      json j;
      j["cluster_index"] = c.summary.cluster_index;
      j["size_images"] = c.summary.size_total_images;
      j["size_representatives"] = c.summary.size_representatives;
      j["label"] = std::string(label_name(c.label.label));
      j["note"] = c.label.note;
      j["medoid_image_id"] = c.summary.medoid_image_id;
      j["medoid_thumbnail"] = thumbnail_url(hash_of(c.summary.medoid_image_id));
      j["samples"] = samples;
      arr.push_back(std::move(j));
    }
    send_json(res, json{{"round", n}, {"k", data->model.k}, {"clusters", arr}});
  }));

  server.Get(cluster + "/images", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const std::size_t offset = query_number(req, "offset", 0);
    const std::size_t limit = std::min<std::size_t>(query_number(req, "limit", 100), 1000);
    const auto page = svc.cluster_images(req.matches[1], parse_u32(req.matches[2], "round"),
                                         parse_u32(req.matches[3], "cluster"), offset, limit);
    json arr = json::array();
    for (const auto& v : page.images) arr.push_back(image_json(v, false));
    send_json(res, json{{"cluster_index", page.cluster_index},
                        {"total", page.total},
                        {"offset", page.offset},
                        {"limit", limit},
                        {"images", arr}});
  }));

  server.Put(cluster + "/tag", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.contains("label")) throw ValidationError("body needs label");
    const TagEvent e = svc.tag_cluster(req.matches[1], parse_u32(req.matches[2], "round"),
                                       parse_u32(req.matches[3], "cluster"), body.at("label").get<std::string>(),
                                       body.value("note", std::string()), body.value("author", std::string()));
    send_json(res, event_json(e));
  }));
  server.Get(cluster + "/tags", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    json arr = json::array();
    for (const auto& e : svc.tag_history(req.matches[1], parse_u32(req.matches[2], "round"),
                                         parse_u32(req.matches[3], "cluster"))) {
      arr.push_back(event_json(e));
    }
    send_json(res, json{{"events", arr}});
  }));

  server.Get(round + "/report", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const auto report = svc.report(req.matches[1], parse_u32(req.matches[2], "round"));
    const std::string format = req.has_param("format") ? req.get_param_value("format") : "structured";
    if (format == "csv") {
      res.set_header("Content-Disposition",
                     "attachment; filename=\"round-" + std::to_string(report.round) + "-report.csv\"");
      res.set_content(report_csv(report), "text/csv");
    } else if (format == "structured" || format == "json") {
      res.set_content(report_json(report), kJson);
    } else {
      throw ValidationError("format must be csv or structured");
    }
  }));

  server.Get(round + R"(/similar/([0-9A-Za-z_-]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const std::size_t k = query_number(req, "k", 50);
    const auto result = svc.similar_images(req.matches[1], parse_u32(req.matches[2], "round"), req.matches[3], k);
    json arr = json::array();
    for (const auto& v : result.neighbors) arr.push_back(image_json(v, true));
    send_json(res, json{{"query_image_id", result.query_image_id}, {"k", result.k}, {"neighbors", arr}});
  }));

  server.Get(project + "/stats", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const auto stats = svc.stats(req.matches[1]);
    json arr = json::array();
    for (const auto& r : stats.rounds) {
      json j;
      j["round"] = r.round;
      j["status"] = std::string(round_status_name(r.status));
      j["k"] = r.k;
      j["clusters_tagged"] = r.clusters_tagged;
      j["clusters_untagged"] = r.clusters_untagged;
      j["images_resolved"] = r.images_resolved;
      j["images_pending"] = r.images_pending;
      j["totals"] = totals_json(r.totals);
      j["tag_events"] = r.tag_events;
      j["first_tag_at"] = r.first_tag_at.empty() ? json(nullptr) : json(r.first_tag_at);
      j["last_tag_at"] = r.last_tag_at.empty() ? json(nullptr) : json(r.last_tag_at);
      arr.push_back(std::move(j));
    }
    send_json(res, json{{"project_id", stats.project_id}, {"rounds", arr}});
  }));

  server.Get(R"(/api/thumbnails/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string hash = req.matches[1];
    const fs::path path = svc.store().thumbnail_path(hash);
    if (!fs::exists(path)) throw NotFoundError("no thumbnail for " + hash);
    const std::string etag = "\"" + hash + "\"";
    res.set_header("Cache-Control", "public, max-age=31536000, immutable");
    res.set_header("ETag", etag);
    if (req.get_header_value("If-None-Match") == etag) {
      res.status = 304;
      return;
    }
    res.set_content(read_file(path.string()), "image/jpeg");
  }));
}

HttpApi::HttpApi(ReviewService& service) : impl_(std::make_unique<Impl>(service)) { impl_->routes(); }

HttpApi::~HttpApi() { stop(); }

int HttpApi::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) throw RuntimeFailure("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpApi::listen() { impl_->server.listen_after_bind(); }

int HttpApi::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  thread_ = std::thread([this] { listen(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpApi::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace imgclust::review
