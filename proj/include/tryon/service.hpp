#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "tryon/error.hpp"
#include "tryon/fitting.hpp"
#include "tryon/hash.hpp"
#include "tryon/head_model.hpp"
#include "tryon/mesh_io.hpp"
#include "tryon/pipeline.hpp"

namespace tryon {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

struct ServiceConfig {
  fs::path data_dir = "data";
  fs::path head_asset;  // <name>.fma.json
  std::string detector_url;  // empty: no detector, image uploads get 503
  std::string host = "127.0.0.1";
  int port = 8080;
  int detector_timeout_s = 10;

  void set_bind(const std::string& bind) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw Error(Errc::invalid_argument, "bind must be host:port, got '" + bind + "'");
    host = bind.substr(0, colon);
    try {
      std::size_t used = 0;
      port = std::stoi(bind.substr(colon + 1), &used);
      if (used != bind.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(Errc::invalid_argument, "bad port in bind '" + bind + "'");
    }
    if (port < 0 || port > 65535) throw Error(Errc::invalid_argument, "port out of range in bind '" + bind + "'");
  }
};

/// Config file keys: data_dir, head_asset, detector_url, bind ("host:port"),
/// detector_timeout_s. Relative paths resolve against the file's directory.
inline ServiceConfig parse_config(std::string_view text, const fs::path& base_dir = {}) {
  ServiceConfig c;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::parse_error, "config must be a JSON object");
  static const std::set<std::string> known = {"data_dir", "head_asset", "detector_url", "bind", "detector_timeout_s"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw Error(Errc::invalid_argument, "unknown config key '" + key + "'");
  try {
    auto path = [&](const char* key) {
      fs::path p = j.at(key).get<std::string>();
      return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    if (j.contains("data_dir")) c.data_dir = path("data_dir");
    if (j.contains("head_asset")) c.head_asset = path("head_asset");
    if (j.contains("detector_url")) c.detector_url = j.at("detector_url").get<std::string>();
    if (j.contains("bind")) c.set_bind(j.at("bind").get<std::string>());
    if (j.contains("detector_timeout_s")) c.detector_timeout_s = j.at("detector_timeout_s").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("config: ") + e.what());
  }
  return c;
}

/// TRYON_DATA_DIR, TRYON_HEAD_ASSET, TRYON_DETECTOR_URL, TRYON_BIND override the file.
inline void apply_env_overrides(ServiceConfig& c) {
  if (const char* v = std::getenv("TRYON_DATA_DIR"); v && *v) c.data_dir = v;
  if (const char* v = std::getenv("TRYON_HEAD_ASSET"); v && *v) c.head_asset = v;
  if (const char* v = std::getenv("TRYON_DETECTOR_URL")) c.detector_url = v;
  if (const char* v = std::getenv("TRYON_BIND"); v && *v) c.set_bind(v);
}

inline ServiceConfig load_config(const fs::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                      path.parent_path());
}

// ---------------------------------------------------------------------------
// Filesystem helpers

namespace detail {

inline std::string random_hex(std::size_t n_bytes) {
  static thread_local std::mt19937_64 gen{std::random_device{}()};
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < n_bytes; ++i) {
    const auto b = static_cast<unsigned>(gen() & 0xFF);
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 15]);
  }
  return out;
}

/// Write to a unique sibling temp file then rename over the target, so a
/// reader never sees a partial file at `path`.
inline void atomic_write(const fs::path& path, std::span<const std::uint8_t> bytes) {
  const fs::path tmp = path.string() + ".tmp." + random_hex(8);
  try {
    write_file_bytes(tmp, bytes);
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

inline void atomic_write(const fs::path& path, std::string_view text) {
  atomic_write(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline bool is_hex_token(std::string_view s, std::size_t min_len, std::size_t max_len) {
  if (s.size() < min_len || s.size() > max_len) return false;
  for (char c : s)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  return true;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string as_text(const std::vector<std::uint8_t>& bytes) { return {bytes.begin(), bytes.end()}; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Catalog

struct CatalogEntry {
  std::string id;
  std::string display_name;
  fs::path glb_path;
  fs::path anchors_path;
  std::optional<fs::path> thumbnail;
  std::string asset_hash;  // SHA-256 over GLB bytes then anchors bytes
  LoadedEyewear eyewear;
};

struct CatalogRejection {
  std::string file;
  std::string reason;
};

struct Catalog {
  std::vector<CatalogEntry> entries;
  std::vector<CatalogRejection> rejected;

  const CatalogEntry* find(const std::string& id) const {
    for (const auto& e : entries)
      if (e.id == id) return &e;
    return nullptr;
  }
};

/// Pairs every <stem>.glb with <stem>.anchors.json in `dir` (non-recursive).
/// Each pair must pass the GLB validator and the anchors schema; failures are
/// listed in `rejected` with a reason. Two valid pairs declaring one id is an error.
inline Catalog ingest_catalog(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(Errc::io_error, "catalog directory not readable: " + dir.string());
  std::map<std::string, fs::path> glbs, anchors;
  std::set<std::string> pngs;
  fs::directory_iterator it(dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot list " + dir.string() + ": " + ec.message());
  for (const auto& de : it) {
    if (!de.is_regular_file()) continue;
    const std::string name = de.path().filename().string();
    auto ends_with = [&](std::string_view suffix) {
      return name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(".anchors.json")) anchors[name.substr(0, name.size() - 13)] = de.path();
    else if (ends_with(".glb")) glbs[name.substr(0, name.size() - 4)] = de.path();
    else if (ends_with(".png")) pngs.insert(name.substr(0, name.size() - 4));
  }

  Catalog cat;
  for (const auto& [stem, path] : anchors)
    if (!glbs.count(stem)) cat.rejected.push_back({path.filename().string(), "no matching " + stem + ".glb"});
  for (const auto& [stem, glb_path] : glbs) {
    const auto a = anchors.find(stem);
    if (a == anchors.end()) {
      cat.rejected.push_back({glb_path.filename().string(), "no matching " + stem + ".anchors.json"});
      continue;
    }
    try {
      const auto glb = detail::read_file_bytes(glb_path);
      const auto report = validate_glb(glb);
      if (!report.ok()) throw Error(Errc::invalid_asset, "GLB validation: " + report.issues.front());
      const auto anchors_bytes = detail::read_file_bytes(a->second);
      CatalogEntry e;
      e.eyewear = load_eyewear(glb, detail::as_text(anchors_bytes), stem);
      e.id = e.eyewear.asset.id;
      e.display_name = e.eyewear.asset.display_name;
      e.glb_path = glb_path;
      e.anchors_path = a->second;
      if (pngs.count(stem)) e.thumbnail = dir / (stem + ".png");
      std::vector<std::uint8_t> both = glb;
      both.insert(both.end(), anchors_bytes.begin(), anchors_bytes.end());
      e.asset_hash = sha256_hex(both);
      if (cat.find(e.id))
        throw Error(Errc::ingest_error, "duplicate catalog id '" + e.id + "' (" + glb_path.filename().string() + ")");
      cat.entries.push_back(std::move(e));
    } catch (const Error& err) {
      if (err.code() == Errc::ingest_error) throw;
      cat.rejected.push_back({glb_path.filename().string(), err.what()});
    }
  }
  return cat;
}

// ---------------------------------------------------------------------------
// Landmark detector client

class LandmarkDetector {
 public:
  virtual ~LandmarkDetector() = default;
  /// Image bytes in, exactly 68 landmarks out (or an Error).
  virtual LandmarkFile detect(std::span<const std::uint8_t> image, const std::string& content_type) = 0;
};

// POSTs the raw image to the configured URL and expects a landmarks JSON
// document (same schema as landmark uploads) in the response.
class HttpLandmarkDetector : public LandmarkDetector {
 public:
  HttpLandmarkDetector(std::string url, int timeout_s) : url_(std::move(url)), timeout_s_(timeout_s) {
    const auto scheme = url_.find("://");
    if (scheme == std::string::npos || url_.compare(0, scheme, "http") != 0)
      throw Error(Errc::invalid_argument, "detector URL must be http://host[:port]/path");
    const auto path = url_.find('/', scheme + 3);
    origin_ = url_.substr(0, path);
    path_ = path == std::string::npos ? "/" : url_.substr(path);
  }

  LandmarkFile detect(std::span<const std::uint8_t> image, const std::string& content_type) override {
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_s_);
    client.set_read_timeout(timeout_s_);
    const auto res = client.Post(path_, reinterpret_cast<const char*>(image.data()), image.size(),
                                 content_type.empty() ? "application/octet-stream" : content_type);
    if (!res) throw Error(Errc::io_error, "detector unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200) throw Error(Errc::io_error, "detector returned HTTP " + std::to_string(res->status));
    return parse_landmarks_json(res->body);
  }

 private:
  std::string url_, origin_, path_;
  int timeout_s_;
};

// ---------------------------------------------------------------------------
// Service

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

inline Response json_response(int status, const nlohmann::json& j) { return {status, j.dump(), "application/json"}; }

inline Response error_response(int status, const std::string& code, const std::string& message) {
  return json_response(status, {{"error", code}, {"message", message}});
}

inline int http_status_for(Errc code) {
  switch (code) {
    case Errc::parse_error: return 400;
    case Errc::invalid_argument:
    case Errc::insufficient_data:
    case Errc::degenerate_input:
    case Errc::cannot_fit: return 422;
    case Errc::not_found: return 404;
    default: return 500;
  }
}

class TryonService {
 public:
  explicit TryonService(ServiceConfig config, std::unique_ptr<LandmarkDetector> detector = nullptr)
      : config_(std::move(config)), detector_(std::move(detector)) {
    if (config_.head_asset.empty()) throw Error(Errc::invalid_argument, "no head asset configured");
    const auto manifest = detail::read_file_bytes(config_.head_asset);
    auto hashed = manifest;
    const auto blob = detail::read_file_bytes(blob_path_for(config_.head_asset));
    hashed.insert(hashed.end(), blob.begin(), blob.end());
    model_hash_ = sha256_hex(hashed);
    asset_ = parse_asset(detail::as_text(manifest), blob);

    fs::create_directories(subjects_dir());
    fs::create_directories(outputs_dir());
    fs::create_directories(catalog_dir());
    catalog_ = ingest_catalog(catalog_dir());
    if (!detector_ && !config_.detector_url.empty())
      detector_ = std::make_unique<HttpLandmarkDetector>(config_.detector_url, config_.detector_timeout_s);
  }

  const ServiceConfig& config() const { return config_; }
  const Catalog& catalog() const { return catalog_; }
  const std::string& model_asset_hash() const { return model_hash_; }
  fs::path subjects_dir() const { return config_.data_dir / "subjects"; }
  fs::path outputs_dir() const { return config_.data_dir / "outputs"; }
  fs::path catalog_dir() const { return config_.data_dir / "catalog"; }
  std::size_t renders_performed() const { return renders_.load(); }

  Response health() const {
    return json_response(200, {{"status", "ok"},
                               {"model_asset_hash", model_hash_},
                               {"detector", detector_ != nullptr},
                               {"pipeline_version", kPipelineVersion},
                               {"catalog_size", catalog_.entries.size()}});
  }

  Response list_catalog() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : catalog_.entries) {
      nlohmann::json j = {{"id", e.id}, {"display_name", e.display_name}, {"asset_hash", e.asset_hash}};
      if (e.thumbnail) j["thumbnail"] = e.thumbnail->filename().string();
      entries.push_back(j);
    }
    nlohmann::json rejected = nlohmann::json::array();
    for (const auto& r : catalog_.rejected) rejected.push_back({{"file", r.file}, {"reason", r.reason}});
    return json_response(200, {{"entries", entries}, {"rejected", rejected}});
  }

  Response create_subject_from_landmarks(std::string_view body) { return create_subject(body, "landmarks-file"); }

  Response create_subject_from_image(std::span<const std::uint8_t> image, const std::string& content_type) {
    if (!detector_) return error_response(503, "unavailable", "no landmark detector is configured");
    LandmarkFile lm;
    try {
      lm = detector_->detect(image, content_type);
    } catch (const Error& e) {
      if (e.code() == Errc::invalid_argument) return error_response(422, to_string(e.code()).data(), e.what());
      return error_response(502, "detector-failure", e.what());
    }
    return create_subject(landmarks_to_json(std::span<const Vec3>(lm.points), lm.confidence).dump(), "detector");
  }

  Response tryon(std::string_view body) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      return error_response(400, "parse-error", e.what());
    }
    std::string subject_id, frame_id;
    FitParams fp;
    try {
      if (!j.is_object()) throw Error(Errc::invalid_argument, "request body must be a JSON object");
      for (const auto& [key, value] : j.items())
        if (key != "subject_id" && key != "frame_id" && key != "forward_offset_mm" && key != "vertical_offset_mm" &&
            key != "scale_override")
          throw Error(Errc::invalid_argument, "unknown field '" + key + "'");
      if (!j.contains("subject_id") || !j.contains("frame_id"))
        throw Error(Errc::invalid_argument, "subject_id and frame_id are required");
      subject_id = j.at("subject_id").get<std::string>();
      frame_id = j.at("frame_id").get<std::string>();
      if (j.contains("forward_offset_mm")) fp.forward_offset_mm = j.at("forward_offset_mm").get<double>();
      if (j.contains("vertical_offset_mm")) fp.vertical_offset_mm = j.at("vertical_offset_mm").get<double>();
      if (j.contains("scale_override") && !j.at("scale_override").is_null())
        fp.scale_override = j.at("scale_override").get<double>();
      fp.validate();
    } catch (const nlohmann::json::exception& e) {
      return error_response(422, "invalid-argument", e.what());
    } catch (const Error& e) {
      return error_response(422, to_string(e.code()).data(), e.what());
    }

    const CatalogEntry* frame = catalog_.find(frame_id);
    if (!frame) return error_response(404, "not-found", "unknown frame '" + frame_id + "'");
    std::optional<ParamVector> params;
    try {
      params = load_subject(subject_id);
    } catch (const Error& e) {
      return error_response(500, to_string(e.code()).data(), e.what());
    }
    if (!params) return error_response(404, "not-found", "unknown subject '" + subject_id + "'");

    const std::string key = output_key(*params, *frame, fp);
    const fs::path out = outputs_dir() / (key + ".glb");
    const nlohmann::json ok = {{"glb_url", "/assets/" + key + ".glb"}, {"key", key}};
    if (fs::exists(out)) {
      auto j_ok = ok;
      j_ok["cached"] = true;
      return json_response(200, j_ok);
    }
    try {
      const TryonRender r = render_tryon(asset_, *params, frame->eyewear, fp);
      const auto report = validate_glb(r.glb);
      if (!report.ok()) throw Error(Errc::numerical_failure, "rendered GLB failed validation: " + report.issues.front());
      detail::atomic_write(out, r.glb);
      ++renders_;
    } catch (const Error& e) {
      return error_response(http_status_for(e.code()), to_string(e.code()).data(), e.what());
    }
    auto j_ok = ok;
    j_ok["cached"] = false;
    return json_response(200, j_ok);
  }

  Response get_asset(const std::string& key) const {
    if (!detail::is_hex_token(key, 64, 64)) return error_response(404, "not-found", "no such asset");
    const fs::path p = outputs_dir() / (key + ".glb");
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) return error_response(404, "not-found", "no such asset");
    const auto bytes = detail::read_file_bytes(p);
    return {200, detail::as_text(bytes), "model/gltf-binary"};
  }

  Response get_subject(const std::string& id) {
    const auto p = subject_path(id);
    if (!p || !fs::is_regular_file(*p)) return error_response(404, "not-found", "unknown subject '" + id + "'");
    return {200, detail::as_text(detail::read_file_bytes(*p)), "application/json"};
  }

  /// Content-addressing key: subject params, frame id and asset hash, fit
  /// params, head asset hash and pipeline version.
  std::string output_key(const ParamVector& params, const CatalogEntry& frame, const FitParams& fp) const {
    nlohmann::json k = {{"pipeline", kPipelineVersion},
                        {"model_asset_hash", model_hash_},
                        {"params", params_to_json(params)},
                        {"frame_id", frame.id},
                        {"frame_hash", frame.asset_hash},
                        {"forward_offset_mm", fp.forward_offset_mm},
                        {"vertical_offset_mm", fp.vertical_offset_mm},
                        {"scale_override", fp.scale_override ? nlohmann::json(*fp.scale_override) : nlohmann::json()}};
    return sha256_hex(k.dump());
  }

 private:
  std::optional<fs::path> subject_path(const std::string& id) const {
    if (!detail::is_hex_token(id, 32, 32)) return std::nullopt;
    return subjects_dir() / (id + ".json");
  }

  Response create_subject(std::string_view landmarks_text, const std::string& source) {
    FitResult fit;
    try {
      const LandmarkFile lm = parse_landmarks_json(landmarks_text);
      fit = fit_landmarks2d(asset_, lm.as_2d());
    } catch (const Error& e) {
      return error_response(http_status_for(e.code()), to_string(e.code()).data(), e.what());
    }
    const std::string id = detail::random_hex(16);
    nlohmann::json doc = fit_result_to_json(fit);
    doc["subject_id"] = id;
    doc["source"] = source;
    doc["created_at"] = detail::utc_timestamp();
    doc["model_asset_hash"] = model_hash_;
    try {
      detail::atomic_write(*subject_path(id), doc.dump(1));
    } catch (const Error& e) {
      return error_response(500, to_string(e.code()).data(), e.what());
    }
    {
      std::lock_guard lock(mu_);
      subjects_[id] = fit.params;
    }
    return json_response(201, {{"subject_id", id}});
  }

  std::optional<ParamVector> load_subject(const std::string& id) {
    {
      std::lock_guard lock(mu_);
      if (auto it = subjects_.find(id); it != subjects_.end()) return it->second;
    }
    const auto p = subject_path(id);
    if (!p || !fs::is_regular_file(*p)) return std::nullopt;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(detail::as_text(detail::read_file_bytes(*p)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::corrupt_file, "subject " + id + ": " + e.what());
    }
    ParamVector params = params_from_json(j);
    check_dimensions(asset_, params);
    std::lock_guard lock(mu_);
    subjects_[id] = params;
    return params;
  }

  ServiceConfig config_;
  std::unique_ptr<LandmarkDetector> detector_;
  HeadModelAsset asset_;
  std::string model_hash_;
  Catalog catalog_;
  std::mutex mu_;
  std::map<std::string, ParamVector> subjects_;
  std::atomic<std::size_t> renders_{0};
};

// ---------------------------------------------------------------------------
// HTTP binding

inline void mount_routes(httplib::Server& server, TryonService& svc) {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  server.Get("/api/health", [&svc, send](const httplib::Request&, httplib::Response& res) { send(res, svc.health()); });
  server.Get("/api/catalog",
             [&svc, send](const httplib::Request&, httplib::Response& res) { send(res, svc.list_catalog()); });
  server.Post("/api/subjects", [&svc, send](const httplib::Request& req, httplib::Response& res) {
    if (req.is_multipart_form_data()) {
      if (req.has_file("image")) {
        const auto f = req.get_file_value("image");
        send(res, svc.create_subject_from_image(
                      std::span(reinterpret_cast<const std::uint8_t*>(f.content.data()), f.content.size()),
                      f.content_type));
      } else if (req.has_file("landmarks")) {
        send(res, svc.create_subject_from_landmarks(req.get_file_value("landmarks").content));
      } else {
        send(res, error_response(400, "parse-error", "multipart body needs an 'image' or 'landmarks' part"));
      }
      return;
    }
    const std::string ct = req.get_header_value("Content-Type");
    if (ct.rfind("image/", 0) == 0 || ct == "application/octet-stream") {
      send(res, svc.create_subject_from_image(
                    std::span(reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size()), ct));
      return;
    }
    send(res, svc.create_subject_from_landmarks(req.body));
  });
  server.Get(R"(/api/subjects/([0-9a-f]+))", [&svc, send](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.get_subject(req.matches[1]));
  });
  server.Post("/api/tryon",
              [&svc, send](const httplib::Request& req, httplib::Response& res) { send(res, svc.tryon(req.body)); });
  server.Get(R"(/assets/([^/]+)\.glb)", [&svc, send](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.get_asset(req.matches[1]));
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(nlohmann::json({{"error", "internal"}, {"message", msg}}).dump(), "application/json");
  });
}

/// Binds, optionally writes the bound port to `port_file`, then blocks until
/// the server stops. Port 0 picks a free port.
inline void serve(TryonService& svc, const fs::path& port_file = {}, httplib::Server* external = nullptr) {
  httplib::Server local;
  httplib::Server& server = external ? *external : local;
  mount_routes(server, svc);
  const auto& c = svc.config();
  int port = c.port;
  if (port == 0) {
    port = server.bind_to_any_port(c.host);
    if (port < 0) throw Error(Errc::io_error, "cannot bind " + c.host);
  } else if (!server.bind_to_port(c.host, port)) {
    throw Error(Errc::io_error, "cannot bind " + c.host + ":" + std::to_string(port));
  }
  if (!port_file.empty()) detail::atomic_write(port_file, std::to_string(port) + "\n");
  if (!server.listen_after_bind()) throw Error(Errc::io_error, "server stopped unexpectedly");
}

}  // namespace tryon
