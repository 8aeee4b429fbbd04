#include "touchreg/service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include "httplib.h"

#include "touchreg/commands.hpp"
#include "touchreg/dataset_io.hpp"

namespace touchreg::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return 400;
    case ErrorKind::NotFound: return 404;
    case ErrorKind::Io: return 500;
    case ErrorKind::Precondition:
    case ErrorKind::InvalidArgument:
    case ErrorKind::Degenerate: return 422;
  }
  return 500;
}

Response error_response(int status, const std::string& code, const std::string& message, json detail = {}) {
  return {status, json{{"code", code}, {"message", message}, {"detail", detail.is_null() ? json::object() : detail}}};
}

Response error_response(const Error& e) {
  return error_response(status_for(e.kind()), to_string(e.kind()), e.what());
}

template <typename Fn>
Response guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_response(e);
  } catch (const json::exception& e) {
    return error_response(400, "parse", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

std::string encode_floats(const std::vector<float>& values) {
  std::string bytes(values.size() * sizeof(float), '\0');
  // Little-endian hosts only; the on-disk formats make the same assumption.
  std::memcpy(bytes.data(), values.data(), bytes.size());
  return httplib::detail::base64_encode(bytes);
}

json raster_payload(int width, int height, int channels, const std::vector<float>& values) {
  return {{"width", width},
          {"height", height},
          {"channels", channels},
          {"encoding", "f32le-base64"},
          {"data", encode_floats(values)}};
}

json intrinsics_json(const Intrinsics& k) {
  return {{"fx", k.fx()}, {"fy", k.fy()}, {"cx", k.cx()}, {"cy", k.cy()}, {"width", k.width()}, {"height", k.height()}};
}

json pair_json(const AnnotatedPair& p) {
  json j = {{"touch_px", {p.touch_px.x(), p.touch_px.y()}}, {"view_px", {p.view_px.x(), p.view_px.y()}}};
  j["depth_m"] = p.depth_m ? json(*p.depth_m) : json(nullptr);
  return j;
}

CaptureSession load_session_dir(const fs::path& dir, double max_skew) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "session directory not found: " + dir.string());
  const fs::path frames = dir / "frames.txt";
  return cli::load_session(dir / "intrinsics.txt", dir / "poses.txt",
                           fs::exists(frames) ? std::optional<fs::path>(frames) : std::nullopt, max_skew);
}

}  // namespace

SessionService::SessionService(fs::path session_dir, AppConfig config)
    : dir_(std::move(session_dir)), config_(config), session_(load_session_dir(dir_, config_.max_skew)) {
  const fs::path depth_dir = dir_ / "depth";
  if (fs::is_directory(depth_dir)) {
    for (const auto& entry : fs::directory_iterator(depth_dir)) {
      if (entry.path().extension() != ".depth") continue;
      depth_cache_.emplace(entry.path().stem().string(), load_depth(entry.path(), session_.intrinsics_cam));
    }
  }

  const fs::path journal = dir_ / kJournalName;
  if (fs::exists(journal)) {
    std::istringstream in(read_text_file(journal));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const json j = json::parse(line);
        if (j.is_object() && j.contains("delete")) {
          const auto idx = j.at("delete").get<long long>();
          if (idx < 0 || static_cast<std::size_t>(idx) >= entries_.size())
            throw Error(ErrorKind::Parse, "delete of nonexistent correspondence " + std::to_string(idx));
          apply_delete(static_cast<std::size_t>(idx));
        } else {
          apply_add(validate(annotation_from_json(j)));
        }
      } catch (const std::exception& e) {
        throw Error(ErrorKind::Parse,
                    "corrupt journal " + journal.string() + " line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    log("replayed " + std::to_string(lineno) + " journal lines");
  }
}

std::uint64_t SessionService::revision() const {
  std::shared_lock lock(mutex_);
  return revision_;
}

void SessionService::log(std::string message) { status_log_.push_back(std::move(message)); }

const DepthMap& SessionService::depth_for(const std::string& frame_id) const {
  const auto it = depth_cache_.find(frame_id);
  if (it == depth_cache_.end())
    throw Error(ErrorKind::NotFound, "no depth map for frame '" + frame_id + "'");
  return it->second;
}

FrameAnnotation SessionService::validate(FrameAnnotation record) const {
  if (record.pairs.empty()) throw Error(ErrorKind::InvalidArgument, "record has no pairs");
  std::map<std::string, DepthMap> depth;
  if (const auto it = depth_cache_.find(record.frame_id); it != depth_cache_.end()) depth.emplace(*it);
  lift_annotations(session_, {record}, depth);
  return record;
}

void SessionService::append_journal(const json& line) {
  const fs::path path = dir_ / kJournalName;
  const std::string text = line.dump() + "\n";
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorKind::Io, "cannot open journal " + path.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < text.size()) {
    const ssize_t n = ::write(fd, text.data() + done, text.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int saved = errno;
      ::close(fd);
      throw Error(ErrorKind::Io, "cannot write journal " + path.string() + ": " + std::strerror(saved));
    }
    done += static_cast<std::size_t>(n);
  }
  const bool synced = ::fsync(fd) == 0;
  ::close(fd);
  if (!synced) throw Error(ErrorKind::Io, "cannot sync journal " + path.string());
}

void SessionService::apply_add(const FrameAnnotation& record) {
  for (const auto& p : record.pairs) entries_.push_back({record.frame_id, record.touch_id, p});
  ++revision_;
}

void SessionService::apply_delete(std::size_t index) {
  entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(index));
  ++revision_;
}

std::vector<FrameAnnotation> SessionService::annotations() const {
  // Consecutive entries of the same frame pair form one record, so the
  // correspondence order is exactly the entry order.
  std::vector<FrameAnnotation> out;
  for (const auto& e : entries_) {
    if (out.empty() || out.back().frame_id != e.frame_id || out.back().touch_id != e.touch_id)
      out.push_back({e.frame_id, e.touch_id, {}});
    out.back().pairs.push_back(e.pair);
  }
  return out;
}

fs::path SessionService::tactile_image_path(const std::string& frame_id) const {
  // Accepts a touch id directly, or a visual frame id resolved through pairing.
  if (const auto* t = session_.find_touch(frame_id)) {
    if (!t->frame.image_ref.empty()) return dir_ / t->frame.image_ref;
    return dir_ / "images" / "tactile" / (frame_id + ".raster");
  }
  for (const auto& t : session_.touch_frames) {
    if (t.visual_index && session_.visual_frames[*t.visual_index].id == frame_id) {
      if (!t.frame.image_ref.empty()) return dir_ / t.frame.image_ref;
      return dir_ / "images" / "tactile" / (t.frame.id + ".raster");
    }
  }
  throw Error(ErrorKind::NotFound, "no touch frame for '" + frame_id + "'");
}

Response SessionService::get_session() const {
  return guarded([&] {
    std::shared_lock lock(mutex_);
    std::map<std::size_t, std::string> touch_for_visual;
    for (const auto& t : session_.touch_frames)
      if (t.visual_index) touch_for_visual.emplace(*t.visual_index, t.frame.id);

    json frames = json::array();
    for (std::size_t i = 0; i < session_.visual_frames.size(); ++i) {
      const auto& v = session_.visual_frames[i];
      json f = {{"id", v.id}, {"timestamp", v.timestamp}, {"pose", pose_to_json(v.pose)},
                {"has_depth", depth_cache_.count(v.id) > 0},
                {"has_visual_image", fs::exists(dir_ / "images" / "visual" / (v.id + ".raster"))}};
      const auto t = touch_for_visual.find(i);
      f["touch_id"] = t == touch_for_visual.end() ? json(nullptr) : json(t->second);
      frames.push_back(std::move(f));
    }
    json corrs = json::array();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      json c = pair_json(entries_[i].pair);
      c["index"] = i;
      c["frame_id"] = entries_[i].frame_id;
      c["touch_id"] = entries_[i].touch_id;
      corrs.push_back(std::move(c));
    }
    json body = {{"revision", revision_},
                 {"intrinsics", {{"cam", intrinsics_json(session_.intrinsics_cam)},
                                 {"touch", intrinsics_json(session_.intrinsics_touch)}}},
                 {"frames", frames},
                 {"correspondences", corrs},
                 {"dropped_touch_ids", session_.dropped_touch_ids},
                 {"min_correspondences", kMinCalibrationCorrespondences},
                 {"calibration_revision", latest_ ? json(latest_->revision) : json(nullptr)},
                 {"calibration_stale", latest_ ? json(latest_->revision != revision_) : json(nullptr)},
                 {"log", status_log_}};
    return Response{200, body};
  });
}

Response SessionService::get_frame_image(const std::string& frame_id, bool tactile) const {
  return guarded([&] {
    fs::path path;
    if (tactile) {
      path = tactile_image_path(frame_id);
    } else {
      if (!session_.find_visual(frame_id)) throw Error(ErrorKind::NotFound, "unknown frame '" + frame_id + "'");
      path = dir_ / "images" / "visual" / (frame_id + ".raster");
    }
    if (!fs::exists(path)) throw Error(ErrorKind::NotFound, "no image for '" + frame_id + "'");
    const ImageBuffer img = load_raster(path);
    std::vector<float> values;
    values.reserve(static_cast<std::size_t>(img.width()) * img.height() * img.channels());
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x)
        for (int c = 0; c < img.channels(); ++c) values.push_back(static_cast<float>(img.at(x, y, c)));
    return Response{200, raster_payload(img.width(), img.height(), img.channels(), values)};
  });
}

Response SessionService::get_frame_depth(const std::string& frame_id, std::optional<Vec2> pixel) const {
  return guarded([&] {
    if (!session_.find_visual(frame_id)) throw Error(ErrorKind::NotFound, "unknown frame '" + frame_id + "'");
    const DepthMap& d = depth_for(frame_id);
    if (pixel) {
      if (!session_.intrinsics_cam.contains(*pixel))
        throw Error(ErrorKind::InvalidArgument, "pixel outside the calibration view");
      const double v = d.lookup(*pixel);
      return Response{200, json{{"frame_id", frame_id},
                                {"u", pixel->x()},
                                {"v", pixel->y()},
                                {"valid", v > 0.0},
                                {"depth_m", v > 0.0 ? json(v) : json(nullptr)}}};
    }
    std::vector<float> values;
    values.reserve(static_cast<std::size_t>(d.width()) * d.height());
    for (int y = 0; y < d.height(); ++y)
      for (int x = 0; x < d.width(); ++x) values.push_back(static_cast<float>(d.at(x, y)));
    json body = raster_payload(d.width(), d.height(), 1, values);
    body["frame_id"] = frame_id;
    return Response{200, body};
  });
}

Response SessionService::post_correspondences(const std::string& body) {
  return guarded([&] {
    const json j = json::parse(body);
    FrameAnnotation record = annotation_from_json(j);
    std::unique_lock lock(mutex_);
    record = validate(std::move(record));
    append_journal(to_json(record));
    const std::size_t first = entries_.size();
    apply_add(record);
    log("added " + std::to_string(record.pairs.size()) + " pair(s) on frame " + record.frame_id);
    return Response{201, json{{"revision", revision_},
                              {"first_index", first},
                              {"added", record.pairs.size()},
                              {"count", entries_.size()}}};
  });
}

Response SessionService::delete_correspondence(const std::string& index) {
  return guarded([&] {
    std::size_t idx = 0;
    std::size_t used = 0;
    try {
      idx = std::stoul(index, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != index.size())
      throw Error(ErrorKind::InvalidArgument, "correspondence index must be a non-negative integer");
    std::unique_lock lock(mutex_);
    if (idx >= entries_.size()) throw Error(ErrorKind::NotFound, "no correspondence " + index);
    append_journal(json{{"delete", idx}});
    apply_delete(idx);
    log("deleted correspondence " + index);
    return Response{200, json{{"revision", revision_}, {"count", entries_.size()}}};
  });
}

Response SessionService::post_calibrate() {
  return guarded([&] {
    std::unique_lock lock(mutex_);
    const auto anns = annotations();
    const RigCalibration rig = calibrate(session_, anns, depth_cache_, config_.solver);
    Calibrated result{to_json(rig), cli::format_calibration_report(rig, anns), revision_};
    json residuals = json::array();
    for (std::size_t i = 0; i < rig.solve.per_point_residuals.size(); ++i) {
      const Vec2& r = rig.solve.per_point_residuals[i];
      residuals.push_back({{"index", i}, {"du", r.x()}, {"dv", r.y()}, {"l1", std::abs(r.x()) + std::abs(r.y())}});
    }
    result.calibration["per_point"] = residuals;
    latest_ = result;
    log("calibrated at revision " + std::to_string(revision_) + ", mean L1 " + std::to_string(rig.mean_l1_error) +
        " px");
    return Response{200, json{{"revision", result.revision},
                              {"stale", false},
                              {"calibration", result.calibration},
                              {"report", result.report}}};
  });
}

Response SessionService::get_calibration() const {
  return guarded([&] {
    std::shared_lock lock(mutex_);
    if (!latest_) return error_response(404, "not_found", "no calibration has been run");
    return Response{200, json{{"revision", latest_->revision},
                              {"stale", latest_->revision != revision_},
                              {"calibration", latest_->calibration},
                              {"report", latest_->report}}};
  });
}

// ---------------------------------------------------------------------------

HttpServer::HttpServer(SessionService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  // SO_REUSEADDR only: the default also sets SO_REUSEPORT, which would let a
  // second server share the port silently.
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  s.Get("/session", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, service_.get_session());
  });
  s.Get(R"(/frames/([^/]+)/visual)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.get_frame_image(req.matches[1], false));
  });
  s.Get(R"(/frames/([^/]+)/tactile)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.get_frame_image(req.matches[1], true));
  });
  s.Get(R"(/frames/([^/]+)/depth)", [this, send](const httplib::Request& req, httplib::Response& res) {
    std::optional<Vec2> px;
    if (req.has_param("u") || req.has_param("v")) {
      try {
        px = Vec2(std::stod(req.get_param_value("u")), std::stod(req.get_param_value("v")));
      } catch (const std::exception&) {
        send(res, error_response(400, "parse", "u and v must both be numbers"));
        return;
      }
    }
    send(res, service_.get_frame_depth(req.matches[1], px));
  });
  s.Post("/correspondences", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.post_correspondences(req.body));
  });
  s.Delete(R"(/correspondences/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.delete_correspondence(req.matches[1]));
  });
  s.Post("/calibrate", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, service_.post_calibrate());
  });
  s.Get("/calibration", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, service_.get_calibration());
  });
  s.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) send(res, error_response(res.status, "http", httplib::status_message(res.status)));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(int port) {
  const char* host = "127.0.0.1";
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorKind::Io, "cannot bind an ephemeral port");
    return bound;
  }
  if (!server_->bind_to_port(host, port))
    throw Error(ErrorKind::Io, "cannot bind port " + std::to_string(port) + " (in use?)");
  return port;
}

void HttpServer::serve() { server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

}  // namespace touchreg::service
