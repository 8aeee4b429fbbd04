#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "touchreg/config.hpp"
#include "touchreg/rig.hpp"

namespace httplib {
class Server;
}

namespace touchreg::service {

inline constexpr int kDefaultPort = 7407;
inline constexpr const char* kJournalName = "journal.jsonl";

// Result of one API call: HTTP status and JSON body.
struct Response {
  int status = 200;
  nlohmann::json body;
};

// Single-session annotation backend. The session directory uses the capture
// layout written by `touchreg synth` (intrinsics.txt, poses.txt, optional
// frames.txt, depth/, images/). Every mutation is appended to
// <session>/journal.jsonl before it is applied; the journal is replayed on
// construction. Journal lines are annotation records, or {"delete": index}
// for a removed correspondence.
class SessionService {
 public:
  // Throws Error(Parse) with the line number for a corrupt journal.
  SessionService(std::filesystem::path session_dir, AppConfig config);

  Response get_session() const;
  Response get_frame_image(const std::string& frame_id, bool tactile) const;
  Response get_frame_depth(const std::string& frame_id, std::optional<Vec2> pixel) const;
  Response post_correspondences(const std::string& body);
  Response delete_correspondence(const std::string& index);
  Response post_calibrate();
  Response get_calibration() const;

  std::uint64_t revision() const;

 private:
  struct Entry {
    std::string frame_id;
    std::string touch_id;
    AnnotatedPair pair;
  };
  struct Calibrated {
    nlohmann::json calibration;
    std::string report;
    std::uint64_t revision = 0;
  };

  // Validates a record against the session and fills missing depths.
  FrameAnnotation validate(FrameAnnotation record) const;
  const DepthMap& depth_for(const std::string& frame_id) const;
  void append_journal(const nlohmann::json& line);
  void apply_add(const FrameAnnotation& record);
  void apply_delete(std::size_t index);
  void log(std::string message);
  std::vector<FrameAnnotation> annotations() const;
  std::filesystem::path tactile_image_path(const std::string& frame_id) const;

  std::filesystem::path dir_;
  AppConfig config_;
  CaptureSession session_;
  std::vector<Entry> entries_;
  std::uint64_t revision_ = 0;
  std::optional<Calibrated> latest_;
  std::vector<std::string> status_log_;
  mutable std::map<std::string, DepthMap> depth_cache_;
  mutable std::shared_mutex mutex_;  // single writer; calibration holds it until done
};

// HTTP front end (local only).
class HttpServer {
 public:
  explicit HttpServer(SessionService& service);
  ~HttpServer();

  // Binds to 127.0.0.1; port 0 picks a free port. Returns the bound port.
  // Throws Error(Io) when the port is unavailable.
  int bind(int port);
  // Serves until stop(); call after bind().
  void serve();
  void stop();

 private:
  SessionService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace touchreg::service
