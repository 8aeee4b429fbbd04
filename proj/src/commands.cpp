#include "touchreg/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "touchreg/dataset_io.hpp"
#include "touchreg/image_metrics.hpp"
#include "touchreg/retrieval.hpp"
#include "touchreg/service.hpp"
#include "touchreg/synth.hpp"

namespace touchreg::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void report_error(std::ostream& err, const std::string& code, const std::string& message) {
  err << nlohmann::json{{"code", code}, {"message", message}}.dump() << '\n';
}

// Runs a command body, translating exceptions into exit codes.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    report_error(err, to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return kExitInternal;
  }
}

void verbose(const GlobalOptions& g, std::ostream& err, const std::string& msg) {
  if (g.verbose) err << "[touchreg] " << msg << '\n';
}

const Intrinsics& require_camera(const std::map<std::string, Intrinsics>& cams, const std::string& name,
                                 const fs::path& path) {
  const auto it = cams.find(name);
  if (it == cams.end())
    throw Error(ErrorKind::NotFound, path.string() + ": no intrinsics for camera '" + name + "'");
  return it->second;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::Parse: return kExitParse;
    case ErrorKind::Precondition: return kExitPrecondition;
    case ErrorKind::InvalidArgument: return kExitInvalidArgument;
    case ErrorKind::NotFound: return kExitNotFound;
    case ErrorKind::Degenerate: return kExitDegenerate;
  }
  return kExitInternal;
}

AppConfig resolve_config(const GlobalOptions& g) {
  AppConfig cfg = g.config ? load_config(*g.config) : AppConfig{};
  if (g.seed) cfg.solver.rng_seed = *g.seed;
  return cfg;
}

std::string format_calibration_report(const RigCalibration& rig,
                                      const std::vector<FrameAnnotation>& annotations) {
  const auto& s = rig.solve;
  const Quaternion& q = rig.cam_to_touch.rotation();
  const Vec3& t = rig.cam_to_touch.translation();
  std::ostringstream o;
  o << "# rig calibration\n";
  o << "correspondences " << rig.correspondence_count << '\n';
  o << "mean_l1_error_px " << fmt("%.9g", rig.mean_l1_error) << '\n';
  o << "converged " << (s.converged ? "yes" : "no") << '\n';
  o << "iterations " << s.iterations << '\n';
  o << "best_start " << s.best_start << '\n';
  o << "condition_number " << fmt("%.6g", s.condition_number) << '\n';
  if (s.condition_warning)
    o << "warning: poorly constrained solve (condition number above " << fmt("%.0e", kConditionWarningThreshold)
      << "); add correspondences or spread them out\n";
  o << "cam_to_touch_q " << fmt("%.12f", q.w()) << ' ' << fmt("%.12f", q.x()) << ' ' << fmt("%.12f", q.y())
    << ' ' << fmt("%.12f", q.z()) << '\n';
  o << "cam_to_touch_t " << fmt("%.12f", t.x()) << ' ' << fmt("%.12f", t.y()) << ' ' << fmt("%.12f", t.z())
    << '\n';
  o << "# index frame_id touch_id du_px dv_px l1_px\n";
  std::size_t k = 0;
  for (const auto& ann : annotations) {
    for (std::size_t i = 0; i < ann.pairs.size(); ++i, ++k) {
      if (k >= s.per_point_residuals.size()) break;
      const Vec2& r = s.per_point_residuals[k];
      o << k << ' ' << ann.frame_id << ' ' << ann.touch_id << ' ' << fmt("%.6e", r.x()) << ' '
        << fmt("%.6e", r.y()) << ' ' << fmt("%.6e", std::abs(r.x()) + std::abs(r.y())) << '\n';
    }
  }
  return o.str();
}

CaptureSession load_session(const fs::path& intrinsics, const fs::path& poses,
                            const std::optional<fs::path>& frames, double max_skew) {
  const auto cams = load_intrinsics(intrinsics);
  const Intrinsics& cam = require_camera(cams, "cam", intrinsics);
  const Intrinsics& touch = require_camera(cams, "touch", intrinsics);
  const auto records = load_poses(poses);

  std::map<std::string, Pose> by_id;
  for (const auto& r : records) {
    if (!by_id.emplace(r.frame_id, r.pose()).second)
      throw Error(ErrorKind::InvalidArgument, poses.string() + ": duplicate frame id '" + r.frame_id + "'");
  }

  if (!frames) {
    // No timing information: keep file order, no touch stream.
    CaptureSession session{{}, {}, cam, touch, {}};
    for (std::size_t i = 0; i < records.size(); ++i)
      session.visual_frames.push_back({records[i].frame_id, static_cast<double>(i), records[i].pose()});
    return session;
  }

  const FrameIndex index = load_frame_index(*frames);
  RawStreams raw{{}, {}, cam, touch};
  for (const auto& v : index.visual) {
    const auto it = by_id.find(v.id);
    if (it == by_id.end())
      throw Error(ErrorKind::NotFound, poses.string() + ": no pose for visual frame '" + v.id + "'");
    raw.visual.push_back({v.id, v.timestamp, it->second});
  }
  for (const auto& t : index.touch) raw.touch.push_back({t.id, t.timestamp, t.image_ref});
  try {
    return synchronize(raw, max_skew);
  } catch (const Error& e) {
    throw Error(e.kind(), frames->string() + ": " + e.what());
  }
}

int cmd_calibrate(const CalibrateOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const AppConfig cfg = resolve_config(g);
    const CaptureSession session = load_session(o.intrinsics, o.poses, o.frames, cfg.max_skew);
    const auto annotations = load_annotations(o.annotations);
    verbose(g, err, "loaded " + std::to_string(annotations.size()) + " annotation records");

    std::size_t total = 0;
    for (const auto& a : annotations) total += a.pairs.size();
    if (total < kMinCalibrationCorrespondences)
      throw Error(ErrorKind::Precondition,
                  o.annotations.string() + ": calibration needs at least " +
                      std::to_string(kMinCalibrationCorrespondences) + " correspondences, got " +
                      std::to_string(total));

    std::map<std::string, DepthMap> depth;
    for (const auto& a : annotations) {
      if (depth.count(a.frame_id)) continue;
      depth.emplace(a.frame_id, load_depth(o.depth_dir / (a.frame_id + ".depth"), session.intrinsics_cam));
    }

    const auto t0 = std::chrono::steady_clock::now();
    const RigCalibration rig = calibrate(session, annotations, depth, cfg.solver);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    verbose(g, err, "solve took " + fmt("%.3f", secs) + " s");

    save_rig(o.out_rig, rig);
    const std::string report = format_calibration_report(rig, annotations);
    if (o.out_report)
      write_text_file(*o.out_report, report);
    else
      out << report;

    if (rig.solve.condition_warning)
      report_error(err, "warning", "poorly constrained calibration");
    if (!rig.solve.converged) {
      report_error(err, "not_converged", "solver stopped after " + std::to_string(rig.solve.iterations) +
                                             " iterations without converging");
      return static_cast<int>(kExitNotConverged);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_propagate(const PropagateOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const AppConfig cfg = resolve_config(g);
    const CaptureSession session = load_session(o.intrinsics, o.poses, o.frames, cfg.max_skew);
    const RigCalibration rig = load_rig(o.rig);
    for (const auto& id : session.dropped_touch_ids)
      verbose(g, err, "touch frame " + id + " has no visual frame within max_skew; skipped");

    const auto poses = propagate_touch_poses(session, rig);
    std::vector<PoseFileRecord> records;
    records.reserve(poses.size());
    for (const auto& p : poses) records.push_back(PoseFileRecord::from_pose(p.touch_id, p.pose, "touch"));
    save_poses(o.out, records);

    if (o.conditioning_out) {
      std::vector<PoseFileRecord> cond;
      for (const auto& p : poses)
        cond.push_back(PoseFileRecord::from_pose(
            p.touch_id, make_conditioning_pose(p.pose, cfg.conditioning_offset).pose,
            "conditioning_fov" + fmt("%.0f", kConditioningFovDegrees)));
      save_poses(*o.conditioning_out, cond);
    }
    out << "propagated " << poses.size() << " touch poses";
    if (!session.dropped_touch_ids.empty()) out << " (" << session.dropped_touch_ids.size() << " dropped)";
    out << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_split(const SplitOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const AppConfig cfg = resolve_config(g);
    const std::size_t len = o.sequence_length.value_or(cfg.sequence_length);
    FrameIndex index = load_frame_index(o.frames);
    std::stable_sort(index.touch.begin(), index.touch.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    std::vector<std::string> ids;
    ids.reserve(index.touch.size());
    for (const auto& t : index.touch) ids.push_back(t.id);

    const auto splits = make_splits(ids.size(), len);
    std::ostringstream s;
    write_splits(s, ids, splits);
    write_text_file(o.out, s.str());

    std::size_t counts[3] = {0, 0, 0};
    for (const auto& sp : splits) ++counts[static_cast<int>(sp.role)];
    out << "sequences " << splits.size() << " train " << counts[0] << " val " << counts[1] << " test "
        << counts[2] << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_eval_map(const EvalMapOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    (void)resolve_config(g);
    const EmbeddingSet queries = load_embeddings(o.queries);
    const EmbeddingSet gallery = load_embeddings(o.gallery);
    std::map<std::string, Vec3> positions;
    for (const auto& r : load_poses(o.positions)) positions[r.frame_id] = r.pose().translation();

    auto position_of = [&](const std::string& id, const fs::path& src) {
      const auto it = positions.find(id);
      if (it == positions.end())
        throw Error(ErrorKind::NotFound, o.positions.string() + ": no position for '" + id + "' (from " +
                                             src.string() + ")");
      return it->second;
    };

    std::vector<GalleryItem> items;
    for (std::size_t i = 0; i < gallery.ids.size(); ++i)
      items.push_back({gallery.ids[i], gallery.vectors[i], position_of(gallery.ids[i], o.gallery)});
    const RetrievalGallery gal(std::move(items));

    std::vector<LocalizationQuery> qs;
    for (std::size_t i = 0; i < queries.ids.size(); ++i)
      qs.push_back({queries.vectors[i], position_of(queries.ids[i], o.queries)});

    std::vector<double> radii = o.radii;
    if (radii.empty()) radii.assign(kStandardRadii.begin(), kStandardRadii.end());
    const MapReport report = map_at_radii(qs, gal, radii);
    verbose(g, err, std::to_string(report.excluded_queries.empty() ? 0 : report.excluded_queries.front()) +
                            " queries without relevant items at the smallest radius");

    const std::vector<std::pair<std::string, MapReport>> rows = {{o.dataset, report}};
    const std::string table = format_map_table(rows);
    if (o.out)
      write_text_file(*o.out, table);
    else
      out << table;
    return static_cast<int>(kExitOk);
  });
}

int cmd_heatmap(const HeatmapOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    (void)resolve_config(g);
    const ImageBuffer image = load_raster(o.image);
    const ImageBuffer tactile = load_raster(o.tactile);
    const BaselineEmbedder embedder;
    const Heatmap h = heatmap_2d(image, o.patch, o.stride, embedder.embed_tactile(tactile), embedder);
    std::ostringstream s;
    for (int r = 0; r < h.rows; ++r) {
      for (int c = 0; c < h.cols; ++c) s << (c ? "," : "") << fmt("%.9g", h.at(r, c));
      s << '\n';
    }
    write_text_file(o.out, s.str());
    out << "heatmap " << h.rows << "x" << h.cols << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_synth(const SynthOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    synth::SynthConfig cfg;
    if (g.seed) cfg.seed = *g.seed;
    cfg.noise_px = o.noise_px;
    cfg.point_count = o.points;
    cfg.calibration_frames = o.calibration_frames;
    cfg.trajectory_length = o.trajectory_length;
    cfg.general_position = o.general_position;
    const synth::SyntheticScene scene = synth::generate(cfg);
    synth::export_capture(scene, o.out);
    verbose(g, err, "wrote capture to " + o.out.string());
    out << "synthetic capture: " << scene.trajectory.size() << " frames, " << scene.observations.size()
        << " annotated pairs, seed " << cfg.seed << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_metrics(const MetricsOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    (void)resolve_config(g);
    const ImageBuffer a = load_raster(o.a);
    const ImageBuffer b = load_raster(o.b);
    const auto p = psnr(a, b);
    nlohmann::json j = {{"psnr_db", p ? nlohmann::json(*p) : nlohmann::json(nullptr)}, {"ssim", ssim(a, b)}};
    const std::string text = j.dump() + "\n";
    if (o.out)
      write_text_file(*o.out, text);
    else
      out << text;
    return static_cast<int>(kExitOk);
  });
}

namespace {

int cmd_serve(const fs::path& session_dir, int port, const GlobalOptions& g, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&]() -> int {
    const AppConfig cfg = resolve_config(g);
    service::SessionService svc(session_dir, cfg);
    service::HttpServer server(svc);
    int bound = 0;
    try {
      bound = server.bind(port);
    } catch (const Error& e) {
      report_error(err, "service", e.what());
      return kExitService;
    }
    out << "listening on http://127.0.0.1:" << bound << std::endl;
    server.serve();
    return kExitOk;
  });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"touchreg: visuo-tactile rig calibration and evaluation"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::string config_path;
  std::uint64_t seed = 0;
  auto* config_opt = app.add_option("--config", config_path, "key = value configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (solver multistart, synthetic data)");
  app.add_flag("--verbose,-v", g.verbose, "progress messages on stderr");

  CalibrateOptions cal;
  auto* c = app.add_subcommand("calibrate", "estimate the camera-to-touch transform");
  c->add_option("--poses", cal.poses, "visual pose file")->required();
  c->add_option("--annotations", cal.annotations, "annotation JSONL")->required();
  c->add_option("--depth-dir", cal.depth_dir, "directory of <frame_id>.depth files")->required();
  c->add_option("--intrinsics", cal.intrinsics, "intrinsics file")->required();
  std::string cal_frames, cal_report;
  c->add_option("--frames", cal_frames, "frame index; checks touch/visual pairing");
  c->add_option("--out", cal.out_rig, "rig calibration JSON")->required();
  c->add_option("--report", cal_report, "report file (default: stdout)");

  PropagateOptions prop;
  std::string cond_out;
  auto* p = app.add_subcommand("propagate", "touch poses for every synchronized touch frame");
  p->add_option("--poses", prop.poses, "visual pose file")->required();
  p->add_option("--frames", prop.frames, "frame index")->required();
  p->add_option("--intrinsics", prop.intrinsics, "intrinsics file")->required();
  p->add_option("--rig", prop.rig, "rig calibration JSON")->required();
  p->add_option("--out", prop.out, "touch pose file")->required();
  p->add_option("--conditioning-out", cond_out, "conditioning viewpoint pose file");

  SplitOptions sp;
  std::size_t seq_len = 0;
  auto* s = app.add_subcommand("split", "train/val/test sequence assignment");
  s->add_option("--frames", sp.frames, "frame index")->required();
  auto* seq_opt = s->add_option("--sequence-length", seq_len, "frames per sequence")->check(CLI::PositiveNumber);
  s->add_option("--out", sp.out, "split file")->required();

  EvalMapOptions em;
  std::string em_out;
  auto* e = app.add_subcommand("eval-map", "3D localization mAP");
  e->add_option("--queries", em.queries, "query (tactile) embeddings")->required();
  e->add_option("--gallery", em.gallery, "gallery (visual) embeddings")->required();
  e->add_option("--positions", em.positions, "pose file giving each id's position")->required();
  e->add_option("--radii", em.radii, "radii in meters")->delimiter(',');
  e->add_option("--dataset", em.dataset, "row label");
  e->add_option("--out", em_out, "table file (default: stdout)");

  HeatmapOptions hm;
  auto* h = app.add_subcommand("heatmap", "2D localization heatmap");
  h->add_option("--image", hm.image, "visual raster")->required();
  h->add_option("--tactile", hm.tactile, "tactile raster")->required();
  h->add_option("--patch", hm.patch, "patch size")->check(CLI::PositiveNumber);
  h->add_option("--stride", hm.stride, "stride")->check(CLI::PositiveNumber);
  h->add_option("--out", hm.out, "CSV output")->required();

  SynthOptions sy;
  auto* y = app.add_subcommand("synth", "write a synthetic capture");
  y->add_option("--out", sy.out, "output directory")->required();
  y->add_option("--noise", sy.noise_px, "touch pixel noise sigma")->check(CLI::NonNegativeNumber);
  y->add_option("--points", sy.points, "annotated points");
  y->add_option("--calibration-frames", sy.calibration_frames, "annotated frames");
  y->add_option("--frames", sy.trajectory_length, "trajectory length");
  y->add_flag("--general-position", sy.general_position, "points not restricted to a plane per frame");

  MetricsOptions me;
  std::string me_out;
  auto* m = app.add_subcommand("metrics", "PSNR and SSIM of two rasters");
  m->add_option("--a", me.a, "first raster")->required();
  m->add_option("--b", me.b, "second raster")->required();
  m->add_option("--out", me_out, "JSON output (default: stdout)");

  fs::path session_dir;
  int port = service::kDefaultPort;
  auto* v = app.add_subcommand("serve", "local annotation service");
  v->add_option("--session", session_dir, "session directory")->required();
  v->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), const_cast<char**>(argv.data()));
  } catch (const CLI::ParseError& pe) {
    const int rc = app.exit(pe, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (*config_opt) g.config = config_path;
  if (*seed_opt) g.seed = seed;

  if (*c) {
    if (!cal_frames.empty()) cal.frames = cal_frames;
    if (!cal_report.empty()) cal.out_report = cal_report;
    return cmd_calibrate(cal, g, out, err);
  }
  if (*p) {
    if (!cond_out.empty()) prop.conditioning_out = cond_out;
    return cmd_propagate(prop, g, out, err);
  }
  if (*s) {
    if (*seq_opt) sp.sequence_length = seq_len;
    return cmd_split(sp, g, out, err);
  }
  if (*e) {
    if (!em_out.empty()) em.out = em_out;
    return cmd_eval_map(em, g, out, err);
  }
  if (*h) return cmd_heatmap(hm, g, out, err);
  if (*y) return cmd_synth(sy, g, out, err);
  if (*m) {
    if (!me_out.empty()) me.out = me_out;
    return cmd_metrics(me, g, out, err);
  }
  if (*v) return cmd_serve(session_dir, port, g, out, err);
  return kExitUsage;
}

}  // namespace touchreg::cli
