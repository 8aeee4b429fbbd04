#include "touchreg/dataset_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "touchreg/error.hpp"

namespace touchreg {

namespace {

// ---- text helpers ----------------------------------------------------------

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool is_skippable(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
  throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& tok, std::size_t line_no, const char* field) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    parse_fail(line_no, std::string("field '") + field + "' is not a finite number: '" + tok + "'");
  return v;
}

int parse_positive_int(const std::string& tok, std::size_t line_no, const char* field) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v <= 0)
    parse_fail(line_no, std::string("field '") + field + "' is not a positive integer: '" + tok + "'");
  return v;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- binary helpers (little-endian on disk) --------------------------------

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                 static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), 4);
}

void put_f32(std::ostream& out, double v) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

class BinaryReader {
 public:
  BinaryReader(std::istream& in, const char* what) : in_(in), what_(what) {}

  std::uint32_t u32(const char* field) {
    unsigned char b[4];
    if (!in_.read(reinterpret_cast<char*>(b), 4))
      throw Error(ErrorKind::Parse, std::string(what_) + ": truncated at byte " +
                                        std::to_string(offset_) + " reading " + field);
    offset_ += 4;
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }

  // Reads exactly n float32 values or reports how many were present.
  std::vector<double> floats(std::size_t n) {
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      unsigned char b[4];
      if (!in_.read(reinterpret_cast<char*>(b), 4)) {
        throw Error(ErrorKind::Parse, std::string(what_) + ": truncated at byte " +
                                          std::to_string(offset_) + ": expected " +
                                          std::to_string(n) + " values, found " + std::to_string(i));
      }
      const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                                 (static_cast<std::uint32_t>(b[1]) << 8) |
                                 (static_cast<std::uint32_t>(b[2]) << 16) |
                                 (static_cast<std::uint32_t>(b[3]) << 24);
      out.push_back(static_cast<double>(std::bit_cast<float>(bits)));
      offset_ += 4;
    }
    return out;
  }

  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof())
      throw Error(ErrorKind::Parse, std::string(what_) + ": unexpected trailing data at byte " +
                                        std::to_string(offset_));
  }

  std::size_t offset() const { return offset_; }

 private:
  std::istream& in_;
  const char* what_;
  std::size_t offset_ = 0;
};

// Header sizes above this are treated as corrupt rather than allocated.
constexpr std::uint32_t kMaxDimension = 1u << 16;

Vec2 vec2_from_json(const nlohmann::json& j, const char* field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorKind::Parse, std::string("'") + field + "' must be a [u, v] number pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename Fn>
auto with_path(const std::filesystem::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

}  // namespace

// ---- poses -------------------------------------------------------------------

Pose PoseFileRecord::pose() const { return Pose(Quaternion(qw, qx, qy, qz), Vec3(tx, ty, tz)); }

PoseFileRecord PoseFileRecord::from_pose(std::string frame_id, const Pose& pose, std::string camera_id) {
  const auto& q = pose.rotation();
  const auto& t = pose.translation();
  return {std::move(frame_id), q.w(), q.x(), q.y(), q.z(), t.x(), t.y(), t.z(), std::move(camera_id)};
}

std::vector<PoseFileRecord> read_poses(std::istream& in) {
  std::vector<PoseFileRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    const auto tok = split_ws(line);
    if (tok.size() != 9)
      parse_fail(line_no, "expected 9 fields (frame_id qw qx qy qz tx ty tz camera_id), got " +
                              std::to_string(tok.size()));
    PoseFileRecord r;
    r.frame_id = tok[0];
    r.qw = parse_double(tok[1], line_no, "qw");
    r.qx = parse_double(tok[2], line_no, "qx");
    r.qy = parse_double(tok[3], line_no, "qy");
    r.qz = parse_double(tok[4], line_no, "qz");
    r.tx = parse_double(tok[5], line_no, "tx");
    r.ty = parse_double(tok[6], line_no, "ty");
    r.tz = parse_double(tok[7], line_no, "tz");
    r.camera_id = tok[8];
    const double n = std::sqrt(r.qw * r.qw + r.qx * r.qx + r.qy * r.qy + r.qz * r.qz);
    if (std::abs(n - 1.0) > 1e-6)
      parse_fail(line_no, "quaternion norm " + fmt17(n) + " is not 1 within 1e-6");
    out.push_back(std::move(r));
  }
  return out;
}

void write_poses(std::ostream& out, std::span<const PoseFileRecord> records) {
  out << "# frame_id qw qx qy qz tx ty tz camera_id\n";
  for (const auto& r : records) {
    out << r.frame_id << ' ' << fmt17(r.qw) << ' ' << fmt17(r.qx) << ' ' << fmt17(r.qy) << ' '
        << fmt17(r.qz) << ' ' << fmt17(r.tx) << ' ' << fmt17(r.ty) << ' ' << fmt17(r.tz) << ' '
        << r.camera_id << '\n';
  }
}

// ---- frame index ---------------------------------------------------------------

FrameIndex read_frame_index(std::istream& in) {
  FrameIndex index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "visual") {
      if (tok.size() != 3) parse_fail(line_no, "visual record needs: visual <id> <timestamp>");
      index.visual.push_back({tok[1], parse_double(tok[2], line_no, "timestamp"), ""});
    } else if (tok[0] == "touch") {
      if (tok.size() != 3 && tok.size() != 4)
        parse_fail(line_no, "touch record needs: touch <id> <timestamp> [<image_ref>]");
      index.touch.push_back(
          {tok[1], parse_double(tok[2], line_no, "timestamp"), tok.size() == 4 ? tok[3] : ""});
    } else {
      parse_fail(line_no, "unknown stream '" + tok[0] + "' (expected visual or touch)");
    }
  }
  return index;
}

void write_frame_index(std::ostream& out, const FrameIndex& index) {
  out << "# visual <frame_id> <timestamp_s> | touch <touch_id> <timestamp_s> [<image_ref>]\n";
  for (const auto& v : index.visual) out << "visual " << v.id << ' ' << fmt17(v.timestamp) << '\n';
  for (const auto& t : index.touch) {
    out << "touch " << t.id << ' ' << fmt17(t.timestamp);
    if (!t.image_ref.empty()) out << ' ' << t.image_ref;
    out << '\n';
  }
}

// ---- intrinsics -----------------------------------------------------------------

std::map<std::string, Intrinsics> read_intrinsics(std::istream& in) {
  std::map<std::string, Intrinsics> cams;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    const auto tok = split_ws(line);
    if (tok.size() != 7) parse_fail(line_no, "expected: <name> fx fy cx cy width height");
    try {
      Intrinsics intr(parse_double(tok[1], line_no, "fx"), parse_double(tok[2], line_no, "fy"),
                      parse_double(tok[3], line_no, "cx"), parse_double(tok[4], line_no, "cy"),
                      parse_positive_int(tok[5], line_no, "width"),
                      parse_positive_int(tok[6], line_no, "height"));
      if (!cams.emplace(tok[0], intr).second) parse_fail(line_no, "duplicate camera '" + tok[0] + "'");
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Parse) throw;
      parse_fail(line_no, e.what());
    }
  }
  return cams;
}

void write_intrinsics(std::ostream& out, const std::map<std::string, Intrinsics>& cams) {
  out << "# name fx fy cx cy width height\n";
  for (const auto& [name, k] : cams) {
    out << name << ' ' << fmt17(k.fx()) << ' ' << fmt17(k.fy()) << ' ' << fmt17(k.cx()) << ' '
        << fmt17(k.cy()) << ' ' << k.width() << ' ' << k.height() << '\n';
  }
}

// ---- splits -----------------------------------------------------------------------

const char* to_string(SplitRole role) {
  switch (role) {
    case SplitRole::Train: return "train";
    case SplitRole::Validation: return "validation";
    case SplitRole::Test: return "test";
  }
  return "train";
}

std::vector<SplitAssignment> make_splits(std::size_t frame_count, std::size_t sequence_length) {
  if (sequence_length < 1) throw Error(ErrorKind::InvalidArgument, "sequence_length must be at least 1");
  if (frame_count == 0) throw Error(ErrorKind::Precondition, "cannot split an empty frame list");
  std::vector<SplitAssignment> out;
  for (std::size_t first = 0, seq = 0; first < frame_count; first += sequence_length, ++seq) {
    const std::size_t count = std::min(sequence_length, frame_count - first);
    SplitRole role = SplitRole::Train;
    if (count == sequence_length) {
      const std::size_t slot = seq % 10;
      role = slot < 8 ? SplitRole::Train : (slot == 8 ? SplitRole::Validation : SplitRole::Test);
    }
    out.push_back({seq, role, first, count});
  }
  return out;
}

void write_splits(std::ostream& out, std::span<const std::string> frame_ids,
                  std::span<const SplitAssignment> splits) {
  out << "# touch_id sequence_index role\n";
  for (const auto& s : splits) {
    for (std::size_t i = s.first_frame; i < s.first_frame + s.frame_count; ++i) {
      if (i >= frame_ids.size()) throw Error(ErrorKind::InvalidArgument, "split exceeds frame list");
      out << frame_ids[i] << ' ' << s.sequence_index << ' ' << to_string(s.role) << '\n';
    }
  }
}

// ---- depth maps -----------------------------------------------------------------------

DepthMap read_depth(std::istream& in) {
  BinaryReader r(in, "depth map");
  const std::uint32_t w = r.u32("width");
  const std::uint32_t h = r.u32("height");
  if (w == 0 || h == 0 || w > kMaxDimension || h > kMaxDimension)
    throw Error(ErrorKind::Parse, "depth map: invalid size " + std::to_string(w) + "x" + std::to_string(h));
  const std::size_t header = r.offset();
  std::vector<double> values = r.floats(static_cast<std::size_t>(w) * h);
  r.expect_end();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0)
      throw Error(ErrorKind::Parse, "depth map: value at byte " + std::to_string(header + 4 * i) +
                                        " is negative or not finite");
  }
  return DepthMap(static_cast<int>(w), static_cast<int>(h), std::move(values));
}

DepthMap read_depth(std::istream& in, const Intrinsics& expected) {
  DepthMap d = read_depth(in);
  if (!d.matches(expected))
    throw Error(ErrorKind::Parse, "depth map: size " + std::to_string(d.width()) + "x" +
                                      std::to_string(d.height()) + " does not match camera " +
                                      std::to_string(expected.width()) + "x" +
                                      std::to_string(expected.height()));
  return d;
}

void write_depth(std::ostream& out, const DepthMap& depth) {
  put_u32(out, static_cast<std::uint32_t>(depth.width()));
  put_u32(out, static_cast<std::uint32_t>(depth.height()));
  for (double v : depth.values()) put_f32(out, v);
}

// ---- rasters ----------------------------------------------------------------------------

ImageBuffer read_raster(std::istream& in) {
  BinaryReader r(in, "raster");
  const std::uint32_t w = r.u32("width");
  const std::uint32_t h = r.u32("height");
  const std::uint32_t c = r.u32("channels");
  if (w == 0 || h == 0 || c == 0 || w > kMaxDimension || h > kMaxDimension || c > 16)
    throw Error(ErrorKind::Parse, "raster: invalid dimensions");
  const std::size_t header = r.offset();
  std::vector<double> values = r.floats(static_cast<std::size_t>(w) * h * c);
  r.expect_end();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 1.0))
      throw Error(ErrorKind::Parse,
                  "raster: value at byte " + std::to_string(header + 4 * i) + " outside [0, 1]");
  }
  return ImageBuffer(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c), std::move(values));
}

void write_raster(std::ostream& out, const ImageBuffer& image) {
  put_u32(out, static_cast<std::uint32_t>(image.width()));
  put_u32(out, static_cast<std::uint32_t>(image.height()));
  put_u32(out, static_cast<std::uint32_t>(image.channels()));
  for (double v : image.values()) put_f32(out, v);
}

// ---- embeddings ---------------------------------------------------------------------------

EmbeddingSet read_embeddings(std::istream& binary, std::istream& ids_in) {
  BinaryReader r(binary, "embeddings");
  const std::uint32_t count = r.u32("count");
  const std::uint32_t dim = r.u32("dim");
  if (dim == 0 || dim > 1u << 14 || count > 1u << 24)
    throw Error(ErrorKind::Parse, "embeddings: invalid header");
  const std::size_t header = r.offset();
  const std::vector<double> values = r.floats(static_cast<std::size_t>(count) * dim);
  r.expect_end();

  EmbeddingSet set;
  std::string line;
  std::size_t line_no = 0;
  std::unordered_set<std::string> seen;
  while (std::getline(ids_in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.find_first_of(" \t") != std::string::npos) parse_fail(line_no, "id contains whitespace");
    if (!seen.insert(line).second) parse_fail(line_no, "duplicate id '" + line + "'");
    set.ids.push_back(line);
  }
  if (set.ids.size() != count)
    throw Error(ErrorKind::Parse, "embeddings: " + std::to_string(count) + " vectors but " +
                                      std::to_string(set.ids.size()) + " ids");
  set.vectors.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> v(values.begin() + static_cast<std::ptrdiff_t>(i * dim),
                          values.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
    try {
      set.vectors.emplace_back(std::move(v));
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, "embeddings: vector " + std::to_string(i) + " at byte " +
                                        std::to_string(header + 4 * i * dim) + ": " + e.what());
    }
  }
  return set;
}

void write_embeddings(std::ostream& binary, std::ostream& ids, const EmbeddingSet& set) {
  if (set.ids.size() != set.vectors.size())
    throw Error(ErrorKind::InvalidArgument, "embedding ids and vectors differ in count");
  const std::size_t dim = set.vectors.empty() ? 1 : set.vectors.front().dimension();
  put_u32(binary, static_cast<std::uint32_t>(set.vectors.size()));
  put_u32(binary, static_cast<std::uint32_t>(dim));
  for (const auto& v : set.vectors) {
    if (v.dimension() != dim) throw Error(ErrorKind::InvalidArgument, "embedding dimensions differ");
    for (double x : v.values()) put_f32(binary, x);
  }
  for (const auto& id : set.ids) ids << id << '\n';
}

// ---- annotations ----------------------------------------------------------------------------

nlohmann::json to_json(const FrameAnnotation& ann) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : ann.pairs) {
    nlohmann::json jp;
    jp["touch_px"] = {p.touch_px.x(), p.touch_px.y()};
    jp["view_px"] = {p.view_px.x(), p.view_px.y()};
    if (p.depth_m) jp["depth_m"] = *p.depth_m;
    pairs.push_back(std::move(jp));
  }
  return {{"frame_id", ann.frame_id}, {"touch_id", ann.touch_id}, {"pairs", std::move(pairs)}};
}

FrameAnnotation annotation_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, "annotation record must be a JSON object");
  FrameAnnotation ann;
  if (!j.contains("frame_id") || !j["frame_id"].is_string())
    throw Error(ErrorKind::Parse, "annotation record needs a string 'frame_id'");
  if (!j.contains("touch_id") || !j["touch_id"].is_string())
    throw Error(ErrorKind::Parse, "annotation record needs a string 'touch_id'");
  if (!j.contains("pairs") || !j["pairs"].is_array())
    throw Error(ErrorKind::Parse, "annotation record needs a 'pairs' array");
  ann.frame_id = j["frame_id"].get<std::string>();
  ann.touch_id = j["touch_id"].get<std::string>();
  for (const auto& jp : j["pairs"]) {
    if (!jp.is_object() || !jp.contains("touch_px") || !jp.contains("view_px"))
      throw Error(ErrorKind::Parse, "each pair needs 'touch_px' and 'view_px'");
    AnnotatedPair p;
    p.touch_px = vec2_from_json(jp["touch_px"], "touch_px");
    p.view_px = vec2_from_json(jp["view_px"], "view_px");
    if (jp.contains("depth_m") && !jp["depth_m"].is_null()) {
      if (!jp["depth_m"].is_number()) throw Error(ErrorKind::Parse, "'depth_m' must be a number");
      p.depth_m = jp["depth_m"].get<double>();
    }
    ann.pairs.push_back(p);
  }
  return ann;
}

std::vector<FrameAnnotation> read_annotations(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<FrameAnnotation> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return out;

  if (text[first] == '[') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::Parse, std::string("annotations: byte ") + std::to_string(e.byte) + ": " + e.what());
    }
    for (std::size_t i = 0; i < doc.size(); ++i) {
      try {
        out.push_back(annotation_from_json(doc[i]));
      } catch (const Error& e) {
        throw Error(ErrorKind::Parse, "annotations: record " + std::to_string(i) + ": " + e.what());
      }
    }
    return out;
  }

  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(annotation_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      parse_fail(line_no, std::string("invalid JSON: ") + e.what());
    } catch (const Error& e) {
      parse_fail(line_no, e.what());
    }
  }
  return out;
}

void write_annotations(std::ostream& out, std::span<const FrameAnnotation> annotations) {
  for (const auto& a : annotations) out << to_json(a).dump() << '\n';
}

// ---- rig calibration --------------------------------------------------------------------------

nlohmann::json pose_to_json(const Pose& pose) {
  const auto& q = pose.rotation();
  const auto& t = pose.translation();
  return {{"q", {q.w(), q.x(), q.y(), q.z()}}, {"t", {t.x(), t.y(), t.z()}}};
}

Pose pose_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("q") || !j.contains("t") || !j["q"].is_array() ||
      !j["t"].is_array() || j["q"].size() != 4 || j["t"].size() != 3)
    throw Error(ErrorKind::Parse, "pose must be {\"q\": [w, x, y, z], \"t\": [x, y, z]}");
  const auto& q = j["q"];
  const auto& t = j["t"];
  const Quaternion quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
  if (std::abs(quat.norm() - 1.0) > 1e-6) throw Error(ErrorKind::Parse, "pose quaternion is not unit");
  return Pose(quat, Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>()));
}

nlohmann::json to_json(const RigCalibration& rig) {
  nlohmann::json residuals = nlohmann::json::array();
  for (const auto& r : rig.solve.per_point_residuals) residuals.push_back({r.x(), r.y()});
  nlohmann::json solver = {
      {"view_to_touch_cam", pose_to_json(rig.solve.pose)},
      {"iterations", rig.solve.iterations},
      {"converged", rig.solve.converged},
      {"smoothed_objective", rig.solve.smoothed_objective},
      {"best_start", rig.solve.best_start},
      {"condition_warning", rig.solve.condition_warning},
      {"residuals", std::move(residuals)},
  };
  // JSON has no infinity; an unbounded condition number is written as null.
  if (std::isfinite(rig.solve.condition_number))
    solver["condition_number"] = rig.solve.condition_number;
  else
    solver["condition_number"] = nullptr;
  return {{"cam_to_touch", pose_to_json(rig.cam_to_touch)},
          {"mean_l1_error", rig.mean_l1_error},
          {"correspondence_count", rig.correspondence_count},
          {"solver", std::move(solver)}};
}

RigCalibration rig_from_json(const nlohmann::json& j) {
  try {
    RigCalibration rig;
    rig.cam_to_touch = pose_from_json(j.at("cam_to_touch"));
    rig.mean_l1_error = j.at("mean_l1_error").get<double>();
    rig.correspondence_count = j.at("correspondence_count").get<std::size_t>();
    rig.solve.mean_l1_error = rig.mean_l1_error;
    if (j.contains("solver")) {
      const auto& s = j["solver"];
      rig.solve.pose = pose_from_json(s.at("view_to_touch_cam"));
      rig.solve.iterations = s.at("iterations").get<int>();
      rig.solve.converged = s.at("converged").get<bool>();
      rig.solve.smoothed_objective = s.at("smoothed_objective").get<double>();
      rig.solve.best_start = s.at("best_start").get<int>();
      rig.solve.condition_warning = s.at("condition_warning").get<bool>();
      rig.solve.condition_number = s.at("condition_number").is_null()
                                       ? std::numeric_limits<double>::infinity()
                                       : s.at("condition_number").get<double>();
      for (const auto& r : s.at("residuals")) rig.solve.per_point_residuals.push_back(vec2_from_json(r, "residual"));
    }
    return rig;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("rig calibration: ") + e.what());
  }
}

// ---- path helpers -----------------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_in(path, false);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  auto out = open_out(path, false);
  out << content;
  finish(out, path);
}

std::vector<PoseFileRecord> load_poses(const std::filesystem::path& path) {
  auto in = open_in(path, false);
  return with_path(path, [&] { return read_poses(in); });
}

void save_poses(const std::filesystem::path& path, std::span<const PoseFileRecord> records) {
  auto out = open_out(path, false);
  write_poses(out, records);
  finish(out, path);
}

FrameIndex load_frame_index(const std::filesystem::path& path) {
  auto in = open_in(path, false);
  return with_path(path, [&] { return read_frame_index(in); });
}

std::map<std::string, Intrinsics> load_intrinsics(const std::filesystem::path& path) {
  auto in = open_in(path, false);
  return with_path(path, [&] { return read_intrinsics(in); });
}

DepthMap load_depth(const std::filesystem::path& path, const Intrinsics& expected) {
  auto in = open_in(path, true);
  return with_path(path, [&] { return read_depth(in, expected); });
}

void save_depth(const std::filesystem::path& path, const DepthMap& depth) {
  auto out = open_out(path, true);
  write_depth(out, depth);
  finish(out, path);
}

ImageBuffer load_raster(const std::filesystem::path& path) {
  auto in = open_in(path, true);
  return with_path(path, [&] { return read_raster(in); });
}

void save_raster(const std::filesystem::path& path, const ImageBuffer& image) {
  auto out = open_out(path, true);
  write_raster(out, image);
  finish(out, path);
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  auto bin = open_in(path, true);
  const std::filesystem::path ids_path = path.string() + ".ids";
  auto ids = open_in(ids_path, false);
  return with_path(path, [&] { return read_embeddings(bin, ids); });
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingSet& set) {
  auto bin = open_out(path, true);
  const std::filesystem::path ids_path = path.string() + ".ids";
  auto ids = open_out(ids_path, false);
  write_embeddings(bin, ids, set);
  finish(bin, path);
  finish(ids, ids_path);
}

std::vector<FrameAnnotation> load_annotations(const std::filesystem::path& path) {
  auto in = open_in(path, false);
  return with_path(path, [&] { return read_annotations(in); });
}

RigCalibration load_rig(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  return with_path(path, [&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::Parse, std::string("byte ") + std::to_string(e.byte) + ": " + e.what());
    }
    return rig_from_json(j);
  });
}

void save_rig(const std::filesystem::path& path, const RigCalibration& rig) {
  write_text_file(path, to_json(rig).dump(2) + "\n");
}

}  // namespace touchreg
