#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "touchreg/config.hpp"
#include "touchreg/error.hpp"
#include "touchreg/rig.hpp"

namespace touchreg::cli {

// Exit codes. Every library error family has its own code.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitParse = 4,
  kExitPrecondition = 5,
  kExitInvalidArgument = 6,
  kExitNotFound = 7,
  kExitDegenerate = 8,
  kExitNotConverged = 9,
  kExitService = 10,
};

int exit_code_for(ErrorKind kind);

struct GlobalOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

// Config file (if any) with --seed applied to the solver.
AppConfig resolve_config(const GlobalOptions& g);

struct CalibrateOptions {
  std::filesystem::path poses;
  std::filesystem::path annotations;
  std::filesystem::path depth_dir;
  std::filesystem::path intrinsics;
  std::optional<std::filesystem::path> frames;  // enables touch/visual pairing checks
  std::filesystem::path out_rig;
  std::optional<std::filesystem::path> out_report;
};

struct PropagateOptions {
  std::filesystem::path poses;
  std::filesystem::path frames;
  std::filesystem::path rig;
  std::filesystem::path intrinsics;
  std::filesystem::path out;
  std::optional<std::filesystem::path> conditioning_out;
};

struct SplitOptions {
  std::filesystem::path frames;
  std::optional<std::size_t> sequence_length;
  std::filesystem::path out;
};

struct EvalMapOptions {
  std::filesystem::path queries;
  std::filesystem::path gallery;
  std::filesystem::path positions;
  std::vector<double> radii;  // empty: the standard table radii
  std::string dataset = "dataset";
  std::optional<std::filesystem::path> out;
};

struct HeatmapOptions {
  std::filesystem::path image;
  std::filesystem::path tactile;
  int patch = 32;
  int stride = 16;
  std::filesystem::path out;
};

struct SynthOptions {
  std::filesystem::path out;
  double noise_px = 0.0;
  std::size_t points = 12;
  std::size_t calibration_frames = 2;
  std::size_t trajectory_length = 200;
  bool general_position = false;
};

struct MetricsOptions {
  std::filesystem::path a;
  std::filesystem::path b;
  std::optional<std::filesystem::path> out;
};

// Human-readable calibration report. Pair lines follow annotation order.
std::string format_calibration_report(const RigCalibration& rig,
                                      const std::vector<FrameAnnotation>& annotations);

// Loads intrinsics "cam" and "touch", visual poses and (optionally) the frame
// index into a capture session.
CaptureSession load_session(const std::filesystem::path& intrinsics, const std::filesystem::path& poses,
                            const std::optional<std::filesystem::path>& frames, double max_skew);

// Each command writes its outputs and returns an exit code; errors are
// reported on `err` as one JSON object per line.
int cmd_calibrate(const CalibrateOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err);
int cmd_propagate(const PropagateOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err);
int cmd_split(const SplitOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err);
int cmd_eval_map(const EvalMapOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err);
int cmd_heatmap(const HeatmapOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err);
int cmd_metrics(const MetricsOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err);

// Full command line (argv[0] included).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace touchreg::cli
