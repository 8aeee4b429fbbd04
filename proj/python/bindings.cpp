#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <set>

#include "touchreg/dataset_io.hpp"
#include "touchreg/error.hpp"
#include "touchreg/geometry.hpp"
#include "touchreg/image_metrics.hpp"
#include "touchreg/resection.hpp"
#include "touchreg/retrieval.hpp"
#include "touchreg/rig.hpp"
#include "touchreg/synth.hpp"

namespace py = pybind11;
using namespace touchreg;

namespace {

using RowMatrixX3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using RowMatrixX2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

Pose make_pose(const Eigen::Vector4d& q_wxyz, const Vec3& t) {
  return Pose(Quaternion(q_wxyz[0], q_wxyz[1], q_wxyz[2], q_wxyz[3]), t);
}

Eigen::Vector4d quat_wxyz(const Pose& p) {
  const auto& q = p.rotation();
  return {q.w(), q.x(), q.y(), q.z()};
}

ImageBuffer image_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw Error(ErrorKind::InvalidArgument, "image must be HxW or HxWxC");
  const int h = static_cast<int>(a.shape(0));
  const int w = static_cast<int>(a.shape(1));
  const int c = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
  std::vector<double> values(a.data(), a.data() + a.size());
  return ImageBuffer(w, h, c, std::move(values));
}

std::vector<Correspondence> correspondences(const RowMatrixX3& points, const RowMatrixX2& pixels) {
  if (points.rows() != pixels.rows())
    throw Error(ErrorKind::InvalidArgument, "points and pixels must have the same number of rows");
  std::vector<Correspondence> out;
  for (Eigen::Index i = 0; i < points.rows(); ++i) out.push_back({points.row(i).transpose(), pixels.row(i).transpose()});
  return out;
}

py::dict result_dict(const ResectionResult& r) {
  py::dict d;
  d["pose"] = r.pose;
  d["mean_l1_error"] = r.mean_l1_error;
  d["smoothed_objective"] = r.smoothed_objective;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  RowMatrixX2 res(static_cast<Eigen::Index>(r.per_point_residuals.size()), 2);
  for (std::size_t i = 0; i < r.per_point_residuals.size(); ++i) res.row(static_cast<Eigen::Index>(i)) = r.per_point_residuals[i];
  d["residuals"] = res;
  d["condition_number"] = r.condition_number;
  d["condition_warning"] = r.condition_warning;
  d["best_start"] = r.best_start;
  d["objective_history"] = r.objective_history;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "touchreg core bindings";

  py::register_exception<Error>(m, "TouchregError", PyExc_RuntimeError);

  py::class_<Pose>(m, "Pose")
      .def(py::init([](const Eigen::Vector4d& q, const Vec3& t) { return make_pose(q, t); }), py::arg("q_wxyz"),
           py::arg("t"))
      .def_static("identity", &Pose::identity)
      .def_property_readonly("q", &quat_wxyz)
      .def_property_readonly("t", [](const Pose& p) { return Vec3(p.translation()); })
      .def_property_readonly("R", &Pose::rotation_matrix)
      .def("transform", &Pose::transform)
      .def("__matmul__", [](const Pose& a, const Pose& b) { return compose(a, b); })
      .def("inverse", [](const Pose& p) { return inverse(p); })
      .def("__repr__", [](const Pose& p) {
        const auto q = quat_wxyz(p);
        const Vec3& t = p.translation();
        return "Pose(q=[" + std::to_string(q[0]) + ", " + std::to_string(q[1]) + ", " + std::to_string(q[2]) + ", " +
               std::to_string(q[3]) + "], t=[" + std::to_string(t.x()) + ", " + std::to_string(t.y()) + ", " +
               std::to_string(t.z()) + "])";
      });

  m.def("compose", &compose);
  m.def("rotation_angle_between", &rotation_angle_between);
  m.def("rotate_about_x", &rotate_about_x);

  py::class_<Intrinsics>(m, "Intrinsics")
      .def(py::init<double, double, double, double, int, int>(), py::arg("fx"), py::arg("fy"), py::arg("cx"),
           py::arg("cy"), py::arg("width"), py::arg("height"))
      .def_static("from_horizontal_fov", &Intrinsics::from_horizontal_fov)
      .def_property_readonly("fx", &Intrinsics::fx)
      .def_property_readonly("fy", &Intrinsics::fy)
      .def_property_readonly("cx", &Intrinsics::cx)
      .def_property_readonly("cy", &Intrinsics::cy)
      .def_property_readonly("width", &Intrinsics::width)
      .def_property_readonly("height", &Intrinsics::height)
      .def("matrix", &Intrinsics::matrix);

  m.def("project", &project, py::arg("intrinsics"), py::arg("world_to_cam"), py::arg("point"));
  m.def("lift_pixel", &lift_pixel, py::arg("intrinsics"), py::arg("cam_to_world"), py::arg("pixel"),
        py::arg("depth"));

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("max_iterations", &SolverConfig::max_iterations)
      .def_readwrite("initial_damping", &SolverConfig::initial_damping)
      .def_readwrite("damping_up", &SolverConfig::damping_up)
      .def_readwrite("damping_down", &SolverConfig::damping_down)
      .def_readwrite("convergence_tol", &SolverConfig::convergence_tol)
      .def_readwrite("huber_delta", &SolverConfig::huber_delta)
      .def_readwrite("multistart_count", &SolverConfig::multistart_count)
      .def_readwrite("rng_seed", &SolverConfig::rng_seed);

  m.def(
      "solve_pose",
      [](const Intrinsics& intr, const RowMatrixX3& points, const RowMatrixX2& pixels, const SolverConfig& cfg) {
        return result_dict(solve(intr, correspondences(points, pixels), cfg));
      },
      py::arg("intrinsics"), py::arg("points"), py::arg("pixels"), py::arg("config") = SolverConfig{},
      "Camera pose (world -> camera) minimizing the L1 reprojection error.");

  m.def(
      "synthesize_capture",
      [](const std::filesystem::path& out, std::uint64_t seed, double noise_px, std::size_t points) {
        synth::SynthConfig cfg;
        cfg.seed = seed;
        cfg.noise_px = noise_px;
        cfg.point_count = points;
        const auto scene = synth::generate(cfg);
        synth::export_capture(scene, out);
        return scene.true_rig;
      },
      py::arg("out"), py::arg("seed") = 7, py::arg("noise_px") = 0.0, py::arg("points") = 12,
      "Writes a synthetic capture directory and returns the true camera-to-touch rig.");

  m.def(
      "calibrate_capture",
      [](const std::filesystem::path& dir, const SolverConfig& cfg) {
        const auto cams = load_intrinsics(dir / "intrinsics.txt");
        RawStreams raw{{}, {}, cams.at("cam"), cams.at("touch")};
        std::map<std::string, Pose> poses;
        for (const auto& r : load_poses(dir / "poses.txt")) poses.emplace(r.frame_id, r.pose());
        const FrameIndex index = load_frame_index(dir / "frames.txt");
        for (const auto& v : index.visual) raw.visual.push_back({v.id, v.timestamp, poses.at(v.id)});
        for (const auto& t : index.touch) raw.touch.push_back({t.id, t.timestamp, t.image_ref});
        const CaptureSession session = synchronize(raw);
        const auto anns = load_annotations(dir / "annotations.jsonl");
        std::map<std::string, DepthMap> depth;
        for (const auto& a : anns)
          if (!depth.count(a.frame_id))
            depth.emplace(a.frame_id, load_depth(dir / "depth" / (a.frame_id + ".depth"), session.intrinsics_cam));
        const RigCalibration rig = calibrate(session, anns, depth, cfg);
        py::dict d = result_dict(rig.solve);
        d["cam_to_touch"] = rig.cam_to_touch;
        d["correspondence_count"] = rig.correspondence_count;
        return d;
      },
      py::arg("dir"), py::arg("config") = SolverConfig{});

  m.def(
      "split_counts",
      [](std::size_t n, std::size_t sequence_length) {
        std::size_t c[3] = {0, 0, 0};
        for (const auto& s : make_splits(n, sequence_length)) ++c[static_cast<int>(s.role)];
        return py::make_tuple(c[0], c[1], c[2]);
      },
      py::arg("frame_count"), py::arg("sequence_length") = kDefaultSequenceLength,
      "(train, val, test) sequence counts.");

  m.def(
      "average_precision",
      [](const std::vector<std::string>& ranked, const std::set<std::string>& relevant) {
        return average_precision(ranked, relevant);
      },
      py::arg("ranked_ids"), py::arg("relevant"));

  m.def(
      "map_at_radii",
      [](const RowMatrixX3& query_positions, const RowMatrixX3& gallery_positions, const Eigen::MatrixXd& scores,
         const std::vector<double>& radii) {
        std::vector<GalleryItem> items;
        for (Eigen::Index i = 0; i < gallery_positions.rows(); ++i) {
          std::vector<double> e(1, 1.0);
          items.push_back({"g" + std::to_string(i), EmbeddingVector(e), gallery_positions.row(i).transpose()});
        }
        std::vector<Vec3> qp;
        for (Eigen::Index i = 0; i < query_positions.rows(); ++i) qp.push_back(query_positions.row(i).transpose());
        const auto report = map_from_scores(scores, qp, RetrievalGallery(std::move(items)), radii);
        return py::make_tuple(report.map_values, report.excluded_queries);
      },
      py::arg("query_positions"), py::arg("gallery_positions"), py::arg("scores"),
      py::arg("radii") = std::vector<double>(kStandardRadii.begin(), kStandardRadii.end()),
      "(mAP percent per radius, excluded query count) from a query x gallery score matrix.");

  m.def(
      "psnr", [](py::array_t<double> a, py::array_t<double> b) { return psnr(image_from_array(a), image_from_array(b)); },
      "PSNR in dB for images in [0, 1]; None for identical images.");
  m.def(
      "ssim", [](py::array_t<double> a, py::array_t<double> b) { return ssim(image_from_array(a), image_from_array(b)); });
}
