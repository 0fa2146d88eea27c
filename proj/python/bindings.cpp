#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>

#include "govi/allan.hpp"
#include "govi/cloud_register.hpp"
#include "govi/error.hpp"
#include "govi/global_map.hpp"
#include "govi/gpmf.hpp"
#include "govi/mp4_demux.hpp"
#include "govi/sync.hpp"
#include "govi/synthetic.hpp"
#include "govi/traj_eval.hpp"

namespace py = pybind11;
using namespace govi;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

std::vector<Vec3> to_vecs(const Points& m)
{
    std::vector<Vec3> out(std::size_t(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        out[std::size_t(i)] = m.row(i).transpose();
    return out;
}

Points to_points(const std::vector<Vec3>& v)
{
    Points m(Eigen::Index(v.size()), 3);
    for (std::size_t i = 0; i < v.size(); ++i)
        m.row(Eigen::Index(i)) = v[i].transpose();
    return m;
}

cloud::PointCloud to_cloud(const Points& m)
{
    cloud::PointCloud c;
    c.points = to_vecs(m);
    return c;
}

// Quaternions cross the boundary as (w, x, y, z).
Rigid3 pose_from(const Vec3& t, const Eigen::Vector4d& q) { return Rigid3::from(Quat(q[0], q[1], q[2], q[3]), t); }

py::dict dataset_dict(const sync::SyncedDataset& ds)
{
    const auto n = py::ssize_t(ds.imu.size());
    py::array_t<double> t(n), frames(py::ssize_t(ds.frames.size()));
    py::array_t<double> accel({n, py::ssize_t(3)}), gyro({n, py::ssize_t(3)});
    auto tv = t.mutable_unchecked<1>();
    auto av = accel.mutable_unchecked<2>();
    auto gv = gyro.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < n; ++i) {
        const auto& s = ds.imu[std::size_t(i)];
        tv(i) = s.t;
        for (py::ssize_t a = 0; a < 3; ++a) {
            av(i, a) = s.accel[std::size_t(a)];
            gv(i, a) = s.gyro[std::size_t(a)];
        }
    }
    auto fv = frames.mutable_unchecked<1>();
    for (std::size_t i = 0; i < ds.frames.size(); ++i)
        fv(py::ssize_t(i)) = ds.frames[i].t;
    py::dict meta;
    meta["recording_id"] = ds.meta.recording_id;
    meta["payload_count"] = ds.meta.payload_count;
    meta["duration"] = ds.meta.duration;
    meta["accel_rate"] = ds.meta.accel_rate;
    meta["gyro_rate"] = ds.meta.gyro_rate;
    meta["frame_rate"] = ds.meta.frame_rate;
    meta["axis_convention"] = ds.meta.axis_convention;
    py::dict out;
    out["t"] = t;
    out["accel"] = accel;
    out["gyro"] = gyro;
    out["frame_times"] = frames;
    out["meta"] = meta;
    out["warnings"] = ds.warnings;
    return out;
}

sync::SyncedDataset load_dataset(mp4::ByteSource& src, const std::string& id)
{
    std::vector<sync::PayloadStreams> streams;
    for (const auto& raw : mp4::read_gpmf_payloads(src))
        streams.push_back(sync::decode_payload(raw));
    return sync::build_dataset(streams, id);
}

py::dict fused_dict(const std::vector<map::FusedPoint>& fused)
{
    std::vector<map::LandmarkId> ids;
    std::vector<Vec3> pos, col;
    std::vector<double> quality;
    std::vector<std::size_t> n_obs;
    for (const auto& f : fused) {
        ids.push_back(f.id);
        pos.push_back(f.position);
        col.push_back(f.color);
        quality.push_back(f.quality);
        n_obs.push_back(f.n_obs);
    }
    py::dict out;
    out["ids"] = py::array_t<map::LandmarkId>(py::ssize_t(ids.size()), ids.data());
    out["positions"] = to_points(pos);
    out["colors"] = to_points(col);
    out["quality"] = py::array_t<double>(py::ssize_t(quality.size()), quality.data());
    out["n_obs"] = py::array_t<std::size_t>(py::ssize_t(n_obs.size()), n_obs.data());
    return out;
}

py::dict registration_dict(const cloud::RegistrationResult& r)
{
    py::dict out;
    out["transform"] = Mat4(r.transform.matrix());
    out["fitness"] = r.fitness;
    out["inlier_rmse"] = r.inlier_rmse;
    out["n_correspondences"] = r.n_correspondences;
    return out;
}

} // namespace

PYBIND11_MODULE(_govi, m)
{
    m.doc() = "GoPro telemetry, IMU noise calibration, landmark map fusion and evaluation";

    static py::exception<Error> error(m, "GoviError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object inst = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
            inst.attr("code") = std::string(errc_name(e.code()));
            inst.attr("input_error") = is_input_error(e.code());
            PyErr_SetObject(error.ptr(), inst.ptr());
        }
    });

    // --- telemetry ----------------------------------------------------------

    m.def(
        "extract",
        [](const std::filesystem::path& path) {
            mp4::FileSource src(path);
            return dataset_dict(load_dataset(src, path.stem().string()));
        },
        py::arg("mp4_path"), "IMU samples and frame times from a GoPro MP4");
    m.def(
        "extract_bytes",
        [](py::bytes data, const std::string& recording_id) {
            std::string s = data;
            mp4::MemorySource src(std::vector<std::uint8_t>(s.begin(), s.end()));
            return dataset_dict(load_dataset(src, recording_id));
        },
        py::arg("data"), py::arg("recording_id") = "memory");
    m.def(
        "dump_gpmf",
        [](py::bytes payload) {
            std::string s = payload;
            std::vector<std::uint8_t> b(s.begin(), s.end());
            return gpmf::dump_tree(gpmf::parse_klv(b));
        },
        py::arg("payload"), "indented KLV tree of one telemetry payload");
    m.def(
        "fixture_mp4",
        [](std::uint64_t seed) {
            synth::TelemetrySpec spec;
            spec.seed = seed;
            auto b = synth::telemetry_mp4(spec);
            return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
        },
        py::arg("seed") = 1, "synthetic MP4: 10 payloads of 1.01 s, 202 IMU and 30 shutter samples each");

    // --- Allan deviation ----------------------------------------------------

    m.def("simulate_imu_noise", &allan::simulate_imu_noise, py::arg("sigma_w"), py::arg("sigma_b"), py::arg("rate"),
          py::arg("duration"), py::arg("seed"));
    m.def(
        "allan",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> x, double rate, int taus_per_decade,
           double white_lo, double white_hi, double walk_lo, double walk_hi) {
            if (x.ndim() != 1 && x.ndim() != 2)
                throw Error(Errc::InvalidArgument, "samples must be 1-D or (n, axes)");
            const auto n = std::size_t(x.shape(0));
            const auto k = x.ndim() == 1 ? std::size_t(1) : std::size_t(x.shape(1));
            std::vector<std::vector<double>> axes(k, std::vector<double>(n));
            const double* d = x.data();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t a = 0; a < k; ++a)
                    axes[a][i] = d[i * k + a];
            auto taus = allan::default_taus(n, rate, taus_per_decade);
            auto curve = allan::allan_deviation(axes, rate, taus);
            py::dict out;
            out["taus"] = curve.taus;
            out["adev"] = curve.adev;
            out["adev_avg"] = curve.average();
            allan::FitWindows w{white_lo, white_hi, walk_lo, walk_hi};
            try {
                auto p = allan::fit_noise_params(curve, w);
                out["sigma_w"] = p.sigma_w;
                out["sigma_b"] = p.sigma_b;
                out["sigma_w_avg"] = p.sigma_w_avg;
                out["sigma_b_avg"] = p.sigma_b_avg;
            } catch (const Error& e) {
                if (e.code() != Errc::FitRegionEmpty)
                    throw;
                out["fit_warning"] = std::string(e.what());
            }
            return out;
        },
        py::arg("samples"), py::arg("rate"), py::arg("taus_per_decade") = 30, py::arg("white_lo") = 0.0,
        py::arg("white_hi") = 1.0, py::arg("walk_lo") = 100.0,
        py::arg("walk_hi") = std::numeric_limits<double>::infinity(),
        "Allan deviation per axis and the white-noise / random-walk fit");

    // --- landmark map -------------------------------------------------------

    py::class_<map::GlobalMap>(m, "GlobalMap")
        .def(py::init<>())
        .def(
            "add_keyframe",
            [](map::GlobalMap& g, map::KeyframeId id, const Vec3& t, const Eigen::Vector4d& q) {
                g.add_keyframe(id, pose_from(t, q));
            },
            py::arg("id"), py::arg("t"), py::arg("q_wxyz"))
        .def(
            "add_observation",
            [](map::GlobalMap& g, map::LandmarkId l, map::KeyframeId k, const Vec3& p, double quality,
               const Vec3& color) { g.add_observation(l, k, p, quality, color); },
            py::arg("landmark"), py::arg("keyframe"), py::arg("p_world"), py::arg("quality"),
            py::arg("color") = Vec3::Zero())
        .def(
            "update_keyframe_poses",
            [](map::GlobalMap& g, const std::vector<std::tuple<map::KeyframeId, Vec3, Eigen::Vector4d>>& updates) {
                std::vector<std::pair<map::KeyframeId, Rigid3>> u;
                for (const auto& [id, t, q] : updates)
                    u.emplace_back(id, pose_from(t, q));
                g.update_keyframe_poses(u);
            },
            py::arg("updates"), "list of (id, t, q_wxyz); validated before any pose changes")
        .def(
            "fuse_landmark",
            [](const map::GlobalMap& g, map::LandmarkId l) {
                auto f = g.fuse_landmark(l);
                return py::make_tuple(Vec3(f.position), Vec3(f.color), f.quality);
            },
            py::arg("landmark"))
        .def("fuse_all", [](const map::GlobalMap& g) { return fused_dict(g.fuse_all()); })
        .def("export_ply", &map::GlobalMap::export_fused_cloud, py::arg("path"))
        .def_property_readonly("keyframe_count", &map::GlobalMap::keyframe_count)
        .def_property_readonly("landmark_count", &map::GlobalMap::landmark_count)
        .def_property_readonly("observation_count", &map::GlobalMap::observation_count)
        .def_static(
            "replay",
            [](const std::filesystem::path& path) {
                std::ifstream in(path);
                if (!in)
                    throw Error(Errc::IoError, "cannot read '" + path.string() + "'");
                return map::replay_log(in);
            },
            py::arg("event_log"));

    // --- trajectories -------------------------------------------------------

    m.def(
        "umeyama",
        [](const Points& ref, const Points& est, bool with_scale) {
            if (ref.rows() != est.rows())
                throw Error(Errc::InvalidArgument, "ref and est must have the same number of rows");
            std::vector<traj::PositionPair> pairs;
            for (Eigen::Index i = 0; i < ref.rows(); ++i)
                pairs.push_back({ref.row(i).transpose(), est.row(i).transpose()});
            auto s = traj::umeyama_sim3(pairs, with_scale ? traj::AlignMode::Sim3 : traj::AlignMode::SE3);
            return py::make_tuple(s.s, Mat3(s.R), Vec3(s.t), traj::ate_rmse(pairs, s));
        },
        py::arg("ref"), py::arg("est"), py::arg("with_scale") = true,
        "(s, R, t, ate_rmse) minimizing |ref - (s R est + t)|");
    m.def(
        "evaluate_ate",
        [](const std::filesystem::path& est, const std::filesystem::path& ref, const std::string& mode, double max_dt,
           double scale) {
            if (mode != "sim3" && mode != "se3")
                throw Error(Errc::InvalidArgument, "mode must be 'sim3' or 'se3'");
            auto r = traj::evaluate_ate(traj::read_tum(ref), traj::read_tum(est),
                                        mode == "sim3" ? traj::AlignMode::Sim3 : traj::AlignMode::SE3, max_dt, scale);
            py::dict out;
            out["ate_rmse"] = r.rmse;
            out["pairs"] = r.n_pairs;
            out["scale"] = r.transform.s;
            out["transform"] = Mat4(r.transform.matrix());
            return out;
        },
        py::arg("estimate"), py::arg("reference"), py::arg("mode") = "sim3", py::arg("max_dt") = 0.02,
        py::arg("scale") = 1.0);
    m.def(
        "tag_statistics",
        [](const std::map<int, Points>& positions) {
            std::map<int, std::vector<Vec3>> in;
            for (const auto& [id, pts] : positions)
                in[id] = to_vecs(pts);
            auto s = traj::tag_statistics(in);
            py::dict tags;
            for (const auto& [id, t] : s.per_tag) {
                py::dict d;
                d["n"] = t.n_detections;
                d["mean"] = Vec3(t.mean);
                d["std"] = Vec3(t.std);
                d["avg_dist_error"] = t.avg_dist_error;
                d["dist_errors"] = t.dist_errors;
                tags[py::int_(id)] = d;
            }
            py::dict out;
            out["tags"] = tags;
            out["std"] = Vec3(s.std);
            out["avg_dist_error"] = s.avg_dist_error;
            out["n_detections"] = s.n_detections;
            return out;
        },
        py::arg("positions"), "per-tag and pooled statistics of world positions {tag_id: (n, 3)}");

    // --- point clouds -------------------------------------------------------

    m.def(
        "voxel_downsample",
        [](const Points& pts, double voxel) { return to_points(cloud::voxel_downsample(to_cloud(pts), voxel).points); },
        py::arg("points"), py::arg("voxel"));
    m.def(
        "score_registration",
        [](const Points& src, const Points& tgt, const Mat4& t, double threshold) {
            auto rigid = Rigid3::from_matrix(t.block<3, 3>(0, 0), t.block<3, 1>(0, 3));
            return registration_dict(cloud::score_registration(to_cloud(src), to_cloud(tgt), rigid, threshold));
        },
        py::arg("source"), py::arg("target"), py::arg("transform"), py::arg("threshold"));
    m.def(
        "register",
        [](const Points& src, const Points& tgt, double voxel, std::uint64_t seed, std::size_t ransac_iterations) {
            cloud::PipelineOptions o;
            o.voxel = voxel;
            o.seed = seed;
            o.ransac_max_iterations = ransac_iterations;
            cloud::PipelineResult r;
            {
                py::gil_scoped_release release;
                r = cloud::register_clouds(to_cloud(src), to_cloud(tgt), o);
            }
            auto out = registration_dict(r.result);
            out["putative_matches"] = r.putative_correspondences;
            out["consensus_inliers"] = r.global.n_inliers;
            out["icp_iterations"] = r.icp.iterations;
            return out;
        },
        py::arg("source"), py::arg("target"), py::arg("voxel") = 0.1, py::arg("seed") = 0,
        py::arg("ransac_iterations") = 100000, "FPFH + RANSAC global alignment refined by ICP");
    m.def(
        "terrain_scans",
        [](std::uint64_t seed, double width, double overlap) {
            synth::TerrainSpec spec;
            spec.seed = seed;
            spec.width = spec.depth = width;
            spec.overlap = overlap;
            auto s = synth::terrain_scans(spec);
            return py::make_tuple(to_points(s.source.points), to_points(s.target.points), Mat4(s.truth.matrix()),
                                  s.overlap);
        },
        py::arg("seed") = 3, py::arg("width") = 8.2, py::arg("overlap") = 0.4, "synthetic scan pair: (source, target, truth 4x4, overlap)");
}
