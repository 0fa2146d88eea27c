import math

import numpy as np
import pytest

import govi


def rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def test_fixture_mp4_extracts_expected_counts():
    data = govi.extract_bytes(govi.fixture_mp4(1), "fixture")
    assert data["t"].shape == (2020,)
    assert data["accel"].shape == (2020, 3)
    assert data["gyro"].shape == (2020, 3)
    assert data["frame_times"].shape == (300,)
    assert np.allclose(np.diff(data["t"]), 0.005)
    assert np.all(np.diff(data["frame_times"]) > 0)
    assert data["meta"]["payload_count"] == 10


def test_errors_carry_their_code(tmp_path):
    bad = tmp_path / "notes.mp4"
    bad.write_text("not a movie")
    with pytest.raises(govi.GoviError) as info:
        govi.extract(bad)
    assert info.value.code == "NotMp4"
    assert info.value.input_error


def test_allan_on_simulated_white_noise():
    x = govi.simulate_imu_noise(2e-3, 0.0, 200.0, 600.0, 5)
    r = govi.allan(np.asarray(x), 200.0, walk_lo=10.0, walk_hi=100.0)
    assert abs(r["sigma_w_avg"] / 2e-3 - 1.0) < 0.05
    assert len(r["taus"]) == len(r["adev"][0])


def test_allan_constant_series_has_no_fit():
    r = govi.allan(np.ones((200 * 700, 3)), 200.0)
    assert max(r["adev_avg"]) == 0.0
    assert "FitRegionEmpty" in r["fit_warning"]


def test_map_follows_a_rigid_update():
    m = govi.GlobalMap()
    m.add_keyframe(0, [0, 0, 0], [1, 0, 0, 0])
    m.add_keyframe(1, [1, 0, 0], [1, 0, 0, 0])
    m.add_observation(7, 0, [2.0, 0.0, 0.0], 1.0)
    m.add_observation(7, 1, [2.2, 0.0, 0.0], 0.5)
    pos, _, quality = m.fuse_landmark(7)
    assert np.allclose(pos, [2.0 + 0.2 / 3.0, 0.0, 0.0])
    assert quality == pytest.approx(0.75)
    # the same rigid motion (90 deg about z, then up 5) applied to both keyframes
    half = math.sqrt(0.5)
    m.update_keyframe_poses([(0, [0, 0, 5], [half, 0, 0, half]), (1, [0, 1, 5], [half, 0, 0, half])])
    fused = m.fuse_all()
    assert fused["positions"].shape == (1, 3)
    assert np.allclose(fused["positions"][0], rot_z(math.pi / 2) @ pos + [0, 0, 5])


def test_umeyama_recovers_a_similarity():
    rng = np.random.default_rng(0)
    est = rng.uniform(-5, 5, size=(50, 3))
    r = rot_z(0.4)
    ref = 1.7 * est @ r.T + [1.0, -2.0, 0.5]
    s, rr, t, ate = govi.umeyama(ref, est)
    assert s == pytest.approx(1.7)
    assert np.allclose(rr, r)
    assert np.allclose(t, [1.0, -2.0, 0.5])
    assert ate < 1e-9


def test_tag_statistics_two_points():
    stats = govi.tag_statistics({4: np.array([[0.0, 0, 0], [0.2, 0, 0]])})
    assert stats["avg_dist_error"] == pytest.approx(0.1)
    assert stats["tags"][4]["std"][0] == pytest.approx(0.2 / math.sqrt(2.0))


def test_register_small_terrain():
    src, tgt, truth, overlap = govi.terrain_scans(3, width=6.0, overlap=0.6)
    r = govi.register(src, tgt, seed=1)
    t = r["transform"]
    assert np.linalg.norm(t[:3, 3] - truth[:3, 3]) < 0.02
    assert abs(r["fitness"] - overlap) < 0.15
    again = govi.score_registration(govi.voxel_downsample(src, 0.1), govi.voxel_downsample(tgt, 0.1), t, 0.1)
    assert again["fitness"] == pytest.approx(r["fitness"])
