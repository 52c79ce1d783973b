import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize
from scipy.spatial.transform import Rotation

from hybridpos import units as u
from hybridpos.algorithms import (
    Fingerprint, FingerprintDatabase, InsufficientObservationsError, SingularGeometryError,
    displacement_apply, fuse_weighted, sma_update, triangulate, trilaterate, velocity_process,
)
from hybridpos.algorithms.nodes import DisplacementNode, SMAFilterNode, TrilaterationNode, VelocityProcessingNode
from hybridpos.geometry import Absolute2DPosition, Absolute3DPosition, Quaternion, ReferenceSpace
from hybridpos.geometry.positions import RelativeDistance
from hybridpos.geometry.vectors import AngularVelocity, LinearVelocity, Vector3
from hybridpos.graph import MemorySinkNode, ModelBuilder, SourceNode
from hybridpos.model import DataObject, create_frame


def P(x, y, **kw):
    return Absolute2DPosition(x, y, **kw)


def grid_then_polish(cost, lo, hi, n=201):
    """Brute-force minimizer on an n x n grid, polished by Nelder-Mead."""
    xs = np.linspace(lo, hi, n)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    vals = np.vectorize(lambda a, b: cost(np.array([a, b])))(gx, gy)
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    best = np.array([xs[i], xs[j]])
    res = minimize(cost, best, method="Nelder-Mead", options=dict(xatol=1e-11, fatol=1e-16, maxiter=20000))
    return best, res.x, xs[1] - xs[0]


class TestVelocity:
    def test_zero_velocity_is_identity(self):
        p = Absolute3DPosition(1, 2, 3, linear_velocity=LinearVelocity(0, 0, 0), timestamp=0)
        assert np.array_equal(velocity_process(p, 5).vector, p.vector)

    def test_rotated_velocity(self):
        p = Absolute3DPosition(0, 0, 0, orientation=Quaternion.from_euler(0, 0, 90, unit=u.DEGREE),
                               linear_velocity=LinearVelocity(1, 0, 0), timestamp=0)
        out = velocity_process(p, 2)
        assert np.allclose(out.vector, (0, 2, 0), atol=1e-9)
        assert out.timestamp == 2_000_000

    def test_angular_velocity_quaternion_exponential(self):
        p = Absolute3DPosition(0, 0, 0, orientation=Quaternion(0, 0, 0, 1),
                               angular_velocity=AngularVelocity(0, 0, math.pi / 2), timestamp=0)
        out = velocity_process(p, 1)
        want = Quaternion(*Rotation.from_rotvec([0, 0, math.pi / 2]).as_quat())
        assert abs(out.orientation.angle_to(want)) < 1e-9

    def test_position_unit_respected(self):
        p = Absolute2DPosition(0, 0, unit=u.CENTIMETER, linear_velocity=LinearVelocity(1, 0, 0), timestamp=0)
        assert np.allclose(velocity_process(p, 0.5).vector, (50, 0, 0))

    def test_negative_dt_is_noop_with_warning(self):
        p = Absolute2DPosition(1, 1, linear_velocity=LinearVelocity(1, 0, 0), timestamp=10)
        with pytest.warns(RuntimeWarning):
            assert velocity_process(p, -1) is p

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=3, max_size=3), st.lists(st.floats(-5, 5), min_size=3, max_size=3),
           st.floats(0, 10))
    def test_matches_rotation_oracle(self, rv, v, dt):
        q = Quaternion(*Rotation.from_rotvec(rv).as_quat())
        p = Absolute3DPosition(1, 2, 3, orientation=q, linear_velocity=LinearVelocity(*v), timestamp=0)
        want = np.array([1, 2, 3]) + Rotation.from_rotvec(rv).apply(v) * dt
        assert np.allclose(velocity_process(p, dt).vector, want, atol=1e-9)

    def test_node_advances_to_frame_time(self):
        src, sink = SourceNode(persistence=False), MemorySinkNode()
        ModelBuilder.create().from_(src).via(VelocityProcessingNode()).to(sink).build()
        obj = DataObject("a")
        obj.position = Absolute2DPosition(0, 0, linear_velocity=LinearVelocity(2, 0, 0), timestamp=0)
        src.push(create_frame(obj, 500_000))
        assert np.allclose(sink.frames[0].get_object("a").position.vector, (1, 0, 0))


class TestTrilateration:
    def test_symmetric_anchors(self):
        out = trilaterate([(P(-1, 0), 1), (P(1, 0), 1), (P(0, 1), 1)])
        assert np.allclose(out.vector, 0, atol=1e-9)

    def test_forward_computed_distances(self):
        d = math.sqrt(0.5)
        out = trilaterate([(P(0, 0), d), (P(1, 0), d), (P(0, 1), d)])
        assert np.allclose(out.vector[:2], (0.5, 0.5), atol=1e-9)
        assert out.accuracy < 1e-9

    def test_random_noiseless_instances(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            target = rng.uniform(-50, 50, 2)
            anchors = rng.uniform(-100, 100, (rng.integers(3, 7), 2))
            obs = [(P(*a), float(np.linalg.norm(a - target))) for a in anchors]
            assert np.allclose(trilaterate(obs).vector[:2], target, atol=1e-9)

    def test_3d(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            target = rng.uniform(-5, 5, 3)
            anchors = rng.uniform(-10, 10, (5, 3))
            obs = [(Absolute3DPosition(*a), float(np.linalg.norm(a - target))) for a in anchors]
            assert np.allclose(trilaterate(obs).vector, target, atol=1e-9)

    def test_noisy_against_grid_search(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            target = rng.uniform(2, 8, 2)
            anchors = np.array([[0, 0], [10, 0], [10, 10], [0, 10]], float)
            d = np.linalg.norm(anchors - target, axis=1) + rng.normal(0, 0.2, 4)

            def cost(p):
                return float(np.sum((np.linalg.norm(anchors - p, axis=1) - d) ** 2))

            coarse, fine, step = grid_then_polish(cost, -1, 11)
            got = trilaterate([(P(*a), float(di)) for a, di in zip(anchors, d)]).vector[:2]
            assert np.allclose(got, coarse, atol=step)
            assert np.allclose(got, fine, atol=1e-6)

    def test_relative_distance_units(self):
        obs = [(P(0, 0), RelativeDistance("x", 300, u.CENTIMETER)), (P(6, 0), RelativeDistance("y", 3, u.METER)),
               (P(3, 3), RelativeDistance("z", 3000, u.MILLIMETER))]
        assert np.allclose(trilaterate(obs).vector[:2], (3, 0), atol=1e-9)

    def test_errors(self):
        with pytest.raises(InsufficientObservationsError):
            trilaterate([(P(0, 0), 1), (P(1, 0), 1)])
        with pytest.raises(SingularGeometryError):
            trilaterate([(P(0, 0), 1), (P(1, 0), 1), (P(2, 0), 1)])
        with pytest.raises(InsufficientObservationsError):
            trilaterate([(Absolute3DPosition(0, 0, 0), 1)] * 3)

    def test_node_uses_stored_landmarks(self):
        src, sink = SourceNode(persistence=False), MemorySinkNode()
        model = ModelBuilder.create().from_(src).via(TrilaterationNode()).to(sink).build()
        store = model.find_data_service(DataObject)
        target = np.array([1.0, 2.0])
        tag = DataObject("tag")
        for uid, xy in {"a": (0, 0), "b": (5, 0), "c": (0, 5)}.items():
            lm = DataObject(uid)
            lm.position = P(*xy)
            store.insert(lm)
            tag.add_relative_position(RelativeDistance(uid, float(np.linalg.norm(np.array(xy) - target)), u.METER))
        src.push(create_frame(tag, 7))
        out = sink.frames[0].get_object("tag").position
        assert np.allclose(out.vector[:2], target, atol=1e-9) and out.timestamp == 7


class TestTriangulation:
    def test_two_bearings(self):
        out = triangulate([(P(0, 0), 45), (P(10, 0), 135)], angle_unit=u.DEGREE)
        assert np.allclose(out.vector[:2], (5, 5), atol=1e-9)

    def test_target_on_landmark(self):
        out = triangulate([(P(0, 0), 0.3), (P(0, 0), 1.2), (P(0, 0), 2.0)])
        assert out.accuracy == pytest.approx(0, abs=1e-12)

    def test_random_noiseless(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            target = rng.uniform(-50, 50, 2)
            anchors = rng.uniform(-100, 100, (3, 2))
            obs = [(P(*a), math.atan2(*(target - a)[::-1])) for a in anchors]
            assert np.allclose(triangulate(obs).vector[:2], target, atol=1e-9)

    def test_noisy_against_grid_search(self):
        rng = np.random.default_rng(8)
        anchors = np.array([[0, 0], [10, 0], [5, 10]], float)
        target = np.array([4.0, 3.0])
        angles = [math.atan2(*(target - a)[::-1]) + rng.normal(0, 0.02) for a in anchors]
        normals = np.array([[-math.sin(t), math.cos(t)] for t in angles])

        def cost(p):
            return float(np.sum((normals @ p - (normals * anchors).sum(axis=1)) ** 2))

        coarse, fine, step = grid_then_polish(cost, 0, 10)
        got = triangulate([(P(*a), t) for a, t in zip(anchors, angles)]).vector[:2]
        assert np.allclose(got, coarse, atol=step)
        assert np.allclose(got, fine, atol=1e-6)

    def test_parallel_rejected(self):
        with pytest.raises(SingularGeometryError):
            triangulate([(P(0, 0), 0.0), (P(0, 1), math.pi)])


class TestFingerprinting:
    def db(self):
        db = FingerprintDatabase()
        db.store(Fingerprint(P(0, 0), {"ap": -50}, uid="a"))
        db.store(Fingerprint(P(10, 0), {"ap": -70}, uid="b"))
        return db

    def test_exact_match(self):
        assert np.allclose(self.db().locate({"ap": -50}, 1).vector[:2], (0, 0))

    def test_equidistant_mean(self):
        out = self.db().locate({"ap": -60}, 2)
        assert np.allclose(out.vector[:2], (5, 0))
        assert out.accuracy == pytest.approx(5)

    def test_tie_break_by_uid(self):
        db = FingerprintDatabase()
        db.store(Fingerprint(P(10, 0), {"ap": -70}, uid="z"))
        db.store(Fingerprint(P(0, 0), {"ap": -50}, uid="m"))
        assert [fp.uid for fp in db.nearest({"ap": -60}, 1)] == ["m"]

    def test_missing_keys_imputed(self):
        db = FingerprintDatabase()
        assert db.distance({"a": -60}, {"b": -60}) == pytest.approx(math.hypot(40, 40))

    def test_errors(self):
        with pytest.raises(LookupError):
            FingerprintDatabase().locate({"ap": 1})
        with pytest.raises(ValueError):
            Fingerprint(P(0, 0), {})


class TestFusion:
    def test_symmetric(self):
        assert np.allclose(fuse_weighted([P(0, 0, accuracy=1), P(2, 0, accuracy=1)]).vector, (1, 0, 0))

    def test_weighted(self):
        out = fuse_weighted([P(0, 0, accuracy=1), P(3, 0, accuracy=2)])
        assert np.allclose(out.vector, (1, 0, 0), atol=1e-12)
        assert out.accuracy == pytest.approx((1 * 1 + 0.5 * 2) / 1.5)

    def test_single_sample_unchanged(self):
        p = P(1, 2, accuracy=3)
        assert fuse_weighted([p]) is p

    def test_zero_accuracy_clamped(self):
        out = fuse_weighted([P(0, 0, accuracy=0), P(10, 0, accuracy=1)])
        assert out.x == pytest.approx(10 * 1 / (1e6 + 1), rel=1e-9)

    def test_timestamp_and_optional_fields(self):
        q = Quaternion.from_euler(0, 0, 0.4)
        a = P(0, 0, accuracy=1, timestamp=5, orientation=q)
        b = P(2, 0, accuracy=1, timestamp=9, linear_velocity=LinearVelocity(1, 0, 0))
        out = fuse_weighted([a, b])
        assert out.timestamp == 9
        assert abs(out.orientation.angle_to(q)) < 1e-12
        assert np.allclose(out.linear_velocity, (1, 0, 0))

    def test_quaternion_hemisphere(self):
        q = Quaternion.from_euler(0, 0, 0.5)
        out = fuse_weighted([P(0, 0, accuracy=1, orientation=q),
                             P(0, 0, accuracy=1, orientation=Quaternion(*(-np.asarray(q))))])
        assert abs(out.orientation.angle_to(q)) < 1e-12

    def test_units_follow_first_sample(self):
        out = fuse_weighted([P(0, 0, unit=u.METER, accuracy=1),
                             P(200, 0, unit=u.CENTIMETER, accuracy=100, accuracy_unit=u.CENTIMETER)])
        assert out.unit is u.METER and out.x == pytest.approx(1)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(0.01, 100)),
                    min_size=2, max_size=8))
    def test_weighted_mean_oracle(self, samples):
        out = fuse_weighted([P(x, y, accuracy=a) for x, y, a in samples])
        w = np.array([1 / a for *_, a in samples])
        xy = np.array([(x, y) for x, y, _ in samples])
        want = (w[:, None] * xy).sum(axis=0) / w.sum()
        assert np.allclose(out.vector[:2], want, rtol=1e-12, atol=1e-12 * 1e3)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=2, max_size=8),
           st.floats(0.01, 100))
    def test_equal_accuracy_is_arithmetic_mean(self, pts, acc):
        out = fuse_weighted([P(x, y, accuracy=acc) for x, y in pts])
        assert np.allclose(out.vector[:2], np.mean(pts, axis=0), rtol=0, atol=1e-12 * 1e3)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(0.01, 100)), min_size=2, max_size=8),
           st.floats(0.01, 100))
    def test_invariant_under_accuracy_rescaling(self, samples, k):
        a = fuse_weighted([P(x, 0, accuracy=acc) for x, acc in samples])
        b = fuse_weighted([P(x, 0, accuracy=acc * k) for x, acc in samples])
        assert a.x == pytest.approx(b.x, rel=1e-9, abs=1e-9)


class TestFilters:
    def run(self, series, window):
        out, hist = [], []
        for v in series:
            m, hist = sma_update(hist, v, window)
            out.append(m)
        return out

    def test_sma_examples(self):
        assert self.run([1, 2, 3], 2) == [1, 1.5, 2.5]
        assert self.run([4, 4, 4], 3) == [4, 4, 4]
        assert self.run([3, 1, 2], 1) == [3, 1, 2]
        with pytest.raises(ValueError):
            sma_update([], 1, 0)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=30), st.integers(1, 6))
    def test_sma_against_convolution(self, series, window):
        got = self.run(series, window)
        want = [np.mean(series[max(0, i - window + 1):i + 1]) for i in range(len(series))]
        assert np.allclose(got, want, rtol=1e-9, atol=1e-6)

    def test_displacement_examples(self):
        out = displacement_apply(Vector3(10, 10, 0), 0, Vector3(0, 0, 0), 0, Vector3(1, 2, 0), 10)
        assert tuple(out) == (11, 12, 0)
        same = displacement_apply(Vector3(10, 10, 0), 0, Vector3(3, 3, 0), 0, Vector3(3, 3, 0), 10)
        assert tuple(same) == (10, 10, 0)

    def test_displacement_counts_only_motion_after_anchor(self):
        out = displacement_apply(Vector3(10, 10, 0), 5, Vector3(0, 0, 0), 0, Vector3(2, 0, 0), 10)
        assert np.allclose(out, (11, 10, 0))

    def test_sma_node_state_per_object(self):
        src, sink = SourceNode(persistence=False), MemorySinkNode()
        ModelBuilder.create().from_(src).via(SMAFilterNode(2)).to(sink).build()
        for uid, acc in [("a", 1), ("b", 10), ("a", 2), ("a", 3)]:
            obj = DataObject(uid)
            obj.position = P(0, 0, accuracy=acc)
            src.push(create_frame(obj, 0))
        accs = [(f.source.uid, f.source.position.accuracy) for f in sink.frames]
        assert accs == [("a", 1), ("b", 10), ("a", 1.5), ("a", 2.5)]

    def test_displacement_node_in_rotated_space(self):
        world = ReferenceSpace(unit=u.METER)
        internal = ReferenceSpace(world).set_rotation(Quaternion.from_euler(0, 0, 90, unit=u.DEGREE))
        src, sink = SourceNode(persistence=False), MemorySinkNode()
        model = ModelBuilder.create().with_reference_space(world).from_(src).via(DisplacementNode(internal)).to(sink).build()
        fused = DataObject("s")
        fused.position = P(10, 10, timestamp=0)
        model.find_data_service(DataObject).insert(fused)
        for t, xy in [(0, (0, 0)), (10, (1, 0))]:
            obj = DataObject("s")
            obj.position = P(*xy, timestamp=t)
            src.push(create_frame(obj, t))
        assert len(sink.frames) == 1  # first sample only seeds the state
        # internal +x is global -y after the inverse rotation
        want = np.array([10, 10, 0]) + internal.transform_to_global(P(1, 0)).vector
        assert np.allclose(sink.frames[0].source.position.vector, want, atol=1e-12)
