import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridpos import units as u
from hybridpos.geometry import Absolute2DPosition, Quaternion, ReferenceSpace
from hybridpos.graph import (
    CallbackSinkNode, CloneNode, ConvertFromSpaceNode, DebounceNode, DropOldest, FunctionNode,
    GraphBuildError, GraphBuilder, GraphFrozenError, LatestOnly, MemorySinkNode, MergeNode, ModelBuilder,
    ProcessingNode, SinkNode, SourceNode, VirtualScheduler,
)
from hybridpos.model import DataObject, create_frame


def frame(uid="obj", t=0, x=None):
    obj = DataObject(uid)
    if x is not None:
        obj.position = Absolute2DPosition(x, 0, accuracy=1, timestamp=t)
    return create_frame(obj, t)


class CountingSource(SourceNode):
    """Pull-based source producing numbered frames."""

    def __init__(self, **kw):
        super().__init__(persistence=False, **kw)
        self.produced = 0

    def on_pull(self, **options):
        self.produced += 1
        return frame(f"p{self.produced}")


class Failing(SinkNode):
    def on_push(self, frame):
        raise RuntimeError("disk full")


class TestPush:
    def test_source_processor_sink(self):
        src, sink = SourceNode(), MemorySinkNode()
        events = []
        model = ModelBuilder.create().from_(src).via(FunctionNode(lambda f: f)).to(sink).build()
        model.on("completed", events.append)
        f = frame("a", x=1)
        src.push(f).result(timeout=5)
        assert [fr.uid for fr in sink.frames] == [f.uid]
        assert [(e.frame_uid, e.object_uids, e.sink_uid) for e in events] == [(f.uid, ("a",), sink.uid)]
        assert model.find_data_service(DataObject).find_by_uid("a").position.x == 1

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 3), st.integers(1, 5))
    def test_one_completed_per_frame_and_sink(self, paths, sinks, frames):
        # diamond: each frame reaches every sink over ``paths`` routes
        src = SourceNode(persistence=False)
        mids = [ProcessingNode() for _ in range(paths)]
        outs = [MemorySinkNode() for _ in range(sinks)]
        b = ModelBuilder.create()
        for m in mids:
            b.from_(src).via(m).to(*outs)
        model = b.build()
        events = []
        model.on("completed", events.append)
        pushed = [frame(t=i) for i in range(frames)]
        for f in pushed:
            src.push(f).result(timeout=5)
        pairs = [(e.frame_uid, e.sink_uid) for e in events]
        assert sorted(pairs) == sorted((f.uid, s.uid) for f in pushed for s in outs)
        assert all(len(s.frames) == paths * frames for s in outs)

    def test_sink_failure_reaches_initiator(self):
        src, mid, sink = SourceNode(), ProcessingNode(), Failing()
        ModelBuilder.create().from_(src).via(mid).to(sink).build()
        errors = {n: [] for n in ("src", "mid")}
        src.on("error", errors["src"].append)
        mid.on("error", errors["mid"].append)
        f = frame()
        sink_result = []
        orig = sink.push
        sink.push = lambda fr, sender=None: sink_result.append(orig(fr, sender)) or sink_result[-1]
        src.push(f).result(timeout=5)
        with pytest.raises(RuntimeError, match="disk full"):
            sink_result[0].result(timeout=5)
        for key in errors:
            assert [(e.frame_uid, e.node_uid) for e in errors[key]] == [(f.uid, sink.uid)]

    def test_direct_source_completion_rejected(self):
        src = SourceNode()
        ModelBuilder.create().from_(src).to(Failing()).build()
        with pytest.raises(RuntimeError):
            src.push(frame()).result(timeout=5)

    def test_unchained_errors_stop(self):
        class Quiet(ProcessingNode):
            chain_errors = False

        src, mid = SourceNode(), Quiet()
        ModelBuilder.create().from_(src).via(mid).to(Failing()).build()
        seen = []
        src.on("error", seen.append)
        mid.on("error", seen.append)
        src.push(frame()).result(timeout=5)
        assert len(seen) == 1


class TestPull:
    def test_pull_based_source_answers_with_push(self):
        src, sink = CountingSource(), MemorySinkNode()
        ModelBuilder.create().from_(src).via(ProcessingNode()).to(sink).build()
        result = sink.pull().result(timeout=5)
        assert src.produced == 1
        assert [f.source.uid for f in sink.frames] == ["p1"]
        assert result[0][0].uid == sink.frames[0].uid

    def test_push_only_source_resolves_empty(self):
        src, sink = SourceNode(), MemorySinkNode()
        ModelBuilder.create().from_(src).to(sink).build()
        assert sink.pull().result(timeout=5) == [None]
        assert sink.frames == []

    def test_failing_production_rejects(self):
        class Broken(SourceNode):
            def on_pull(self, **options):
                raise IOError("sensor gone")

        sink = MemorySinkNode()
        ModelBuilder.create().from_(Broken()).to(sink).build()
        with pytest.raises(IOError):
            sink.pull().result(timeout=5)

    def test_two_concurrent_pulls(self):
        src, sink = CountingSource(), MemorySinkNode()
        ModelBuilder.create().from_(src).to(sink).build()
        results = [None, None]

        def go(i):
            results[i] = sink.pull().result(timeout=5)

        threads = [threading.Thread(target=go, args=(i,)) for i in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        got = {r[0].source.uid for r in results}
        assert got == {"p1", "p2"}
        assert sorted(f.source.uid for f in sink.frames) == ["p1", "p2"]


def merge_model(inlets=5, **options):
    sched = VirtualScheduler()
    sources = [SourceNode(persistence=False, name=f"s{i}") for i in range(inlets)]
    sink = CallbackSinkNode(lambda f: emitted.append((sched.now(), f)))
    emitted = []
    merge = MergeNode(lambda f: "k", **options)
    model = ModelBuilder.create().with_scheduler(sched).from_(*sources).via(merge).to(sink).build()
    return model, sched, sources, emitted, merge


class TestMerge:
    def test_two_of_five_emit_at_timeout(self):
        model, sched, sources, emitted, _ = merge_model(timeout=20, min_count=2)
        sources[0].push(frame("sphero", 0, x=0))
        sched.run_until(5_000)
        sources[3].push(frame("sphero", 5_000, x=10))
        sched.run_until(19_999)
        assert emitted == []
        sched.run()
        assert len(emitted) == 1
        t, merged = emitted[0]
        assert t == 20_000
        # unit accuracies: fused position is the plain mean
        assert merged.get_object("sphero").position.x == pytest.approx(5)

    def test_all_inlets_emit_immediately(self):
        model, sched, sources, emitted, _ = merge_model(timeout=20, min_count=2)
        for i, s in enumerate(sources):
            s.push(frame("sphero", 0, x=i))
        assert len(emitted) == 1 and emitted[0][0] == 0
        sched.run()
        assert len(emitted) == 1

    def test_single_inlet_discarded(self):
        model, sched, sources, emitted, merge = merge_model(timeout=20, min_count=2)
        dropped = []
        merge.on("discarded", lambda key, n: dropped.append(n))
        sources[2].push(frame("sphero", 0, x=1))
        sched.run()
        assert emitted == [] and dropped == [1]

    def test_later_frame_from_same_inlet_replaces(self):
        model, sched, sources, emitted, _ = merge_model(inlets=2, timeout=20, min_count=2)
        sources[0].push(frame("sphero", 0, x=0))
        sources[0].push(frame("sphero", 0, x=4))
        sources[1].push(frame("sphero", 0, x=8))
        assert emitted[0][1].get_object("sphero").position.x == pytest.approx(6)

    def test_unfiltered_objects_copied_once(self):
        model, sched, sources, emitted, _ = merge_model(
            inlets=2, timeout=20, min_count=2, object_filter=lambda o: o.uid == "sphero")
        for i, s in enumerate(sources):
            f = frame("sphero", 0, x=i)
            f.add_object(DataObject("camera"))
            s.push(f)
        merged = emitted[0][1]
        assert sorted(o.uid for o in merged.objects) == ["camera", "sphero"]

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(0, 4), max_size=5, unique=True), st.integers(1, 5))
    def test_partial_output_whenever_min_count_met(self, active, min_count):
        model, sched, sources, emitted, _ = merge_model(timeout=20, min_count=min_count)
        for i in active:
            sources[i].push(frame("sphero", 0, x=i))
        sched.run()
        assert len(emitted) == (1 if len(active) >= min_count else 0)


class TestShapes:
    def run_debounce(self, times_us, interval_ms=10):
        sched = VirtualScheduler()
        src, sink = SourceNode(persistence=False), MemorySinkNode()
        ModelBuilder.create().with_scheduler(sched).from_(src).debounce(interval_ms).to(sink).build()
        pushed = []
        for t in times_us:
            sched.run_until(t)
            f = frame(t=t)
            pushed.append(f)
            src.push(f)
        return pushed, sink.frames

    def test_five_frames_in_ten_ms(self):
        _, out = self.run_debounce([0, 2_000, 4_000, 6_000, 8_000])
        assert len(out) == 1

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(0, 100_000), max_size=30))
    def test_debounce_against_oracle(self, times):
        times = sorted(times)
        pushed, out = self.run_debounce(times)
        want, last = [], None
        for f, t in zip(pushed, times):
            if last is None or t - last >= 10_000:
                want.append(f.uid)
                last = t
        assert [f.uid for f in out] == want

    def test_clone_repack(self):
        sched = VirtualScheduler(start=500)
        src, sink = SourceNode(persistence=False), MemorySinkNode()
        ModelBuilder.create().with_scheduler(sched).from_(src).clone(repack=True).to(sink).build()
        f = frame("a", t=1, x=3)
        src.push(f)
        out = sink.frames[0]
        assert out.uid != f.uid and out.created_timestamp == 500
        assert out.get_object("a") == f.get_object("a") and out.get_object("a") is not f.get_object("a")

    def test_convert_from_video_space(self):
        world = ReferenceSpace(unit=u.CENTIMETER)
        video = (ReferenceSpace(world).set_translation(1040, 800, 0)
                 .set_rotation(Quaternion.from_euler(180, 180, 0, order="ZXY", unit=u.DEGREE))
                 .set_scale(4, 4, 1))
        src, sink = SourceNode(persistence=False), MemorySinkNode()
        ModelBuilder.create().with_reference_space(world).from_(src).convert_from_space(video).to(sink).build()
        obj = DataObject("sphero")
        obj.position = Absolute2DPosition(1040, 800, unit=u.CENTIMETER)
        src.push(create_frame(obj, 0))
        assert np.allclose(sink.frames[0].get_object("sphero").position.vector, 0, atol=1e-9)

    def test_filter(self):
        src, sink = SourceNode(persistence=False), MemorySinkNode()
        ModelBuilder.create().from_(src).filter(lambda f: f.source.uid == "keep").to(sink).build()
        src.push(frame("drop"))
        src.push(frame("keep"))
        assert [f.source.uid for f in sink.frames] == ["keep"]

    def test_timed_pull(self):
        sched = VirtualScheduler()
        src, sink = CountingSource(), MemorySinkNode()
        model = ModelBuilder.create().with_scheduler(sched).from_(src).timed_pull(1).to(sink).build()
        model.start()
        sched.run_until(5_000)
        model.stop()
        assert src.produced == 5 and len(sink.frames) == 5

    def test_nonpositive_interval(self):
        with pytest.raises(ValueError):
            DebounceNode(0)


class TestBuild:
    def test_empty_graph_is_inert(self):
        model = ModelBuilder.create().build()
        model.start()
        assert model.push(frame()).result(timeout=1) == []
        model.stop()
        assert model.nodes == ()

    def test_feedback_topology_builds(self):
        velocity = FunctionNode(lambda f: f, name="velocity")
        merge = MergeNode(name="merged", min_count=2)
        sources = [SourceNode(name=n) for n in ("video", "sphero_position", "input", "sphero_velocity")]
        sink = MemorySinkNode()
        b = ModelBuilder.create()
        b.from_(*sources, "feedback").via(merge).to(sink)
        b.from_("merged").debounce(10).clone(repack=True).via(velocity).to("feedback")
        model = b.build()
        assert set(merge.inlets[-1:]) == {model.find_node("feedback")}
        assert len(merge.inlets) == 5

    def test_cycle_without_named_reference(self):
        a, c = ProcessingNode(), CloneNode()
        src, sink = SourceNode(), SinkNode()
        b = ModelBuilder.create().from_(src).via(a).via(c).to(sink)
        b.from_(c).to(a)
        with pytest.raises(GraphBuildError, match="named"):
            b.build()

    def test_cycle_needs_debounce_or_clone(self):
        b = ModelBuilder.create()
        b.from_(SourceNode()).via(ProcessingNode(name="x")).to(SinkNode())
        b.from_("x").via(ProcessingNode()).to("x")
        with pytest.raises(GraphBuildError, match="debounce or clone"):
            b.build()

    @pytest.mark.parametrize("case", ["unresolved", "source_inlet", "sink_outlet", "dangling", "dup_name"])
    def test_build_errors(self, case):
        b = ModelBuilder.create()
        if case == "unresolved":
            b.from_("nowhere").to(SinkNode())
        elif case == "source_inlet":
            b.from_(ProcessingNode()).to(SourceNode())
        elif case == "sink_outlet":
            b.from_(SourceNode()).via(SinkNode()).to(SinkNode())
        elif case == "dangling":
            b.from_(SourceNode()).via(ProcessingNode()).via(ProcessingNode())
        else:
            b.from_(SourceNode(name="a")).to(SinkNode(name="a"))
        with pytest.raises(GraphBuildError):
            b.build()

    def test_frozen(self):
        b = ModelBuilder.create().from_(SourceNode()).to(SinkNode())
        model = b.build()
        with pytest.raises(GraphFrozenError):
            model.add_node(ProcessingNode())
        with pytest.raises(GraphFrozenError):
            b.add_node(ProcessingNode())

    def test_open_subgraph(self):
        model = GraphBuilder.create().from_().via(FunctionNode(lambda f: f)).to().build()
        got = []
        model.outputs()[0].callbacks.append(got.append)
        model.push(frame("a")).result(timeout=5)
        assert [f.source.uid for f in got] == ["a"]


class TestInbox:
    def reentrant(self, policy):
        """A node that pushes three frames into itself while busy with the first."""
        sink = MemorySinkNode()

        class Burst(ProcessingNode):
            def process(self, fr, sender=None):
                if fr.source.uid == "first":
                    futs = [self.push(frame(f"q{i}")) for i in range(3)]
                    self.futures = futs
                return fr

        node = Burst(inbox=policy)
        src = SourceNode(persistence=False)
        ModelBuilder.create().from_(src).via(node).to(sink).build()
        src.push(frame("first")).result(timeout=5)
        return [f.source.uid for f in sink.frames], node

    def test_unbounded_keeps_all_in_order(self):
        out, _ = self.reentrant(None)
        assert out == ["first", "q0", "q1", "q2"]

    def test_drop_oldest(self):
        out, node = self.reentrant(DropOldest(2))
        assert out == ["first", "q1", "q2"]
        assert node.futures[0].result(timeout=1) is None

    def test_latest_only(self):
        out, _ = self.reentrant(LatestOnly())
        assert out == ["first", "q2"]

    def test_capacity_validated(self):
        with pytest.raises(ValueError):
            DropOldest(0)
