"""Sample transport: codec, frames, pool, wire protocol, service, actor."""
from __future__ import annotations

import dataclasses
import math
import socket
import struct
import threading
import time
import types

import numpy as np
import pytest

from minimoba.env.world import EnvConfig, MobaEnv
from minimoba.learner.core import make_learner
from minimoba.learner.ppo import PPOConfig
from minimoba.net.model import NetConfig, build_net, forward_observation
from minimoba.net.ops import masked_softmax
from minimoba.net.params import Params
from minimoba.rng import Rng
from minimoba.runtime import (
    ActorConfig,
    Command,
    LearnerFeedConfig,
    MemoryPool,
    ModelHub,
    ModelSnapshot,
    PipelineError,
    PoolClient,
    PoolService,
    SampleFrame,
    choose_opponent,
    decode_message,
    decode_segments,
    dispatch_pack,
    encode_message,
    encode_segment,
    encode_segments,
    fnv1a_64,
    pack_frames,
    play_episode,
    run_actor,
    run_learner,
    unpack_frame,
)
from minimoba.runtime.segcodec import decode_segment
from minimoba.runtime.wire import recv_message, send_message
from tests.conftest import long_runs_enabled
from tests.seg_util import synthetic_segment

TINY = NetConfig.tiny()
SHORT_ENV = EnvConfig(tick_cap=40, base_hp=80, turret_hp=60)


def wire_segment(seed: int, T: int = 5, terminal: bool = False):
    """A synthetic segment with transport-ready float32 behaviour probs."""
    seg = synthetic_segment(seed, T=T, terminal=terminal)
    seg.behavior_probs = seg.behavior_probs.astype(np.float32)
    return seg


def assert_segments_equal(a, b, *, f16_fresh: bool = False):
    """b must equal a after one codec round trip.

    With f16_fresh=True, `a` holds raw float32 data and the binary16 fields
    of `b` are compared against numpy's half rounding of `a`; otherwise the
    fields must match bit-exactly (a second round trip is the identity).
    """
    def half(x):
        return x.astype(np.float16).astype(np.float32) if f16_fresh else x

    for name in ("behavior_probs", "rewards"):  # binary32 on the wire
        ga, gb = getattr(a, name), getattr(b, name)
        assert ga.dtype == gb.dtype == np.float32
        np.testing.assert_array_equal(ga, gb)
    for name in ("image", "units", "globals", "values",
                 "entry_h", "entry_c"):  # binary16 on the wire
        np.testing.assert_array_equal(half(getattr(a, name)),
                                      getattr(b, name))
    for name in ("unit_mask", "actions", "dones"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
    for ma, mb in zip(a.masks, b.masks):
        np.testing.assert_array_equal(ma, mb)
    assert float(np.float16(a.bootstrap)) == b.bootstrap
    assert (a.version, a.side, a.timestamp) == (b.version, b.side, b.timestamp)


# --------------------------------------------------------------- checksum

def test_fnv1a_reference_vectors():
    assert fnv1a_64(b"") == 0xCBF29CE484222325
    assert fnv1a_64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a_64(b"foobar") == 0x85944171F73967E8


def test_fnv1a_matches_independent_recurrence():
    rng = np.random.default_rng(0)
    for n in (1, 7, 64, 1000):
        data = bytes(rng.integers(0, 256, n, dtype=np.uint8))
        h = 14695981039346656037
        for byte in data:
            h = ((h ^ byte) * 1099511628211) % (1 << 64)
        assert fnv1a_64(data) == h


# ------------------------------------------------------------------ codec

def test_segment_roundtrip_binary32_bitexact():
    seg = wire_segment(1, T=7)
    out, _ = decode_segment(encode_segment(seg))
    assert out.behavior_probs.tobytes() == seg.behavior_probs.tobytes()
    assert out.rewards.tobytes() == seg.rewards.tobytes()
    assert_segments_equal(seg, out, f16_fresh=True)


def test_segment_roundtrip_is_identity_after_first_trip():
    first, _ = decode_segment(encode_segment(wire_segment(2, T=16)))
    second, _ = decode_segment(encode_segment(first))
    assert_segments_equal(first, second)
    assert encode_segment(first) == encode_segment(second)


def test_segment_half_precision_relative_error_bound():
    seg = wire_segment(3, T=10)
    rng = np.random.default_rng(3)
    seg.values = rng.uniform(-8, 8, size=seg.values.shape).astype(np.float32)
    out, _ = decode_segment(encode_segment(seg))
    err = np.abs(out.values - seg.values)
    assert np.all(err <= 2.0 ** -10 * np.abs(seg.values) + 1e-12)


def test_segment_block_roundtrip_and_framing_errors():
    segs = [wire_segment(i, T=3 + i) for i in range(3)]
    block = encode_segments(segs)
    out = decode_segments(block)
    assert len(out) == 3
    for a, b in zip(segs, out):
        assert_segments_equal(a, b, f16_fresh=True)
    with pytest.raises(PipelineError):
        decode_segments(block + b"x")
    with pytest.raises(PipelineError):
        decode_segments(block[:-1])
    with pytest.raises(PipelineError):
        decode_segments(b"\x01")


def test_segment_codec_rejects_unknown_version():
    buf = bytearray(encode_segment(wire_segment(4)))
    buf[0] = 99
    with pytest.raises(PipelineError):
        decode_segment(bytes(buf))


# ----------------------------------------------------------------- frames

def test_dispatch_pack_roundtrip():
    segs = [wire_segment(i, T=4) for i in range(4)]
    frame = dispatch_pack(segs, now=123.5)
    assert frame.model_version == max(s.version for s in segs)
    assert frame.timestamp == 123.5
    out = unpack_frame(frame)
    assert len(out) == 4
    for a, b in zip(segs, out):
        assert_segments_equal(a, b, f16_fresh=True)


def test_dispatch_pack_rejects_empty():
    with pytest.raises(PipelineError):
        dispatch_pack([])
    with pytest.raises(PipelineError):
        pack_frames([])


def test_frame_corruption_rejected_every_trial():
    frame = dispatch_pack([wire_segment(i) for i in range(2)], now=1.0)
    raw = frame.to_bytes()
    assert SampleFrame.from_bytes(raw).checksum == frame.checksum
    rng = np.random.default_rng(7)
    rejected = 0
    for _ in range(100):
        pos = int(rng.integers(len(raw)))
        bit = 1 << int(rng.integers(8))
        corrupt = bytearray(raw)
        corrupt[pos] ^= bit
        try:
            unpack_frame(SampleFrame.from_bytes(bytes(corrupt)))
        except PipelineError:
            rejected += 1
    assert rejected == 100


def test_pack_frames_splits_on_budget():
    segs = [wire_segment(i, T=8) for i in range(6)]
    one = len(encode_segment(segs[0]))
    frames = pack_frames(segs, max_frame_bytes=2 * one + one // 2)
    assert len(frames) == 3
    recovered = [s for f in frames for s in unpack_frame(f)]
    assert len(recovered) == 6
    for a, b in zip(segs, recovered):
        assert_segments_equal(a, b, f16_fresh=True)
    # a single segment larger than the budget still ships alone
    assert len(pack_frames(segs[:1], max_frame_bytes=10)) == 1


# ------------------------------------------------------------------- pool

def tagged(version: int):
    seg = wire_segment(version % 7, T=2)
    seg.version = version
    return seg


def test_pool_ring_eviction_semantics():
    pool = MemoryPool(4)
    pool.push([tagged(i) for i in range(3)])
    assert len(pool) == 3 and pool.counters.evicted == 0
    evicted = pool.push([tagged(i) for i in range(3, 6)])
    assert evicted == 2
    assert len(pool) == 4
    assert [s.version for s in pool.snapshot()] == [2, 3, 4, 5]
    assert pool.counters.pushed == 6 and pool.counters.evicted == 2


def test_pool_three_frames_into_capacity_two():
    pool = MemoryPool(2)
    for v in (1, 2, 3):
        pool.push([tagged(v)])
    assert [s.version for s in pool.snapshot()] == [2, 3]


def test_pool_sample_whole_and_shortfall():
    pool = MemoryPool(8)
    pool.push([tagged(i) for i in range(5)])
    got, shortfall = pool.sample(5, rng=Rng(1))
    assert not shortfall and sorted(s.version for s in got) == [0, 1, 2, 3, 4]
    got, shortfall = pool.sample(9, rng=Rng(2))
    assert shortfall and len(got) == 5
    assert pool.counters.sampled == 10


def test_pool_sample_uniform_within_3_sigma():
    pool = MemoryPool(10)
    pool.push([tagged(i) for i in range(10)])
    trials = 40_000 if long_runs_enabled() else 8_000
    rng = Rng(99)
    counts = np.zeros(10, dtype=np.int64)
    for _ in range(trials):
        got, _ = pool.sample(5, recency_bias=0.0, rng=rng)
        for s in got:
            counts[s.version] += 1
    # inclusion probability of each entry is 1/2 per trial
    sigma = math.sqrt(trials * 0.25)
    assert np.all(np.abs(counts - trials / 2) < 3 * sigma), counts


def test_pool_sample_strong_bias_returns_newest():
    pool = MemoryPool(16)
    pool.push([tagged(i) for i in range(12)])
    for seed in range(5):
        got, _ = pool.sample(4, recency_bias=50.0, rng=Rng(seed))
        assert sorted(s.version for s in got) == [8, 9, 10, 11]


def test_pool_argument_errors():
    pool = MemoryPool(4)
    with pytest.raises(PipelineError):
        pool.sample(1)
    pool.push([tagged(0)])
    with pytest.raises(PipelineError):
        pool.sample(0)
    with pytest.raises(PipelineError):
        pool.sample(1, recency_bias=-0.5)
    with pytest.raises(PipelineError):
        MemoryPool(0)


# ------------------------------------------------------------------- wire

def test_wire_exact_layout():
    msg = encode_message(Command.PUSH, b"hi")
    want = (b"MPF1" + bytes([1]) + (2).to_bytes(4, "big") + b"hi"
            + fnv1a_64(b"hi").to_bytes(8, "big"))
    assert msg == want
    assert decode_message(msg) == (Command.PUSH, b"hi")


def test_wire_roundtrip_all_commands():
    for cmd in Command:
        for payload in (b"", b"x", bytes(range(256))):
            assert decode_message(encode_message(cmd, payload)) == (cmd, payload)


def test_wire_rejections():
    msg = bytearray(encode_message(Command.ACK, b"payload"))
    bad_magic = bytes(b"XPF1" + msg[4:])
    with pytest.raises(PipelineError):
        decode_message(bad_magic)
    flipped = bytearray(msg)
    flipped[10] ^= 0xFF  # payload byte: checksum mismatch
    with pytest.raises(PipelineError):
        decode_message(bytes(flipped))
    with pytest.raises(PipelineError):
        decode_message(bytes(msg[:-1]))
    unknown = bytearray(msg)
    unknown[4] = 77
    unknown_msg = (b"MPF1" + bytes([77]) + (0).to_bytes(4, "big")
                   + fnv1a_64(b"").to_bytes(8, "big"))
    with pytest.raises(PipelineError):
        decode_message(unknown_msg)


def test_wire_over_sockets():
    a, b = socket.socketpair()
    try:
        send_message(a, Command.MODEL, b"abc" * 1000)
        assert recv_message(b) == (Command.MODEL, b"abc" * 1000)
        a.close()
        with pytest.raises(PipelineError):
            recv_message(b)
    finally:
        b.close()


# ------------------------------------------------------- snapshots and hub

def snapshot_fixture(version: int, seed: int = 0):
    _, params = build_net(TINY, seed=seed)
    return ModelSnapshot.from_params(params, version)


def test_snapshot_roundtrip_and_digest_guard():
    snap = snapshot_fixture(3)
    out = ModelSnapshot.from_bytes(snap.to_bytes())
    assert out == snap
    _, params = build_net(TINY, seed=0)
    restored = out.to_params(params.layout)
    assert restored.data.tobytes() == params.data.tobytes()
    tampered = bytearray(snap.to_bytes())
    tampered[-1] ^= 1
    with pytest.raises(PipelineError):
        ModelSnapshot.from_bytes(bytes(tampered))


def test_hub_rejects_version_regression_and_corruption():
    hub = ModelHub()
    hub.publish(snapshot_fixture(1))
    with pytest.raises(PipelineError):
        hub.publish(snapshot_fixture(1, seed=2))
    with pytest.raises(PipelineError):
        hub.publish(snapshot_fixture(0))
    snap = snapshot_fixture(2)
    with pytest.raises(PipelineError):
        hub.publish(dataclasses.replace(snap, digest=snap.digest ^ 1))
    hub.publish(snap)
    assert hub.latest().version == 2


def test_hub_archive_cadence():
    hub = ModelHub(archive_every=3, max_archive=2)
    for v in range(1, 8):
        hub.publish(snapshot_fixture(v))
    # publications 1, 4 and 7 are archived; max_archive keeps the newest 2
    assert [s.version for s in hub.archive()] == [4, 7]
    assert hub.latest().version == 7


# ---------------------------------------------------------------- service

@pytest.fixture
def service():
    with PoolService(capacity=64, archive_every=2) as svc:
        yield svc


def test_service_push_then_sample_is_bit_exact(service):
    segs = [wire_segment(i, T=6) for i in range(5)]
    with PoolClient(service.address) as client:
        size, evicted = client.push_frame(dispatch_pack(segs, now=5.0))
        assert (size, evicted) == (5, 0)
        got, shortfall = client.sample(5, seed=3)
    assert not shortfall
    # what the learner reads equals the decoded push, bit-exactly
    expect = {encode_segment(s) for s in
              unpack_frame(dispatch_pack(segs, now=5.0))}
    assert {encode_segment(s) for s in got} == expect


def test_service_rejects_corrupt_push(service):
    frame = dispatch_pack([wire_segment(0)], now=2.0).to_bytes()
    corrupt = bytearray(frame)
    corrupt[len(corrupt) // 2] ^= 4
    sock = socket.create_connection(service.address, timeout=10)
    try:
        send_message(sock, Command.PUSH, bytes(corrupt))
        cmd, reply = recv_message(sock)
        assert cmd == Command.ACK and reply[0] == 1
        assert b"checksum" in reply[1:] or b"mismatch" in reply[1:]
    finally:
        sock.close()
    assert len(service.pool) == 0


def test_service_model_distribution(service):
    with PoolClient(service.address) as client:
        assert client.get_model() is None
        assert client.register("actor-a") is None
        client.set_model(snapshot_fixture(1))
        client.set_model(snapshot_fixture(2, seed=5))
        with pytest.raises(PipelineError):
            client.set_model(snapshot_fixture(2))
        latest = client.get_model()
        assert latest.version == 2
        assert client.register("actor-b") == 2
        assert client.archive_count() == 1  # archive_every=2: publication 1
        assert client.archive_get(0).version == 1
        with pytest.raises(PipelineError):
            client.archive_get(7)
    assert service.registered == {"actor-a": 1, "actor-b": 1}


# ------------------------------------------------------------------ actor

@pytest.fixture(scope="module")
def short_episode():
    env = MobaEnv(SHORT_ENV)
    nets = (build_net(TINY, seed=1)[0], build_net(TINY, seed=1)[0])
    return play_episode(env, nets, (4, 9), seed=7, rng=Rng(123))


def test_play_episode_deterministic():
    env = MobaEnv(SHORT_ENV)
    nets = (build_net(TINY, seed=1)[0], build_net(TINY, seed=1)[0])
    a = play_episode(env, nets, (1, 1), seed=7, rng=Rng(5))
    b = play_episode(env, nets, (1, 1), seed=7, rng=Rng(5))
    for side in (0, 1):
        ea = [dataclasses.replace(s, timestamp=0.0) for s in a.segments[side]]
        eb = [dataclasses.replace(s, timestamp=0.0) for s in b.segments[side]]
        assert encode_segments(ea) == encode_segments(eb)
    c = play_episode(env, nets, (1, 1), seed=7, rng=Rng(6))
    ec = [dataclasses.replace(s, timestamp=0.0) for s in c.segments[0]]
    assert encode_segments(ec) != encode_segments(
        [dataclasses.replace(s, timestamp=0.0) for s in a.segments[0]])


def test_episode_segment_schedule(short_episode):
    out = short_episode
    for side in (0, 1):
        segs = out.segments[side]
        assert len(segs) == math.ceil(out.ticks / 16)
        assert all(s.length == 16 for s in segs[:-1])
        assert sum(s.length for s in segs) == out.ticks
        values = np.concatenate([s.values for s in segs])
        for i, seg in enumerate(segs[:-1]):
            assert not seg.dones.any()
            assert seg.bootstrap == pytest.approx(values[16 * (i + 1)])
        last = segs[-1]
        assert last.dones[-1] and not last.dones[:-1].any()
        assert last.bootstrap == 0.0
        assert all(s.version == out.versions[side] for s in segs)
        assert all(s.side == side for s in segs)


def test_episode_actions_legal_and_probs_positive(short_episode):
    for side in (0, 1):
        for seg in short_episode.segments[side]:
            assert np.all(seg.behavior_probs > 0)
            assert np.all(seg.behavior_probs <= 1)
            for t in range(seg.length):
                for h, mask in enumerate(seg.masks):
                    label = seg.actions[t, h]
                    assert mask[t, label], (side, t, h)
                # the target row must hold a real unit
                assert seg.unit_mask[t, seg.actions[t, 5]]


def test_episode_behavior_probs_match_policy(short_episode):
    net, _ = build_net(TINY, seed=1)
    seg = short_episode.segments[0][0]
    hidden = None  # episode start: zero hidden state
    for t in range(3):
        obs = types.SimpleNamespace(
            image=seg.image[t], units=seg.units[t],
            unit_mask=seg.unit_mask[t], globals=seg.globals[t])
        policy, hidden = forward_observation(net, obs, hidden)
        slots = np.flatnonzero(seg.unit_mask[t])
        heads = policy.heads()
        masks = list(seg.masks[:5]) + [seg.masks[5]]
        for h in range(6):
            mask_t = masks[h][t]
            logits = heads[h]
            if h == 5:
                mask_t = mask_t[seg.unit_mask[t]]
                label = int(np.where(slots == seg.actions[t, 5])[0][0])
            else:
                label = int(seg.actions[t, h])
            p = masked_softmax(logits.astype(np.float64), mask_t)[label]
            assert seg.behavior_probs[t, h] == pytest.approx(p, rel=2e-5)


def test_choose_opponent_distribution():
    rng = Rng(17)
    assert choose_opponent(5, 0, rng) == (True, -1)
    n = 4000
    picks = [choose_opponent(5, 8, rng, latest_prob=0.8) for _ in range(n)]
    latest_count = sum(1 for use_latest, _ in picks if use_latest)
    sigma = math.sqrt(n * 0.8 * 0.2)
    assert abs(latest_count - 0.8 * n) < 3 * sigma
    indices = [i for use_latest, i in picks if not use_latest]
    assert set(indices) <= set(range(8))
    assert len(set(indices)) == 8  # every archive entry reachable


def test_actor_ships_only_learning_side_against_archive():
    with PoolService(capacity=512, archive_every=1) as svc:
        with PoolClient(svc.address) as client:
            client.set_model(snapshot_fixture(1, seed=3))
            client.set_model(snapshot_fixture(2, seed=4))
        stats = run_actor(
            svc.address, SHORT_ENV, TINY,
            ActorConfig(latest_prob=0.0),  # always fight the archive
            seed=21, max_episodes=2)
        assert stats.episodes == 2
        sides = {s.side for s in svc.pool.snapshot()}
        versions = {s.version for s in svc.pool.snapshot()}
        assert sides == {0}
        assert versions == {2}


def test_actor_ships_both_sides_in_mirror_play():
    with PoolService(capacity=512, archive_every=1) as svc:
        with PoolClient(svc.address) as client:
            client.set_model(snapshot_fixture(1, seed=3))
        stats = run_actor(svc.address, SHORT_ENV, TINY,
                          ActorConfig(latest_prob=1.0),
                          seed=22, max_episodes=1)
        assert stats.episodes == 1
        assert {s.side for s in svc.pool.snapshot()} == {0, 1}
        assert stats.segments_shipped == len(svc.pool)


# ------------------------------------------------------------ integration

def test_pipeline_actor_learner_end_to_end():
    envc = SHORT_ENV
    with PoolService(capacity=256, archive_every=3) as svc:
        learner = make_learner(TINY, PPOConfig(epochs=1, minibatch_size=64),
                               seed=5)
        stop = threading.Event()
        box = {}

        def actor():
            box["stats"] = run_actor(svc.address, envc, TINY, ActorConfig(),
                                     seed=11, max_episodes=4,
                                     stop_event=stop)

        thread = threading.Thread(target=actor, daemon=True)
        thread.start()
        try:
            diags = run_learner(
                svc.address, learner,
                LearnerFeedConfig(batch_segments=8, min_pool=4, n_shards=2),
                updates=3, seed=100, stop_event=stop)
        finally:
            stop.set()
            thread.join(timeout=120)
        assert not thread.is_alive()
        assert len(diags) == 3
        assert learner.version == 3
        assert [d["model_version"] for d in diags] == [1, 2, 3]
        assert all(d["staleness"] >= 0 for d in diags)
        assert svc.pool.counters.pushed > 0
        assert svc.hub.latest().version == 3
        with PoolClient(svc.address) as client:
            assert client.get_model().version == 3
        stats = box.get("stats")
        assert stats is not None and stats.aborted == 0
