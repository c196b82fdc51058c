"""Sample-transport runtime: actors, dispatch, memory pool, model sync."""

from .actor import (
    ActorConfig,
    ActorStats,
    EpisodeOutcome,
    choose_opponent,
    play_episode,
    run_actor,
)
from .checksum import fnv1a_64
from .errors import PipelineError
from .frames import (
    DEFAULT_MAX_FRAME_BYTES,
    SampleFrame,
    dispatch_pack,
    pack_frames,
    unpack_frame,
)
from .learner_proc import LearnerFeedConfig, publish_snapshot, run_learner
from .pool import MemoryPool, PoolCounters
from .segcodec import (
    CODEC_VERSION,
    decode_segment,
    decode_segments,
    encode_segment,
    encode_segments,
)
from .service import PoolClient, PoolService
from .snapshot import ModelHub, ModelSnapshot
from .wire import Command, decode_message, encode_message, recv_message, send_message

__all__ = [
    "ActorConfig",
    "ActorStats",
    "CODEC_VERSION",
    "Command",
    "DEFAULT_MAX_FRAME_BYTES",
    "EpisodeOutcome",
    "LearnerFeedConfig",
    "MemoryPool",
    "ModelHub",
    "ModelSnapshot",
    "PipelineError",
    "PoolClient",
    "PoolCounters",
    "PoolService",
    "SampleFrame",
    "choose_opponent",
    "decode_message",
    "decode_segment",
    "decode_segments",
    "dispatch_pack",
    "encode_message",
    "encode_segment",
    "encode_segments",
    "fnv1a_64",
    "pack_frames",
    "play_episode",
    "publish_snapshot",
    "recv_message",
    "run_actor",
    "run_learner",
    "send_message",
    "unpack_frame",
]
