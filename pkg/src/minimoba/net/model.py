"""Actor-critic network: conv image trunk, per-type unit encoders with
max-pooling and key splitting, global encoder, LSTM, decoupled action heads,
target attention, and a value head.

Parameters live canonically in a flat :class:`Params` vector; the torch
module is the compute engine that loads/exports that vector, so actors,
learner shards and checkpoints all speak the same layout. Masking uses a
large negative constant (LOGIT_MASK_VALUE) before softmax on the
differentiable path; the sampling path in :mod:`.ops` produces exact zeros.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from ..env.types import N_BUTTONS, N_MOVE_BINS, N_OFFSET_BINS
from ..features.schema import (
    GLOBAL_WIDTH,
    IMAGE_SIZE,
    MAX_UNITS,
    N_IMAGE_CHANNELS,
    TYPE_REGIONS,
    UNIT_WIDTH,
)
from .errors import NetError
from .params import Params, build_layout, layout_digest

TYPE_ORDER = tuple(TYPE_REGIONS)
LOGIT_MASK_VALUE = -1e9

_regions = [TYPE_REGIONS[t] for t in TYPE_ORDER]
assert _regions[0][0] == 0 and _regions[-1][1] == MAX_UNITS
assert all(a[1] == b[0] for a, b in zip(_regions, _regions[1:]))


@dataclass(frozen=True)
class NetConfig:
    conv_channels: tuple[int, int] = (8, 16)
    image_out: int = 64
    unit_hidden: int = 64
    key_width: int = 16
    global_out: int = 32
    trunk_width: int = 256
    lstm_width: int = 128
    check_finite: bool = True
    # False severs the recurrent carry: every step sees a zero (h, c), so
    # the cell runs purely on the current trunk features (memory ablation)
    recurrent: bool = True

    @property
    def rep_width(self) -> int:
        return self.unit_hidden - self.key_width

    @staticmethod
    def tiny() -> "NetConfig":
        """Sub-2k-parameter variant for finite-difference gradient checks."""
        return NetConfig(conv_channels=(2, 2), image_out=4, unit_hidden=4,
                         key_width=2, global_out=3, trunk_width=8,
                         lstm_width=4)


@dataclass
class HiddenState:
    """LSTM carry (h, c); zero at episode start, carried across a window."""

    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, width: int) -> "HiddenState":
        return cls(np.zeros(width, dtype=np.float32),
                   np.zeros(width, dtype=np.float32))


@dataclass
class PolicyOutput:
    """Per-head logits for one observation; target has one entry per
    unit_registry slot."""

    button: np.ndarray
    move_x: np.ndarray
    move_y: np.ndarray
    offset_x: np.ndarray
    offset_y: np.ndarray
    target: np.ndarray
    value: float

    def heads(self) -> tuple[np.ndarray, ...]:
        return (self.button, self.move_x, self.move_y,
                self.offset_x, self.offset_y, self.target)


@dataclass
class StepOutput:
    """Batched torch logits; target is padded to MAX_UNITS rows."""

    button: torch.Tensor
    move_x: torch.Tensor
    move_y: torch.Tensor
    offset_x: torch.Tensor
    offset_y: torch.Tensor
    target: torch.Tensor
    value: torch.Tensor

    def heads(self) -> tuple[torch.Tensor, ...]:
        return (self.button, self.move_x, self.move_y,
                self.offset_x, self.offset_y, self.target)


class MobaNet(nn.Module):
    def __init__(self, config: NetConfig = NetConfig(),
                 dtype: torch.dtype = torch.float32):
        super().__init__()
        self.config = config
        c1, c2 = config.conv_channels
        side = IMAGE_SIZE // 4  # two stride-2 convolutions
        self.conv1 = nn.Conv2d(N_IMAGE_CHANNELS, c1, 3, stride=2, padding=1)
        self.conv2 = nn.Conv2d(c1, c2, 3, stride=2, padding=1)
        self.conv_fc = nn.Linear(c2 * side * side, config.image_out)
        self.unit_fc1 = nn.ModuleDict(
            {t: nn.Linear(UNIT_WIDTH, config.unit_hidden) for t in TYPE_ORDER})
        self.unit_fc2 = nn.ModuleDict(
            {t: nn.Linear(config.unit_hidden, config.unit_hidden)
             for t in TYPE_ORDER})
        self.global_fc = nn.Linear(GLOBAL_WIDTH, config.global_out)
        trunk_in = (config.image_out + len(TYPE_ORDER) * config.rep_width
                    + config.global_out)
        self.trunk = nn.Linear(trunk_in, config.trunk_width)
        self.lstm_ih = nn.Linear(config.trunk_width, 4 * config.lstm_width)
        self.lstm_hh = nn.Linear(config.lstm_width, 4 * config.lstm_width,
                                 bias=False)
        self.head_button = nn.Linear(config.lstm_width, N_BUTTONS)
        self.head_move_x = nn.Linear(config.lstm_width, N_MOVE_BINS)
        self.head_move_y = nn.Linear(config.lstm_width, N_MOVE_BINS)
        self.head_offset_x = nn.Linear(config.lstm_width, N_OFFSET_BINS)
        self.head_offset_y = nn.Linear(config.lstm_width, N_OFFSET_BINS)
        self.head_query = nn.Linear(config.lstm_width, config.key_width)
        self.head_value = nn.Linear(config.lstm_width, 1)
        self.layout = build_layout(
            (name, tuple(p.shape)) for name, p in self.named_parameters())
        if dtype is not torch.float32:
            self.to(dtype)
        self._dtype = dtype

    # ------------------------------------------------------------- params

    def load_flat(self, params: Params) -> None:
        if layout_digest(params.layout) != layout_digest(self.layout):
            raise NetError("params layout does not match this network")
        with torch.no_grad():
            for name, p in self.named_parameters():
                p.copy_(torch.from_numpy(params.get(name).copy()))

    def load_flat_array(self, vec: np.ndarray) -> None:
        """Load a raw flat vector (any float dtype) in layout order."""
        vec = np.ascontiguousarray(vec)
        from .params import layout_size
        if vec.shape != (layout_size(self.layout),):
            raise NetError(
                f"flat vector {vec.shape} does not fit layout "
                f"({layout_size(self.layout)} params)")
        with torch.no_grad():
            for entry, (_, p) in zip(self.layout, self.named_parameters()):
                chunk = vec[entry.offset:entry.offset + entry.size]
                p.copy_(torch.from_numpy(chunk.reshape(entry.shape).copy()))

    def export_flat(self, version: int = 0) -> Params:
        chunks = [p.detach().to(torch.float32).numpy().ravel()
                  for _, p in self.named_parameters()]
        return Params(np.concatenate(chunks), self.layout, version)

    def flat_gradient(self) -> np.ndarray:
        """Gradients in layout order as float64 (zeros where grad is unset)."""
        chunks = []
        for name, p in self.named_parameters():
            if p.grad is None:
                chunks.append(np.zeros(p.numel(), dtype=np.float64))
                continue
            g = p.grad.detach().to(torch.float64).numpy().ravel()
            if not np.isfinite(g).all():
                raise NetError(f"non-finite gradient at parameter {name}")
            chunks.append(g)
        return np.concatenate(chunks)

    # ------------------------------------------------------------ forward

    def _check(self, name: str, t: torch.Tensor) -> torch.Tensor:
        if self.config.check_finite and not torch.isfinite(t).all():
            raise NetError(f"non-finite output at layer {name}")
        return t

    def step(self, image, units, unit_mask, global_vec, hidden):
        """One decision step on a batch. hidden is a (h, c) tensor pair."""
        if (image.shape[1:] != (N_IMAGE_CHANNELS, IMAGE_SIZE, IMAGE_SIZE)
                or units.shape[1:] != (MAX_UNITS, UNIT_WIDTH)
                or unit_mask.shape[1:] != (MAX_UNITS,)
                or global_vec.shape[1:] != (GLOBAL_WIDTH,)):
            raise NetError(
                "schema mismatch: observation tensors do not match the "
                f"feature manifest (got image {tuple(image.shape)}, units "
                f"{tuple(units.shape)}, mask {tuple(unit_mask.shape)}, "
                f"global {tuple(global_vec.shape)})")
        h_prev, c_prev = hidden
        x = self._check("conv1", torch.relu(self.conv1(image)))
        x = self._check("conv2", torch.relu(self.conv2(x)))
        h_i = self._check(
            "conv_fc", torch.relu(self.conv_fc(x.flatten(start_dim=1))))

        pooled_parts = []
        key_parts = []
        neg = torch.finfo(units.dtype).min
        for t in TYPE_ORDER:
            lo, hi = TYPE_REGIONS[t]
            rows = units[:, lo:hi]
            m = unit_mask[:, lo:hi]
            h = torch.relu(self.unit_fc1[t](rows))
            h = torch.relu(self.unit_fc2[t](h))
            self._check(f"unit_enc_{t}", h)
            rep, key = h.split(
                [self.config.rep_width, self.config.key_width], dim=-1)
            rep = rep.masked_fill(~m.unsqueeze(-1), neg)
            pooled = rep.max(dim=1).values
            pooled = torch.where(m.any(dim=1, keepdim=True), pooled,
                                 torch.zeros_like(pooled))
            self._check(f"pool_{t}", pooled)
            pooled_parts.append(pooled)
            key_parts.append(key)
        keys = torch.cat(key_parts, dim=1)  # (B, MAX_UNITS, key_width)

        h_g = self._check("global_fc", torch.relu(self.global_fc(global_vec)))
        z = torch.cat([h_i, *pooled_parts, h_g], dim=-1)
        trunk = self._check("trunk", torch.relu(self.trunk(z)))

        if not self.config.recurrent:
            h_prev = torch.zeros_like(h_prev)
            c_prev = torch.zeros_like(c_prev)
        gates = self.lstm_ih(trunk) + self.lstm_hh(h_prev)
        i, f, g, o = gates.chunk(4, dim=-1)
        c = torch.sigmoid(f) * c_prev + torch.sigmoid(i) * torch.tanh(g)
        h = torch.sigmoid(o) * torch.tanh(c)
        self._check("lstm", h)

        query = self._check("head_query", self.head_query(h))
        target = self._check(
            "target_attention", torch.bmm(keys, query.unsqueeze(-1)).squeeze(-1))
        out = StepOutput(
            button=self._check("head_button", self.head_button(h)),
            move_x=self._check("head_move_x", self.head_move_x(h)),
            move_y=self._check("head_move_y", self.head_move_y(h)),
            offset_x=self._check("head_offset_x", self.head_offset_x(h)),
            offset_y=self._check("head_offset_y", self.head_offset_y(h)),
            target=target,
            value=self._check("head_value",
                              self.head_value(h).squeeze(-1)),
        )
        return out, (h, c)

    def unroll(self, image, units, unit_mask, global_vec, hidden):
        """Run a (B, T, ...) window step-by-step, carrying hidden state.

        Returns a StepOutput whose tensors have shape (B, T, ...), plus the
        final hidden pair. Feeding the window here is by construction the
        same computation as feeding steps one at a time.
        """
        T = image.shape[1]
        outs = []
        for t in range(T):
            out, hidden = self.step(image[:, t], units[:, t],
                                    unit_mask[:, t], global_vec[:, t], hidden)
            outs.append(out)
        stacked = StepOutput(*[
            torch.stack([getattr(o, f) for o in outs], dim=1)
            for f in ("button", "move_x", "move_y", "offset_x", "offset_y",
                      "target", "value")])
        return stacked, hidden

    def zero_hidden(self, batch: int) -> tuple[torch.Tensor, torch.Tensor]:
        w = self.config.lstm_width
        z = torch.zeros(batch, w, dtype=self._dtype)
        return z, z.clone()


# ------------------------------------------------------------------ init

_POLICY_HEADS = ("head_button", "head_move_x", "head_move_y",
                 "head_offset_x", "head_offset_y", "head_query")


def param_layout(config: NetConfig = NetConfig()):
    return MobaNet(config).layout


def init_params(config: NetConfig = NetConfig(), seed: int = 0,
                version: int = 0) -> Params:
    """Deterministic initialization on the flat vector (independent of torch
    RNG internals): He-uniform fan-in weights, zero biases, orthogonal
    recurrent matrix, forget-gate bias 1, zero policy-head finals so the
    initial policy is uniform over legal labels."""
    rng = np.random.default_rng(seed)
    params = Params.zeros(param_layout(config), version=version)
    for entry in params.layout:
        module, kind = entry.name.rsplit(".", 1)
        if module.split(".")[0] in _POLICY_HEADS:
            continue  # stays zero
        if kind == "bias":
            if module == "lstm_ih":
                b = params.get(entry.name)
                width = config.lstm_width
                b[width:2 * width] = 1.0  # forget gate opens remembering
            continue  # other biases stay zero
        if module == "lstm_hh":
            a = rng.standard_normal((entry.shape[0], entry.shape[1]))
            q, r = np.linalg.qr(a)
            q *= np.sign(np.diag(r))[np.newaxis, :entry.shape[1]]
            params.set(entry.name, q)
            continue
        fan_in = int(np.prod(entry.shape[1:]))
        bound = float(np.sqrt(6.0 / fan_in))
        params.set(entry.name, rng.uniform(-bound, bound, entry.shape))
    return params


def build_net(config: NetConfig = NetConfig(), seed: int = 0,
              dtype: torch.dtype = torch.float32) -> tuple[MobaNet, Params]:
    net = MobaNet(config, dtype=dtype)
    params = init_params(config, seed)
    net.load_flat(params)
    return net, params


# ------------------------------------------------------- single-obs API

def _obs_tensors(obs, dtype):
    if (obs.image.shape != (N_IMAGE_CHANNELS, IMAGE_SIZE, IMAGE_SIZE)
            or obs.units.shape != (MAX_UNITS, UNIT_WIDTH)
            or obs.unit_mask.shape != (MAX_UNITS,)
            or obs.globals.shape != (GLOBAL_WIDTH,)):
        raise NetError("schema mismatch: observation does not match the "
                       "feature manifest")
    as_t = lambda a: torch.from_numpy(np.ascontiguousarray(a)).to(dtype)
    return (as_t(obs.image).unsqueeze(0), as_t(obs.units).unsqueeze(0),
            torch.from_numpy(np.ascontiguousarray(obs.unit_mask)).unsqueeze(0),
            as_t(obs.globals).unsqueeze(0))


def forward_observation(net: MobaNet, obs, hidden: HiddenState | None = None,
                        masks=None):
    """Policy logits + value for one observation (no gradients).

    The returned target logits cover exactly the unit_registry slots. If
    `masks` is given its head widths are validated against the outputs;
    masked softmax itself happens at sampling/learning time.
    """
    if hidden is None:
        hidden = HiddenState.zeros(net.config.lstm_width)
    image, units, unit_mask, global_vec = _obs_tensors(obs, net._dtype)
    h = torch.from_numpy(hidden.h).to(net._dtype).unsqueeze(0)
    c = torch.from_numpy(hidden.c).to(net._dtype).unsqueeze(0)
    with torch.no_grad():
        out, (h1, c1) = net.step(image, units, unit_mask, global_vec, (h, c))
    np32 = lambda t: t[0].to(torch.float32).numpy()
    policy = PolicyOutput(
        button=np32(out.button), move_x=np32(out.move_x),
        move_y=np32(out.move_y), offset_x=np32(out.offset_x),
        offset_y=np32(out.offset_y),
        target=np32(out.target)[obs.unit_mask],
        value=float(out.value[0]),
    )
    if masks is not None:
        expect = (N_BUTTONS, N_MOVE_BINS, N_MOVE_BINS, N_OFFSET_BINS,
                  N_OFFSET_BINS, MAX_UNITS)
        got = tuple(len(m) for m in masks.heads())
        if got != expect:
            raise NetError(f"mask head widths {got} != {expect}")
    new_hidden = HiddenState(h1[0].to(torch.float32).numpy(),
                             c1[0].to(torch.float32).numpy())
    return policy, new_hidden
