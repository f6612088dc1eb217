"""Dense network machinery: dueling Q-network, reward estimator, optimizer.

Everything is plain numpy.  A network is a list of (W, b) layers; the
dueling Q-net shares one row encoder across the m candidate rows, pools the
encodings by mean for the value head, and combines

    Q(s, e) = V(s) + A(s, e) - mean_e' A(s, e').

Gradients are exact reverse-mode, validated against finite differences in
the test suite.  Checkpoints are JSON with full-precision floats so a
save/load round trip is bit-exact.
"""

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, TrainingDivergedError

CHECKPOINT_VERSION = 1


def _he_uniform(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _init_mlp(rng, widths):
    """Layers for widths[0] -> widths[1] -> ... -> widths[-1], zero biases."""
    layers = []
    for a, b in zip(widths[:-1], widths[1:]):
        layers.append((_he_uniform(rng, a, b), np.zeros(b)))
    return layers


def _mlp_forward(layers, x, relu_last):
    """Forward through (W, b) layers with ReLU between (and after, if asked).

    Returns (output, cache); the cache holds per-layer inputs and
    pre-activations for the backward pass.
    """
    cache = []
    out = x
    last = len(layers) - 1
    for i, (W, b) in enumerate(layers):
        if out.shape[-1] != W.shape[0]:
            raise ConfigError(
                "layer %d expects width %d, got %d"
                % (i, W.shape[0], out.shape[-1]))
        z = out @ W + b
        cache.append((out, z))
        out = np.maximum(z, 0.0) if (i < last or relu_last) else z
    return out, cache


def _mlp_backward(layers, cache, dout, relu_last):
    """Gradients for an _mlp_forward pass.  Returns (layer grads, dx)."""
    grads = [None] * len(layers)
    last = len(layers) - 1
    for i in range(last, -1, -1):
        W, _ = layers[i]
        x, z = cache[i]
        dz = dout * (z > 0.0) if (i < last or relu_last) else dout
        grads[i] = (x.T @ dz, dz.sum(axis=0))
        dout = dz @ W.T
    return grads, dout


@dataclass
class QNetworkParams:
    """Dueling Q-network weights.

    encoder: shared per-row MLP, ReLU after every layer.
    advantage_head / value_head: MLPs with linear output layers; the value
    head runs on the mean-pooled row encoding.
    """

    encoder: list
    advantage_head: list
    value_head: list

    def groups(self):
        return [self.encoder, self.advantage_head, self.value_head]

    @property
    def input_width(self) -> int:
        return self.encoder[0][0].shape[0]


@dataclass
class RewardNetParams:
    """Per-candidate reward estimator: one MLP, linear output."""

    layers: list

    def groups(self):
        return [self.layers]

    @property
    def input_width(self) -> int:
        return self.layers[0][0].shape[0]


def init_q_params(n, rng, hidden=(64, 64), head_hidden=32) -> QNetworkParams:
    enc_widths = (2 * n,) + tuple(hidden)
    return QNetworkParams(
        encoder=_init_mlp(rng, enc_widths),
        advantage_head=_init_mlp(rng, (enc_widths[-1], head_hidden, 1)),
        value_head=_init_mlp(rng, (enc_widths[-1], head_hidden, 1)),
    )


def init_reward_params(n, rng, hidden=(64, 32)) -> RewardNetParams:
    return RewardNetParams(layers=_init_mlp(rng, (2 * n,) + tuple(hidden) + (1,)))


def copy_params(params):
    cls = type(params)
    return cls(*[[(W.copy(), b.copy()) for W, b in grp]
                 for grp in params.groups()])


def build_input(state) -> np.ndarray:
    """m x 2n network input: each row is [residual row e || deviation row].

    The deviation block is identical across rows; the mask column of the
    state is deliberately left out (masking happens at action selection).
    """
    m, n = state.m, state.n
    rows = np.empty((m, 2 * n))
    rows[:, :n] = state.grid[:m, :n]
    rows[:, n:] = state.grid[m, :n]
    return rows


def q_forward(params: QNetworkParams, rows, return_cache=False):
    """Q-values per candidate.  rows: (m, 2n) or batched (B, m, 2n)."""
    rows = np.asarray(rows, dtype=np.float64)
    single = rows.ndim == 2
    X = rows[None] if single else rows
    B, m, w = X.shape
    if w != params.input_width:
        raise ConfigError(
            "input width %d does not match network width %d"
            % (w, params.input_width))

    flat = X.reshape(B * m, w)
    H, c_enc = _mlp_forward(params.encoder, flat, relu_last=True)
    A, c_adv = _mlp_forward(params.advantage_head, H, relu_last=False)
    A = A.reshape(B, m)
    Hpool = H.reshape(B, m, -1).mean(axis=1)
    V, c_val = _mlp_forward(params.value_head, Hpool, relu_last=False)
    Q = V + A - A.mean(axis=1, keepdims=True)

    if not return_cache:
        return Q[0] if single else Q
    cache = (B, m, c_enc, c_adv, c_val)
    return (Q[0] if single else Q), cache


def q_backward(params: QNetworkParams, cache, dQ) -> QNetworkParams:
    """Parameter gradients given d(loss)/dQ of the matching forward pass."""
    B, m, c_enc, c_adv, c_val = cache
    dQ = np.asarray(dQ, dtype=np.float64).reshape(B, m)

    dA = dQ - dQ.mean(axis=1, keepdims=True)
    dV = dQ.sum(axis=1, keepdims=True)

    g_adv, dH_a = _mlp_backward(params.advantage_head, c_adv,
                                dA.reshape(B * m, 1), relu_last=False)
    g_val, dHpool = _mlp_backward(params.value_head, c_val, dV,
                                  relu_last=False)
    dH = dH_a + np.repeat(dHpool / m, m, axis=0)
    g_enc, _ = _mlp_backward(params.encoder, c_enc, dH, relu_last=True)
    return QNetworkParams(encoder=g_enc, advantage_head=g_adv,
                          value_head=g_val)


def reward_forward(params: RewardNetParams, rows, return_cache=False):
    """Scalar reward prediction per input row; rows (2n,) or (B, 2n)."""
    rows = np.asarray(rows, dtype=np.float64)
    single = rows.ndim == 1
    X = rows[None] if single else rows
    out, cache = _mlp_forward(params.layers, X, relu_last=False)
    out = out[:, 0]
    if not return_cache:
        return float(out[0]) if single else out
    return (float(out[0]) if single else out), cache


def reward_backward(params: RewardNetParams, cache, dout) -> RewardNetParams:
    dout = np.asarray(dout, dtype=np.float64).reshape(-1, 1)
    grads, _ = _mlp_backward(params.layers, cache, dout, relu_last=False)
    return RewardNetParams(layers=grads)


def _flat_arrays(params):
    out = []
    for grp in params.groups():
        for W, b in grp:
            out.append(W)
            out.append(b)
    return out


@dataclass
class Optimizer:
    """First-order updater: 'adam' (default) or plain 'sgd'.

    Updates parameter arrays in place; moment state is allocated lazily on
    the first step.  Non-finite gradients or parameters halt training.
    """

    kind: str = "adam"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = field(default=0)
    _m: list = field(default=None, repr=False)
    _v: list = field(default=None, repr=False)

    def update(self, params, grads):
        p_arrs = _flat_arrays(params)
        g_arrs = _flat_arrays(grads)
        for g in g_arrs:
            if not np.all(np.isfinite(g)):
                raise TrainingDivergedError("non-finite gradient",
                                            last_params=params)
        if self.kind == "sgd":
            for p, g in zip(p_arrs, g_arrs):
                p -= self.lr * g
        elif self.kind == "adam":
            if self._m is None:
                self._m = [np.zeros_like(p) for p in p_arrs]
                self._v = [np.zeros_like(p) for p in p_arrs]
            self.t += 1
            b1c = 1.0 - self.beta1 ** self.t
            b2c = 1.0 - self.beta2 ** self.t
            for p, g, mm, vv in zip(p_arrs, g_arrs, self._m, self._v):
                mm *= self.beta1
                mm += (1.0 - self.beta1) * g
                vv *= self.beta2
                vv += (1.0 - self.beta2) * g * g
                p -= self.lr * (mm / b1c) / (np.sqrt(vv / b2c) + self.eps)
        else:
            raise ConfigError("unknown optimizer kind %r" % self.kind)
        for p in p_arrs:
            if not np.all(np.isfinite(p)):
                raise TrainingDivergedError("non-finite parameters",
                                            last_params=params)


_KIND_TO_CLS = {"d3qn": QNetworkParams, "rees": RewardNetParams}
_GROUP_NAMES = {
    "d3qn": ("encoder", "advantage_head", "value_head"),
    "rees": ("layers",),
}


def save_checkpoint(path, params, kind, extra=None):
    """Write params to a JSON checkpoint; floats keep full precision."""
    if kind not in _KIND_TO_CLS:
        raise ConfigError("unknown checkpoint kind %r" % kind)
    blob = {
        "format_version": CHECKPOINT_VERSION,
        "kind": kind,
        "extra": extra or {},
        "params": {
            name: [[W.tolist(), b.tolist()] for W, b in grp]
            for name, grp in zip(_GROUP_NAMES[kind], params.groups())
        },
    }
    tmp = str(path) + ".partial"
    with open(tmp, "w") as fh:
        json.dump(blob, fh, indent=0, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def load_checkpoint(path):
    """Read a checkpoint; returns (params, kind, extra)."""
    with open(path) as fh:
        blob = json.load(fh)
    if blob.get("format_version") != CHECKPOINT_VERSION:
        raise ConfigError("unsupported checkpoint version %r"
                          % blob.get("format_version"))
    kind = blob.get("kind")
    if kind not in _KIND_TO_CLS:
        raise ConfigError("unknown checkpoint kind %r" % kind)
    groups = []
    for name in _GROUP_NAMES[kind]:
        grp = []
        for W, b in blob["params"][name]:
            W = np.asarray(W, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64)
            if W.ndim != 2 or b.ndim != 1 or W.shape[1] != b.shape[0]:
                raise ConfigError("malformed layer in group %r" % name)
            grp.append((W, b))
        groups.append(grp)
    params = _KIND_TO_CLS[kind](*groups)
    for grp in params.groups():
        for i in range(1, len(grp)):
            if grp[i][0].shape[0] != grp[i - 1][0].shape[1]:
                raise ConfigError("layer widths do not chain in checkpoint")
    return params, kind, blob.get("extra", {})
