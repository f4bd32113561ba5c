"""Embedding, recurrent cells (simple/LSTM/GRU), bidirectional wrapping,
dense head, and exact backpropagation through time.

Architecture: token ids -> embedding lookup -> recurrent stack (each layer
feeds the next; only the last layer collapses to its final state) -> one
ReLU dense hidden layer (optional) -> dense output with softmax.

Gradients are hand-derived per layer; there is no autodiff. The backward
pass consumes the forward cache without recomputation and is exact for the
loss ``cross-entropy(softmax(logits))``, which is why finite-difference
checks can pin it to 1e-5 relative error.

Gate activations are always the logistic sigmoid (gating needs the (0,1)
range); the candidate/state activation defaults to tanh for LSTM/GRU, and
the simple cell and dense hidden layer default to ReLU. Both are
configurable on ``ModelSpec``.

Parameter tensors live in a flat name->array dict in a canonical order (see
``param_shapes``); the README documents the shape table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping

import numpy as np

from .corpus_ingest import DamageLabel
from .errors import DimensionError
from .tensor_core import SeededRng, Tensor, matmul, relu, sigmoid, softmax, uniform_init
from .text_pipeline import NUM_CLASSES


class CellKind(Enum):
    SRNN = "srnn"
    LSTM = "lstm"
    GRU = "gru"


# Gate-name suffixes per cell kind, in canonical parameter order.
GATE_NAMES: Mapping[CellKind, tuple[str, ...]] = {
    CellKind.SRNN: ("",),
    CellKind.LSTM: ("_i", "_f", "_g", "_o"),
    CellKind.GRU: ("_z", "_r", "_h"),
}

ParamDict = dict[str, Tensor]
ModelParams = ParamDict


@dataclass(frozen=True)
class RecurrentLayerSpec:
    kind: CellKind
    hidden_units: int
    bidirectional: bool = False
    returns_sequence: bool = False

    def __post_init__(self):
        if self.hidden_units < 1:
            raise ValueError(f"hidden_units must be positive, got {self.hidden_units}")

    @property
    def output_width(self) -> int:
        return self.hidden_units * (2 if self.bidirectional else 1)


@dataclass(frozen=True)
class ModelSpec:
    """Ordered architecture description; fully determines parameter shapes
    together with the vocabulary size."""

    name: str
    embedding_dim: int
    recurrent_stack: tuple[RecurrentLayerSpec, ...]
    dense_hidden_units: int
    num_classes: int = NUM_CLASSES
    hidden_activation: str = "relu"   # simple cell and dense hidden layer
    cell_activation: str = "tanh"     # LSTM/GRU candidate and state
    use_dense_hidden: bool = True
    mask_padding: bool = False

    def __post_init__(self):
        if self.num_classes != NUM_CLASSES:
            raise ValueError(f"num_classes is fixed at {NUM_CLASSES}")
        if self.embedding_dim < 1 or self.dense_hidden_units < 1:
            raise ValueError("embedding_dim and dense_hidden_units must be positive")
        if not self.recurrent_stack:
            raise ValueError("recurrent_stack must contain at least one layer")
        for layer in self.recurrent_stack[:-1]:
            if not layer.returns_sequence:
                raise ValueError("every layer except the last must return sequences")
        if self.recurrent_stack[-1].returns_sequence:
            raise ValueError("the last recurrent layer must not return sequences")
        for act in (self.hidden_activation, self.cell_activation):
            if act not in _ACTIVATIONS:
                raise ValueError(f"unknown activation {act!r}")

    @property
    def feature_width(self) -> int:
        return self.recurrent_stack[-1].output_width

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "embedding_dim": self.embedding_dim,
            "recurrent_stack": [
                {
                    "kind": layer.kind.value,
                    "hidden_units": layer.hidden_units,
                    "bidirectional": layer.bidirectional,
                    "returns_sequence": layer.returns_sequence,
                }
                for layer in self.recurrent_stack
            ],
            "dense_hidden_units": self.dense_hidden_units,
            "num_classes": self.num_classes,
            "hidden_activation": self.hidden_activation,
            "cell_activation": self.cell_activation,
            "use_dense_hidden": self.use_dense_hidden,
            "mask_padding": self.mask_padding,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ModelSpec":
        return cls(
            name=data["name"],
            embedding_dim=data["embedding_dim"],
            recurrent_stack=tuple(
                RecurrentLayerSpec(
                    kind=CellKind(layer["kind"]),
                    hidden_units=layer["hidden_units"],
                    bidirectional=layer["bidirectional"],
                    returns_sequence=layer["returns_sequence"],
                )
                for layer in data["recurrent_stack"]
            ),
            dense_hidden_units=data["dense_hidden_units"],
            num_classes=data["num_classes"],
            hidden_activation=data["hidden_activation"],
            cell_activation=data["cell_activation"],
            use_dense_hidden=data["use_dense_hidden"],
            mask_padding=data["mask_padding"],
        )


# Derivatives are taken from the activation OUTPUT, which every supported
# activation permits; the cache then never stores pre-activations.
_ACTIVATIONS: dict[str, tuple[Callable, Callable]] = {
    "relu": (relu, lambda out: (out > 0).astype(np.float64)),
    "tanh": (np.tanh, lambda out: 1.0 - out * out),
}


def _sigmoid_deriv(out: Tensor) -> Tensor:
    return out * (1.0 - out)


# ---------------------------------------------------------------------------
# Parameter layout
# ---------------------------------------------------------------------------

def _layer_input_width(spec: ModelSpec, index: int) -> int:
    if index == 0:
        return spec.embedding_dim
    return spec.recurrent_stack[index - 1].output_width


def _directions(layer: RecurrentLayerSpec) -> tuple[str, ...]:
    return ("fwd", "bwd") if layer.bidirectional else ("",)


def _prefix(index: int, direction: str) -> str:
    base = f"layer{index}."
    return base + (f"{direction}." if direction else "")


def param_shapes(spec: ModelSpec, vocab_size: int) -> dict[str, tuple[int, ...]]:
    """Canonical name -> shape table; also fixes the initialization order."""
    shapes: dict[str, tuple[int, ...]] = {"embedding": (vocab_size, spec.embedding_dim)}
    for i, layer in enumerate(spec.recurrent_stack):
        fan_in = _layer_input_width(spec, i)
        h = layer.hidden_units
        for direction in _directions(layer):
            prefix = _prefix(i, direction)
            for gate in GATE_NAMES[layer.kind]:
                shapes[f"{prefix}W{gate}"] = (fan_in, h)
                shapes[f"{prefix}U{gate}"] = (h, h)
                shapes[f"{prefix}b{gate}"] = (h,)
    if spec.use_dense_hidden:
        shapes["dense_hidden.W"] = (spec.feature_width, spec.dense_hidden_units)
        shapes["dense_hidden.b"] = (spec.dense_hidden_units,)
        out_in = spec.dense_hidden_units
    else:
        out_in = spec.feature_width
    shapes["output.W"] = (out_in, spec.num_classes)
    shapes["output.b"] = (spec.num_classes,)
    return shapes


def init_params(spec: ModelSpec, vocab_size: int, rng: SeededRng) -> ParamDict:
    """Uniform(+-sqrt(6/(fan_in+fan_out))) weights, zero biases.

    Draws are consumed in canonical ``param_shapes`` order, product(shape)
    per weight matrix. The padding embedding row (index 0) starts at zero;
    it stays trainable.
    """
    params: ParamDict = {}
    for name, shape in param_shapes(spec, vocab_size).items():
        if len(shape) == 1:
            params[name] = np.zeros(shape, dtype=np.float64)
        else:
            bound = np.sqrt(6.0 / (shape[0] + shape[1]))
            params[name] = uniform_init(rng, shape, bound)
    params["embedding"][0, :] = 0.0
    return params


def zero_grads(params: ParamDict) -> ParamDict:
    return {name: np.zeros_like(value) for name, value in params.items()}


def _sub_params(params: Mapping[str, Tensor], prefix: str) -> ParamDict:
    sub = {k[len(prefix):]: v for k, v in params.items() if k.startswith(prefix)}
    if not sub:
        raise DimensionError(f"no parameters found under prefix {prefix!r}")
    return sub


# ---------------------------------------------------------------------------
# Cell steps
# ---------------------------------------------------------------------------

def _check_cell_shapes(x: Tensor, h_prev: Tensor, W: Tensor, U: Tensor, b: Tensor):
    if x.shape[-1] != W.shape[0]:
        raise DimensionError(f"input width {x.shape} does not match W {W.shape}")
    if h_prev.shape[-1] != U.shape[0]:
        raise DimensionError(f"state width {h_prev.shape} does not match U {U.shape}")
    if not (W.shape[1] == U.shape[1] == b.shape[0]):
        raise DimensionError(
            f"inconsistent gate shapes W {W.shape}, U {U.shape}, b {b.shape}"
        )


def _affine(x: Tensor, h_prev: Tensor, W: Tensor, U: Tensor, b: Tensor) -> Tensor:
    _check_cell_shapes(x, h_prev, W, U, b)
    return matmul(x, W) + matmul(h_prev, U) + b


def _srnn_cell(x, h_prev, p, activation: str):
    act, _ = _ACTIVATIONS[activation]
    h = act(_affine(x, h_prev, p["W"], p["U"], p["b"]))
    return h, {}


def _lstm_cell(x, h_prev, c_prev, p, cell_activation: str):
    act, _ = _ACTIVATIONS[cell_activation]
    i = sigmoid(_affine(x, h_prev, p["W_i"], p["U_i"], p["b_i"]))
    f = sigmoid(_affine(x, h_prev, p["W_f"], p["U_f"], p["b_f"]))
    g = act(_affine(x, h_prev, p["W_g"], p["U_g"], p["b_g"]))
    o = sigmoid(_affine(x, h_prev, p["W_o"], p["U_o"], p["b_o"]))
    c = f * c_prev + i * g
    ac = act(c)
    h = o * ac
    return h, c, {"i": i, "f": f, "g": g, "o": o, "ac": ac}


def _gru_cell(x, h_prev, p, cell_activation: str):
    act, _ = _ACTIVATIONS[cell_activation]
    z = sigmoid(_affine(x, h_prev, p["W_z"], p["U_z"], p["b_z"]))
    r = sigmoid(_affine(x, h_prev, p["W_r"], p["U_r"], p["b_r"]))
    hbar = act(matmul(x, p["W_h"]) + matmul(r * h_prev, p["U_h"]) + p["b_h"])
    h = (1.0 - z) * h_prev + z * hbar
    return h, {"z": z, "r": r, "hbar": hbar}


def _as_batch(v: Tensor) -> tuple[Tensor, bool]:
    if v.ndim == 1:
        return v[None, :], True
    return v, False


def srnn_step(x_t: Tensor, h_prev: Tensor, params: Mapping[str, Tensor],
              activation: str = "relu") -> Tensor:
    """One simple-cell step: act(W x + U h_prev + b); ReLU by default."""
    x, squeeze = _as_batch(np.asarray(x_t, dtype=np.float64))
    h_prev, _ = _as_batch(np.asarray(h_prev, dtype=np.float64))
    h, _ = _srnn_cell(x, h_prev, params, activation)
    return h[0] if squeeze else h


def lstm_step(x_t: Tensor, h_prev: Tensor, c_prev: Tensor,
              params: Mapping[str, Tensor],
              cell_activation: str = "tanh") -> tuple[Tensor, Tensor]:
    """One LSTM step; gates are logistic sigmoid regardless of configuration."""
    x, squeeze = _as_batch(np.asarray(x_t, dtype=np.float64))
    h_prev, _ = _as_batch(np.asarray(h_prev, dtype=np.float64))
    c_prev, _ = _as_batch(np.asarray(c_prev, dtype=np.float64))
    h, c, _ = _lstm_cell(x, h_prev, c_prev, params, cell_activation)
    return (h[0], c[0]) if squeeze else (h, c)


def gru_step(x_t: Tensor, h_prev: Tensor, params: Mapping[str, Tensor],
             cell_activation: str = "tanh") -> Tensor:
    """One GRU step with the reset gate applied to h_prev inside U_h."""
    x, squeeze = _as_batch(np.asarray(x_t, dtype=np.float64))
    h_prev, _ = _as_batch(np.asarray(h_prev, dtype=np.float64))
    h, _ = _gru_cell(x, h_prev, params, cell_activation)
    return h[0] if squeeze else h


# ---------------------------------------------------------------------------
# One direction over a full sequence
# ---------------------------------------------------------------------------

@dataclass
class DirectionCache:
    """Everything the backward pass needs for one direction of one layer.

    All time-indexed arrays are stored in this direction's processing order
    (the bidirectional wrapper reverses inputs before calling in).
    """

    kind: CellKind
    x: Tensor                      # [B, L, in]
    h: Tensor                      # [B, L+1, H]; h[:, 0] = 0, post-mask states
    h_raw: Tensor                  # [B, L, H] pre-mask candidate states
    gates: dict[str, Tensor]       # per-kind auxiliaries, each [B, L, H]
    c: Tensor | None = None        # [B, L+1, H] LSTM cell states, post-mask
    c_raw: Tensor | None = None    # [B, L, H]
    mask: Tensor | None = None     # [B, L, 1], 1.0 at real tokens


def _direction_forward(x_seq: Tensor, kind: CellKind, p: ParamDict,
                       hidden_activation: str, cell_activation: str,
                       mask: Tensor | None) -> tuple[Tensor, DirectionCache]:
    B, L, _ = x_seq.shape
    H = p["b" if kind is CellKind.SRNN else "b_i" if kind is CellKind.LSTM else "b_z"].shape[0]
    h = np.zeros((B, L + 1, H))
    h_raw = np.empty((B, L, H))
    gates: dict[str, Tensor] = {}
    c = c_raw = None
    if kind is CellKind.LSTM:
        c = np.zeros((B, L + 1, H))
        c_raw = np.empty((B, L, H))
        gates = {k: np.empty((B, L, H)) for k in ("i", "f", "g", "o", "ac")}
    elif kind is CellKind.GRU:
        gates = {k: np.empty((B, L, H)) for k in ("z", "r", "hbar")}

    for t in range(L):
        x_t, h_prev = x_seq[:, t], h[:, t]
        if kind is CellKind.SRNN:
            new_h, _ = _srnn_cell(x_t, h_prev, p, hidden_activation)
        elif kind is CellKind.LSTM:
            new_h, new_c, step_gates = _lstm_cell(x_t, h_prev, c[:, t], p, cell_activation)
            c_raw[:, t] = new_c
            for k, v in step_gates.items():
                gates[k][:, t] = v
        else:
            new_h, step_gates = _gru_cell(x_t, h_prev, p, cell_activation)
            for k, v in step_gates.items():
                gates[k][:, t] = v
        h_raw[:, t] = new_h
        if mask is None:
            h[:, t + 1] = new_h
            if kind is CellKind.LSTM:
                c[:, t + 1] = c_raw[:, t]
        else:
            m = mask[:, t]
            h[:, t + 1] = m * new_h + (1.0 - m) * h_prev
            if kind is CellKind.LSTM:
                c[:, t + 1] = m * c_raw[:, t] + (1.0 - m) * c[:, t]

    cache = DirectionCache(kind=kind, x=x_seq, h=h, h_raw=h_raw, gates=gates,
                           c=c, c_raw=c_raw, mask=mask)
    return h[:, 1:], cache


def _direction_backward(d_out_seq: Tensor, cache: DirectionCache, p: ParamDict,
                        hidden_activation: str, cell_activation: str
                        ) -> tuple[Tensor, ParamDict]:
    """Exact BPTT for one direction; returns (d_inputs, gradient dict)."""
    _, act_deriv = _ACTIVATIONS[
        hidden_activation if cache.kind is CellKind.SRNN else cell_activation
    ]
    B, L, _ = cache.x.shape
    grads = {name: np.zeros_like(value) for name, value in p.items()}
    d_x = np.zeros_like(cache.x)
    dh_carry = np.zeros_like(cache.h[:, 0])
    dc_carry = np.zeros_like(dh_carry)

    for t in range(L - 1, -1, -1):
        x_t, h_prev = cache.x[:, t], cache.h[:, t]
        dh_total = d_out_seq[:, t] + dh_carry
        if cache.mask is None:
            dh_raw = dh_total
            dh_prev_extra = 0.0
            dc_raw_in = dc_carry
            dc_prev_extra = 0.0
        else:
            m = cache.mask[:, t]
            dh_raw = dh_total * m
            dh_prev_extra = dh_total * (1.0 - m)
            dc_raw_in = dc_carry * m
            dc_prev_extra = dc_carry * (1.0 - m)

        if cache.kind is CellKind.SRNN:
            d_pre = dh_raw * act_deriv(cache.h_raw[:, t])
            grads["W"] += matmul(x_t.T, d_pre)
            grads["U"] += matmul(h_prev.T, d_pre)
            grads["b"] += d_pre.sum(axis=0)
            d_x[:, t] = matmul(d_pre, p["W"].T)
            dh_carry = matmul(d_pre, p["U"].T) + dh_prev_extra

        elif cache.kind is CellKind.LSTM:
            g = cache.gates
            i, f, gg, o, ac = (g[k][:, t] for k in ("i", "f", "g", "o", "ac"))
            c_prev = cache.c[:, t]
            do = dh_raw * ac
            dc = dc_raw_in + dh_raw * o * act_deriv(ac)
            d_pre = {
                "_o": do * _sigmoid_deriv(o),
                "_i": dc * gg * _sigmoid_deriv(i),
                "_f": dc * c_prev * _sigmoid_deriv(f),
                "_g": dc * i * act_deriv(gg),
            }
            dx_t = np.zeros_like(x_t)
            dh_prev = np.zeros_like(h_prev)
            for gate in ("_i", "_f", "_g", "_o"):
                dp = d_pre[gate]
                grads[f"W{gate}"] += matmul(x_t.T, dp)
                grads[f"U{gate}"] += matmul(h_prev.T, dp)
                grads[f"b{gate}"] += dp.sum(axis=0)
                dx_t += matmul(dp, p[f"W{gate}"].T)
                dh_prev += matmul(dp, p[f"U{gate}"].T)
            d_x[:, t] = dx_t
            dh_carry = dh_prev + dh_prev_extra
            dc_carry = dc * f + dc_prev_extra

        else:  # GRU
            g = cache.gates
            z, r, hbar = (g[k][:, t] for k in ("z", "r", "hbar"))
            dz = dh_raw * (hbar - h_prev)
            d_pre_z = dz * _sigmoid_deriv(z)
            d_pre_h = dh_raw * z * act_deriv(hbar)
            d_rh = matmul(d_pre_h, p["U_h"].T)
            d_pre_r = d_rh * h_prev * _sigmoid_deriv(r)
            grads["W_z"] += matmul(x_t.T, d_pre_z)
            grads["U_z"] += matmul(h_prev.T, d_pre_z)
            grads["b_z"] += d_pre_z.sum(axis=0)
            grads["W_r"] += matmul(x_t.T, d_pre_r)
            grads["U_r"] += matmul(h_prev.T, d_pre_r)
            grads["b_r"] += d_pre_r.sum(axis=0)
            grads["W_h"] += matmul(x_t.T, d_pre_h)
            grads["U_h"] += matmul((r * h_prev).T, d_pre_h)
            grads["b_h"] += d_pre_h.sum(axis=0)
            d_x[:, t] = (
                matmul(d_pre_z, p["W_z"].T)
                + matmul(d_pre_r, p["W_r"].T)
                + matmul(d_pre_h, p["W_h"].T)
            )
            dh_carry = (
                dh_raw * (1.0 - z)
                + d_rh * r
                + matmul(d_pre_z, p["U_z"].T)
                + matmul(d_pre_r, p["U_r"].T)
                + dh_prev_extra
            )

    return d_x, grads


# ---------------------------------------------------------------------------
# Layer-level forward/backward (public sequence ops)
# ---------------------------------------------------------------------------

def recurrent_forward(inputs: Tensor, layer: RecurrentLayerSpec,
                      params: Mapping[str, Tensor],
                      hidden_activation: str = "relu",
                      cell_activation: str = "tanh") -> Tensor:
    """Run a unidirectional layer left-to-right from zero initial state.

    ``inputs`` is [L, d] (or [B, L, d]); returns the per-step output
    sequence when the layer returns sequences, else the final hidden state.
    """
    if layer.bidirectional:
        raise DimensionError("use bidirectional_forward for bidirectional layers")
    x, squeeze = _as_seq_batch(inputs)
    out, _ = _direction_forward(x, layer.kind, dict(params),
                                hidden_activation, cell_activation, mask=None)
    result = out if layer.returns_sequence else out[:, -1]
    return result[0] if squeeze else result


def bidirectional_forward(inputs: Tensor, layer: RecurrentLayerSpec,
                          params_fwd: Mapping[str, Tensor],
                          params_bwd: Mapping[str, Tensor],
                          hidden_activation: str = "relu",
                          cell_activation: str = "tanh") -> Tensor:
    """Concatenate a left-to-right pass and a right-to-left pass.

    Per-step outputs are [fwd_t, bwd_t]; the final-state form concatenates
    each direction's own final state.
    """
    if not layer.bidirectional:
        raise DimensionError("layer.bidirectional must be true")
    x, squeeze = _as_seq_batch(inputs)
    fwd_out, _ = _direction_forward(x, layer.kind, dict(params_fwd),
                                    hidden_activation, cell_activation, mask=None)
    bwd_out_rev, _ = _direction_forward(x[:, ::-1], layer.kind, dict(params_bwd),
                                        hidden_activation, cell_activation, mask=None)
    if layer.returns_sequence:
        result = np.concatenate([fwd_out, bwd_out_rev[:, ::-1]], axis=2)
    else:
        result = np.concatenate([fwd_out[:, -1], bwd_out_rev[:, -1]], axis=1)
    return result[0] if squeeze else result


def _as_seq_batch(inputs: Tensor) -> tuple[Tensor, bool]:
    arr = np.asarray(inputs, dtype=np.float64)
    if arr.ndim == 2:
        return arr[None], True
    if arr.ndim == 3:
        return arr, False
    raise DimensionError(f"expected [L, d] or [B, L, d] inputs, got {arr.shape}")


# ---------------------------------------------------------------------------
# Whole-model forward and backward
# ---------------------------------------------------------------------------

@dataclass
class LayerState:
    spec: RecurrentLayerSpec
    fwd: DirectionCache
    bwd: DirectionCache | None = None


@dataclass
class ForwardCache:
    """Forward intermediates, sufficient to run backward without recompute."""

    ids: Tensor                       # [B, L]
    layers: list[LayerState] = field(default_factory=list)
    features: Tensor | None = None    # [B, feature_width]
    hidden: Tensor | None = None      # [B, dense_hidden], post-activation
    probs: Tensor | None = None       # [B, num_classes]
    mask: Tensor | None = None
    squeezed: bool = False


def embedding_forward(seq: Tensor, embedding: Tensor) -> Tensor:
    """Row lookup per timestep; padding id 0 reads row 0 like any token."""
    ids = np.asarray(seq)
    if ids.size and int(ids.max()) >= embedding.shape[0]:
        raise IndexError(
            f"token id {int(ids.max())} outside embedding of {embedding.shape[0]} rows"
        )
    return embedding[ids]


def model_forward(seq: Tensor, spec: ModelSpec, params: Mapping[str, Tensor]
                  ) -> tuple[Tensor, ForwardCache]:
    """Probabilities over the four classes (plus the backward cache).

    ``seq`` is an id vector [L] or batch [B, L]; output is [4] or [B, 4].
    """
    ids = np.asarray(seq)
    squeezed = ids.ndim == 1
    if squeezed:
        ids = ids[None, :]
    cache = ForwardCache(ids=ids, squeezed=squeezed)
    if spec.mask_padding:
        cache.mask = (ids != 0).astype(np.float64)[:, :, None]

    x = embedding_forward(ids, params["embedding"])
    for i, layer in enumerate(spec.recurrent_stack):
        x, state = _layer_forward(x, i, layer, spec, params, cache.mask)
        cache.layers.append(state)
    cache.features = x

    if spec.use_dense_hidden:
        act, _ = _ACTIVATIONS[spec.hidden_activation]
        cache.hidden = act(
            matmul(x, params["dense_hidden.W"]) + params["dense_hidden.b"]
        )
        logits = matmul(cache.hidden, params["output.W"]) + params["output.b"]
    else:
        logits = matmul(x, params["output.W"]) + params["output.b"]
    cache.probs = softmax(logits, axis=-1)
    probs = cache.probs[0] if squeezed else cache.probs
    return probs, cache


def _layer_forward(x: Tensor, index: int, layer: RecurrentLayerSpec,
                   spec: ModelSpec, params: Mapping[str, Tensor],
                   mask: Tensor | None) -> tuple[Tensor, LayerState]:
    if layer.bidirectional:
        p_fwd = _sub_params(params, _prefix(index, "fwd"))
        p_bwd = _sub_params(params, _prefix(index, "bwd"))
        fwd_out, fwd_cache = _direction_forward(
            x, layer.kind, p_fwd, spec.hidden_activation, spec.cell_activation, mask
        )
        rev_mask = mask[:, ::-1] if mask is not None else None
        bwd_out_rev, bwd_cache = _direction_forward(
            x[:, ::-1], layer.kind, p_bwd,
            spec.hidden_activation, spec.cell_activation, rev_mask,
        )
        state = LayerState(spec=layer, fwd=fwd_cache, bwd=bwd_cache)
        if layer.returns_sequence:
            return np.concatenate([fwd_out, bwd_out_rev[:, ::-1]], axis=2), state
        return np.concatenate([fwd_out[:, -1], bwd_out_rev[:, -1]], axis=1), state
    p = _sub_params(params, _prefix(index, ""))
    out, dir_cache = _direction_forward(
        x, layer.kind, p, spec.hidden_activation, spec.cell_activation, mask
    )
    state = LayerState(spec=layer, fwd=dir_cache)
    return (out if layer.returns_sequence else out[:, -1]), state


def model_backward(cache: ForwardCache, label: Tensor, spec: ModelSpec,
                   params: Mapping[str, Tensor]) -> ParamDict:
    """Exact gradient of mean cross-entropy(softmax) loss over the batch.

    ``label`` is a one-hot [4] vector (or batch [B, 4]) matching the forward
    input. Embedding gradients accumulate only into looked-up rows.
    """
    if len(cache.layers) != len(spec.recurrent_stack):
        raise DimensionError(
            f"cache holds {len(cache.layers)} layers, spec has "
            f"{len(spec.recurrent_stack)}"
        )
    onehot = np.asarray(label, dtype=np.float64)
    if onehot.ndim == 1:
        onehot = onehot[None, :]
    B = cache.probs.shape[0]
    if onehot.shape != cache.probs.shape:
        raise DimensionError(
            f"labels {onehot.shape} do not match probabilities {cache.probs.shape}"
        )
    grads = {name: np.zeros_like(value) for name, value in params.items()}

    d_logits = (cache.probs - onehot) / B
    if spec.use_dense_hidden:
        _, act_deriv = _ACTIVATIONS[spec.hidden_activation]
        grads["output.W"] += matmul(cache.hidden.T, d_logits)
        grads["output.b"] += d_logits.sum(axis=0)
        d_hidden = matmul(d_logits, params["output.W"].T)
        d_pre = d_hidden * act_deriv(cache.hidden)
        grads["dense_hidden.W"] += matmul(cache.features.T, d_pre)
        grads["dense_hidden.b"] += d_pre.sum(axis=0)
        d_feat = matmul(d_pre, params["dense_hidden.W"].T)
    else:
        grads["output.W"] += matmul(cache.features.T, d_logits)
        grads["output.b"] += d_logits.sum(axis=0)
        d_feat = matmul(d_logits, params["output.W"].T)

    d_next: Tensor = d_feat  # gradient flowing into the layer below
    for i in range(len(spec.recurrent_stack) - 1, -1, -1):
        d_next = _layer_backward(d_next, i, cache.layers[i], spec, params, grads)

    ids = cache.ids.reshape(-1)
    np.add.at(grads["embedding"], ids, d_next.reshape(-1, spec.embedding_dim))
    return grads


def _layer_backward(d_out: Tensor, index: int, state: LayerState,
                    spec: ModelSpec, params: Mapping[str, Tensor],
                    grads: ParamDict) -> Tensor:
    layer = state.spec
    B, L, _ = state.fwd.x.shape
    H = layer.hidden_units

    def as_seq(d: Tensor) -> Tensor:
        # Final-state gradients enter at the direction's own last step.
        if layer.returns_sequence:
            return d
        seq = np.zeros((B, L, H))
        seq[:, L - 1] = d
        return seq

    if layer.bidirectional:
        if layer.returns_sequence:
            d_fwd, d_bwd = d_out[:, :, :H], np.ascontiguousarray(d_out[:, :, H:][:, ::-1])
        else:
            d_fwd, d_bwd = d_out[:, :H], d_out[:, H:]
        d_x_fwd, g_fwd = _direction_backward(
            as_seq(d_fwd), state.fwd, _sub_params(params, _prefix(index, "fwd")),
            spec.hidden_activation, spec.cell_activation,
        )
        d_x_bwd_rev, g_bwd = _direction_backward(
            as_seq(d_bwd), state.bwd, _sub_params(params, _prefix(index, "bwd")),
            spec.hidden_activation, spec.cell_activation,
        )
        for name, value in g_fwd.items():
            grads[_prefix(index, "fwd") + name] += value
        for name, value in g_bwd.items():
            grads[_prefix(index, "bwd") + name] += value
        return d_x_fwd + d_x_bwd_rev[:, ::-1]

    d_x, g = _direction_backward(
        as_seq(d_out), state.fwd, _sub_params(params, _prefix(index, "")),
        spec.hidden_activation, spec.cell_activation,
    )
    for name, value in g.items():
        grads[_prefix(index, "") + name] += value
    return d_x


def predict_class(probs: Tensor) -> DamageLabel:
    """Index of the maximum probability; ties break to the lowest index."""
    arr = np.asarray(probs)
    if arr.shape != (NUM_CLASSES,):
        raise DimensionError(f"expected a 4-vector of probabilities, got {arr.shape}")
    return DamageLabel(int(np.argmax(arr)))


def predict_classes(probs: Tensor) -> np.ndarray:
    """Batched argmax with the same lowest-index tie-break."""
    return np.argmax(np.asarray(probs), axis=-1)
