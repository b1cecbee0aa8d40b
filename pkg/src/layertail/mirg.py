"""Multilayer inhomogeneous random multigraph construction.

Given a weight matrix W (nodes x layers) with layer totals T_l = sum_i W_il,
each unordered pair i <= j in layer l receives an independent Poisson edge
count with mean g_l(W_il * W_jl / T_l); the identity g is the classical
Norros-Reittu kernel.  Self-loops are allowed and contribute once (not twice)
to the degree of their node.

Two backends produce the same law:

* ``build_pairwise`` draws every pair count directly; O(N^2) per layer and
  the only backend that accepts a non-identity connection function.
* ``build_fast_identity`` draws a single Poisson event count K ~ Poisson(T_l),
  places K ordered endpoint pairs i.i.d. proportional to the weights (alias
  method), keeps off-diagonal events with probability 1/2 and diagonal events
  always.  Poisson splitting makes the resulting multiplicities exactly the
  pairwise law; expected cost O(N + T_l).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateLayerError,
    ParameterError,
    UnsupportedBackendError,
)
from .weights import WeightMatrix

__all__ = [
    "AliasSampler",
    "LayerEdges",
    "MultilayerGraph",
    "MultilayerDegrees",
    "build_pairwise",
    "build_fast_identity",
    "build_graph",
    "degrees",
    "write_edge_list",
    "write_degree_csv",
    "write_weight_csv",
]

# Pairwise backend: target elements per broadcast block.
_BLOCK_ELEMS = 1 << 21
# Fast backend: events generated per chunk, and the row count above which the
# accumulated edge buffer is re-compacted.  Both bound peak memory when a
# heavy-tailed layer total spikes the event count.
_EVENT_CHUNK = 1 << 23
_COMPACT_ROWS = 30_000_000


class AliasSampler:
    """Walker/Vose alias table for O(1) draws from a fixed discrete law."""

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ParameterError("alias sampler needs a 1-D non-empty weight vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ParameterError("alias weights must be finite and non-negative")
        total = w.sum()
        if total <= 0:
            raise ParameterError("alias weights must not all be zero")
        n = w.size
        scaled = w * (n / total)
        prob = np.ones(n)
        alias = np.arange(n)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] -= 1.0 - scaled[s]
            (small if scaled[g] < 1.0 else large).append(g)
        # Leftovers are 1 up to float round-off.
        for i in small:
            prob[i] = 1.0
        for i in large:
            prob[i] = 1.0
        self._prob = prob
        self._alias = alias
        self._n = n

    def draw(self, size: int, rng: np.random.Generator) -> np.ndarray:
        idx = rng.integers(0, self._n, size=size)
        flip = rng.random(size) < self._prob[idx]
        return np.where(flip, idx, self._alias[idx])


@dataclass(frozen=True)
class LayerEdges:
    """Edges of one layer as parallel arrays with i <= j and multiplicity >= 1."""

    i: np.ndarray
    j: np.ndarray
    multiplicity: np.ndarray

    def __post_init__(self):
        i = np.asarray(self.i, dtype=np.int64)
        j = np.asarray(self.j, dtype=np.int64)
        m = np.asarray(self.multiplicity, dtype=np.int64)
        if not (i.shape == j.shape == m.shape) or i.ndim != 1:
            raise ParameterError("edge arrays must be 1-D and equally long")
        if i.size and (np.any(i > j) or np.any(i < 0) or np.any(m < 1)):
            raise ParameterError("edges require 0 <= i <= j and multiplicity >= 1")
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "multiplicity", m)

    @property
    def n_edges(self) -> int:
        """Total edge count including multiplicities."""
        return int(self.multiplicity.sum())


@dataclass(frozen=True)
class MultilayerGraph:
    n_nodes: int
    layers: tuple
    source: str = "pairwise"

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ParameterError("graph needs at least one node")
        for lay in self.layers:
            if lay.j.size and int(lay.j.max()) >= self.n_nodes:
                raise ParameterError("edge endpoint outside node range")
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def n_layers(self) -> int:
        return len(self.layers)


@dataclass(frozen=True)
class MultilayerDegrees:
    """Per-node, per-layer degrees; self-loop multiplicities count once."""

    values: np.ndarray
    source: str = "pairwise"

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def n_layers(self) -> int:
        return self.values.shape[1]


def _layer_totals(weights: WeightMatrix) -> np.ndarray:
    totals = weights.values.sum(axis=0)
    bad = np.nonzero(totals <= 0.0)[0]
    if bad.size:
        raise DegenerateLayerError(
            f"layer {int(bad[0])} has zero total weight; its graph law is undefined"
        )
    return totals


def _normalize_g(g, n_layers):
    if g is None or callable(g):
        return [g] * n_layers
    gs = list(g)
    if len(gs) != n_layers:
        raise ParameterError(
            f"got {len(gs)} connection functions for {n_layers} layers"
        )
    for entry in gs:
        if entry is not None and not callable(entry):
            raise ParameterError("connection functions must be callables or None")
    return gs


def _apply_g(gl, means):
    if gl is None:
        return means
    out = np.asarray(gl(means), dtype=float)
    if out.shape != means.shape:
        raise ParameterError("connection function must preserve the input shape")
    if not np.all(np.isfinite(out)) or np.any(out < 0.0):
        raise ParameterError("connection function must return finite non-negative means")
    return out


def build_pairwise(
    weights: WeightMatrix, rng: np.random.Generator, g=None
) -> MultilayerGraph:
    """Draw the graph by enumerating all pairs i <= j in each layer.

    ``g`` is an optional vectorized connection function (or a per-layer
    sequence of them); ``None`` means the identity kernel.  Pair means are
    evaluated in row-major blocks, so a fixed generator state yields a fixed
    graph regardless of block size.
    """
    totals = _layer_totals(weights)
    n, n_layers = weights.n_nodes, weights.n_layers
    gs = _normalize_g(g, n_layers)
    block = max(1, _BLOCK_ELEMS // n)
    layer_rngs = rng.spawn(n_layers)
    layers = []
    for l in range(n_layers):
        w = weights.values[:, l]
        lr = layer_rngs[l]
        gl = gs[l]
        i_parts, j_parts, m_parts = [], [], []
        for i0 in range(0, n, block):
            i1 = min(i0 + block, n)
            rows = np.arange(i0, i1)
            cols = np.arange(i0, n)
            means = w[rows, None] * w[None, i0:] / totals[l]
            mask = cols[None, :] >= rows[:, None]
            flat = _apply_g(gl, means[mask])
            mult = lr.poisson(flat)
            keep = mult > 0
            if np.any(keep):
                ri, cj = np.nonzero(mask)
                i_parts.append(rows[ri[keep]])
                j_parts.append(cols[cj[keep]])
                m_parts.append(mult[keep])
        layers.append(_collect_layer(i_parts, j_parts, m_parts))
    return MultilayerGraph(n_nodes=n, layers=tuple(layers), source="pairwise")


def _collect_layer(i_parts, j_parts, m_parts) -> LayerEdges:
    if not i_parts:
        empty = np.empty(0, dtype=np.int64)
        return LayerEdges(empty, empty.copy(), empty.copy())
    return LayerEdges(
        np.concatenate(i_parts),
        np.concatenate(j_parts),
        np.concatenate(m_parts),
    )


def build_fast_identity(
    weights: WeightMatrix, rng: np.random.Generator, g=None
) -> MultilayerGraph:
    """Draw the identity-kernel graph in O(N + T_l) expected time per layer.

    Only the identity connection function is supported; anything else raises
    :class:`UnsupportedBackendError`.  Events are generated and thinned in
    chunks, and the edge buffer is periodically compacted, so memory stays
    bounded even when a heavy-tailed layer total makes K very large.
    """
    if g is not None and not (isinstance(g, (list, tuple)) and all(x is None for x in g)):
        raise UnsupportedBackendError(
            "the fast backend realizes only the identity connection function; "
            "use the pairwise backend for general g"
        )
    totals = _layer_totals(weights)
    n, n_layers = weights.n_nodes, weights.n_layers
    layer_rngs = rng.spawn(n_layers)
    layers = []
    for l in range(n_layers):
        lr = layer_rngs[l]
        w = weights.values[:, l]
        sampler = AliasSampler(w)
        k_events = int(lr.poisson(totals[l]))
        keys_parts, count_parts = [], []
        buffered = 0
        remaining = k_events
        while remaining > 0:
            m = min(remaining, _EVENT_CHUNK)
            remaining -= m
            a = sampler.draw(m, lr)
            b = sampler.draw(m, lr)
            keep = a == b
            off = ~keep
            keep[off] = lr.random(int(off.sum())) < 0.5
            a = a[keep]
            b = b[keep]
            key = np.minimum(a, b) * np.int64(n) + np.maximum(a, b)
            uk, cnt = np.unique(key, return_counts=True)
            keys_parts.append(uk)
            count_parts.append(cnt.astype(np.int64))
            buffered += uk.size
            if buffered > _COMPACT_ROWS:
                keys_parts, count_parts = _compact(keys_parts, count_parts)
                buffered = keys_parts[0].size
        if buffered == 0:
            empty = np.empty(0, dtype=np.int64)
            layers.append(LayerEdges(empty, empty.copy(), empty.copy()))
            continue
        keys_parts, count_parts = _compact(keys_parts, count_parts)
        keys, counts = keys_parts[0], count_parts[0]
        layers.append(LayerEdges(keys // n, keys % n, counts))
    return MultilayerGraph(n_nodes=n, layers=tuple(layers), source="fast")


def _compact(keys_parts, count_parts):
    keys = np.concatenate(keys_parts)
    counts = np.concatenate(count_parts)
    uk, inv = np.unique(keys, return_inverse=True)
    merged = np.bincount(inv, weights=counts, minlength=uk.size)
    return [uk], [np.rint(merged).astype(np.int64)]


def build_graph(
    weights: WeightMatrix,
    rng: np.random.Generator,
    backend: str = "auto",
    g=None,
) -> MultilayerGraph:
    """Backend dispatcher.

    ``auto`` picks pairwise for small graphs (N <= 2000) or whenever a
    connection function is supplied, and the fast identity backend otherwise.
    """
    if backend == "auto":
        backend = "pairwise" if (g is not None or weights.n_nodes <= 2000) else "fast"
    if backend == "pairwise":
        return build_pairwise(weights, rng, g=g)
    if backend == "fast":
        return build_fast_identity(weights, rng, g=g)
    raise ParameterError(f"unknown backend {backend!r}; expected auto, pairwise or fast")


def degrees(graph: MultilayerGraph) -> MultilayerDegrees:
    """Degree matrix: each edge copy adds 1 to both endpoints, self-loops add 1."""
    n = graph.n_nodes
    out = np.zeros((n, graph.n_layers), dtype=np.int64)
    for l, lay in enumerate(graph.layers):
        if lay.i.size == 0:
            continue
        mult = lay.multiplicity.astype(float)
        d = np.bincount(lay.i, weights=mult, minlength=n)
        d += np.bincount(lay.j, weights=mult, minlength=n)
        diag = lay.i == lay.j
        if np.any(diag):
            d -= np.bincount(lay.i[diag], weights=mult[diag], minlength=n)
        out[:, l] = np.rint(d).astype(np.int64)
    return MultilayerDegrees(values=out, source=graph.source)


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------


def write_edge_list(graph: MultilayerGraph, layer: int, path) -> None:
    """Write one layer as ``i j multiplicity`` lines with 0-based node ids."""
    if not (0 <= layer < graph.n_layers):
        raise ParameterError(f"layer {layer} out of range")
    lay = graph.layers[layer]
    with open(path, "w", encoding="utf-8") as fh:
        for a, b, m in zip(lay.i, lay.j, lay.multiplicity):
            fh.write(f"{a} {b} {m}\n")


def _write_node_layer_csv(values: np.ndarray, path, fmt: str) -> None:
    n, n_layers = values.shape
    header = "node," + ",".join(f"layer_{l + 1}" for l in range(n_layers))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for node in range(n):
            cells = ",".join(fmt % v for v in values[node])
            fh.write(f"{node},{cells}\n")


def write_degree_csv(deg: MultilayerDegrees, path) -> None:
    """Write degrees as ``node,layer_1,...,layer_L`` with integer cells."""
    _write_node_layer_csv(deg.values, path, "%d")


def write_weight_csv(weights: WeightMatrix, path) -> None:
    """Write weights in the same node/layer CSV shape with %.10g cells."""
    _write_node_layer_csv(weights.values, path, "%.10g")
