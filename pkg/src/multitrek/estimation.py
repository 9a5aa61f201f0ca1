"""Simulation and finite-sample estimation.

Closes the loop from population statements to data: simulate the
structural system X = eps (I - Lambda)^{-1} with independent centered
non-Gaussian noise, estimate cumulant tensors from the sample, and
bootstrap a determinant statistic.

The determinant flag is a labeled heuristic: |statistic| <= 2 sd under
a nonparametric bootstrap, with no coverage guarantee of any kind.  It
exists to demonstrate the estimation loop, not as a calibrated test.
"""

from __future__ import annotations

import itertools
import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .cumulants import ModelInstance, NoiseCumulants, path_matrix
from .errors import InvalidBootstrapCount, OrderUnsupported
from .graphs import MixedGraph, canonical_dag
from .tensors import FLOAT, DiagonalSpec, Tensor, hyperdet_from_getter

_TAGS = {"uniform": 1, "exponential": 1, "laplace": 1, "gamma": 2}

MAGIC = b"MTRK"


@dataclass(frozen=True)
class NoiseSpec:
    """Per-vertex centered noise distributions.

    Entries map a vertex to ("uniform", half_width), ("exponential",
    rate), ("laplace", scale) or ("gamma", shape, scale); exponential
    and gamma draws are shifted to mean zero.  Parameters are kept as
    exact Fractions so population cumulants stay rational.
    """

    entries: Mapping[int, tuple]

    def __post_init__(self) -> None:
        clean: dict[int, tuple] = {}
        for v, spec in sorted(self.entries.items()):
            tag, *params = spec
            if tag not in _TAGS:
                raise ValueError(f"unknown noise tag {tag!r} at vertex {v}")
            if len(params) != _TAGS[tag]:
                raise ValueError(f"{tag} noise takes {_TAGS[tag]} parameter(s), got {params}")
            params = tuple(Fraction(x) for x in params)
            if any(x < 0 for x in params):
                raise ValueError(f"negative parameter for {tag} noise at vertex {v}")
            if tag == "exponential" and params[0] == 0:
                raise ValueError("exponential rate must be positive")
            if tag == "gamma" and params[0] == 0:
                raise ValueError("gamma shape must be positive")
            clean[int(v)] = (tag,) + params
        object.__setattr__(self, "entries", clean)

    def cumulant(self, v: int, order: int) -> Fraction:
        """Exact population cumulant of the (centered) noise at one vertex."""
        tag, *params = self.entries[v]
        if order == 1:
            return Fraction(0)
        if order not in (2, 3, 4):
            raise OrderUnsupported(f"noise cumulants implemented for orders 2..4, got {order}")
        if tag == "uniform":
            a = params[0]
            return {2: a * a / 3, 3: Fraction(0), 4: Fraction(-2) * a**4 / 15}[order]
        if tag == "laplace":
            b = params[0]
            return {2: 2 * b * b, 3: Fraction(0), 4: 12 * b**4}[order]
        if tag == "exponential":
            rate = params[0]
            shape, scale = Fraction(1), 1 / rate
        else:
            shape, scale = params
        factorial = {2: 1, 3: 2, 4: 6}[order]
        return shape * factorial * scale**order

    def sample(self, v: int, rng: np.random.Generator, n: int) -> np.ndarray:
        tag, *params = self.entries[v]
        if tag == "uniform":
            a = float(params[0])
            return rng.uniform(-a, a, n)
        if tag == "laplace":
            return rng.laplace(0.0, float(params[0]), n)
        if tag == "exponential":
            scale = 1.0 / float(params[0])
            return rng.exponential(scale, n) - scale
        shape, scale = float(params[0]), float(params[1])
        return rng.gamma(shape, scale, n) - shape * scale


@dataclass(frozen=True)
class SampleMatrix:
    """n x p float data; column i belongs to vertices[i]."""

    data: np.ndarray
    vertices: tuple[int, ...]

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=np.float64, order="C")  # owned copy
        if arr.ndim != 2:
            raise ValueError("sample data must be a 2-D matrix")
        if arr.shape[1] != len(self.vertices):
            raise ValueError("one column per vertex required")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample data must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    def column(self, v: int) -> int:
        try:
            return self.vertices.index(v)
        except ValueError:
            raise ValueError(f"vertex {v} has no column") from None


def simulate_lsem(
    g: MixedGraph,
    lam: Mapping[tuple[int, int], float],
    noise: NoiseSpec,
    n: int,
    seed: int,
) -> SampleMatrix:
    """Draw n i.i.d. rows of the structural system; deterministic per seed.

    Multidirected edges are realized through the canonical DAG: the
    noise spec must then also cover the latent vertices (ids assigned
    by canonical_dag), whose columns are dropped from the output.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    canon = canonical_dag(g)
    dag = canon.dag
    missing = [v for v in dag.vertices if v not in noise.entries]
    if missing:
        raise ValueError(
            f"noise spec misses vertices {missing} (latent ids come from canonical_dag)"
        )
    m = path_matrix(dag, {(u, v): float(w) for (u, v), w in lam.items()})
    rng = np.random.default_rng(seed)
    eps = np.empty((n, len(dag.vertices)))
    for i, v in enumerate(dag.vertices):
        eps[:, i] = noise.sample(v, rng, n)
    x = eps @ np.asarray(m, dtype=np.float64)
    keep = [dag.vertices.index(v) for v in canon.original_vertices]
    return SampleMatrix(data=x[:, keep], vertices=canon.original_vertices)


def population_instance(
    g: MixedGraph,
    lam: Mapping[tuple[int, int], object],
    noise: NoiseSpec,
    k_max: int,
) -> ModelInstance:
    """The exact ModelInstance a simulation converges to (for comparing
    sample_cumulant against model_cumulant)."""
    noise_map = {}
    for order in range(2, k_max + 1):
        diag = {v: noise.cumulant(v, order) for v in g.vertices if v in noise.entries}
        if set(diag) != set(g.vertices):
            raise ValueError("noise spec must cover every vertex")
        noise_map[order] = NoiseCumulants(diag=DiagonalSpec(diag))
    return ModelInstance(lam={e: Fraction(w) for e, w in lam.items()}, noise=noise_map)


# -- sample cumulants --------------------------------------------------------


def _central_moment(xc: np.ndarray, idx: tuple[int, ...], memo: dict) -> float:
    key = tuple(sorted(idx))
    if key not in memo:
        prod = xc[:, key[0]].copy()
        for i in key[1:]:
            prod *= xc[:, i]
        memo[key] = float(prod.mean())
    return memo[key]


def _cumulant_value(xc: np.ndarray, idx: tuple[int, ...], memo: dict) -> float:
    """Denominator-n sample cumulant of the centered columns idx (k <= 4)."""
    k = len(idx)
    if k in (2, 3):
        return _central_moment(xc, idx, memo)
    i, j, l, r = idx
    return (
        _central_moment(xc, idx, memo)
        - _central_moment(xc, (i, j), memo) * _central_moment(xc, (l, r), memo)
        - _central_moment(xc, (i, l), memo) * _central_moment(xc, (j, r), memo)
        - _central_moment(xc, (i, r), memo) * _central_moment(xc, (j, l), memo)
    )


def sample_cumulant(data: SampleMatrix, k: int) -> Tensor:
    """Plug-in sample cumulant tensor (denominator n), exactly symmetric.

    Each entry is computed once per sorted multi-index and broadcast,
    so the output is symmetric to the last bit.
    """
    if k not in (2, 3, 4):
        raise OrderUnsupported(f"sample cumulants implemented for orders 2..4, got {k}")
    x = data.data
    xc = x - x.mean(axis=0)
    p = x.shape[1]
    memo: dict = {}
    values: dict[tuple[int, ...], float] = {}
    for key in itertools.combinations_with_replacement(range(p), k):
        values[key] = _cumulant_value(xc, key, memo)
    entries = [
        values[tuple(sorted(idx))] for idx in itertools.product(range(p), repeat=k)
    ]
    return Tensor.of([p] * k, entries, FLOAT)


# -- bootstrap determinant test ----------------------------------------------


@dataclass(frozen=True)
class DeterminantTest:
    """Point statistic, bootstrap spread, and the 2-sd zero flag."""

    statistic: float
    bootstrap_sd: float
    flag: bool

    def to_doc(self) -> dict:
        return {
            "statistic": self.statistic,
            "bootstrap_sd": self.bootstrap_sd,
            "flag": self.flag,
        }


def test_determinant_zero(
    data: SampleMatrix,
    sides: Sequence[Sequence[int]],
    k: int,
    n_boot: int,
    seed: int,
) -> DeterminantTest:
    """Bootstrap heuristic for "is this cumulant subtensor determinant zero?".

    The statistic is the hyperdeterminant of the sample-cumulant
    subtensor indexed by the sides; the flag fires when it lies within
    two bootstrap standard deviations of zero.  Heuristic only — no
    size or power guarantee.  Deterministic per seed: each replicate
    resamples rows under its own stream spawned from the master seed.
    """
    side_lists = [list(s) for s in sides]
    if len(side_lists) != k:
        raise ValueError(f"got {len(side_lists)} sides but k={k}")
    if k not in (2, 3, 4):
        raise OrderUnsupported(f"sample cumulants implemented for orders 2..4, got {k}")
    n = len(side_lists[0])
    if n == 0 or any(len(s) != n for s in side_lists):
        raise ValueError("sides must be nonempty and of equal size")
    if n_boot < 1:
        raise InvalidBootstrapCount(f"n_boot must be >= 1, got {n_boot}")

    # Only the columns the subtensor touches participate, which keeps
    # bootstrap replicates cheap on wide data.
    needed = sorted({v for side in side_lists for v in side})
    cols = [data.column(v) for v in needed]
    pos = {v: i for i, v in enumerate(needed)}
    sub = data.data[:, cols]
    rows = sub.shape[0]

    def statistic(x: np.ndarray) -> float:
        xc = x - x.mean(axis=0)
        memo: dict = {}

        def entry(p: tuple[int, ...]) -> float:
            idx = tuple(pos[side_lists[m][i]] for m, i in enumerate(p))
            return _cumulant_value(xc, idx, memo)

        return float(hyperdet_from_getter(n, k, entry, one=1.0))

    stat = statistic(sub)
    children = np.random.SeedSequence(seed).spawn(n_boot)
    stats = np.empty(n_boot)
    for b, child in enumerate(children):
        rng = np.random.default_rng(child)
        stats[b] = statistic(sub[rng.integers(0, rows, rows)])
    sd = float(np.std(stats, ddof=1)) if n_boot > 1 else 0.0
    return DeterminantTest(
        statistic=stat, bootstrap_sd=sd, flag=bool(abs(stat) <= 2.0 * sd)
    )


# -- data I/O ----------------------------------------------------------------


def write_sample_csv(
    sm: SampleMatrix, path: str | Path, labels: Mapping[int, str] | None = None
) -> None:
    """CSV with one header row of vertex labels (vertex ids by default)."""
    labels = labels or {}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(labels.get(v, str(v)) for v in sm.vertices) + "\n")
        for row in sm.data:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def read_sample_csv(path: str | Path) -> SampleMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError("empty CSV")
        names = header.split(",")
        try:
            vertices = tuple(int(name) for name in names)
        except ValueError:
            vertices = tuple(range(1, len(names) + 1))
        rows = [
            [float(cell) for cell in line.strip().split(",")]
            for line in fh
            if line.strip()
        ]
    return SampleMatrix(data=np.array(rows, dtype=np.float64), vertices=vertices)


def write_sample_binary(sm: SampleMatrix, path: str | Path) -> None:
    """16-byte header (magic "MTRK", u32 rows, u32 cols, 4 reserved bytes),
    then row-major little-endian float64."""
    rows, cols = sm.data.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC + struct.pack("<II", rows, cols) + b"\x00" * 4)
        fh.write(np.ascontiguousarray(sm.data, dtype="<f8").tobytes())


def read_sample_binary(path: str | Path) -> SampleMatrix:
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise ValueError("not a MTRK data file")
    rows, cols = struct.unpack("<II", raw[4:12])
    expected = 16 + rows * cols * 8
    if len(raw) != expected:
        raise ValueError(f"truncated MTRK file: expected {expected} bytes, got {len(raw)}")
    data = np.frombuffer(raw[16:], dtype="<f8").reshape(rows, cols)
    return SampleMatrix(data=data, vertices=tuple(range(1, cols + 1)))
