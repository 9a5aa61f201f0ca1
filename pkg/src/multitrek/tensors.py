"""Dense order-k tensors over exact rationals or floats.

Carries the cumulant/moment/noise tensors and the combinatorial
(Cayley) determinant of a cubical tensor: the signed sum over
(k-1)-tuples of permutations

    det(T) = sum_{s_2..s_k} sign(s_2)...sign(s_k) prod_i T[i, s_2(i), ..., s_k(i)].

Mode 1 carries no permutation and hence no sign: two equal slices force
a zero determinant only along modes >= 2 (or anywhere at k = 2).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import DimMismatch, IndexOutOfRange, NotCubical, SchemaError
from .ser import frac_from_str, frac_to_str

Scalar = Fraction | float

RATIONAL = "rational"
FLOAT = "float"


@dataclass(frozen=True)
class Tensor:
    """Immutable dense tensor; ``entries`` is row-major of length prod(dims).

    The scalar kind is uniform: "rational" entries are Fractions,
    "float" entries are Python floats.  Ints in the input are coerced
    to the declared kind.
    """

    order: int
    dims: tuple[int, ...]
    entries: tuple[Scalar, ...]
    scalar: str

    def __post_init__(self) -> None:
        if self.order != len(self.dims):
            raise DimMismatch(f"order {self.order} != len(dims) {self.dims}")
        if any(d < 0 for d in self.dims):
            raise DimMismatch(f"negative dimension in {self.dims}")
        if len(self.entries) != math.prod(self.dims):
            raise DimMismatch(
                f"{len(self.entries)} entries for dims {self.dims}"
            )
        if self.scalar not in (RATIONAL, FLOAT):
            raise ValueError(f"unknown scalar kind {self.scalar!r}")
        coerce = Fraction if self.scalar == RATIONAL else float
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "entries", tuple(coerce(e) for e in self.entries))

    @classmethod
    def of(cls, dims: Sequence[int], entries: Iterable[Scalar], scalar: str | None = None) -> "Tensor":
        """Build a tensor, inferring the scalar kind when not given."""
        ent = list(entries)
        if scalar is None:
            scalar = FLOAT if any(isinstance(e, float) for e in ent) else RATIONAL
        return cls(order=len(dims), dims=tuple(dims), entries=tuple(ent), scalar=scalar)

    @classmethod
    def build(cls, dims: Sequence[int], fn: Callable[[tuple[int, ...]], Scalar], scalar: str = RATIONAL) -> "Tensor":
        """Materialize fn over all multi-indices in row-major order."""
        ent = [fn(idx) for idx in itertools.product(*(range(d) for d in dims))]
        return cls(order=len(dims), dims=tuple(dims), entries=tuple(ent), scalar=scalar)

    def at(self, idx: Sequence[int]) -> Scalar:
        """Entry at a multi-index (0-based)."""
        if len(idx) != self.order:
            raise IndexOutOfRange(f"index {tuple(idx)} has wrong length for dims {self.dims}")
        off = 0
        for d, i in zip(self.dims, idx):
            if not 0 <= i < d:
                raise IndexOutOfRange(f"index {tuple(idx)} out of range for dims {self.dims}")
            off = off * d + i
        return self.entries[off]


@dataclass(frozen=True)
class DiagonalSpec:
    """Diagonal order-k tensor given by its on-diagonal values per vertex.

    Values are usually Fractions; other ring elements (polynomials)
    pass through untouched so symbolic instances can reuse the type.
    """

    values: Mapping[int, Scalar]

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "values",
            {
                int(v): Fraction(x) if isinstance(x, (int, Fraction)) else x
                for v, x in sorted(self.values.items())
            },
        )

    def expand(self, vertices: Sequence[int], order: int) -> Tensor:
        """Dense tensor over the given vertex ordering; zero off the diagonal."""
        p = len(vertices)

        def fn(idx: tuple[int, ...]) -> Fraction:
            if all(i == idx[0] for i in idx):
                return self.values.get(vertices[idx[0]], Fraction(0))
            return Fraction(0)

        return Tensor.build([p] * order, fn, RATIONAL)


def tucker_apply(t: Tensor, m: Sequence[Sequence[Scalar]]) -> Tensor:
    """Tucker product of t with the matrix m applied along every mode.

    Result entry (i_1..i_k) = sum over (j_1..j_k) of
    t[j_1..j_k] * m[j_1][i_1] * ... * m[j_k][i_k].  Computed mode by
    mode; exact when inputs are exact.
    """
    rows = [list(r) for r in m]
    d = len(rows)
    if any(dim != d for dim in t.dims) or any(len(r) != d for r in rows):
        raise DimMismatch(f"tensor dims {t.dims} need a square {t.dims[0] if t.dims else 0}-matrix")
    entries = list(t.entries)
    dims = list(t.dims)
    for mode in range(t.order):
        entries = _contract_mode(entries, dims, mode, rows)
    scalar = t.scalar
    if any(isinstance(x, float) for row in rows for x in row):
        scalar = FLOAT
    return Tensor.of(tuple(dims), entries, scalar)


def contract_mode(t: Tensor, mode: int, m: Sequence[Sequence[Scalar]]) -> Tensor:
    """Contract one mode of t with m along m's first index.

    Result entry with i_mode = a equals sum_j t[..., j, ...] * m[j][a];
    the mode's dimension becomes the number of columns of m.
    """
    rows = [list(r) for r in m]
    if len(rows) != t.dims[mode]:
        raise DimMismatch(f"mode {mode} has dim {t.dims[mode]}, matrix has {len(rows)} rows")
    dims = list(t.dims)
    entries = _contract_mode(list(t.entries), dims, mode, rows)
    scalar = t.scalar
    if any(isinstance(x, float) for row in rows for x in row):
        scalar = FLOAT
    return Tensor.of(tuple(dims), entries, scalar)


def _contract_mode(entries: list, dims: list[int], mode: int, rows: list[list]) -> list:
    """In-place-style helper: returns new entries, updates dims[mode]."""
    d_in = dims[mode]
    d_out = len(rows[0]) if rows else 0
    out_dims = dims[:mode] + [d_out] + dims[mode + 1:]
    out = [0] * math.prod(out_dims)
    if entries:
        in_strides = _strides(dims)
        out_strides = _strides(out_dims)
        for off, val in enumerate(entries):
            if not val:
                continue
            j = (off // in_strides[mode]) % d_in
            base = off - j * in_strides[mode]
            # same multi-index in the output coordinate system, mode cleared
            out_base = 0
            rem = base
            for axis, s in enumerate(in_strides):
                q, rem = divmod(rem, s)
                out_base += q * out_strides[axis]
            row = rows[j]
            for a in range(d_out):
                if row[a]:
                    out[out_base + a * out_strides[mode]] += val * row[a]
    dims[mode] = d_out
    return out


def _strides(dims: Sequence[int]) -> list[int]:
    st = [1] * len(dims)
    for i in range(len(dims) - 2, -1, -1):
        st[i] = st[i + 1] * dims[i + 1]
    return st


def hyperdeterminant(t: Tensor) -> Scalar:
    """Combinatorial determinant of a cubical order-k tensor (k >= 2)."""
    if t.order < 2:
        raise NotCubical(f"order {t.order} < 2")
    n = t.dims[0]
    if any(d != n for d in t.dims):
        raise NotCubical(f"dims {t.dims} are not all equal")
    if t.scalar == RATIONAL:
        return Fraction(hyperdet_from_getter(n, t.order, t.at, one=Fraction(1)))
    return float(hyperdet_from_getter(n, t.order, t.at, one=1.0))


def hyperdet_from_getter(
    n: int,
    order: int,
    entry: Callable[[tuple[int, ...]], object],
    one: object = 1,
):
    """Permutation-expansion determinant with entries supplied on demand.

    ``entry`` maps a 0-based multi-index to a scalar; any value type
    supporting +, * and truthiness-as-nonzero works (rationals, floats,
    polynomials).  Returns ``one`` for n = 0 (empty Leibniz product).
    """
    if n == 0:
        return one
    perms = list(itertools.permutations(range(n)))
    signs = [perm_sign(p) for p in perms]
    total = 0
    for combo in itertools.product(range(len(perms)), repeat=order - 1):
        term = one
        sign = 1
        for c in combo:
            sign *= signs[c]
        zero = False
        for i in range(n):
            val = entry((i,) + tuple(perms[c][i] for c in combo))
            if not val:
                zero = True
                break
            term = term * val
        if zero:
            continue
        total = total + (term if sign > 0 else -term)
    return total


def perm_sign(p: Sequence[int]) -> int:
    """Sign of a permutation given as a sequence of 0-based positions."""
    inversions = sum(
        1 for a in range(len(p)) for b in range(a + 1, len(p)) if p[a] > p[b]
    )
    return -1 if inversions % 2 else 1


def det_matrix(rows: Sequence[Sequence[Scalar]]) -> Scalar:
    """Determinant by Gaussian elimination; exact for Fraction entries."""
    n = len(rows)
    if n == 0:
        return Fraction(1)
    if any(len(r) != n for r in rows):
        raise DimMismatch("matrix is not square")
    a = [list(r) for r in rows]
    det = a[0][0] - a[0][0] + 1  # one in the entries' arithmetic
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col]), None)
        if pivot is None:
            return det * 0
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det = det * a[col][col]
        inv = a[col][col]
        for r in range(col + 1, n):
            if a[r][col]:
                factor = a[r][col] / inv
                for c in range(col, n):
                    a[r][c] = a[r][c] - factor * a[col][c]
    return det


def subtensor(t: Tensor, sides: Sequence[Sequence[int]]) -> Tensor:
    """Restrict each mode i to the ordered index list sides[i] (0-based)."""
    if len(sides) != t.order:
        raise DimMismatch(f"{len(sides)} index lists for order-{t.order} tensor")
    for mode, side in enumerate(sides):
        for i in side:
            if not 0 <= i < t.dims[mode]:
                raise IndexOutOfRange(f"index {i} out of range in mode {mode + 1}")
    lists = [list(s) for s in sides]

    def fn(idx: tuple[int, ...]) -> Scalar:
        return t.at(tuple(lists[m][i] for m, i in enumerate(idx)))

    return Tensor.build([len(s) for s in lists], fn, t.scalar)


def cauchy_binet_check(a: Tensor, b: Sequence[Sequence[Scalar]]) -> bool:
    """Verify det(a contracted with b along mode 2) against the minor expansion.

    ``a`` has dims (p, n, p, ..., p) and ``b`` is n x p.  The identity
    det(a.b) = sum over size-p subsets I of [n] of det(a_I) * det(b_I)
    holds because mode 2 is a signed mode of the determinant.  Intended
    for exact scalars; a test oracle, not a decision-path routine.
    """
    rows = [list(r) for r in b]
    if a.order < 2:
        raise DimMismatch("need order >= 2")
    p = a.dims[0]
    n = a.dims[1]
    if any(a.dims[m] != p for m in range(a.order) if m != 1):
        raise DimMismatch(f"dims {a.dims} must be p in every mode but the second")
    if len(rows) != n or any(len(r) != p for r in rows):
        raise DimMismatch(f"matrix must be {n}x{p}")
    lhs = hyperdeterminant(contract_mode(a, 1, rows))
    rhs: Scalar = Fraction(0) if a.scalar == RATIONAL else 0.0
    full = list(range(p))
    for subset in itertools.combinations(range(n), p):
        a_i = subtensor(a, [full, list(subset)] + [full] * (a.order - 2))
        b_i = [rows[i] for i in subset]
        rhs += hyperdeterminant(a_i) * det_matrix(b_i)
    return lhs == rhs


# -- JSON interface ------------------------------------------------------


def tensor_to_json(t: Tensor) -> str:
    entries: list[object]
    if t.scalar == RATIONAL:
        entries = [frac_to_str(e) for e in t.entries]
    else:
        entries = list(t.entries)
    doc = {"order": t.order, "dims": list(t.dims), "scalar": t.scalar, "entries": entries}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def tensor_from_json(text: str) -> Tensor:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("/", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("/", "top level must be an object")
    for key in ("order", "dims", "scalar", "entries"):
        if key not in doc:
            raise SchemaError(f"/{key}", "missing")
    scalar = doc["scalar"]
    if scalar not in (RATIONAL, FLOAT):
        raise SchemaError("/scalar", f"unknown kind {scalar!r}")
    if scalar == RATIONAL:
        entries = [
            frac_from_str(e, f"/entries/{i}") if isinstance(e, str) else Fraction(e)
            for i, e in enumerate(doc["entries"])
        ]
    else:
        entries = [float(e) for e in doc["entries"]]
    t = Tensor(
        order=int(doc["order"]),
        dims=tuple(int(d) for d in doc["dims"]),
        entries=tuple(entries),
        scalar=scalar,
    )
    return t
