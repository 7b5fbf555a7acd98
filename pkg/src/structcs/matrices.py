"""Construction of IID and block-structured sensing matrices.

A matrix is described by a declarative :class:`BlockStructureSpec` and
materialized as a :class:`SensingMatrix`: the dense entries plus a
``var_id`` array recording which underlying scalar random variable each
entry is a copy of.  Structural entry sharing (Toeplitz / circulant
block repetition) is therefore exact and queryable downstream, immune
to floating-point coincidences.

Layout conventions, 0-indexed.  With ``k`` block columns, ``l`` block
rows and blocks of shape ``d x e``:

* Toeplitz-block: the block at block position ``(i, j)`` is block number
  ``k - 1 + i - j``; the top-right block is block 0, the bottom-left
  block is ``k + l - 2``.  ``k + l - 1`` distinct blocks in total.
* Circulant-block: block number ``(k - 1 + i - j) % k``; ``k`` distinct
  blocks.  Indices wrap modulo ``k`` for any ``l`` (the displayed layout
  only needs ``l <= k + 1``; larger ``l`` repeats block rows, which we
  allow and flag as an extension).
* Nested kinds place a circulant grid of scalar entries (or of IID
  sub-blocks) inside each outer block; distinct outer blocks are fresh
  samples of the inner structure.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MatrixKind",
    "DistributionKind",
    "EntryDistribution",
    "InnerSpec",
    "BlockStructureSpec",
    "SensingMatrix",
    "sample_iid",
    "build_structured",
    "column_block_of",
    "distinct_blocks",
    "distinct_label_count",
    "truncate_rows",
    "toeplitz_block_spec",
    "circulant_block_spec",
    "circulant_circulant_spec",
    "circulant_circulant_block_spec",
    "iid_spec",
    "spec_to_dict",
    "spec_from_dict",
    "spec_to_json",
    "spec_from_json",
]


class MatrixKind(str, enum.Enum):
    """Supported matrix layouts."""

    IID = "iid"
    TOEPLITZ_BLOCK = "toeplitz-block"
    CIRCULANT_BLOCK = "circulant-block"
    CIRCULANT_CIRCULANT = "circulant-circulant"
    CIRCULANT_CIRCULANT_BLOCK = "circulant-circulant-block"
    DETERMINISTIC = "deterministic"


class DistributionKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    BERNOULLI = "bernoulli"
    SPARSE_TERNARY = "sparse-ternary"


@dataclass(frozen=True)
class EntryDistribution:
    """Scalar entry distribution, normalized by the matrix row count.

    With ``n = scale_rows``: Gaussian entries are N(0, 1/n); Bernoulli
    entries are +-1/sqrt(n) with probability 1/2 each; sparse ternary
    entries are +-sqrt(3/n) with probability 1/6 each and 0 otherwise.
    All three give a column of n independent samples expected squared
    norm 1.
    """

    kind: DistributionKind
    scale_rows: int

    def __post_init__(self):
        object.__setattr__(self, "kind", DistributionKind(self.kind))
        if self.scale_rows < 1:
            raise ValueError(f"scale_rows must be >= 1, got {self.scale_rows}")

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        n = self.scale_rows
        if self.kind is DistributionKind.GAUSSIAN:
            return rng.standard_normal(count) / math.sqrt(n)
        if self.kind is DistributionKind.BERNOULLI:
            signs = rng.integers(0, 2, size=count) * 2 - 1
            return signs / math.sqrt(n)
        # sparse ternary: sextile draw, two faces carry the spikes
        u = rng.integers(0, 6, size=count)
        vals = np.zeros(count)
        vals[u == 0] = math.sqrt(3.0 / n)
        vals[u == 1] = -math.sqrt(3.0 / n)
        return vals


@dataclass(frozen=True)
class InnerSpec:
    """Dimensions of the structure nested inside each outer block."""

    kind: MatrixKind
    k: int
    l: int
    d: int
    e: int

    def __post_init__(self):
        object.__setattr__(self, "kind", MatrixKind(self.kind))
        for name in ("k", "l", "d", "e"):
            if getattr(self, name) < 1:
                raise ValueError(f"inner {name} must be >= 1")
        if self.kind is not MatrixKind.CIRCULANT_BLOCK:
            raise ValueError("only circulant-block nesting is supported")

    @property
    def rows(self) -> int:
        return self.l * self.d

    @property
    def cols(self) -> int:
        return self.k * self.e


@dataclass(frozen=True)
class BlockStructureSpec:
    """Declarative description of a structured sensing matrix.

    ``k``: block columns, ``l``: block rows, ``d x e``: block shape, so
    the matrix is ``n x N`` with ``n = l*d`` and ``N = k*e``.  ``nested``
    is required for the two doubly-circulant kinds and must tile the
    outer block exactly.
    """

    kind: MatrixKind
    k: int
    l: int
    d: int
    e: int
    distribution: EntryDistribution
    seed: int
    nested: InnerSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", MatrixKind(self.kind))
        for name in ("k", "l", "d", "e"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        needs_nested = self.kind in (
            MatrixKind.CIRCULANT_CIRCULANT,
            MatrixKind.CIRCULANT_CIRCULANT_BLOCK,
        )
        if needs_nested:
            if self.nested is None:
                raise ValueError(f"{self.kind.value} requires a nested inner spec")
            if self.nested.rows != self.d or self.nested.cols != self.e:
                raise ValueError(
                    f"nested structure is {self.nested.rows}x{self.nested.cols} "
                    f"but outer blocks are {self.d}x{self.e}"
                )
            if self.kind is MatrixKind.CIRCULANT_CIRCULANT and (
                self.nested.d != 1 or self.nested.e != 1
            ):
                raise ValueError("circulant-circulant requires scalar inner blocks")
        elif self.nested is not None:
            raise ValueError(f"{self.kind.value} does not take a nested spec")

    @property
    def n(self) -> int:
        return self.l * self.d

    @property
    def N(self) -> int:
        return self.k * self.e

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.N)


@dataclass(frozen=True)
class SensingMatrix:
    """Materialized sensing matrix with entry-level provenance.

    ``var_id[i, j]`` labels the scalar random variable copied into entry
    ``(i, j)``; equal labels imply bit-identical entries.  Arrays are
    frozen after construction and safe to share across threads.
    """

    entries: np.ndarray
    spec: BlockStructureSpec
    var_id: np.ndarray

    def __post_init__(self):
        if self.entries.shape != self.var_id.shape:
            raise ValueError("entries and var_id shapes differ")
        self.entries.setflags(write=False)
        self.var_id.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def N(self) -> int:
        return self.entries.shape[1]

    @property
    def is_truncated(self) -> bool:
        return self.entries.shape[0] != self.spec.n


# ---------------------------------------------------------------------------
# spec helpers


def iid_spec(rows, cols, dist_kind=DistributionKind.GAUSSIAN, seed=0):
    dist = EntryDistribution(DistributionKind(dist_kind), rows)
    return BlockStructureSpec(MatrixKind.IID, 1, 1, rows, cols, dist, seed)


def toeplitz_block_spec(k, l, d, e, dist_kind=DistributionKind.GAUSSIAN, seed=0):
    dist = EntryDistribution(DistributionKind(dist_kind), l * d)
    return BlockStructureSpec(MatrixKind.TOEPLITZ_BLOCK, k, l, d, e, dist, seed)


def circulant_block_spec(k, l, d, e, dist_kind=DistributionKind.GAUSSIAN, seed=0):
    dist = EntryDistribution(DistributionKind(dist_kind), l * d)
    return BlockStructureSpec(MatrixKind.CIRCULANT_BLOCK, k, l, d, e, dist, seed)


def circulant_circulant_spec(k, l, p, q, dist_kind=DistributionKind.GAUSSIAN, seed=0):
    """Circulant grid of k x l outer blocks, each a q x p circulant of scalars."""
    dist = EntryDistribution(DistributionKind(dist_kind), l * q)
    inner = InnerSpec(MatrixKind.CIRCULANT_BLOCK, p, q, 1, 1)
    return BlockStructureSpec(
        MatrixKind.CIRCULANT_CIRCULANT, k, l, q, p, dist, seed, nested=inner
    )


def circulant_circulant_block_spec(
    k1, l1, k2, l2, d2, e2, dist_kind=DistributionKind.GAUSSIAN, seed=0
):
    """Circulant grid of outer blocks, each a circulant grid of IID d2 x e2 blocks."""
    dist = EntryDistribution(DistributionKind(dist_kind), l1 * l2 * d2)
    inner = InnerSpec(MatrixKind.CIRCULANT_BLOCK, k2, l2, d2, e2)
    return BlockStructureSpec(
        MatrixKind.CIRCULANT_CIRCULANT_BLOCK,
        k1,
        l1,
        l2 * d2,
        k2 * e2,
        dist,
        seed,
        nested=inner,
    )


# ---------------------------------------------------------------------------
# label grids


def _block_id_grid(kind: MatrixKind, k: int, l: int) -> np.ndarray:
    """Block number at each block position (l x k grid)."""
    i = np.arange(l)[:, None]
    j = np.arange(k)[None, :]
    ids = (k - 1) + i - j
    if kind in (
        MatrixKind.CIRCULANT_BLOCK,
        MatrixKind.CIRCULANT_CIRCULANT,
        MatrixKind.CIRCULANT_CIRCULANT_BLOCK,
    ):
        ids = ids % k
    return ids


def _num_blocks(kind: MatrixKind, k: int, l: int) -> int:
    if kind is MatrixKind.TOEPLITZ_BLOCK:
        return k + l - 1
    return k


def _tile_labels(bid: np.ndarray, inner: np.ndarray, inner_count: int) -> np.ndarray:
    """Expand a block-id grid with per-block inner labels into a full grid."""
    l, k = bid.shape
    d, e = inner.shape
    full = bid[:, None, :, None] * inner_count + inner[None, :, None, :]
    return full.reshape(l * d, k * e)


def _inner_labels(spec: BlockStructureSpec) -> tuple[np.ndarray, int]:
    """Label grid of one block and the count of distinct labels in it."""
    if spec.nested is None:
        return np.arange(spec.d * spec.e).reshape(spec.d, spec.e), spec.d * spec.e
    inner = spec.nested
    leaf = np.arange(inner.d * inner.e).reshape(inner.d, inner.e)
    bid = _block_id_grid(inner.kind, inner.k, inner.l)
    grid = _tile_labels(bid, leaf, inner.d * inner.e)
    return grid, inner.k * inner.d * inner.e


def distinct_label_count(spec: BlockStructureSpec) -> int:
    """Number of independent scalar random variables behind the matrix."""
    if spec.kind is MatrixKind.IID:
        return spec.n * spec.N
    _, per_block = _inner_labels(spec)
    return _num_blocks(spec.kind, spec.k, spec.l) * per_block


def _sample_pool(spec: BlockStructureSpec) -> np.ndarray:
    """Sample one value per distinct label, in per-block substreams.

    Substreams are derived from ``(seed, block)`` or
    ``(seed, block, inner_block)``, so the sampling order of blocks is
    irrelevant to the result.
    """
    dist = spec.distribution
    if spec.kind is MatrixKind.IID:
        rng = np.random.default_rng([spec.seed])
        return dist.sample(rng, spec.n * spec.N)
    n_blocks = _num_blocks(spec.kind, spec.k, spec.l)
    if spec.nested is None:
        per_block = spec.d * spec.e
        pool = np.empty(n_blocks * per_block)
        for b in range(n_blocks):
            rng = np.random.default_rng([spec.seed, b])
            pool[b * per_block : (b + 1) * per_block] = dist.sample(rng, per_block)
        return pool
    inner = spec.nested
    leaf = inner.d * inner.e
    per_block = inner.k * leaf
    pool = np.empty(n_blocks * per_block)
    for b in range(n_blocks):
        for c in range(inner.k):
            rng = np.random.default_rng([spec.seed, b, c])
            start = b * per_block + c * leaf
            pool[start : start + leaf] = dist.sample(rng, leaf)
    return pool


def build_structured(spec: BlockStructureSpec) -> SensingMatrix:
    """Materialize a spec into entries plus provenance labels.

    The block layout follows the module-level conventions; blocks are
    fresh IID samples that share entries only through structural
    repetition, which ``var_id`` records exactly.
    """
    if spec.kind is MatrixKind.DETERMINISTIC:
        raise ValueError("deterministic matrices are built by structcs.devore")
    if spec.kind is MatrixKind.IID:
        var_id = np.arange(spec.n * spec.N, dtype=np.int64).reshape(spec.shape)
    else:
        inner, per_block = _inner_labels(spec)
        bid = _block_id_grid(spec.kind, spec.k, spec.l)
        var_id = _tile_labels(bid, inner, per_block).astype(np.int64)
    pool = _sample_pool(spec)
    entries = pool[var_id]
    return SensingMatrix(entries=entries, spec=spec, var_id=var_id)


def sample_iid(rows: int, cols: int, dist: EntryDistribution, seed: int) -> SensingMatrix:
    """Fully independent rows x cols matrix; every var_id label distinct."""
    if rows < 1 or cols < 1:
        raise ValueError(f"matrix dimensions must be >= 1, got {rows}x{cols}")
    spec = BlockStructureSpec(MatrixKind.IID, 1, 1, rows, cols, dist, seed)
    return build_structured(spec)


def column_block_of(spec: BlockStructureSpec, col: int) -> int:
    """Block column containing matrix column ``col``."""
    if not 0 <= col < spec.N:
        raise IndexError(f"column {col} out of range for N={spec.N}")
    return col // spec.e


def distinct_blocks(matrix: SensingMatrix) -> np.ndarray:
    """The distinct block values, shape (num_blocks, d, e), in block order.

    Block ``b`` is read from its first occurrence in the grid: blocks
    ``0..k-1`` appear along the top block row (right to left), and for
    the Toeplitz kind blocks ``k..k+l-2`` continue down the left block
    column.  Requires an untruncated matrix.
    """
    spec = matrix.spec
    if spec.kind is MatrixKind.IID:
        raise ValueError("an IID matrix has no repeated block structure")
    if matrix.is_truncated:
        raise ValueError("cannot extract blocks from a truncated matrix")
    d, e = spec.d, spec.e
    out = np.empty((_num_blocks(spec.kind, spec.k, spec.l), d, e))
    for b in range(out.shape[0]):
        if b < spec.k:
            i, j = 0, spec.k - 1 - b
        else:
            i, j = b - spec.k + 1, 0
        out[b] = matrix.entries[i * d : (i + 1) * d, j * e : (j + 1) * e]
    return out


def truncate_rows(matrix: SensingMatrix, rows: int) -> SensingMatrix:
    """Keep the first ``rows`` rows (a truncated block matrix).

    The spec is retained unchanged; ``is_truncated`` becomes true and
    block extraction / fast products fall back to dense paths.
    """
    if not 1 <= rows <= matrix.n:
        raise ValueError(f"rows must be in 1..{matrix.n}, got {rows}")
    if rows == matrix.n:
        return matrix
    return SensingMatrix(
        entries=matrix.entries[:rows].copy(),
        spec=matrix.spec,
        var_id=matrix.var_id[:rows].copy(),
    )


# ---------------------------------------------------------------------------
# JSON serialization


def spec_to_dict(spec: BlockStructureSpec) -> dict:
    nested = None
    if spec.nested is not None:
        inner = spec.nested
        nested = {"kind": inner.kind.value, "k": inner.k, "l": inner.l,
                  "d": inner.d, "e": inner.e}
    return {
        "kind": spec.kind.value,
        "k": spec.k,
        "l": spec.l,
        "d": spec.d,
        "e": spec.e,
        "nested": nested,
        "distribution": {
            "kind": spec.distribution.kind.value,
            "scale_rows": spec.distribution.scale_rows,
        },
        "seed": spec.seed,
    }


def spec_from_dict(data: dict) -> BlockStructureSpec:
    nested = data.get("nested")
    inner = None
    if nested is not None:
        inner = InnerSpec(MatrixKind(nested["kind"]), nested["k"], nested["l"],
                          nested["d"], nested["e"])
    dist = EntryDistribution(
        DistributionKind(data["distribution"]["kind"]),
        data["distribution"]["scale_rows"],
    )
    return BlockStructureSpec(
        MatrixKind(data["kind"]), data["k"], data["l"], data["d"], data["e"],
        dist, data["seed"], nested=inner,
    )


def spec_to_json(spec: BlockStructureSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2, sort_keys=True)


def spec_from_json(text: str) -> BlockStructureSpec:
    return spec_from_dict(json.loads(text))
