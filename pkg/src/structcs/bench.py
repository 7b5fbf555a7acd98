"""Seeded Monte Carlo harness: empirical recovery success vs measurements.

For each matrix kind and measurement count n, the harness runs seeded
trials: draw a sparse signal, build a fresh sensing matrix, measure,
decode, and score exact recovery.  Signal seeds depend only on
(master_seed, n, trial), so at a fixed grid cell every matrix kind sees
the same signal and the curves are paired.  Matrix seeds additionally
hash the kind.  Results are fully deterministic for a given config,
independent of worker count, and cached per cell so sweeps resume.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .fastops import dense_operator
from .matrices import (
    BlockStructureSpec,
    DistributionKind,
    MatrixKind,
    build_structured,
    iid_spec,
    toeplitz_block_spec,
    circulant_block_spec,
)
from .recovery import RecoveryStatus, SparseSignal, basis_pursuit, is_exact_recovery, omp

__all__ = [
    "ExperimentConfig",
    "CurveCell",
    "SuccessCurve",
    "KNOWN_KINDS",
    "desk_preset",
    "full_preset",
    "wilson_interval",
    "generate_sparse_signal",
    "spec_template",
    "run_trial",
    "success_curve",
    "write_plot_script",
]

KNOWN_KINDS = ("iid", "toeplitz", "toeplitz-block", "circulant-block")

WILSON_Z = 1.959963984540054  # two-sided 95%


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one success-probability sweep."""

    N: int
    m: int
    kinds: tuple[str, ...]
    n_grid: tuple[int, ...]
    trials: int
    distribution: str = "bernoulli"
    solver: str = "bp"
    success_rel_tol: float = 1e-5
    solver_tol: float = 1e-7
    solver_max_iter: int = 1500
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kinds", tuple(self.kinds))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if list(self.n_grid) != sorted(set(self.n_grid)):
            raise ValueError("n_grid must be strictly increasing")
        if any(n > self.N for n in self.n_grid):
            raise ValueError("every n must be <= N")
        for kind in self.kinds:
            if kind not in KNOWN_KINDS:
                raise ValueError(f"unknown matrix kind template {kind!r}")
        DistributionKind(self.distribution)
        if self.solver not in ("bp", "omp"):
            raise ValueError(f"unknown solver {self.solver!r}")

    def digest(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


def desk_preset(master_seed: int = 0, **overrides) -> ExperimentConfig:
    """Minutes-scale default sweep: N=512, m=10, 200 trials per cell."""
    cfg = ExperimentConfig(
        N=512,
        m=10,
        kinds=("iid", "toeplitz", "toeplitz-block"),
        n_grid=tuple(range(40, 241, 20)) + (256,),
        trials=200,
        master_seed=master_seed,
    )
    return replace(cfg, **overrides) if overrides else cfg


def full_preset(master_seed: int = 0, **overrides) -> ExperimentConfig:
    """Hours-scale sweep at the original experiment size: N=2048, m=20,
    1000 trials per cell (the measurement grid is our choice)."""
    cfg = ExperimentConfig(
        N=2048,
        m=20,
        kinds=("iid", "toeplitz", "toeplitz-block"),
        n_grid=tuple(range(100, 1001, 60)),
        trials=1000,
        master_seed=master_seed,
    )
    return replace(cfg, **overrides) if overrides else cfg


# ---------------------------------------------------------------------------
# seeds, signals, matrix templates


def _derive_seed(master_seed: int, *parts) -> int:
    """Stable 63-bit seed from the master seed and a label path."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master_seed)).encode())
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode())
    return int.from_bytes(h.digest(), "little") >> 1


def generate_sparse_signal(N: int, m: int, seed: int) -> SparseSignal:
    """Uniform random m-subset support with standard normal values."""
    if not 0 <= m <= N:
        raise ValueError(f"m must be in 0..{N}")
    rng = np.random.default_rng([seed])
    support = tuple(sorted(rng.choice(N, size=m, replace=False).tolist())) if m else ()
    values = rng.standard_normal(m)
    return SparseSignal(length=N, support=support, values=values)


def _largest_divisor_at_most(n: int, cap: int) -> int:
    for l in range(min(cap, n), 0, -1):
        if n % l == 0:
            return l
    return 1


def spec_template(kind: str, N: int, m: int, dist: str, n: int, seed: int) -> BlockStructureSpec:
    """Resolve a named matrix-kind template at measurement count n.

    ``toeplitz`` is the scalar band (d = e = 1, l = n, k = N).  For the
    block kinds, l is the largest divisor of n with l <= 3m(3m-1) and
    d = n/l >= 8, and e is the largest divisor of N not exceeding d;
    these choices are echoed in the output metadata.
    """
    if kind == "iid":
        return iid_spec(n, N, dist, seed)
    if kind == "toeplitz":
        return toeplitz_block_spec(k=N, l=n, d=1, e=1, dist_kind=dist, seed=seed)
    if kind in ("toeplitz-block", "circulant-block"):
        l_cap = min(3 * m * (3 * m - 1), max(n // 8, 1))
        l = _largest_divisor_at_most(n, l_cap)
        d = n // l
        e = _largest_divisor_at_most(N, d)
        k = N // e
        build = toeplitz_block_spec if kind == "toeplitz-block" else circulant_block_spec
        return build(k=k, l=l, d=d, e=e, dist_kind=dist, seed=seed)
    raise ValueError(f"unknown matrix kind template {kind!r}")


def run_trial(config: ExperimentConfig, kind: str, n: int, trial_index: int) -> bool:
    """One seeded build-measure-decode round; True on exact recovery.

    The signal seed omits the kind so all kinds share signals at a
    fixed (n, trial); the matrix seed includes it.  Any solver failure
    counts as a non-success.
    """
    signal_seed = _derive_seed(config.master_seed, "signal", n, trial_index)
    signal = generate_sparse_signal(config.N, config.m, signal_seed)
    matrix_seed = _derive_seed(config.master_seed, "matrix", kind, n, trial_index)
    spec = spec_template(kind, config.N, config.m, config.distribution, n, matrix_seed)
    matrix = build_structured(spec)
    op = dense_operator(matrix)
    y = op.forward(signal.to_dense())
    try:
        if config.solver == "bp":
            result = basis_pursuit(op, y, tol=config.solver_tol,
                                   max_iter=config.solver_max_iter)
        else:
            result = omp(op, y, config.m, tol=config.solver_tol)
    except (np.linalg.LinAlgError, ValueError):
        return False
    if result.status is RecoveryStatus.INFEASIBLE:
        return False
    return is_exact_recovery(signal, result, config.success_rel_tol)


# ---------------------------------------------------------------------------
# curves


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson 95% score interval for a binomial fraction."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must be in 0..trials")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class CurveCell:
    kind: str
    n: int
    successes: int
    trials: int

    @property
    def fraction(self) -> float:
        return self.successes / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.successes, self.trials)


@dataclass(frozen=True)
class SuccessCurve:
    config: ExperimentConfig
    cells: tuple[CurveCell, ...]

    def cell(self, kind: str, n: int) -> CurveCell:
        for c in self.cells:
            if c.kind == kind and c.n == n:
                return c
        raise KeyError((kind, n))

    def fractions(self, kind: str) -> list[float]:
        return [c.fraction for c in self.cells if c.kind == kind]

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["kind", "n", "successes", "trials", "fraction", "ci_lo", "ci_hi"])
        for c in self.cells:
            lo, hi = c.ci
            writer.writerow([c.kind, c.n, c.successes, c.trials,
                             f"{c.fraction:.6f}", f"{lo:.6f}", f"{hi:.6f}"])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv_text())


def _cell_key(config: ExperimentConfig, kind: str, n: int) -> str:
    return f"{config.digest()}:{kind}:{n}"


def _run_cell(config: ExperimentConfig, kind: str, n: int) -> int:
    return sum(run_trial(config, kind, n, t) for t in range(config.trials))


def _atomic_write_json(path: Path, payload: dict) -> None:
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh, indent=0, sort_keys=True)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def success_curve(
    config: ExperimentConfig,
    threads: int = 1,
    cache_path=None,
    progress=None,
) -> SuccessCurve:
    """Sweep the full (kind, n) grid; returns the paired success curve.

    ``threads`` > 1 distributes whole cells over worker processes; the
    per-trial seeding makes the outcome identical for any thread count.
    With ``cache_path`` set, completed cells are stored as JSON (written
    atomically per cell) and reused on reruns of the same config.
    """
    cache: dict[str, int] = {}
    cache_file = Path(cache_path) if cache_path else None
    if cache_file and cache_file.exists():
        cache = json.loads(cache_file.read_text())
    cells = [(kind, n) for kind in config.kinds for n in config.n_grid]
    pending = [(kind, n) for kind, n in cells
               if _cell_key(config, kind, n) not in cache]

    def record(kind, n, successes):
        cache[_cell_key(config, kind, n)] = successes
        if cache_file:
            _atomic_write_json(cache_file, cache)
        if progress:
            progress(kind, n, successes)

    if threads > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = {(kind, n): pool.submit(_run_cell, config, kind, n)
                       for kind, n in pending}
            for (kind, n), fut in futures.items():
                record(kind, n, fut.result())
    else:
        for kind, n in pending:
            record(kind, n, _run_cell(config, kind, n))

    out = tuple(
        CurveCell(kind, n, cache[_cell_key(config, kind, n)], config.trials)
        for kind, n in cells
    )
    return SuccessCurve(config=config, cells=out)


def write_plot_script(path, csv_name: str = "curve.csv", kinds=KNOWN_KINDS) -> None:
    """Emit a gnuplot script that renders the curve CSV."""
    lines = [
        "# gnuplot script; expects the curve CSV in the same directory",
        "set datafile separator comma",
        "set key bottom right",
        'set xlabel "measurements n"',
        'set ylabel "empirical success fraction"',
        "set yrange [0:1.05]",
    ]
    plots = [
        f'"{csv_name}" using 2:(strcol(1) eq "{kind}" ? $5 : 1/0) '
        f'with linespoints title "{kind}"'
        for kind in kinds
    ]
    lines.append("plot " + ", \\\n     ".join(plots))
    Path(path).write_text("\n".join(lines) + "\n")
