"""Seeded Monte Carlo survey over random qutrit reference states.

Sampling law
------------
``v = 3 * (E1, E2, E3) / (E1 + E2 + E3)`` with ``E_k`` standard exponentials
(a uniform point on the simplex scaled to sum 3), and ``u_k`` independent and
uniform on ``u_range``.  States that are not positive definite are rejected
and counted.  The default ``u_range`` is ``(0, 1/3)``, the admissible range of
the symmetric single-``u`` family.

Random numbers
--------------
Sample ``i`` reads raw 64-bit words ``8*i .. 8*i + 7`` of a Philox-4x64-10
stream keyed by the seed (``numpy.random.Philox``).  Philox is counter based,
so any sample can be regenerated without replaying the ones before it and the
output does not depend on chunking or on the number of workers.
"""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterator, Optional, TextIO

import numpy as np

from .closed_forms import ReferenceStateParams, reference_matrix
from .linalg import RANK_FLOOR, eigh_batch
from .qfi import (
    DINV_TOL,
    DELTA_ZERO,
    Classification,
    _capital_delta,
    _d_invariant,
    _delta,
    _derivatives,
    _generator_scale,
    _inv2,
    _inverse_from_eig,
    _regular_mask,
    _rld_fisher,
    _sld,
    _sld_fisher,
)

WORDS_PER_SAMPLE = 8
CSV_HEADER = "index,v1,v2,v3,u1,u2,u3,u_max,lambda_min,lambda_max,delta_im,Delta,classification"
CLASS_NAMES = np.array([c.value for c in Classification])
_CODE = {c: i for i, c in enumerate(Classification)}


@dataclass(frozen=True)
class SampleConfig:
    n_samples: int
    seed: int
    u_range: tuple[float, float] = (0.0, 1.0 / 3.0)
    x: tuple[float, float, float] = (1.0, 2.0, 3.0)
    y: tuple[float, float, float] = (1.5, 5.0, 1.0)
    chunk_size: int = 1 << 16
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.n_samples, bool) or not isinstance(self.n_samples, int) or self.n_samples < 1:
            raise ValueError(f"n_samples must be a positive integer, got {self.n_samples!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        lo, hi = (float(t) for t in self.u_range)
        if not (math.isfinite(lo) and math.isfinite(hi) and 0.0 <= lo <= hi):
            raise ValueError(f"u_range must satisfy 0 <= lo <= hi, got {self.u_range!r}")
        object.__setattr__(self, "u_range", (lo, hi))
        for name in ("x", "y"):
            vec = tuple(float(t) for t in getattr(self, name))
            if len(vec) != 3 or not all(math.isfinite(t) for t in vec):
                raise ValueError(f"{name} must be a finite 3-vector")
            object.__setattr__(self, name, vec)
        if self.chunk_size < 1 or self.workers < 1:
            raise ValueError("chunk_size and workers must be positive")


@dataclass(frozen=True)
class SampleRecord:
    index: int
    params: ReferenceStateParams
    lambda_min: float
    lambda_max: float
    u_max: float
    delta_im: float
    capital_delta: float
    classification: str


@dataclass
class SampleSummary:
    n_generated: int = 0
    n_accepted: int = 0
    n_rejected_positivity: int = 0
    n_nonregular: int = 0
    n_delta_positive: int = 0
    n_d_invariant: int = 0
    fraction_delta_positive: float = 0.0
    lambda_min_over_positive: Optional[float] = None
    lambda_max_over_positive: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ChunkResult:
    """Accepted samples of one index range, plus the rejection counts."""

    start: int
    stop: int
    index: np.ndarray
    v: np.ndarray
    u: np.ndarray
    lambda_min: np.ndarray
    lambda_max: np.ndarray
    delta_im: np.ndarray
    capital_delta: np.ndarray
    code: np.ndarray
    n_rejected_positivity: int
    n_nonregular: int

    def __len__(self) -> int:
        return self.index.size

    @property
    def classification(self) -> np.ndarray:
        return CLASS_NAMES[self.code]


def raw_words(seed: int, start: int, count: int) -> np.ndarray:
    """Raw Philox words for samples ``start .. start + count - 1``, shape ``(count, 8)``."""
    # each Philox counter step yields four words, so sample i starts at counter 2*i
    bitgen = np.random.Philox(key=seed, counter=2 * start)
    return bitgen.random_raw(WORDS_PER_SAMPLE * count).reshape(count, WORDS_PER_SAMPLE)


def substream(seed: int, index: int) -> np.ndarray:
    return raw_words(seed, index, 1)[0]


def _unit(words: np.ndarray) -> np.ndarray:
    """Map uint64 words to doubles in ``[0, 1)`` using the top 53 bits."""
    return (words >> np.uint64(11)).astype(np.float64) * 2.0**-53


def _params_from_words(words: np.ndarray, u_range) -> tuple[np.ndarray, np.ndarray]:
    words = np.asarray(words, dtype=np.uint64)
    e = -np.log1p(-_unit(words[..., 0:3]))
    total = e.sum(axis=-1, keepdims=True)
    degenerate = total == 0.0
    e = np.where(degenerate, 1.0, e)
    total = np.where(degenerate, 3.0, total)
    v = 3.0 * e / total
    lo, hi = u_range
    u = lo + (hi - lo) * _unit(words[..., 3:6])
    return v, u


def sample_params(words, u_range=(0.0, 1.0 / 3.0)) -> ReferenceStateParams:
    """Draw one parameter set from an 8-word substream; positivity is not checked."""
    v, u = _params_from_words(np.asarray(words, dtype=np.uint64).reshape(WORDS_PER_SAMPLE), u_range)
    return ReferenceStateParams(*(float(t) for t in v), *(float(t) for t in u))


def evaluate_chunk(cfg: SampleConfig, start: int, stop: int) -> ChunkResult:
    count = stop - start
    v, u = _params_from_words(raw_words(cfg.seed, start, count), cfg.u_range)
    rho = reference_matrix(v, u)
    w, vecs = eigh_batch(rho)
    pos = w[:, 0] > RANK_FLOOR
    n_rej = int(count - pos.sum())
    idx = np.arange(start, stop)[pos]
    v, u, rho, w, vecs = v[pos], u[pos], rho[pos], w[pos], vecs[pos]

    X = np.diag(np.asarray(cfg.x, dtype=complex))
    Y = np.diag(np.asarray(cfg.y, dtype=complex))
    d1, d2 = _derivatives(rho, X, Y)
    JS = _sld_fisher(rho, _sld(d1, w, vecs), _sld(d2, w, vecs))
    rho_inv = _inverse_from_eig(w, vecs)
    JR = _rld_fisher(d1, d2, rho_inv)
    dlt = _delta(rho, X, Y, rho_inv)

    reg = _regular_mask(JS, _generator_scale(X, Y))
    n_nonreg = int(reg.size - reg.sum())
    idx, v, u, w = idx[reg], v[reg], u[reg], w[reg]
    JS, JR, dlt = JS[reg], JR[reg], dlt[reg]

    S_inv = _inv2(JS)
    R_inv = _inv2(JR)
    R_inv = (R_inv + np.conj(np.swapaxes(R_inv, -1, -2))) / 2
    cap = _capital_delta(S_inv, R_inv)
    dinv = _d_invariant(S_inv, R_inv, DINV_TOL)

    code = np.full(idx.size, _CODE[Classification.SLD_DOMINANT])
    code[cap > 0] = _CODE[Classification.INTERSECTING]
    code[dinv] = _CODE[Classification.RLD_DOMINANT]
    code[np.abs(dlt) < DELTA_ZERO] = _CODE[Classification.NO_TRADEOFF]

    return ChunkResult(
        start=start,
        stop=stop,
        index=idx,
        v=v,
        u=u,
        lambda_min=w[:, 0],
        lambda_max=w[:, -1],
        delta_im=dlt.imag,
        capital_delta=cap,
        code=code,
        n_rejected_positivity=n_rej,
        n_nonregular=n_nonreg,
    )


def _chunk_bounds(cfg: SampleConfig):
    for start in range(0, cfg.n_samples, cfg.chunk_size):
        yield start, min(start + cfg.chunk_size, cfg.n_samples)


def _evaluate(args) -> ChunkResult:
    return evaluate_chunk(*args)


def iter_chunks(cfg: SampleConfig) -> Iterator[ChunkResult]:
    """Chunk results in index order, evaluated in ``cfg.workers`` processes."""
    jobs = [(cfg, a, b) for a, b in _chunk_bounds(cfg)]
    if cfg.workers == 1 or len(jobs) == 1:
        for job in jobs:
            yield _evaluate(job)
        return
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        yield from pool.map(_evaluate, jobs)


def iter_records(cfg: SampleConfig) -> Iterator[SampleRecord]:
    for ch in iter_chunks(cfg):
        names = ch.classification
        for k in range(len(ch)):
            yield SampleRecord(
                index=int(ch.index[k]),
                params=ReferenceStateParams(*map(float, ch.v[k]), *map(float, ch.u[k])),
                lambda_min=float(ch.lambda_min[k]),
                lambda_max=float(ch.lambda_max[k]),
                u_max=float(ch.u[k].max()),
                delta_im=float(ch.delta_im[k]),
                capital_delta=float(ch.capital_delta[k]),
                classification=str(names[k]),
            )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _csv_rows(ch: ChunkResult) -> str:
    names = ch.classification
    umax = ch.u.max(axis=1) if len(ch) else np.empty(0)
    buf = io.StringIO()
    for k in range(len(ch)):
        fields = [str(int(ch.index[k]))]
        fields += [_fmt(t) for t in ch.v[k]]
        fields += [_fmt(t) for t in ch.u[k]]
        fields += [
            _fmt(umax[k]),
            _fmt(ch.lambda_min[k]),
            _fmt(ch.lambda_max[k]),
            _fmt(ch.delta_im[k]),
            _fmt(ch.capital_delta[k]),
            str(names[k]),
        ]
        buf.write(",".join(fields))
        buf.write("\n")
    return buf.getvalue()


def csv_preamble(cfg: SampleConfig, version: str) -> str:
    meta = {
        "n_samples": cfg.n_samples,
        "seed": cfg.seed,
        "u_range": list(cfg.u_range),
        "x": list(cfg.x),
        "y": list(cfg.y),
        "version": version,
    }
    return f"# qtradeoff sample {json.dumps(meta, sort_keys=True)}\n{CSV_HEADER}\n"


def run_survey(cfg: SampleConfig, out: Optional[TextIO] = None, version: str = "") -> SampleSummary:
    """Run the survey, optionally streaming CSV rows to ``out``, and summarise it.

    The fraction of positive ``Delta`` is taken over all generated samples,
    rejected ones included.
    """
    summary = SampleSummary()
    lmin = math.inf
    lmax = -math.inf
    if out is not None:
        out.write(csv_preamble(cfg, version))
    for ch in iter_chunks(cfg):
        summary.n_generated += ch.stop - ch.start
        summary.n_accepted += len(ch)
        summary.n_rejected_positivity += ch.n_rejected_positivity
        summary.n_nonregular += ch.n_nonregular
        positive = ch.capital_delta > 0
        summary.n_delta_positive += int(positive.sum())
        summary.n_d_invariant += int((ch.code == _CODE[Classification.RLD_DOMINANT]).sum())
        if positive.any():
            lmin = min(lmin, float(ch.lambda_min[positive].min()))
            lmax = max(lmax, float(ch.lambda_max[positive].max()))
        if out is not None:
            out.write(_csv_rows(ch))
    summary.fraction_delta_positive = summary.n_delta_positive / summary.n_generated
    if summary.n_delta_positive:
        summary.lambda_min_over_positive = lmin
        summary.lambda_max_over_positive = lmax
    return summary
