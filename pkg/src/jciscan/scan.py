"""All-pairs interaction sweep: precompute once, score every pair, keep the best.

The sweep hoists everything that does not depend on the partner column:
means, centered columns, centered sums of squares, their square roots and
sqrt(n) are computed once per dataset.  After that, scoring one anchor
column j1 against every partner j2 is a single fused product
``(y_c * x_c[j1]) @ C`` followed by elementwise normalization, where C is
the n x p centered matrix.

Determinism contract
--------------------
Results are bit-identical for every ``block_size`` and ``worker_count``.
This holds by construction: each pair's value comes from the per-anchor
row product above, whose operand shapes are fixed by (n, p) alone.  Tiling
and threading only decide *which* anchor rows a worker evaluates; they
never change how a value is computed.  Worker-local top-k heaps are merged
by one deterministic sort at the end.

Ordering contract
-----------------
Pairs are ordered by r_hat descending, ties broken by (j1, j2) ascending.
Ranks are 1-based positions in that total order.
"""

from __future__ import annotations

import heapq
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cumulants import (
    RESPONSE_INDEX,
    CenteredColumn,
    PairStatistic,
    center,
    validate_c1,
)
from .errors import (
    DegenerateSample,
    DimensionMismatch,
    EmptyRange,
    InvalidPair,
    InvalidValue,
    TooFewColumns,
)

DEFAULT_BLOCK_SIZE = 256

#: Smallest sample size for which a pair scan is considered meaningful.
MIN_SCAN_SAMPLES = 3


# --------------------------------------------------------------------------
# Pair enumeration
# --------------------------------------------------------------------------


def pair_count(p: int) -> int:
    """Number of unordered pairs, p*(p-1)/2.  Python ints, so the 27.5e9
    pairs of a genome-scale run do not overflow."""
    if p < 2:
        raise TooFewColumns(f"need at least 2 columns to form pairs, got {p}")
    return p * (p - 1) // 2


def pair_index(j1: int, j2: int, p: int) -> int:
    """Canonical index of (j1, j2) in the row-major order
    (0,1), (0,2), ..., (0,p-1), (1,2), ..., (p-2,p-1)."""
    if not (0 <= j1 < j2 < p):
        raise InvalidPair(f"require 0 <= j1 < j2 < p, got ({j1}, {j2}) with p={p}")
    return j1 * p - j1 * (j1 + 1) // 2 + (j2 - j1 - 1)


def pair_from_index(idx: int, p: int) -> tuple[int, int]:
    """Inverse of :func:`pair_index`."""
    total = pair_count(p)
    if not (0 <= idx < total):
        raise InvalidPair(f"pair index {idx} outside [0, {total})")
    # Float sqrt gives a starting guess; the integer correction loops keep
    # the inverse exact even when float64 precision runs out at genome scale.
    j1 = int(p - 0.5 - math.sqrt(max((p - 0.5) ** 2 - 2.0 * idx, 0.0)))
    j1 = max(0, min(j1, p - 2))
    while _row_start(j1, p) > idx:
        j1 -= 1
    while j1 + 1 <= p - 2 and _row_start(j1 + 1, p) <= idx:
        j1 += 1
    j2 = j1 + 1 + (idx - _row_start(j1, p))
    return j1, j2


def _row_start(j1: int, p: int) -> int:
    return j1 * p - j1 * (j1 + 1) // 2


# --------------------------------------------------------------------------
# Configuration and results
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanConfig:
    """Sweep parameters.  At least one of ``top_k`` / ``threshold`` is
    required; both may be set, in which case the result carries both
    views.  ``pair_range`` restricts the sweep to a half-open interval of
    canonical pair indices for sharding."""

    top_k: int | None = None
    threshold: float | None = None
    block_size: int = DEFAULT_BLOCK_SIZE
    worker_count: int = 1
    pair_range: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.top_k is None and self.threshold is None:
            raise InvalidValue("set top_k, threshold, or both")
        if self.top_k is not None and self.top_k < 1:
            raise InvalidValue(f"top_k must be >= 1, got {self.top_k}")
        if self.threshold is not None and self.threshold < 0:
            raise InvalidValue(f"threshold must be >= 0, got {self.threshold}")
        if self.block_size < 1:
            raise InvalidValue(f"block_size must be >= 1, got {self.block_size}")
        if self.worker_count < 1:
            raise InvalidValue(f"worker_count must be >= 1, got {self.worker_count}")
        if self.pair_range is not None:
            start, end = self.pair_range
            if start < 0 or end < start:
                raise InvalidValue(f"malformed pair_range {self.pair_range}")


@dataclass(frozen=True)
class ScanResult:
    """Outcome of one sweep.

    ``top_pairs`` is sorted by the ordering contract and has at most
    ``top_k`` entries; ``selected`` holds every scanned pair with
    r_hat strictly greater than the threshold, in the same order.
    ``elapsed_seconds`` is wall-clock bookkeeping; equality compares only
    the deterministic fields, matching the determinism contract.
    """

    top_pairs: tuple[PairStatistic, ...]
    selected: tuple[PairStatistic, ...]
    pairs_scanned: int
    elapsed_seconds: float = field(compare=False)
    scores: np.ndarray | None = field(default=None, compare=False)


# --------------------------------------------------------------------------
# Workspace
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Workspace:
    """Immutable centered view of a dataset, shared read-only by workers.

    ``matrix`` is the n x p centered predictor matrix; ``scale[j]`` is
    sqrt(css_j); the response is centered with index ``RESPONSE_INDEX``.
    ``centering_passes`` counts how many columns were centered while
    building the workspace (p + 1: each predictor once, response once).
    """

    columns: tuple[CenteredColumn, ...]
    response: CenteredColumn
    matrix: np.ndarray
    scale: np.ndarray
    response_scale: float
    sqrt_n: float
    centering_passes: int

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def p(self) -> int:
        return self.matrix.shape[1]


def precompute(matrix, response, eps: float = 1e-12) -> Workspace:
    """Center every column and the response exactly once.

    Accepts a real n x p array or any object exposing ``.codes`` (a
    genotype matrix); codes are widened to float64.  After this call the
    per-pair cost of the sweep is one fused length-n product-sum plus one
    division and one square root.

    Raises:
        ZeroVarianceColumn: a constant column (its id) or response (-1).
        DegenerateSample: n < 3.
        TooFewColumns: p < 2.
    """
    codes = getattr(matrix, "codes", None)
    raw = np.asarray(codes if codes is not None else matrix, dtype=np.float64)
    if raw.ndim != 2:
        raise InvalidValue(f"expected an n x p matrix, got shape {raw.shape}")
    n, p = raw.shape
    if n < MIN_SCAN_SAMPLES:
        raise DegenerateSample(f"pair scans need n >= {MIN_SCAN_SAMPLES}, got {n}")
    if p < 2:
        raise TooFewColumns(f"need at least 2 predictor columns, got {p}")
    y = np.asarray(response, dtype=np.float64)
    if y.shape != (n,):
        raise DimensionMismatch(f"response has shape {y.shape}, expected ({n},)")

    passes = 0
    cy = center(y, index=RESPONSE_INDEX)
    passes += 1
    validate_c1(cy, eps)

    cols: list[CenteredColumn] = []
    cmat = np.empty((n, p), dtype=np.float64)
    for j in range(p):
        col = center(raw[:, j], index=j)
        passes += 1
        validate_c1(col, eps)
        cmat[:, j] = col.centered
        cols.append(col)
    cmat.setflags(write=False)

    return Workspace(
        columns=tuple(cols),
        response=cy,
        matrix=cmat,
        scale=np.sqrt(np.array([c.css for c in cols])),
        response_scale=float(np.sqrt(cy.css)),
        sqrt_n=float(np.sqrt(n)),
        centering_passes=passes,
    )


def _score_row(ws: Workspace, j1: int) -> tuple[np.ndarray, np.ndarray]:
    """Scores and raw product-sums of anchor j1 against all j2 > j1.

    The vector-matrix product always has shape (n,) @ (n, p); its result
    for a given pair never depends on tiling or threading.
    """
    fused = ws.response.centered * ws.columns[j1].centered
    sums = fused @ ws.matrix
    tail = sums[j1 + 1 :]
    denom = (ws.scale[j1] * ws.response_scale) * ws.scale[j1 + 1 :]
    return ws.sqrt_n * np.abs(tail) / denom, tail


# --------------------------------------------------------------------------
# Sweep
# --------------------------------------------------------------------------


class _TopKHeap:
    """Bounded min-heap keeping the k best pairs of one worker.

    Entries are ``(r, -j1, -j2, j1, j2, product_sum)``; the ascending heap
    order puts the least preferred pair (smallest r, then lexicographically
    largest pair among ties) at the root, so a push-pop evicts it.
    """

    def __init__(self, k: int):
        self.k = k
        self.entries: list[tuple] = []

    @property
    def floor(self) -> float:
        return self.entries[0][0] if len(self.entries) >= self.k else -np.inf

    def offer(self, r: float, j1: int, j2: int, psum: float) -> None:
        entry = (r, -j1, -j2, j1, j2, psum)
        if len(self.entries) < self.k:
            heapq.heappush(self.entries, entry)
        elif entry[:3] > self.entries[0][:3]:
            heapq.heappushpop(self.entries, entry)


def _row_window(j1: int, p: int, span: tuple[int, int]) -> tuple[int, int]:
    """Partner interval [lo, hi) of anchor j1 clipped to a canonical pair
    index span."""
    base = _row_start(j1, p)
    lo = max(j1 + 1, j1 + 1 + (span[0] - base))
    hi = min(p, j1 + 1 + (span[1] - base))
    return lo, hi


def _sweep_anchors(
    ws: Workspace,
    anchors: list[int],
    span: tuple[int, int],
    top_k: int | None,
    threshold: float | None,
) -> tuple[_TopKHeap | None, list[tuple], int]:
    p = ws.p
    n = ws.n
    heap = _TopKHeap(top_k) if top_k is not None else None
    hits: list[tuple] = []
    scanned = 0
    for j1 in anchors:
        lo, hi = _row_window(j1, p, span)
        if lo >= hi:
            continue
        scores, sums = _score_row(ws, j1)
        scores = scores[lo - j1 - 1 : hi - j1 - 1]
        sums = sums[lo - j1 - 1 : hi - j1 - 1]
        scanned += hi - lo
        if heap is not None:
            # >= floor keeps exact ties that could still displace the
            # root under the lexicographic rule.
            cand = np.nonzero(scores >= heap.floor)[0]
            for off in cand.tolist():
                heap.offer(float(scores[off]), j1, lo + off, float(sums[off]))
        if threshold is not None:
            sel = np.nonzero(scores > threshold)[0]
            for off in sel.tolist():
                hits.append((float(scores[off]), j1, lo + off, float(sums[off])))
    return heap, hits, scanned


def _anchors_for_span(p: int, span: tuple[int, int]) -> list[int]:
    lo_anchor, _ = pair_from_index(span[0], p)
    hi_anchor, _ = pair_from_index(span[1] - 1, p)
    return list(range(lo_anchor, hi_anchor + 1))


def _order_stats(raw: list[tuple], n: int) -> list[PairStatistic]:
    raw.sort(key=lambda e: (-e[0], e[1], e[2]))
    return [PairStatistic(j1=j1, j2=j2, tau_hat=s / n, r_hat=r) for r, j1, j2, s in raw]


def scan(workspace, config: ScanConfig, response=None, collect_scores: bool = False) -> ScanResult:
    """Score every pair in range; keep the top-k and/or thresholded subset.

    ``workspace`` is a :class:`Workspace` or a raw matrix (then
    ``response`` is required and :func:`precompute` runs internally).
    With ``collect_scores`` the result also carries the flat score array
    over the configured range (canonical pair order).
    The result is identical for any block_size/worker_count combination;
    see the module docstring for why.

    Raises:
        EmptyRange: the configured pair range selects no pairs.
    """
    if not isinstance(workspace, Workspace):
        workspace = precompute(workspace, response)
    ws = workspace
    total = pair_count(ws.p)
    span = config.pair_range if config.pair_range is not None else (0, total)
    if span[1] > total:
        raise InvalidPair(f"pair_range {span} exceeds pair count {total}")
    if span[0] >= span[1]:
        raise EmptyRange(f"pair_range {span} selects no pairs")

    started = time.perf_counter()
    anchors = _anchors_for_span(ws.p, span)
    tiles = [anchors[i : i + config.block_size] for i in range(0, len(anchors), config.block_size)]

    workers = min(config.worker_count, len(tiles))
    if workers <= 1:
        parts = [_sweep_anchors(ws, a, span, config.top_k, config.threshold) for a in tiles]
    else:
        # Round-robin tile assignment: early anchors have longer rows, so
        # striding balances the load.  The workspace is shared read-only;
        # each task owns its heap and hit list, merged below.
        assignments = [tiles[w::workers] for w in range(workers)]

        def run(tile_list):
            out = []
            for tile in tile_list:
                out.append(_sweep_anchors(ws, tile, span, config.top_k, config.threshold))
            return out

        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = [item for chunk in pool.map(run, assignments) for item in chunk]

    top: tuple[PairStatistic, ...] = ()
    if config.top_k is not None:
        merged = [(e[0], e[3], e[4], e[5]) for heap, _, _ in parts if heap for e in heap.entries]
        top = tuple(_order_stats(merged, ws.n)[: config.top_k])
    selected: tuple[PairStatistic, ...] = ()
    if config.threshold is not None:
        all_hits = [h for _, hits, _ in parts for h in hits]
        selected = tuple(_order_stats(all_hits, ws.n))
    scanned = sum(c for _, _, c in parts)

    scores = all_scores(ws, pair_range=config.pair_range) if collect_scores else None

    return ScanResult(
        top_pairs=top,
        selected=selected,
        pairs_scanned=scanned,
        elapsed_seconds=time.perf_counter() - started,
        scores=scores,
    )


def all_scores(ws: Workspace, pair_range: tuple[int, int] | None = None) -> np.ndarray:
    """Flat float64 array of every pair's score, canonical order.

    Position ``i`` holds the pair with canonical index ``start + i`` where
    ``start`` is the beginning of ``pair_range`` (0 when unset).  Memory is
    O(#pairs); intended for desk-scale p.
    """
    total = pair_count(ws.p)
    span = pair_range if pair_range is not None else (0, total)
    if span[0] < 0 or span[1] > total:
        raise InvalidPair(f"pair_range {span} exceeds [0, {total})")
    if span[0] >= span[1]:
        raise EmptyRange(f"pair_range {span} selects no pairs")
    out = np.empty(span[1] - span[0], dtype=np.float64)
    for j1 in _anchors_for_span(ws.p, span):
        lo, hi = _row_window(j1, ws.p, span)
        if lo >= hi:
            continue
        scores, _ = _score_row(ws, j1)
        base = _row_start(j1, ws.p)
        dst = base + (lo - j1 - 1) - span[0]
        out[dst : dst + (hi - lo)] = scores[lo - j1 - 1 : hi - j1 - 1]
    return out


def iter_score_rows(ws: Workspace):
    """Yield ``(j1, scores_for_j2_gt_j1)`` per anchor, canonical order.
    Streaming companion to :func:`all_scores` for O(p^2) dump writers."""
    for j1 in range(ws.p - 1):
        scores, _ = _score_row(ws, j1)
        yield j1, scores


def select_by_threshold(stats, c: float) -> list[PairStatistic]:
    """Filter a pair-statistic stream to r_hat strictly above ``c``,
    returned in the result ordering (r descending, pair ascending)."""
    if c < 0:
        raise InvalidValue(f"threshold must be >= 0, got {c}")
    kept = [s for s in stats if s.r_hat > c]
    kept.sort(key=lambda s: (-s.r_hat, s.j1, s.j2))
    return kept


def merge_top_pairs(parts, top_k: int) -> list[PairStatistic]:
    """Merge per-shard top-k lists into the global top-k.  Exact when every
    shard kept at least its local top-k over a partition of the pair set."""
    merged = [s for part in parts for s in part]
    merged.sort(key=lambda s: (-s.r_hat, s.j1, s.j2))
    return merged[:top_k]


def ranks_of_pairs(scores: np.ndarray, p: int, pairs) -> dict[tuple[int, int], int]:
    """1-based rank of each requested pair in the full descending order.

    ``scores`` must be a full-range array from :func:`all_scores`.  The
    rank counts strictly greater scores plus equal-scored pairs that
    precede canonically (canonical order is exactly the (j1, j2) tie rule).
    """
    if scores.shape[0] != pair_count(p):
        raise DimensionMismatch(
            f"need the full score array ({pair_count(p)} entries), got {scores.shape[0]}"
        )
    ranks: dict[tuple[int, int], int] = {}
    for j1, j2 in pairs:
        ci = pair_index(j1, j2, p)
        v = scores[ci]
        greater = int(np.count_nonzero(scores > v))
        ties_before = int(np.count_nonzero(scores[:ci] == v))
        ranks[(j1, j2)] = greater + ties_before + 1
    return ranks


def default_worker_count() -> int:
    """Worker count from the JCI_WORKERS environment variable, else 1."""
    raw = os.environ.get("JCI_WORKERS", "").strip()
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise InvalidValue(f"JCI_WORKERS must be an integer, got {raw!r}") from None
        if value >= 1:
            return value
        raise InvalidValue(f"JCI_WORKERS must be >= 1, got {value}")
    return 1
