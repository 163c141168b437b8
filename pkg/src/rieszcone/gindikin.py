"""Admissible-parameter arithmetic for Riesz measures on the symmetric cone.

A parameter vector s of length r is admissible exactly when the recursion

    u_1 = s_1,        u_i = s_i - (d/2) * #{ m < i : u_m > 0 }

recovers nonnegative u_i all the way down.  The u vector is the better
coordinate system: its support pattern cuts s into consecutive "blocks"
(maximal runs of nonzero u entries), and the measure with parameter s is the
convolution of one degenerate factor per block.  This module owns that
arithmetic: the s <-> u maps, the block partition bookkeeping, and the
log-scale cone gamma function that normalizes everything downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "GindikinError",
    "NotInGindikinSetError",
    "GammaPoleError",
    "GindikinParam",
    "BlockPartition",
    "s_from_u",
    "u_from_s",
    "param_from_u",
    "build_partition",
    "block_params",
    "log_gamma_omega",
    "membership_report",
]


class GindikinError(ValueError):
    pass


class NotInGindikinSetError(GindikinError):
    """Raised when the recursion produces a negative u entry.

    ``index`` is the 1-based position of the first offending entry and
    ``value`` the recovered (negative) u value there.
    """

    def __init__(self, index: int, value: float, s):
        self.index = index
        self.value = value
        self.s = tuple(float(t) for t in s)
        super().__init__(
            f"s = {list(self.s)} is not admissible: recovered u_{index} = {value:.6g} < 0"
        )


class GammaPoleError(GindikinError):
    pass


def _as_float_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise GindikinError(f"{name} must be a nonempty 1-d sequence, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GindikinError(f"{name} must be finite")
    return arr


def _check_d(d: float):
    if not (np.isfinite(d) and d > 0):
        raise GindikinError(f"multiplicity d must be a positive real, got {d!r}")


def s_from_u(u, d: float = 1.0) -> np.ndarray:
    """Forward map: s_i = u_i + (d/2) * (number of positive u before i)."""
    uu = _as_float_vector(u, "u")
    _check_d(d)
    if np.any(uu < 0):
        bad = int(np.argmax(uu < 0))
        raise GindikinError(f"u must be nonnegative, got u_{bad + 1} = {uu[bad]}")
    count = np.concatenate([[0], np.cumsum(uu > 0)[:-1]])
    return uu + 0.5 * d * count


@dataclass(frozen=True)
class GindikinParam:
    """An admissible parameter: s together with its recovered u coordinates."""

    r: int
    d: float
    s: tuple
    u: tuple

    @property
    def samplable(self) -> bool:
        """Only multiplicity d = 1 (real symmetric matrices) is sampled here."""
        return self.d == 1.0

    @property
    def rank_support(self) -> int:
        """Number of nonzero u entries = rank of a draw from the measure."""
        return sum(1 for t in self.u if t != 0.0)

    def to_json_dict(self) -> dict:
        return {"r": self.r, "d": self.d, "s": list(self.s), "u": list(self.u)}


def u_from_s(s, d: float = 1.0, zero_tol: float = 0.0) -> GindikinParam:
    """Invert the recursion, rejecting s that leave the admissible set.

    Each recovered u_i with |u_i| <= zero_tol is snapped to exactly 0 before
    the positivity indicator is evaluated (zero_tol = 0 keeps comparisons
    exact).  A u_i below -zero_tol raises ``NotInGindikinSetError`` naming
    the first offending 1-based index.
    """
    ss = _as_float_vector(s, "s")
    _check_d(d)
    if zero_tol < 0:
        raise GindikinError(f"zero_tol must be nonnegative, got {zero_tol}")
    u = np.empty_like(ss)
    count = 0
    for i, si in enumerate(ss):
        ui = si - 0.5 * d * count
        if abs(ui) <= zero_tol:
            ui = 0.0
        if ui < 0:
            raise NotInGindikinSetError(i + 1, float(ui), ss)
        u[i] = ui
        if ui > 0:
            count += 1
    return GindikinParam(r=len(ss), d=float(d), s=tuple(map(float, ss)), u=tuple(map(float, u)))


def param_from_u(u, d: float = 1.0) -> GindikinParam:
    """Build an admissible parameter directly from nonnegative u."""
    ss = s_from_u(u, d)
    uu = _as_float_vector(u, "u")
    return GindikinParam(r=len(uu), d=float(d), s=tuple(map(float, ss)), u=tuple(map(float, uu)))


@dataclass(frozen=True)
class BlockPartition:
    """Support-run decomposition of an admissible parameter.

    ``starts[l]`` counts the entries strictly before the (l+1)-th run of
    nonzero u values (so it is also the run's 0-based start index), and
    ``lengths[l]`` is the run length.  ``index_sets`` holds the 1-based
    positions inside each run; ``gap_sets`` the 1-based positions of the
    zero gaps around the runs (k+1 of them, first and last possibly empty).
    ``u_blocks[l]`` is the run's own admissible u vector (length lengths[l])
    and ``s_blocks[l]`` the length-r parameter of the run's degenerate
    factor; the s_blocks sum to s entry by entry.
    """

    param: GindikinParam
    k: int
    starts: tuple
    lengths: tuple
    index_sets: tuple
    gap_sets: tuple
    u_blocks: tuple
    s_blocks: tuple

    def to_json_dict(self) -> dict:
        return {
            "in_xi": True,
            "s": list(self.param.s),
            "u": list(self.param.u),
            "d": self.param.d,
            "k": self.k,
            "i": list(self.starts),
            "j": list(self.lengths),
            "I": [list(t) for t in self.index_sets],
            "I_prime": [list(t) for t in self.gap_sets],
            "u_blocks": [list(t) for t in self.u_blocks],
            "s_blocks": [list(t) for t in self.s_blocks],
        }


def build_partition(param: GindikinParam) -> BlockPartition:
    """Cut u into maximal nonzero runs and derive the per-run parameters."""
    u = param.u
    r, d = param.r, param.d
    starts, lengths = [], []
    p = 0
    while p < r:
        if u[p] == 0.0:
            p += 1
            continue
        q = p
        while q < r and u[q] != 0.0:
            q += 1
        starts.append(p)
        lengths.append(q - p)
        p = q
    k = len(starts)

    index_sets = tuple(
        tuple(range(i + 1, i + j + 1)) for i, j in zip(starts, lengths)
    )
    gap_sets = []
    prev_end = 0
    for i in starts:
        gap_sets.append(tuple(range(prev_end + 1, i + 1)))
        prev_end = i + lengths[len(gap_sets) - 1]
    gap_sets.append(tuple(range(prev_end + 1, r + 1)))

    u_blocks = []
    s_blocks = []
    for i, j in zip(starts, lengths):
        ub = tuple(u[i + t] + 0.5 * d * t for t in range(j))
        sb = [0.0] * i + list(ub) + [0.5 * d * j] * (r - i - j)
        u_blocks.append(ub)
        s_blocks.append(tuple(sb))
    return BlockPartition(
        param=param,
        k=k,
        starts=tuple(starts),
        lengths=tuple(lengths),
        index_sets=index_sets,
        gap_sets=tuple(gap_sets),
        u_blocks=tuple(u_blocks),
        s_blocks=tuple(s_blocks),
    )


def block_params(partition: BlockPartition):
    """Per-run (u_block, s_block) pairs in run order."""
    return list(zip(partition.u_blocks, partition.s_blocks))


def log_gamma_omega(s, r: int, d: float = 1.0) -> float:
    """Log of the cone gamma integral at parameter s.

    log Gamma(s) = ((n - r)/2) log(2 pi) + sum_j log Gamma(s_j - (j-1) d/2)
    with n = r + (d/2) r (r-1).  Raises ``GammaPoleError`` whenever any
    shifted argument s_j - (j-1) d/2 is nonpositive (a pole of the integral).
    """
    ss = _as_float_vector(s, "s")
    _check_d(d)
    if len(ss) != r:
        raise GindikinError(f"s must have length r = {r}, got {len(ss)}")
    args = ss - 0.5 * d * np.arange(r)
    if np.any(args <= 0):
        bad = int(np.argmax(args <= 0))
        raise GammaPoleError(
            f"gamma argument s_{bad + 1} - {bad}*d/2 = {args[bad]:.6g} is not positive"
        )
    half_dim = 0.25 * d * r * (r - 1)  # (n - r) / 2
    return half_dim * math.log(2.0 * math.pi) + float(np.sum(gammaln(args)))


def membership_report(s=None, u=None, d: float = 1.0, zero_tol: float = 0.0) -> dict:
    """Full membership verdict as a JSON-ready dict.

    Give exactly one of s or u.  On acceptance the report carries the
    recovered coordinates and the complete block partition; on rejection it
    carries in_xi = false plus the first offending index.
    """
    if (s is None) == (u is None):
        raise GindikinError("give exactly one of s or u")
    if u is not None:
        param = param_from_u(u, d)
    else:
        try:
            param = u_from_s(s, d, zero_tol)
        except NotInGindikinSetError as err:
            return {
                "in_xi": False,
                "s": list(err.s),
                "d": float(d),
                "first_bad_index": err.index,
                "recovered_value": err.value,
            }
    report = build_partition(param).to_json_dict()
    report["samplable"] = param.samplable
    return report
