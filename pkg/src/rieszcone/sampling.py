"""Exact samplers for Riesz measures on the positive semidefinite cone.

A draw with admissible parameter s (multiplicity d = 1) and tilt theta is
the sum of independent factors, one per support run of the u coordinates:
a run of width w starting after ``start`` leading zeros contributes a rank-w
matrix supported on the trailing principal block at ``start``.  Inside that
block the factor is assembled from a w x w absolutely-continuous core A and
a Gaussian coupling B as ``[[A, sqrt(A) B], [B^T sqrt(A), B^T B]]``.

The core uses a triangular (Bartlett-type) construction: with C the lower
Cholesky factor of (-eta)^{-1} for the tilt's Schur complement eta, and T
lower triangular with T_pp^2 ~ Gamma(u_p - (p-1)/2) and subdiagonal entries
N(0, 1/2), the core is (C T)(C T)^T.  The coupling rows are Gaussian with
mean sqrt(A) . Theta_12 (-Theta_0)^{-1} and row covariance
(1/2) (-Theta_0)^{-1}, where Theta_12, Theta_0 are the tilt blocks to the
right of / below the core.

Determinism contract
--------------------
Sample number i is generated entirely from its own counter-based stream
``Generator(Philox(key=(seed, i)))``.  Within a sample the draw order is
fixed: for each support run in order, (1) one gamma variate per diagonal
index in index order (a shape below 1 consumes a gamma and then a uniform),
(2) one batched normal draw for the triangular subdiagonal, (3) one batched
normal draw for the coupling block.  Any worker count, batch split, or
scalar/batched code path therefore reproduces identical bits.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import algebra
from .algebra import AlgebraShape, SymElement
from .gindikin import BlockPartition, GindikinParam, build_partition, param_from_u, u_from_s

__all__ = [
    "SamplerError",
    "TiltError",
    "NonSamplableError",
    "RieszSpec",
    "SampleBatch",
    "sample_stream",
    "sample_gamma",
    "sample_ac_riesz",
    "sample_singular_block",
    "sample_riesz",
    "log_density_ac",
    "write_ndjson",
]

_U64 = np.uint64
_SEED_MASK = (1 << 64) - 1
TILT_MARGIN = 1e-10


class SamplerError(ValueError):
    pass


class TiltError(SamplerError):
    """The tilt matrix is not negative definite (with margin)."""


class NonSamplableError(SamplerError):
    """The parameter is admissible but outside the sampled family (d != 1)."""


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one sample: Philox keyed by (seed, index)."""
    key = np.array([seed & _SEED_MASK, index], dtype=_U64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_gamma(shape: float, rng: np.random.Generator) -> float:
    """One Gamma(shape, scale=1) variate, exact for every positive shape.

    Shapes below 1 are drawn as Gamma(shape + 1) * U^(1/shape), which keeps
    the generator's gamma method out of its rejection-heavy small-shape
    regime and costs exactly two stream draws (gamma, then uniform).
    """
    if not shape > 0:
        raise SamplerError(f"gamma shape must be positive, got {shape}")
    if shape < 1.0:
        g = rng.gamma(shape + 1.0)
        u = rng.random()
        return float(g * u ** (1.0 / shape))
    return float(rng.gamma(shape))


def _chol_of_neg_inverse(a: np.ndarray, what: str) -> np.ndarray:
    """Lower Cholesky factor C with C C^T = (-a)^{-1}; a must be neg. definite."""
    try:
        np.linalg.cholesky(-a)
        inv = np.linalg.inv(-a)
    except np.linalg.LinAlgError as err:
        raise TiltError(f"{what} is not negative definite") from err
    inv = 0.5 * (inv + inv.T)
    try:
        return np.linalg.cholesky(inv)
    except np.linalg.LinAlgError as err:  # pragma: no cover - inv of PD is PD
        raise TiltError(f"{what} inverse lost definiteness") from err


def _gamma_shapes(u_block: np.ndarray) -> np.ndarray:
    shapes = u_block - 0.5 * np.arange(len(u_block))
    if np.any(shapes <= 0):
        bad = int(np.argmax(shapes <= 0))
        raise SamplerError(
            f"core parameter u_{bad + 1} = {u_block[bad]} violates "
            f"u_p > (p-1)/2 (gamma shape {shapes[bad]:.6g})"
        )
    return shapes


@dataclass(frozen=True)
class _BlockPlan:
    """Per-run constants derived from the tilt (fixed across samples)."""

    start: int
    width: int
    tail: int
    shapes: np.ndarray       # gamma shapes for the triangular diagonal
    core_chol: np.ndarray    # C with C C^T = (-eta)^{-1}
    coupling: np.ndarray     # Theta_12 (-Theta_0)^{-1}, shape (width, tail)
    noise_chol: np.ndarray   # L with L L^T = (1/2)(-Theta_0)^{-1}

    @property
    def n_tri(self) -> int:
        return self.width * (self.width - 1) // 2


def _plan_block(theta_dense: np.ndarray, start: int, width: int,
                u_block: np.ndarray) -> _BlockPlan:
    r = theta_dense.shape[0]
    m = r - start
    tail = m - width
    sub = theta_dense[start:, start:]
    t1 = sub[:width, :width]
    if tail > 0:
        t12 = sub[:width, width:]
        t0 = sub[width:, width:]
        try:
            np.linalg.cholesky(-t0)
            neg_t0_inv = np.linalg.inv(-t0)
        except np.linalg.LinAlgError as err:
            raise TiltError("trailing tilt block is not negative definite") from err
        neg_t0_inv = 0.5 * (neg_t0_inv + neg_t0_inv.T)
        eta = t1 + t12 @ neg_t0_inv @ t12.T  # Schur complement t1 - t12 t0^{-1} t12^T
        coupling = t12 @ neg_t0_inv
        noise_chol = np.linalg.cholesky(0.5 * neg_t0_inv)
    else:
        eta = t1
        coupling = np.zeros((width, 0))
        noise_chol = np.zeros((0, 0))
    core_chol = _chol_of_neg_inverse(eta, "tilt Schur complement")
    return _BlockPlan(start, width, tail, _gamma_shapes(u_block),
                      core_chol, coupling, noise_chol)


def _draw_block(plan: _BlockPlan, rng: np.random.Generator):
    """Raw stream draws for one sample of one run, in the pinned order."""
    g = np.array([sample_gamma(s, rng) for s in plan.shapes])
    o = rng.standard_normal(plan.n_tri) if plan.n_tri else np.empty(0)
    z = (rng.standard_normal(plan.width * plan.tail).reshape(plan.width, plan.tail)
         if plan.tail else np.zeros((plan.width, 0)))
    return g, o, z


def _tri_from_draws(g: np.ndarray, o: np.ndarray, width: int) -> np.ndarray:
    t = np.zeros((width, width))
    t[np.diag_indices(width)] = np.sqrt(g)
    if width > 1:
        rows, cols = np.tril_indices(width, -1)
        t[rows, cols] = o * np.sqrt(0.5)
    return t


def _sqrt_psd_stack(a: np.ndarray) -> np.ndarray:
    """Principal square roots of a stack (..., w, w) of PSD matrices."""
    w = a.shape[-1]
    if w == 1:
        return np.sqrt(a)
    evals, vecs = np.linalg.eigh(a)
    scale = np.maximum(np.abs(evals).max(axis=-1, keepdims=True), 1.0)
    if np.any(evals < -algebra.EIG_CLAMP_REL * scale):
        raise SamplerError("core lost positive semidefiniteness")
    roots = np.sqrt(np.clip(evals, 0.0, None))
    return (vecs * roots[..., None, :]) @ np.swapaxes(vecs, -1, -2)


def _core_from_draws(plan: _BlockPlan, g, o):
    """Core matrix A = (C T)(C T)^T from raw draws (single sample)."""
    t = _tri_from_draws(g, o, plan.width)
    w = plan.core_chol @ t
    return w @ w.T


def sample_ac_riesz(u, eta, rng: np.random.Generator) -> np.ndarray:
    """One draw of the absolutely continuous law with parameter u, tilt eta.

    Parameters
    ----------
    u : sequence of length l with u_p > (p-1)/2
    eta : l x l matrix with -eta positive definite
    rng : the per-sample stream

    Returns the l x l sample as a plain ndarray (positive definite a.s.).
    """
    u = np.asarray(u, dtype=float)
    eta = np.asarray(eta, dtype=float)
    l = len(u)
    if eta.shape != (l, l):
        raise SamplerError(f"tilt must be {l} x {l}, got {eta.shape}")
    shapes = _gamma_shapes(u)
    c = _chol_of_neg_inverse(eta, "tilt")
    g = np.array([sample_gamma(s, rng) for s in shapes])
    o = rng.standard_normal(l * (l - 1) // 2) if l > 1 else np.empty(0)
    t = _tri_from_draws(g, o, l)
    w = c @ t
    return w @ w.T


def _assemble_block(a: np.ndarray, b: np.ndarray, root: np.ndarray,
                    start: int, r: int) -> np.ndarray:
    """Embed the factor [[A, root.B],[B^T.root, B^T B]] at offset ``start``."""
    width = a.shape[0]
    out = np.zeros((r, r))
    lo, mid = start, start + width
    out[lo:mid, lo:mid] = a
    if b.shape[1]:
        rb = root @ b
        out[lo:mid, mid:] = rb
        out[mid:, lo:mid] = rb.T
        out[mid:, mid:] = b.T @ b
    return out


def sample_singular_block(start: int, width: int, u_block, theta: SymElement,
                          rng: np.random.Generator) -> SymElement:
    """One draw of a single support-run factor, embedded in Sym(r).

    The factor is supported on the trailing principal block of size
    r - start; its core occupies the first ``width`` coordinates of that
    block and the draw has rank ``width`` almost surely.
    """
    r = theta.shape.r
    if not (0 <= start and width >= 1 and start + width <= r):
        raise SamplerError(
            f"invalid run: start {start}, width {width} for rank {r}"
        )
    u_block = np.asarray(u_block, dtype=float)
    if u_block.shape != (width,):
        raise SamplerError(f"core parameter must have length {width}")
    plan = _plan_block(theta.dense(), start, width, u_block)
    g, o, z = _draw_block(plan, rng)
    a = _core_from_draws(plan, g, o)
    if plan.tail:
        root = _sqrt_psd_stack(a[None])[0]
        b = root @ plan.coupling + z @ plan.noise_chol.T
    else:
        root = np.zeros((width, width))
        b = np.zeros((width, 0))
    return SymElement._wrap(_assemble_block(a, b, root, start, r))


# -- batched sampling -------------------------------------------------------


@dataclass(frozen=True)
class RieszSpec:
    """A fully validated sampling request.

    ``param`` must be admissible with multiplicity d = 1; ``theta`` must be
    negative definite with margin (smallest eigenvalue of -theta at least
    1e-10 times the Frobenius norm); ``count`` is the number of samples and
    ``seed`` keys every per-sample stream.
    """

    param: GindikinParam
    theta: SymElement
    seed: int = 0
    count: int = 1

    def __post_init__(self):
        if self.param.d != 1.0:
            raise NonSamplableError(
                f"only multiplicity d = 1 is samplable, got d = {self.param.d}"
            )
        if not isinstance(self.count, int) or self.count < 1:
            raise SamplerError(f"count must be a positive integer, got {self.count!r}")
        if not isinstance(self.seed, int):
            raise SamplerError(f"seed must be an integer, got {self.seed!r}")
        if self.theta.shape.r != self.param.r:
            raise SamplerError(
                f"tilt rank {self.theta.shape.r} does not match parameter rank {self.param.r}"
            )
        dec = algebra.spectral(self.theta)
        top = float(dec.eigenvalues[0])
        scale = self.theta.norm()
        if scale == 0.0 or top > -TILT_MARGIN * scale:
            raise TiltError(
                f"-theta must be positive definite with margin: largest theta "
                f"eigenvalue {top:.3e} vs bound {-TILT_MARGIN * scale:.3e}"
            )

    @property
    def shape(self) -> AlgebraShape:
        return AlgebraShape(self.param.r, self.param.d)

    @property
    def partition(self) -> BlockPartition:
        return build_partition(self.param)

    @classmethod
    def build(cls, s=None, u=None, theta: SymElement | None = None,
              seed: int = 0, count: int = 1, d: float = 1.0,
              zero_tol: float = 0.0) -> "RieszSpec":
        """Convenience constructor: tilt defaults to minus the identity."""
        if (s is None) == (u is None):
            raise SamplerError("give exactly one of s or u")
        param = param_from_u(u, d) if u is not None else u_from_s(s, d, zero_tol)
        if theta is None:
            theta = SymElement._wrap(np.diag(np.full(param.r, -1.0)))
        return cls(param=param, theta=theta, seed=seed, count=count)

    def to_json_dict(self) -> dict:
        return {
            "s": list(self.param.s),
            "u": list(self.param.u),
            "d": self.param.d,
            "r": self.param.r,
            "theta": self.theta.to_json_dict(),
            "seed": self.seed,
            "n": self.count,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "RieszSpec":
        if not isinstance(obj, dict) or "s" not in obj:
            raise SamplerError('spec JSON must be an object with at least "s"')
        theta = obj.get("theta")
        return cls.build(
            s=obj["s"],
            theta=None if theta is None else SymElement.from_json_dict(theta),
            seed=int(obj.get("seed", 0)),
            count=int(obj.get("n", 1)),
            d=float(obj.get("d", 1.0)),
        )


class SampleBatch:
    """A stack of draws plus the stream indices that produced them."""

    def __init__(self, spec: RieszSpec, matrices: np.ndarray,
                 stream_indices: np.ndarray):
        if matrices.shape != (spec.count, spec.param.r, spec.param.r):
            raise SamplerError(f"matrix stack has shape {matrices.shape}")
        self.spec = spec
        self.matrices = matrices
        self.stream_indices = stream_indices

    def __len__(self) -> int:
        return self.matrices.shape[0]

    def element(self, i: int) -> SymElement:
        return SymElement._wrap(self.matrices[i])

    def elements(self):
        for i in range(len(self)):
            yield self.element(i)

    def packed(self) -> np.ndarray:
        """Packed upper triangles, shape (count, r(r+1)/2), row-major."""
        r = self.spec.param.r
        rows, cols = np.triu_indices(r)
        return self.matrices[:, rows, cols]

    def mean(self) -> np.ndarray:
        return self.matrices.mean(axis=0)


def sample_riesz(spec: RieszSpec, workers: int = 1) -> SampleBatch:
    """Draw ``spec.count`` independent samples of the tilted Riesz law.

    ``workers`` only parallelizes the stream-draw collection over disjoint
    index ranges; because each sample owns its stream, the result is
    bitwise independent of the worker count.
    """
    if not isinstance(workers, int) or workers < 1:
        raise SamplerError(f"workers must be a positive integer, got {workers!r}")
    n = spec.count
    r = spec.param.r
    indices = np.arange(n, dtype=_U64)
    partition = spec.partition
    if partition.k == 0:
        return SampleBatch(spec, np.zeros((n, r, r)), indices)

    theta_dense = spec.theta.dense()
    plans = [
        _plan_block(theta_dense, start, width, np.asarray(ub))
        for start, width, ub in zip(partition.starts, partition.lengths,
                                    partition.u_blocks)
    ]
    gam = [np.empty((n, p.width)) for p in plans]
    tri = [np.empty((n, p.n_tri)) for p in plans]
    coup = [np.empty((n, p.width, p.tail)) for p in plans]

    def fill(lo: int, hi: int):
        for i in range(lo, hi):
            rng = sample_stream(spec.seed, int(i))
            for b, plan in enumerate(plans):
                g, o, z = _draw_block(plan, rng)
                gam[b][i] = g
                tri[b][i] = o
                coup[b][i] = z

    if workers == 1 or n < 2 * workers:
        fill(0, n)
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(fill, int(a), int(b))
                       for a, b in zip(bounds[:-1], bounds[1:])]
            for f in futures:
                f.result()

    out = np.zeros((n, r, r))
    for b, plan in enumerate(plans):
        w = plan.width
        t = np.zeros((n, w, w))
        diag = np.arange(w)
        t[:, diag, diag] = np.sqrt(gam[b])
        if w > 1:
            rows, cols = np.tril_indices(w, -1)
            t[:, rows, cols] = tri[b] * np.sqrt(0.5)
        ct = plan.core_chol @ t  # broadcast matmul: bitwise-matches the scalar path
        core = ct @ np.swapaxes(ct, -1, -2)
        lo, mid = plan.start, plan.start + w
        out[:, lo:mid, lo:mid] += core
        if plan.tail:
            root = _sqrt_psd_stack(core)
            bmat = root @ plan.coupling + coup[b] @ plan.noise_chol.T
            rb = root @ bmat
            out[:, lo:mid, mid:] += rb
            out[:, mid:, lo:mid] += np.swapaxes(rb, -1, -2)
            out[:, mid:, mid:] += np.swapaxes(bmat, -1, -2) @ bmat
    return SampleBatch(spec, out, indices)


# -- densities and serialization -------------------------------------------


def log_density_ac(s, x: SymElement) -> float:
    """Log density of the untilted measure at x, absolutely continuous case.

    Defined only when every recovered u coordinate is strictly positive
    (equivalently s_p > (p-1)/2 for all p); the value is
    log Delta_{s - (r+1)/2}(x) - log Gamma_Omega(s) for x in the open cone.
    """
    x_r = x.shape.r
    param = u_from_s(s, d=1.0)
    if param.r != x_r:
        raise SamplerError(f"parameter length {param.r} does not match rank {x_r}")
    if param.rank_support != param.r:
        raise SamplerError(
            "parameter is singular (some u_p = 0): no Lebesgue density exists"
        )
    from .gindikin import log_gamma_omega

    # positive leading minors characterize the open cone; the generalized
    # power alone would not notice a negative trailing block whenever its
    # exponent lands on zero
    if np.min(algebra.minors(x)) <= 0.0:
        raise SamplerError("x is not in the open cone (nonpositive leading minor)")
    shift = np.asarray(param.s) - 0.5 * (x_r + 1)
    try:
        log_power = algebra.log_generalized_power(x, shift)
    except algebra.PowerDomainError as err:
        raise SamplerError(f"x is not in the open cone: {err}") from err
    return log_power - log_gamma_omega(param.s, x_r, 1.0)


def write_ndjson(batch: SampleBatch, fp) -> None:
    """Header line (spec + partition echo) then one JSON matrix per line."""
    header = {
        "spec": batch.spec.to_json_dict(),
        "partition": batch.spec.partition.to_json_dict(),
    }
    fp.write(json.dumps(header, separators=(",", ":")) + "\n")
    for el in batch.elements():
        fp.write(json.dumps(el.to_json_dict(), separators=(",", ":")) + "\n")
