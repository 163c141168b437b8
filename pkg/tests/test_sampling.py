import io
import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats
from scipy.special import gammaln

from rieszcone import sampling as sp
from rieszcone.algebra import SymElement
from rieszcone.gindikin import param_from_u


def nd_tilt(r, seed=0, scale=1.0):
    """A well-conditioned negative definite tilt with off-diagonal mass."""
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((r, r))
    a = q @ q.T + r * np.eye(r)
    return SymElement.from_dense(-scale * a / np.trace(a) * r)


# ------------------------------------------------------------------- streams


def test_sample_stream_is_keyed_by_seed_and_index():
    a = sp.sample_stream(42, 7).random(4)
    b = sp.sample_stream(42, 7).random(4)
    c = sp.sample_stream(42, 8).random(4)
    d = sp.sample_stream(43, 7).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_sample_gamma_draw_budget():
    # shape >= 1 consumes one gamma draw, shape < 1 a gamma then a uniform;
    # downstream code relies on this accounting for reproducibility
    rng = sp.sample_stream(0, 0)
    sp.sample_gamma(2.5, rng)
    tail_big = rng.random(3)
    rng = sp.sample_stream(0, 0)
    rng.gamma(2.5)
    assert np.array_equal(rng.random(3), tail_big)

    rng = sp.sample_stream(0, 1)
    sp.sample_gamma(0.4, rng)
    tail_small = rng.random(3)
    rng = sp.sample_stream(0, 1)
    rng.gamma(1.4)
    rng.random()
    assert np.array_equal(rng.random(3), tail_small)


@pytest.mark.parametrize("shape", [0.15, 0.4, 0.97, 1.0, 2.5])
def test_sample_gamma_distribution(shape):
    rng = sp.sample_stream(123, int(shape * 100))
    draws = np.array([sp.sample_gamma(shape, rng) for _ in range(4000)])
    assert np.all(draws > 0)
    # fixed stream, so this p-value is deterministic
    assert stats.kstest(draws, "gamma", args=(shape,)).pvalue > 1e-4


def test_sample_gamma_rejects_nonpositive_shape():
    rng = sp.sample_stream(0, 0)
    with pytest.raises(sp.SamplerError):
        sp.sample_gamma(0.0, rng)


# ------------------------------------------------------------------ one block


def test_ac_block_is_positive_definite():
    rng = sp.sample_stream(5, 0)
    for _ in range(50):
        x = sp.sample_ac_riesz([0.8, 1.4, 2.0], -np.eye(3), rng)
        assert np.array_equal(x, x.T)
        assert np.linalg.eigvalsh(x)[0] > 0


def test_ac_block_validates_inputs():
    rng = sp.sample_stream(0, 0)
    with pytest.raises(sp.SamplerError):
        sp.sample_ac_riesz([0.5, 0.5], -np.eye(2), rng)  # u_2 <= 1/2
    with pytest.raises(sp.SamplerError):
        sp.sample_ac_riesz([1.0], -np.eye(2), rng)
    with pytest.raises(sp.TiltError):
        sp.sample_ac_riesz([1.0, 1.0], np.eye(2), rng)


def test_ac_block_determinant_is_product_of_gammas():
    # with tilt -I/ the Cholesky construction gives det X = prod of the
    # squared diagonal, i.e. a product of independent gamma variates; check
    # the log-determinant mean against sum of digamma values
    u = np.array([1.0, 1.5])
    shapes = u - 0.5 * np.arange(2)
    rng = sp.sample_stream(17, 0)
    n = 4000
    logdets = np.empty(n)
    for i in range(n):
        logdets[i] = math.log(np.linalg.det(sp.sample_ac_riesz(u, -np.eye(2), rng)))
    from scipy.special import psi

    want = psi(shapes).sum()
    se = logdets.std(ddof=1) / math.sqrt(n)
    assert abs(logdets.mean() - want) < 5 * se


def test_singular_block_support_and_rank():
    theta = nd_tilt(5, seed=2)
    rng = sp.sample_stream(9, 0)
    for _ in range(25):
        x = sp.sample_singular_block(1, 2, [1.0, 1.7], theta, rng).dense()
        # rows before the run start stay identically zero
        assert np.all(x[0, :] == 0.0) and np.all(x[:, 0] == 0.0)
        ev = np.linalg.eigvalsh(x)
        assert ev[0] > -1e-10 * ev[-1]
        assert np.sum(ev > 1e-10 * ev[-1]) == 2


def test_singular_block_validates_run():
    theta = nd_tilt(3)
    rng = sp.sample_stream(0, 0)
    with pytest.raises(sp.SamplerError):
        sp.sample_singular_block(2, 2, [1.0, 1.0], theta, rng)
    with pytest.raises(sp.SamplerError):
        sp.sample_singular_block(0, 2, [1.0], theta, rng)


# --------------------------------------------------------- sampling request


def test_spec_build_and_json_roundtrip():
    spec = sp.RieszSpec.build(s=[1.2, 0.5, 1.2, 1.0], seed=11, count=3)
    assert spec.param.u == (1.2, 0.0, 0.7, 0.0)
    obj = spec.to_json_dict()
    assert obj["n"] == 3 and obj["seed"] == 11
    back = sp.RieszSpec.from_json_dict(obj)
    assert back.param == spec.param
    assert back.seed == spec.seed and back.count == spec.count
    assert np.array_equal(back.theta.dense(), spec.theta.dense())


def test_spec_default_tilt_is_minus_identity():
    spec = sp.RieszSpec.build(u=[1.0, 1.0])
    assert np.array_equal(spec.theta.dense(), -np.eye(2))
    # serialized form must not carry negative zeros
    flat = json.dumps(spec.to_json_dict())
    assert "-0.0" not in flat


def test_spec_validation():
    with pytest.raises(sp.NonSamplableError):
        sp.RieszSpec.build(u=[1.0, 1.0], d=2.0)
    with pytest.raises(sp.SamplerError):
        sp.RieszSpec.build(u=[1.0], count=0)
    with pytest.raises(sp.SamplerError):
        sp.RieszSpec.build(u=[1.0], seed=1.5)
    with pytest.raises(sp.SamplerError):
        sp.RieszSpec.build()
    with pytest.raises(sp.SamplerError):
        sp.RieszSpec.build(s=[1.0], u=[1.0])
    with pytest.raises(sp.SamplerError):
        sp.RieszSpec.build(u=[1.0, 1.0], theta=SymElement.from_dense([[-1.0]]))
    for bad in ([[1.0, 0.0], [0.0, -1.0]], [[-1.0, 0.0], [0.0, 0.0]],
                [[0.0, 0.0], [0.0, 0.0]]):
        with pytest.raises(sp.TiltError):
            sp.RieszSpec.build(u=[1.0, 1.0], theta=SymElement.from_dense(bad))


# ------------------------------------------------------------ batch sampling


def test_sample_riesz_bitwise_reproducible():
    spec = sp.RieszSpec.build(s=[1.2, 0.5, 1.2, 1.0], theta=nd_tilt(4),
                              seed=3, count=40)
    a = sp.sample_riesz(spec).matrices
    b = sp.sample_riesz(spec).matrices
    assert np.array_equal(a, b)


def test_sample_riesz_workers_do_not_change_bits():
    spec = sp.RieszSpec.build(u=[0.9, 0.0, 1.3], theta=nd_tilt(3, seed=4),
                              seed=21, count=50)
    one = sp.sample_riesz(spec, workers=1).matrices
    for w in (2, 3, 7):
        assert np.array_equal(sp.sample_riesz(spec, workers=w).matrices, one)


def test_sample_riesz_streams_are_per_index():
    # sample i depends only on (seed, i), so a longer run extends a shorter
    # one without disturbing the prefix
    short = sp.sample_riesz(sp.RieszSpec.build(u=[1.1, 0.6], seed=8, count=5))
    long = sp.sample_riesz(sp.RieszSpec.build(u=[1.1, 0.6], seed=8, count=12))
    assert np.array_equal(short.matrices, long.matrices[:5])
    assert np.array_equal(short.stream_indices, np.arange(5))
    other = sp.sample_riesz(sp.RieszSpec.build(u=[1.1, 0.6], seed=9, count=5))
    assert not np.array_equal(short.matrices, other.matrices)


def test_sample_riesz_zero_parameter_is_point_mass_at_zero():
    batch = sp.sample_riesz(sp.RieszSpec.build(u=[0.0, 0.0, 0.0], count=7))
    assert np.array_equal(batch.matrices, np.zeros((7, 3, 3)))


def test_sample_riesz_rank_matches_support():
    spec = sp.RieszSpec.build(u=[1.2, 0.0, 0.7, 0.0], theta=nd_tilt(4, seed=6),
                              seed=2, count=300)
    batch = sp.sample_riesz(spec)
    ev = np.linalg.eigvalsh(batch.matrices)
    ranks = np.sum(ev > 1e-8 * ev[:, -1:], axis=1)
    assert np.all(ranks == 2)
    assert np.all(ev[:, 0] > -1e-10 * ev[:, -1])


def test_batch_accessors_agree():
    spec = sp.RieszSpec.build(u=[1.0, 0.5], seed=5, count=6)
    batch = sp.sample_riesz(spec)
    assert len(batch) == 6
    el = batch.element(2)
    assert np.array_equal(el.dense(), batch.matrices[2])
    assert np.array_equal(batch.packed()[2], el.packed)
    assert_allclose(batch.mean(), batch.matrices.mean(axis=0), atol=0)


def test_rank_one_law_matches_gaussian_oracle():
    """For s = (1/2, 1/2, 1/2) under tilt theta the draw is z z^T with
    z ~ N(0, (-2 theta)^{-1}); compare sample mean entrywise."""
    theta = nd_tilt(3, seed=13)
    spec = sp.RieszSpec.build(s=[0.5, 0.5, 0.5], theta=theta, seed=77,
                              count=30000)
    batch = sp.sample_riesz(spec, workers=2)
    cov = 0.5 * np.linalg.inv(-theta.dense())
    got = batch.mean()
    se = batch.matrices.std(axis=0, ddof=1) / math.sqrt(len(batch))
    assert np.all(np.abs(got - cov) < 5 * se)


def test_mean_under_unit_tilt_is_diagonal_s():
    spec = sp.RieszSpec.build(u=[0.8, 0.0, 1.1], seed=31, count=30000)
    batch = sp.sample_riesz(spec, workers=2)
    want = np.diag(spec.param.s)
    se = batch.matrices.std(axis=0, ddof=1) / math.sqrt(len(batch))
    se[se == 0] = 1e-12
    assert np.all(np.abs(batch.mean() - want) < 5 * se)


def test_sample_riesz_rejects_bad_worker_count():
    spec = sp.RieszSpec.build(u=[1.0], count=2)
    with pytest.raises(sp.SamplerError):
        sp.sample_riesz(spec, workers=0)


# ------------------------------------------------------------------- density


def test_log_density_rank_one_matches_gamma():
    # in rank one the measure is the Gamma(s) law with the e^{-x} factor
    # stripped, so log f(x) = gamma logpdf + x
    for s, x in [(0.7, 0.3), (2.0, 1.7), (5.5, 4.0)]:
        got = sp.log_density_ac([s], SymElement.from_dense([[x]]))
        want = stats.gamma.logpdf(x, s) + x
        assert got == pytest.approx(want, rel=1e-12)


def test_log_density_diagonal_frozen_value():
    # s = (2, 1.5): shifted exponent (0.5, 0), normalizer sqrt(2 pi)*Gamma(2)*Gamma(1)
    x = SymElement.from_dense(np.diag([4.0, 9.0]))
    got = sp.log_density_ac([2.0, 1.5], x)
    want = 0.5 * math.log(4.0) - 0.5 * math.log(2 * math.pi)
    assert got == pytest.approx(want, rel=1e-12)


def test_log_density_is_translation_consistent():
    rng = np.random.default_rng(41)
    m = rng.standard_normal((3, 3))
    x = SymElement.from_dense(m @ m.T + 0.5 * np.eye(3))
    s = np.array([2.0, 1.8, 1.6])
    # bumping every exponent by 1 multiplies the density by det(x)/c
    lo = sp.log_density_ac(s, x)
    hi = sp.log_density_ac(s + 1.0, x)
    from rieszcone.gindikin import log_gamma_omega

    want = math.log(np.linalg.det(x.dense()))
    want -= log_gamma_omega(s + 1.0, 3) - log_gamma_omega(s, 3)
    assert hi - lo == pytest.approx(want, rel=1e-10)


def test_log_density_refusals():
    x2 = SymElement.from_dense(np.eye(2))
    with pytest.raises(sp.SamplerError, match="no Lebesgue density"):
        sp.log_density_ac([0.5, 0.5], x2)  # singular parameter
    with pytest.raises(sp.SamplerError):
        sp.log_density_ac([1.0, 1.0], SymElement.from_dense(np.diag([1.0, 0.0])))
    with pytest.raises(sp.SamplerError):
        sp.log_density_ac([1.0, 1.0, 1.0], x2)


# -------------------------------------------------------------------- output


def test_write_ndjson_layout():
    spec = sp.RieszSpec.build(s=[1.0, 0.5], seed=1, count=3)
    batch = sp.sample_riesz(spec)
    buf = io.StringIO()
    sp.write_ndjson(batch, buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 4
    header = json.loads(lines[0])
    assert header["spec"]["s"] == [1.0, 0.5]
    assert header["partition"]["k"] == 1
    for i, line in enumerate(lines[1:]):
        el = SymElement.from_json_dict(json.loads(line))
        assert np.array_equal(el.dense(), batch.matrices[i])
