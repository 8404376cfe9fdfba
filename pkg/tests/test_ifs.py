import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from fraclab.bounds import similarity_dimension
from fraclab.errors import DomainError, ResourceError
from fraclab.ifs import (
    CondensationSet,
    IfsSystem,
    PointCloud,
    Similarity,
    affine_companion,
    bernoulli_comb,
    compose,
    extended_comb,
    level_set,
    level_slice,
    load_config,
    orbital_cloud,
    preset,
    sphere_system,
    stopping_set,
    system_from_config,
)

LAM = 2**-0.5


def _hausdorff_one_sided(a, b):
    """max over a of the distance to b."""
    worst = 0.0
    for i in range(0, len(a), 2000):
        d = np.linalg.norm(a[i : i + 2000, None, :] - b[None, :, :], axis=2)
        worst = max(worst, float(d.min(axis=1).max()))
    return worst


def _halves():
    return IfsSystem(1, (Similarity(0.5, np.eye(1), [0.0]), Similarity(0.5, np.eye(1), [0.5])))


# ---------------------------------------------------------------- compose


def test_compose_single():
    s = compose(bernoulli_comb(0.6), (0,))
    assert s.scale == 0.6 and np.all(s.translation == 0)


def test_compose_two_ones():
    lam = 0.6
    s = compose(bernoulli_comb(lam), (1, 1))
    assert math.isclose(s.scale, lam**2)
    assert np.allclose(s.translation, [(1 - lam) * (1 + lam), 0.0], atol=1e-15)


def test_compose_empty_is_identity():
    s = compose(bernoulli_comb(0.6), ())
    assert s.scale == 1.0 and np.all(s.orthogonal == np.eye(2)) and np.all(s.translation == 0)


def test_compose_bad_index():
    with pytest.raises(DomainError):
        compose(bernoulli_comb(0.6), (2,))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 3), max_size=6), st.lists(st.integers(0, 3), max_size=6),
       st.floats(0.1, 0.9))
def test_compose_multiplicative(a, b, c):
    system = sphere_system(c)
    sa, sb, sab = compose(system, a), compose(system, b), compose(system, a + b)
    assert math.isclose(sab.scale, sa.scale * sb.scale, rel_tol=1e-12)
    assert np.allclose(sab.orthogonal, sa.orthogonal @ sb.orthogonal, atol=1e-12)
    p = np.array([0.3, -0.2, 0.9])
    assert np.allclose(sab(p), sa(sb(p)), atol=1e-12)


def test_exact_compose_matches_float():
    system = preset("bernoulli_comb", lambda_poly="x^2-x-1")
    s = compose(system, (1, 0, 1, 1))
    assert abs(float(s.exact.translation[0]) - s.translation[0]) < 1e-14


# ---------------------------------------------------------------- stopping and level sets


def test_stopping_set_homogeneous():
    system = _halves()
    assert stopping_set(system, 0.25) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_stopping_set_comb():
    assert stopping_set(bernoulli_comb(0.7), 0.5) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_stopping_set_shallow():
    system = extended_comb(0.8, 0.1)
    assert stopping_set(system, 0.99) == [(0,), (1,), (2,)]


def test_stopping_set_rejects_r():
    with pytest.raises(DomainError):
        stopping_set(_halves(), 1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 0.9), st.floats(0.01, 0.9))
def test_stopping_set_prefix_free_and_complete(lam, r):
    assume(math.log(r) / math.log(lam) < 14)
    system = bernoulli_comb(lam)
    words = stopping_set(system, r)
    ws = set(words)
    assert not any(w[:k] in ws for w in words for k in range(1, len(w)))
    s = similarity_dimension(system.scales)
    assert math.isclose(sum(lam ** (s * len(w)) for w in words), 1.0, rel_tol=1e-9)


def test_stopping_set_mixed_scales_kraft():
    system = extended_comb(0.6, 0.2)
    words = stopping_set(system, 0.01)
    s = similarity_dimension(system.scales)
    assert math.isclose(sum(np.prod(system.scales[list(w)]) ** s for w in words), 1.0, rel_tol=1e-9)


def test_level_set_halves():
    assert len(level_set(_halves(), 3)) == 8
    assert all(len(w) == 3 for w in level_set(_halves(), 3))


def test_level_set_sqrt2_boundary():
    system = bernoulli_comb(LAM)
    # lambda^2 = 1/2 sits on the upper edge of level 1, lambda^3 ~ 0.354 inside it
    level1 = level_set(system, 1)
    assert [w for w in level1 if len(w) == 2] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert sorted({len(w) for w in level1}) == [2, 3] and len(level1) == 12
    assert level_set(system, 0) == [(0,), (1,)]


@pytest.mark.parametrize("lam", [0.55, 0.6, LAM, 0.8])
def test_level_set_matches_scales(lam):
    system = bernoulli_comb(lam)
    for k in range(5):
        lengths = [n for n in range(1, 40) if 2.0 ** (-k - 1) * (1 + 1e-12) < lam**n <=2.0**-k * (1 + 1e-12)]
        expect = [w for n in lengths for w in itertools.product((0, 1), repeat=n)]
        assert sorted(level_set(system, k)) == sorted(expect)


def test_level_set_budget():
    with pytest.raises(ResourceError):
        level_set(bernoulli_comb(0.9), 12, budget=100)


# ---------------------------------------------------------------- clouds


def test_cloud_of_fixed_point():
    s = Similarity(0.5, np.eye(2), [0.5, 0.25])
    fp = s.fixed_point()
    system = IfsSystem(2, (s,), CondensationSet("point", fp))
    cloud = orbital_cloud(system, 2**-6)
    assert np.allclose(cloud.points, fp, atol=1e-12)


def _comb_half_truth(depth):
    # the lambda = 1/2 comb: x = j 2^-k with a segment of height 2^-k
    pts = []
    for k in range(depth + 1):
        for j in range(2**k):
            ys = np.linspace(0.0, 2.0**-k, 2 ** max(0, 10 - k) + 1)
            pts.append(np.stack([np.full_like(ys, j * 2.0**-k), ys], axis=1))
    pts.append(np.stack([np.linspace(0, 1, 1025), np.zeros(1025)], axis=1))
    return np.concatenate(pts)


def test_comb_half_cloud_hausdorff():
    cloud = orbital_cloud(bernoulli_comb(Fraction(1, 2)), 2**-6).points
    truth = _comb_half_truth(8)
    # base points are dyadic rationals
    assert np.all(cloud[:, 0] * 2**12 == np.round(cloud[:, 0] * 2**12))
    assert _hausdorff_one_sided(cloud, truth) <= 2**-7
    assert _hausdorff_one_sided(truth, cloud) <= 2**-7


def test_sphere_cloud_shells():
    c = 0.6
    cloud = orbital_cloud(sphere_system(c), 2**-5).points
    norms = np.linalg.norm(cloud, axis=1)
    n = np.round(np.log(norms) / np.log(c))
    assert np.allclose(norms, c**n, rtol=1e-9)
    assert np.isclose(norms.max(), 1.0)


def test_cloud_nesting():
    system = bernoulli_comb(0.6)
    coarse = orbital_cloud(system, 2**-4).points
    fine = orbital_cloud(system, 2**-6).points
    assert _hausdorff_one_sided(coarse, fine) <= 2**-4


def test_cloud_self_covering():
    system = extended_comb(0.6, 0.2)
    delta = 2**-5
    cloud = orbital_cloud(system, delta).points
    ys = np.linspace(0, 1, 65)
    cond = np.stack([np.zeros_like(ys), ys], axis=1)
    images = np.concatenate([s(cloud) for s in system.maps] + [cond])
    assert _hausdorff_one_sided(cloud, images) <= delta
    assert _hausdorff_one_sided(images, cloud) <= delta


def test_cloud_budget():
    with pytest.raises(ResourceError) as info:
        orbital_cloud(bernoulli_comb(0.7), 2**-12, budget=1000)
    assert isinstance(info.value.partial, PointCloud)


def test_level_slice_single_map():
    s = Similarity(0.6, np.eye(2), [0.1, 0.0])
    system = IfsSystem(2, (s,), CondensationSet("point", [1.0, 1.0]))
    cloud = level_slice(system, 0, 2**-5)
    assert np.allclose(cloud.points, [[0.7, 0.6]])


def test_level_slice_sqrt2():
    cloud = level_slice(bernoulli_comb(LAM), 1, 2**-8).points
    tall = cloud[cloud[:, 1] > LAM**3 + 1e-9]
    xs = np.unique(np.round(tall[:, 0], 12))
    expected = sorted({0.0, (1 - LAM) * LAM, 1 - LAM, (1 - LAM) * (1 + LAM)})
    assert np.allclose(xs, expected)
    assert math.isclose(cloud[:, 1].max(), 0.5, rel_tol=1e-12)
    assert len(np.unique(np.round(cloud[:, 0], 12))) == 8


def test_level_slice_budget():
    with pytest.raises(ResourceError):
        level_slice(bernoulli_comb(0.9), 14, 2**-6, budget=50)


# ---------------------------------------------------------------- presets and config


def test_presets():
    half = bernoulli_comb(0.5)
    assert half.scales.tolist() == [0.5, 0.5]
    assert half.condensation.kind == "segment"
    ext = extended_comb(0.7, 0.2)
    assert len(ext.maps) == 3
    with pytest.raises(DomainError):
        extended_comb(0.7, 0.35)
    sph = sphere_system(0.95)
    assert sph.dimension == 3 and np.allclose(sph.condensation.data, [[1, 0, 0]])
    assert len(sph.maps) == 4
    aff = affine_companion(0.6)
    assert aff.condensation.kind == "point"


def test_preset_by_name():
    s = preset("bernoulli_comb", lambda_poly="x^2-2")
    assert s.is_exact and s.scales[0] == LAM
    assert preset("sphere", c=0.5, generators=[{"axis": [0, 0, 1], "angle_deg": 90}]).dimension == 3
    with pytest.raises(DomainError):
        preset("nope")
    with pytest.raises(DomainError):
        preset("bernoulli_comb")


def test_validation():
    with pytest.raises(DomainError):
        Similarity(0.5, [[1, 1], [0, 1]], [0, 0])
    with pytest.raises(DomainError):
        IfsSystem(1, (Similarity(1.0, np.eye(1), [0.0]),))
    with pytest.raises(DomainError):
        CondensationSet("blob", [[0, 0]])
    with pytest.raises(DomainError):
        bernoulli_comb(1.2)


def test_config_explicit_exact(tmp_path):
    cfg = {
        "dimension": 1,
        "maps": [{"scale": "1/3", "translation": ["0"]}, {"scale": "1/3", "translation": ["2/3"]}],
        "condensation": {"kind": "point", "data": [[0.5]]},
    }
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    system = system_from_config(load_config(path))
    assert system.is_exact and system.condensation.kind == "point"
    assert compose(system, (1, 1)).exact.translation[0] == Fraction(8, 9)


def test_config_rotation_angle():
    cfg = {"dimension": 2, "maps": [{"scale": 0.5, "rotation": {"angle_deg": 90}, "translation": [0, 0]}]}
    system = system_from_config(cfg)
    assert np.allclose(system.maps[0].orthogonal, [[0, -1], [1, 0]])


def test_config_preset_and_conflict():
    cfg = {"preset": {"name": "bernoulli_comb", "params": {"lambda": "1/2"}}}
    assert system_from_config(cfg).is_exact
    agree = dict(cfg, dimension=2, maps=[{"scale": 0.5, "translation": [0, 0]}, {"scale": 0.5, "translation": [0.5, 0]}])
    assert len(system_from_config(agree).maps) == 2
    clash = dict(cfg, dimension=2, maps=[{"scale": 0.5, "translation": [0, 0]}])
    with pytest.raises(DomainError):
        system_from_config(clash)


def test_config_condensation_overrides_preset():
    cfg = {"preset": {"name": "bernoulli_comb", "params": {"lambda": 0.6}},
           "condensation": {"kind": "point", "data": [[0, 0]]}}
    assert system_from_config(cfg).condensation.kind == "point"


def test_config_empty():
    with pytest.raises(DomainError):
        system_from_config({})
