import math
from fractions import Fraction

import numpy as np
import pytest

from fraclab.errors import DomainError, ResourceError
from fraclab.sphere import (
    RotationSet,
    alpha_of_c,
    commuting_generators,
    default_generators,
    orbit,
    orbit_counts,
    rotation_from_axis_angle,
    sg_attractor,
)

# G^n(x) box counts at m = 6 for the default pair, x = (1, 0, 0); matches exact_orbit_counts
FROZEN_COUNTS = [1, 3, 9, 27, 81, 243, 717, 2119, 6037]

F = Fraction
RZ = ((F(3, 5), F(-4, 5), F(0)), (F(4, 5), F(3, 5), F(0)), (F(0), F(0), F(1)))
RX = ((F(1), F(0), F(0)), (F(0), F(3, 5), F(-4, 5)), (F(0), F(4, 5), F(3, 5)))


def _transpose(m):
    return tuple(zip(*m))


def _apply(m, v):
    return tuple(sum(a * b for a, b in zip(row, v)) for row in m)


def exact_orbit_counts(n_max, m):
    """Counts from exact rational orbit points."""
    alphabet = [RZ, RX, _transpose(RZ), _transpose(RX)]
    level = {(F(1), F(0), F(0))}
    out = []
    for n in range(n_max + 1):
        if n:
            level = {_apply(g, p) for p in level for g in alphabet}
        out.append(len({tuple(math.floor(c * 2**m) for c in p) for p in level}))
    return out


def test_orbit_trivial():
    rot = default_generators()
    assert orbit(rot, None, 0).points.tolist() == [[1.0, 0.0, 0.0]]
    ident = RotationSet((np.eye(3),))
    for n in (1, 4):
        assert len(orbit(ident, [0, 0, 1], n)) == 1


def test_orbit_level_two():
    pts = orbit(default_generators(), [1, 0, 0], 2)
    assert 1 < len(pts) <= 16


def test_counts_match_exact_orbit():
    ours = orbit_counts(default_generators(), [1, 0, 0], 5, 6)
    assert list(ours.counts.values()) == exact_orbit_counts(5, 6)


def test_frozen_counts():
    res = orbit_counts(default_generators(), None, 8, 6)
    assert list(res.counts.values()) == FROZEN_COUNTS
    assert res.epsilon_hat > 1
    assert res.saturation_level == 4096


def test_identity_counts():
    res = orbit_counts(RotationSet((np.eye(3),)), None, 6, 8)
    assert set(res.counts.values()) == {1}
    assert res.epsilon_hat == 0


def test_commuting_orbit_is_a_circle():
    res = orbit_counts(commuting_generators(), None, 30, 10)
    for n, c in res.counts.items():
        assert c <= 4 * n + 1
    assert res.epsilon_hat < 0.1
    pts = orbit(commuting_generators(), None, 10).points
    assert np.allclose(pts[:, 2], 0)


def test_counts_monotone_with_inverses():
    counts = list(orbit_counts(default_generators(), [0, 0.6, 0.8], 7, 5).counts.values())
    assert all(b >= a for a, b in zip(counts, counts[1:]))
    assert counts[-1] <= 6 * 4**5


def test_orbit_nesting():
    rot = default_generators()
    x = [0.0, 0.6, 0.8]
    for n in range(0, 4):
        small = orbit(rot, x, n).points
        big = orbit(rot, x, n + 2).points
        dist = np.min(np.linalg.norm(small[:, None, :] - big[None, :, :], axis=2), axis=1)
        assert dist.max() < 1e-12


def test_unit_norm():
    pts = orbit(default_generators(), [0, 0.6, 0.8], 7).points
    assert np.max(np.abs(np.linalg.norm(pts, axis=1) - 1)) <= 7e-12


def test_bad_points():
    for x in ([0, 0, 0], [1, 1, 0], [1, 0]):
        with pytest.raises(DomainError):
            orbit(default_generators(), x, 2)
    with pytest.raises(DomainError):
        orbit(default_generators(), None, -1)
    with pytest.raises(DomainError):
        sg_attractor(0.5, x=[0, 0, 0], m=4)


def test_budget():
    with pytest.raises(ResourceError):
        orbit(default_generators(), None, 6, budget=100)


def test_rotation_set_validation():
    with pytest.raises(DomainError):
        RotationSet(())
    with pytest.raises(DomainError):
        RotationSet((np.diag([1.0, 1.0, 2.0]),))
    with pytest.raises(DomainError):
        RotationSet((np.diag([1.0, 1.0, -1.0]),))
    with pytest.raises(DomainError):
        RotationSet((np.eye(3), np.eye(2)))
    assert len(default_generators().alphabet()) == 4
    assert len(RotationSet((np.eye(3),), include_inverses=False).alphabet()) == 1


def test_axis_angle():
    r = rotation_from_axis_angle([0, 0, 2], math.acos(0.6))
    assert np.allclose(r, np.array(RZ, dtype=float), atol=1e-15)
    r = rotation_from_axis_angle([1, 1, 1], 2 * math.pi / 3)
    assert np.allclose(r @ [1, 0, 0], [0, 1, 0])


def test_alpha_of_c():
    assert alpha_of_c(0.5, 2) == pytest.approx(2 * math.log(2) / (math.log(3) + 2 * math.log(2)))
    assert alpha_of_c(0.9, 0.0) == pytest.approx(1.0)
    # alpha(c) -> 0 as c -> 1 for fixed eps
    assert alpha_of_c(0.999, 1.0) < alpha_of_c(0.99, 1.0) < alpha_of_c(0.9, 1.0)


def test_csv():
    text = orbit_counts(default_generators(), None, 2, 4).to_csv()
    assert text.splitlines()[0] == "n,count,log2count"
    assert text.splitlines()[1] == "0,1,0.0"


def test_ray_attractor():
    # c^n x along one axis: roughly one new cell per halving of the mesh
    att = sg_attractor(0.5, RotationSet((np.eye(3),), include_inverses=False), m=10, eps_hat=0.0,
                       tol=1 / 16, window=(4, 10))
    assert att.curve.entries == {m: m + 2 for m in range(1, 11)}
    assert att.estimate.slope < 0.25
    assert att.alpha_c == pytest.approx(1.0)


def test_default_attractor_small():
    att = sg_attractor(0.95, m=4, with_cloud=True)
    assert att.cloud is not None and len(att.cloud) > 0
    assert np.all(np.linalg.norm(att.cloud.points, axis=1) <= 1 + 1e-12)
    assert att.epsilon_hat > 0
    assert att.target == pytest.approx((1 - att.alpha_c) * 2)
