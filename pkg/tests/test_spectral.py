import math
from fractions import Fraction

import numpy as np
import pytest

from cuntzwalk import (
    SpectralSystem,
    check_assumptions,
    export_min_set_walk,
    find_min_sets,
    fixtures,
    frame_frequencies,
    mu_hat,
    validate_walk,
    verify_parseval,
)


def test_system_constructor_checks():
    with pytest.raises(ValueError):
        SpectralSystem(1, (0,), (0,), (1.0,))
    with pytest.raises(ValueError):
        SpectralSystem(4, (2,), (0,), (1.0,))
    with pytest.raises(ValueError):
        SpectralSystem(4, (0, 2), (1,), (1.0,))
    with pytest.raises(ValueError):
        SpectralSystem(4, (0, 2), (0, 1), (1.0,))


def test_no_overlap_heuristic():
    assert fixtures.quarter_fourier_system().no_overlap
    assert SpectralSystem(2, (0, 2), (0, 1), (1.0, 1.0)).no_overlap is False
    assert SpectralSystem(2, (0, 2), (0, 1), (1.0, 1.0), no_overlap=True).no_overlap


def test_assumptions_on_fixtures():
    for sys_ in (fixtures.quarter_fourier_system(), fixtures.lebesgue_system()):
        rep = check_assumptions(sys_)
        assert rep.passed(), rep.to_dict()
        assert rep.isometry_residual < 1e-12


def test_assumptions_fail_for_non_isometry():
    # digits {0, 1} against scale 4 frequencies {0, 1} are not orthogonal
    bad = SpectralSystem(4, (0, 1), (0, 1), (1.0, 1.0))
    assert not check_assumptions(bad).passed()
    with pytest.raises(ValueError):
        find_min_sets(bad)


def test_quarter_fourier_min_sets():
    ms = find_min_sets(fixtures.quarter_fourier_system())
    assert [m.points for m in ms] == [(Fraction(0),)]
    assert ms[0].transitions == {(Fraction(0), 0): Fraction(0)}


def test_lebesgue_min_sets():
    ms = find_min_sets(fixtures.lebesgue_system())
    assert [m.points for m in ms] == [(Fraction(-1),), (Fraction(0),)]
    # each point is an extreme fixed point of one digit map
    assert ms[0].transitions == {(Fraction(-1), 1): Fraction(-1)}
    assert ms[1].transitions == {(Fraction(0), 0): Fraction(0)}


def test_min_set_walk_export():
    sys_ = fixtures.lebesgue_system()
    for m in find_min_sets(sys_):
        w = export_min_set_walk(sys_, m)
        assert validate_walk(w).ok


def test_frame_frequencies_quarter_fourier():
    sys_ = fixtures.quarter_fourier_system()
    ms = find_min_sets(sys_)
    for depth, expected in [
        (0, {0}),
        (1, {0, 1}),
        (2, {0, 1, 4, 5}),
        (3, {0, 1, 4, 5, 16, 17, 20, 21}),
    ]:
        elems = frame_frequencies(sys_, ms, depth)
        assert {int(f) for f, _c in elems} == expected
        assert len(elems) == len(expected)          # no repetitions here
        assert all(c == 1.0 for _f, c in elems)     # unit amplitudes


def test_mu_hat_known_values():
    sys_ = fixtures.lebesgue_system()
    # Lebesgue measure on [0,1]: mu_hat(xi) = (e^{2 pi i xi} - 1)/(2 pi i xi)
    for xi in (0.3, 1.7, -2.2):
        expected = (np.exp(2j * np.pi * xi) - 1) / (2j * np.pi * xi)
        assert mu_hat(sys_, xi, K=60) == pytest.approx(expected, abs=1e-9)
    assert mu_hat(sys_, 0.0) == pytest.approx(1.0)
    # integer frequencies are orthogonal to 1
    assert abs(mu_hat(sys_, 3.0, K=60)) < 1e-9


def test_mu_hat_orthogonality_quarter_fourier():
    sys_ = fixtures.quarter_fourier_system()
    lams = [0, 1, 4, 5, 16, 17, 20, 21]
    worst = max(abs(mu_hat(sys_, a - b, K=40)) for a in lams for b in lams if a != b)
    assert worst < 1e-8


def test_parseval_sums_monotone_bounded_convergent():
    sys_ = fixtures.quarter_fourier_system()
    sums = verify_parseval(sys_, [1 / 3, 0.7, 2.5], depth=8)
    for seq in sums.values():
        assert all(b >= a - 1e-12 for a, b in zip(seq, seq[1:]))
        assert max(seq) <= 1 + 1e-6
        assert seq[-1] > 0.99


def test_parseval_lebesgue():
    sums = verify_parseval(fixtures.lebesgue_system(), [0.25], depth=10)
    seq = sums[0.25]
    assert all(b >= a - 1e-12 for a, b in zip(seq, seq[1:]))
    assert max(seq) <= 1 + 1e-6
    assert seq[-1] > 0.99


def test_dict_round_trip():
    sys_ = SpectralSystem(4, (0, 2), (0, 1), (1.0, complex(0, 1)), no_overlap=True)
    back = SpectralSystem.from_dict(sys_.to_dict())
    assert back == sys_
