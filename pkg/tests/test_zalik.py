import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from gaborphase.errors import IllPosedError, InvalidArgumentError
from gaborphase.signals import make_grid
from gaborphase.zalik import best_approximation, build_dictionary, completeness_report, muntz_partial_sums

GRID = make_grid(0.5, 257)


def harmonic(n):
    return sum((Fraction(1, k) for k in range(1, n + 1)), Fraction(0))


def test_harmonic_partial_sums_exact():
    diag = muntz_partial_sums(itertools.count(1), [1, 2, 4, 8, 16, 32, 64])
    table = dict(diag.partial_sums)
    assert table[8] == Fraction(761, 280)
    assert float(table[8]) == pytest.approx(2.717857142857143, abs=1e-15)
    assert all(table[n] == harmonic(n) for n in table)
    assert diag.verdict == "diverging-trend"


def test_geometric_converges():
    diag = muntz_partial_sums((2**k for k in itertools.count()), [1, 2, 4, 8, 16, 32, 64])
    assert diag.verdict == "converging-trend"
    assert 2 - dict(diag.partial_sums)[64] == Fraction(1, 2**63)


def test_zero_only_inconclusive():
    diag = muntz_partial_sums([0], [1])
    assert diag.partial_sums == [(1, 0)] and diag.verdict == "inconclusive"


def test_partial_sums_nondecreasing_and_exact_floats():
    diag = muntz_partial_sums([0.1, -0.25, 0.5, 0.0, 3.0], [1, 2, 3, 4, 5])
    sums = [s for _, s in diag.partial_sums]
    assert sums == sorted(sums)
    assert sums[0] == 1 / Fraction(0.1)  # the binary value of 0.1, not 10


def test_dictionary_atoms():
    d = build_dictionary([0.0], 2 * np.pi, GRID)
    row = d.atoms[0]
    np.testing.assert_array_equal(row, row[::-1])
    assert row[128] == 1.0 and np.all((row > 0) & (row <= 1))
    d = build_dictionary([0.5], 2 * np.pi, GRID)
    assert d.atoms[0, -1] == 1.0


def test_dictionary_rejects_rate():
    with pytest.raises(InvalidArgumentError):
        build_dictionary([0.0], 0.0, GRID)


def test_gram_separated_centers():
    c = 2 * np.pi
    a = 5 / math.sqrt(c)
    d = build_dictionary([-a, a], c, make_grid(3.0, 2001))
    G = d.gram()
    assert G[0, 1] <= math.exp(-12.5) * G[0, 0]
    # closed form of the overlap integral
    assert G[0, 1] == pytest.approx(math.exp(-c * (2 * a) ** 2 / 2) * math.sqrt(math.pi / (2 * c)), rel=1e-6)


def test_atom_target_in_span():
    d = build_dictionary(np.linspace(-1, 1, 5), 2 * np.pi, GRID)
    c0 = d.centers[2]
    approx = best_approximation(lambda eta: np.exp(-2 * np.pi * (eta - c0) ** 2), d, ridge=1e-14)
    assert approx.sup_error <= 1e-10
    np.testing.assert_allclose(approx.coefficients, np.eye(5)[2], atol=1e-10)
    on_grid = best_approximation(d.atoms[2], d, ridge=1e-14)
    assert on_grid.sup_error <= 1e-10


def test_exponential_target():
    d = build_dictionary(np.linspace(-1, 1, 17), 2 * np.pi, GRID)
    approx = best_approximation(lambda eta: np.exp(2j * np.pi * eta), d)
    assert approx.sup_error <= 1e-3


@pytest.mark.parametrize("freq", [1, 3])
def test_nested_sets_monotone(freq):
    sets = [np.linspace(-1, 1, n) for n in (9, 17, 33, 65)]
    rep = completeness_report(lambda eta: np.exp(2j * np.pi * freq * eta), sets, 2 * np.pi, GRID)
    l2 = [e[2] for e in rep["errors"]]
    sup = [e[1] for e in rep["errors"]]
    assert all(b <= a for a, b in zip(l2, l2[1:]))
    assert all(b <= a + 1e-9 for a, b in zip(sup, sup[1:]))
    assert list(rep) == ["centers", "c", "condition", "errors"]


def test_unregularized_singular_refused():
    d = build_dictionary(np.linspace(-1, 1, 17), 2 * np.pi, GRID)
    with pytest.raises(IllPosedError):
        best_approximation(lambda eta: np.exp(2j * np.pi * eta), d, ridge=0)
    well = build_dictionary([-0.4, 0.4], 2 * np.pi, GRID)
    assert best_approximation(lambda eta: np.cos(eta), well, ridge=0).l2_error < 1
