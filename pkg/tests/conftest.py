from __future__ import annotations

from fractions import Fraction

import pytest

from gammastack.liealg import FiniteGroup, GammaLieBialgebra, LieBialgebra

F = Fraction


def axb_lba() -> LieBialgebra:
    """Basis (x, y), [x,y] = x, delta(x) = 0, delta(y) = x^y."""
    return LieBialgebra(
        2,
        ["x", "y"],
        {(0, 1, 0): F(1), (1, 0, 0): F(-1)},
        {(1, 0, 1): F(1), (1, 1, 0): F(-1)},
    )


def axb_gamma() -> GammaLieBialgebra:
    """Z/2 acting by x -> -x, y -> y; f_sigma = -2 x^y."""
    group = FiniteGroup.cyclic(2, "s")
    theta = {
        0: [[F(1), F(0)], [F(0), F(1)]],
        1: [[F(-1), F(0)], [F(0), F(1)]],
    }
    f = {0: {}, 1: {(0, 1): F(-2), (1, 0): F(2)}}
    return GammaLieBialgebra(axb_lba(), group, theta, f)


def abelian_lba() -> LieBialgebra:
    """2-dim abelian algebra with delta(x) = x^y (dual is the ax+b algebra)."""
    return LieBialgebra(2, ["x", "y"], {}, {(0, 0, 1): F(1), (0, 1, 0): F(-1)})


def abelian_flat_lba() -> LieBialgebra:
    """2-dim abelian algebra with zero cobracket."""
    return LieBialgebra(2, ["x", "y"], {}, {})


def abelian_gamma() -> GammaLieBialgebra:
    """Abelian algebra, theta = id, f = 0 (the trivial stack example)."""
    group = FiniteGroup.cyclic(2, "s")
    ident = [[F(1), F(0)], [F(0), F(1)]]
    return GammaLieBialgebra(abelian_lba(), group, {0: ident, 1: ident}, {0: {}, 1: {}})


def abelian_twisted_gamma() -> GammaLieBialgebra:
    """Abelian algebra with theta_s = diag(-1, 1) and f_s = -2 x^y."""
    group = FiniteGroup.cyclic(2, "s")
    theta = {
        0: [[F(1), F(0)], [F(0), F(1)]],
        1: [[F(-1), F(0)], [F(0), F(1)]],
    }
    f = {0: {}, 1: {(0, 1): F(-2), (1, 0): F(2)}}
    return GammaLieBialgebra(abelian_lba(), group, theta, f)


def sl2_lba() -> LieBialgebra:
    """Basis (h, e, f): [h,e] = 2e, [h,f] = -2f, [e,f] = h.

    Cobracket from r = e(x)f + h(x)h/4 via delta(z) = [r, z(x)1 + 1(x)z]:
    delta(e) = (h(x)e - e(x)h)/2, delta(f) = (h(x)f - f(x)h)/2, delta(h) = 0.
    """
    bracket = {
        (0, 1, 1): F(2),
        (1, 0, 1): F(-2),
        (0, 2, 2): F(-2),
        (2, 0, 2): F(2),
        (1, 2, 0): F(1),
        (2, 1, 0): F(-1),
    }
    cobracket = {
        (1, 0, 1): F(1, 2),
        (1, 1, 0): F(-1, 2),
        (2, 0, 2): F(1, 2),
        (2, 2, 0): F(-1, 2),
    }
    return LieBialgebra(3, ["h", "e", "f"], bracket, cobracket)


def sl2_r() -> dict[tuple[int, int], Fraction]:
    """Standard r-matrix e(x)f + h(x)h/4 in the (h,e,f) index order."""
    return {(1, 2): F(1), (0, 0): F(1, 4)}


def sl2_weyl_theta() -> dict[int, list[list[Fraction]]]:
    """Z/4 = <w>: theta_w maps h -> -h, e -> -f, f -> -e (order 2)."""
    ident = [[F(1), F(0), F(0)], [F(0), F(1), F(0)], [F(0), F(0), F(1)]]
    w = [[F(-1), F(0), F(0)], [F(0), F(0), F(-1)], [F(0), F(-1), F(0)]]
    return {0: ident, 1: w, 2: ident, 3: w}


def sl2_weyl_gamma() -> GammaLieBialgebra:
    from gammastack.liealg import from_quasitriangular

    group = FiniteGroup.cyclic(4, "w")
    return from_quasitriangular(sl2_lba(), group, sl2_weyl_theta(), sl2_r())


@pytest.fixture
def axb():
    return axb_gamma()


@pytest.fixture
def sl2_weyl():
    return sl2_weyl_gamma()
