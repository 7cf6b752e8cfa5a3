"""Built-in problem constructors, including generated quantum data.

The quantum generators cover the cocommutative, abelian-with-cobracket, and
low-order sl2 cases.  Everything produced here is re-validated by the full
relation validator before being served or serialized.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from gammastack.formal import PairingContext, build_delta_gamma, tensor2_to_series
from gammastack.liealg import (
    FiniteGroup,
    GammaLieBialgebra,
    LieBialgebra,
    from_quasitriangular,
)
from gammastack.linalg import LinearSystem, solve_linear
from gammastack.quantum import (
    PLAIN,
    GammaQUEData,
    HElement,
    Key,
    QuantumError,
    QueContext,
    validate_que_data,
)
from gammastack.stack import lift_twist
from gammastack.tensors import SparseTensor

F = Fraction


# -- classical constructors ---------------------------------------------------


def abelian_gamma_lba() -> GammaLieBialgebra:
    """2-dim abelian algebra, delta(x) = x^y, trivial action and twist."""
    lba = LieBialgebra(2, ["x", "y"], {}, {(0, 0, 1): F(1), (0, 1, 0): F(-1)})
    group = FiniteGroup.cyclic(2, "s")
    ident = [[F(1), F(0)], [F(0), F(1)]]
    return GammaLieBialgebra(lba, group, {0: ident, 1: ident}, {0: {}, 1: {}})


def axb_gamma_lba() -> GammaLieBialgebra:
    """[x,y] = x, delta(y) = x^y; Z/2 acts by x -> -x with f_s = -2 x^y."""
    lba = LieBialgebra(
        2,
        ["x", "y"],
        {(0, 1, 0): F(1), (1, 0, 0): F(-1)},
        {(1, 0, 1): F(1), (1, 1, 0): F(-1)},
    )
    group = FiniteGroup.cyclic(2, "s")
    theta = {0: [[F(1), F(0)], [F(0), F(1)]], 1: [[F(-1), F(0)], [F(0), F(1)]]}
    f = {0: {}, 1: {(0, 1): F(-2), (1, 0): F(2)}}
    return GammaLieBialgebra(lba, group, theta, f)


def sl2_lba() -> LieBialgebra:
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


def sl2_r() -> dict:
    return {(1, 2): F(1), (0, 0): F(1, 4)}


def sl2_weyl_gamma_lba() -> GammaLieBialgebra:
    """Z/4 covering of the Weyl group acting on sl2, quasitriangular twist."""
    group = FiniteGroup.cyclic(4, "w")
    ident = [[F(int(i == j)) for j in range(3)] for i in range(3)]
    w = [[F(-1), F(0), F(0)], [F(0), F(0), F(-1)], [F(0), F(-1), F(0)]]
    theta = {0: ident, 1: w, 2: ident, 3: w}
    return from_quasitriangular(sl2_lba(), group, theta, sl2_r())


def abelian_twisted_gamma_lba() -> GammaLieBialgebra:
    """Abelian algebra with theta_s = diag(-1,1) and f_s = -2 x^y."""
    lba = LieBialgebra(2, ["x", "y"], {}, {(0, 0, 1): F(1), (0, 1, 0): F(-1)})
    group = FiniteGroup.cyclic(2, "s")
    theta = {0: [[F(1), F(0)], [F(0), F(1)]], 1: [[F(-1), F(0)], [F(0), F(1)]]}
    f = {0: {}, 1: {(0, 1): F(-2), (1, 0): F(2)}}
    return GammaLieBialgebra(lba, group, theta, f)


def trivial_que_base() -> GammaLieBialgebra:
    """ax+b bracket with zero cobracket; Z/2 by x -> -x, f = 0."""
    lba = LieBialgebra(2, ["x", "y"], {(0, 1, 0): F(1), (1, 0, 0): F(-1)}, {})
    group = FiniteGroup.cyclic(2, "s")
    theta = {0: [[F(1), F(0)], [F(0), F(1)]], 1: [[F(-1), F(0)], [F(0), F(1)]]}
    return GammaLieBialgebra(lba, group, theta, {0: {}, 1: {}})


# -- quantum data helpers -------------------------------------------------------


def tensor_unit_right(x: HElement) -> HElement:
    return HElement(
        x.ctx, x.slots + 1, {(a, sl + (((), PLAIN),)): c for (a, sl), c in x.coeffs.items()}
    )


def tensor_unit_left(x: HElement) -> HElement:
    return HElement(
        x.ctx, x.slots + 1, {(a, (((), PLAIN),) + sl): c for (a, sl), c in x.coeffs.items()}
    )


def dual_pairing_delta_images(ctx: QueContext, lba_gamma) -> list[HElement]:
    """hbar-graded coproduct dual to PBW multiplication in U(g*) with the
    rescaled bracket: each straightening step costs one hbar.

    Output length L terms of the classical dual coproduct are tagged
    hbar^(L-1) on generators.  For an abelian algebra this is a genuine
    quantized coproduct for the undeformed commutative product.
    """
    n = min(ctx.D, ctx.M)
    pc = PairingContext(lba_gamma, n)
    images = []
    for i in range(lba_gamma.dim):
        coeffs: dict[Key, Fraction] = {}
        for (b1, b2), c in pc.coproduct_word((i,)).items():
            tag = len(b1) + len(b2) - 1
            if tag < ctx.M:
                coeffs[(tag, ((b1, PLAIN), (b2, PLAIN)))] = c
        images.append(HElement(ctx, 2, coeffs))
    return images


def solve_additive_gauge(ctx: QueContext, target: HElement) -> HElement:
    """Find w in hbar^2 U with w^1 + w^2 - Delta(w) = target (commutative
    ambient); target must be reduced with terms of hbar order >= 2."""
    from gammastack.cohomology import solve_coboundary

    w = ctx.zero(1)
    for k in range(2, ctx.M):
        cur = tensor_unit_right(w) + tensor_unit_left(w) - ctx.coproduct_slot(w, 0)
        rho = (target - cur).hbar_coefficient(k)
        if rho.is_zero():
            continue
        series = SparseTensor(
            2, ctx.D, {tuple(ww for ww, _ in sl): c for (a, sl), c in rho.coeffs.items()}
        )
        beta = solve_coboundary(series, sign=1)
        w = w + ctx.from_series(beta, hbar=k)
    cur = tensor_unit_right(w) + tensor_unit_left(w) - ctx.coproduct_slot(w, 0)
    if cur != target:
        raise QuantumError("additive gauge solve failed at truncation")
    return w


def _affine_solve(unknowns: list, residual_fn) -> list[Fraction]:
    """Solve residual(assignment) = 0 for an affine residual, deterministic.

    residual_fn takes {unknown: Fraction} and returns {equation key:
    Fraction}.  Columns are finite differences against the zero assignment.
    """
    base = residual_fn({})
    columns = []
    for u in unknowns:
        col = residual_fn({u: F(1)})
        diff = dict(col)
        for k, v in base.items():
            d = diff.get(k, F(0)) - v
            if d:
                diff[k] = d
            else:
                diff.pop(k, None)
        columns.append(diff)
    eq_keys = sorted(set(base) | {k for col in columns for k in col})
    sys = LinearSystem(len(unknowns))
    for key in eq_keys:
        row = {j: columns[j][key] for j in range(len(unknowns)) if key in columns[j]}
        sys.add_row(row, -base.get(key, F(0)))
    res = solve_linear(sys)
    if not res.solvable:
        raise QuantumError("affine data-generation solve is inconsistent")
    return res.solution


def _reduced_2slot_words(dim: int, max_total: int) -> list[tuple]:
    from gammastack.cohomology import _slot_monomials

    out = []
    for p in range(1, max_total):
        for q in range(1, max_total - p + 1):
            for w1 in _slot_monomials(dim, p):
                for w2 in _slot_monomials(dim, q):
                    out.append((w1, w2))
    out.sort()
    return out


# -- bundled quantum data ----------------------------------------------------------


@lru_cache(maxsize=None)
def trivial_que_data(M: int = 3, D: int = 4) -> GammaQUEData:
    G = trivial_que_base()
    ctx = QueContext(G, M, D)  # cocommutative ambient
    grp = G.group
    F_ = {g: ctx.unit(2) for g in grp.elements()}
    i_images = {g: [ctx.gen(i) for i in range(G.lba.dim)] for g in grp.elements()}
    v = {(g, h): ctx.unit(1) for g in grp.elements() for h in grp.elements()}
    data = GammaQUEData(ctx, F_, i_images, v)
    issues = validate_que_data(data)
    if issues:
        raise QuantumError(f"trivial data invalid: {issues[0]}")
    return data


@lru_cache(maxsize=None)
def abelian_que_data(M: int = 3, D: int = 4) -> GammaQUEData:
    """Abelian algebra with nontrivial cobracket, twist, and gauge element."""
    G = abelian_twisted_gamma_lba()
    grp = G.group
    lba_e = build_delta_gamma(G, grp.identity)
    probe = QueContext(G, M, D)
    ctx = QueContext(G, M, D, delta_images=dual_pairing_delta_images(probe, lba_e))
    # classical twist lift, transported along deg t -> hbar^{t-1}; acting with
    # a theta-even cubic gauge breaks the theta-parity of the canonical lift
    # so the composition gauge element below comes out nontrivial
    from gammastack.stack import gauge_act

    n = min(M, D)
    pc = PairingContext(lba_e, n)
    leading = tensor2_to_series(G.f[1], n).scale(F(1, 2))
    ftilde = lift_twist(pc, leading)
    if n >= 3:
        ftilde = gauge_act(pc, pc.series({((0, 0, 1),): F(1)}), ftilde)
    gexp: dict[Key, Fraction] = {}
    for mono, c in ftilde.coeffs.items():
        t = sum(len(w) for w in mono)
        if t - 1 < M:
            gexp[(t - 1, tuple((w, PLAIN) for w in mono))] = c
    F_sigma = ctx.exp(HElement(ctx, 2, gexp))
    F_ = {0: ctx.unit(2), 1: F_sigma}
    i_images = {g: [ctx.gen(i) for i in range(2)] for g in grp.elements()}
    # v_{e,s,e} from the twist-composition relation; X is theta-invariant and
    # the solve is theta-equivariant, so the symmetrized solution is exact
    X = ctx.apply_endo(ctx.theta_images(1), F_sigma) * F_sigma
    w = solve_additive_gauge(ctx, ctx.log(X).scale(-1))
    w = (w + ctx.apply_endo(ctx.theta_images(1), w)).scale(F(1, 2))
    check = tensor_unit_right(w) + tensor_unit_left(w) - ctx.coproduct_slot(w, 0)
    if check != ctx.log(X).scale(-1):
        raise QuantumError("symmetrized gauge element no longer solves the relation")
    v_ss = ctx.exp(w)
    v = {
        (0, 0): ctx.unit(1),
        (0, 1): ctx.unit(1),
        (1, 0): ctx.unit(1),
        (1, 1): v_ss,
    }
    data = GammaQUEData(ctx, F_, i_images, v)
    issues = validate_que_data(data)
    if issues:
        raise QuantumError(f"generated abelian data invalid: {issues[0]}")
    return data


@lru_cache(maxsize=None)
def sl2_que_data(M: int = 3, D: int = 4) -> GammaQUEData:
    """Low-order quantum Weyl data for sl2 at the Z/4 Weyl covering.

    The ambient coproduct is solved order by order (hbar^1 part is half the
    cobracket; the hbar^2 part solves the bialgebra constraints), then the
    reflection twist is solved from its own twist equation plus the order-4
    wraparound, with hbar^1 part pinned to half the classical twist tensor.
    """
    if M > 3:
        raise QuantumError("sl2 data generated to hbar order 3 only")
    G = sl2_weyl_gamma_lba()
    grp = G.group
    lba = G.lba
    dim = lba.dim

    def delta_images_for(d2_coeffs: dict) -> list[HElement]:
        ctx0 = QueContext(G, M, D)
        images = []
        for i in range(dim):
            coeffs: dict[Key, Fraction] = {
                (0, (((i,), PLAIN), ((), PLAIN))): F(1),
                (0, (((), PLAIN), ((i,), PLAIN))): F(1),
            }
            for (p, q), c in lba.cobracket_tensor(i).items():
                coeffs[(1, (((p,), PLAIN), ((q,), PLAIN)))] = c / 2
            for (gen, pair), c in d2_coeffs.items():
                if gen == i:
                    key = (2, ((pair[0], PLAIN), (pair[1], PLAIN)))
                    coeffs[key] = coeffs.get(key, F(0)) + c
            images.append(HElement(ctx0, 2, coeffs))
        return images

    pairs23 = _reduced_2slot_words(dim, 3)
    unknowns_d2 = [(i, pair) for i in range(dim) for pair in pairs23]

    def delta_residual(assign: dict) -> dict:
        imgs = delta_images_for(assign)
        ctx0 = imgs[0].ctx
        ctx0.delta_images = imgs
        ctx0.cocommutative = False
        ctx0._delta_word_cache.clear()
        out: dict = {}
        for i in range(dim):
            for j in range(i + 1, dim):
                target = ctx0.zero(2)
                for k, c in lba.bracket_elems(i, j).items():
                    target = target + imgs[k].scale(c)
                diff = (ctx0.commutator(imgs[i], imgs[j]) - target).hbar_coefficient(2)
                for (a, sl), c in diff.coeffs.items():
                    out[("bracket", i, j, sl)] = c
            x = ctx0.gen(i)
            d = ctx0.coproduct_slot(x, 0)
            diff3 = (ctx0.coproduct_slot(d, 0) - ctx0.coproduct_slot(d, 1)).hbar_coefficient(2)
            for (a, sl), c in diff3.coeffs.items():
                out[("coassoc", i, sl)] = c
        return out

    sol = _affine_solve(unknowns_d2, delta_residual)
    d2 = {u: c for u, c in zip(unknowns_d2, sol) if c}
    ctx = QueContext(G, M, D, delta_images=delta_images_for(d2))

    # the reflection twist
    f_w = G.f[1]
    psi1: dict[Key, Fraction] = {}
    for (p, q), c in f_w.items():
        psi1[(1, (((p,), PLAIN), ((q,), PLAIN)))] = c / 2
    pairs4 = _reduced_2slot_words(dim, 4)

    def psi_for(assign: dict) -> HElement:
        coeffs = dict(psi1)
        coeffs[(0, (((), PLAIN), ((), PLAIN)))] = F(1)
        for pair, c in assign.items():
            coeffs[(2, ((pair[0], PLAIN), (pair[1], PLAIN)))] = c
        return HElement(ctx, 2, coeffs)

    from gammastack.quantum import twist_residual_quantum

    tau2 = ctx.theta_images(1)

    def psi_residual(assign: dict) -> dict:
        psi = psi_for(assign)
        out: dict = {}
        tw = twist_residual_quantum(ctx, psi).hbar_coefficient(2)
        for (a, sl), c in tw.coeffs.items():
            out[("twist", sl)] = c
        wrap = (ctx.apply_endo(tau2, psi) * psi - ctx.unit(2)).hbar_coefficient(2)
        for (a, sl), c in wrap.coeffs.items():
            out[("wrap", sl)] = c
        # Delta(theta x) = Ad(Psi^{-1})(theta^{(x)2} Delta(x))
        psi_inv = ctx.inverse(psi)
        for i in range(dim):
            lhs = ctx.coproduct_slot(ctx.apply_endo(tau2, ctx.gen(i)), 0)
            rhs = psi_inv * ctx.apply_endo(tau2, ctx.coproduct_slot(ctx.gen(i), 0)) * psi
            for (a, sl), c in (lhs - rhs).hbar_coefficient(2).coeffs.items():
                out[("conj", i, sl)] = c
        return out

    sol2 = _affine_solve(pairs4, psi_residual)
    psi = psi_for({p: c for p, c in zip(pairs4, sol2) if c})
    F_ = {0: ctx.unit(2), 1: psi}
    F_[2] = ctx.apply_endo(tau2, psi) * psi
    F_[3] = ctx.apply_endo(ctx.theta_images(2), psi) * F_[2]
    i_images = {g: [ctx.gen(i) for i in range(dim)] for g in grp.elements()}
    v = {(g, h): ctx.unit(1) for g in grp.elements() for h in grp.elements()}
    data = GammaQUEData(ctx, F_, i_images, v)
    issues = validate_que_data(data)
    if issues:
        raise QuantumError(f"generated sl2 data invalid: {issues[0]}")
    return data


def r_matrix_factor_log(data: GammaQUEData, gamma: int) -> HElement:
    """hbar log of the R-matrix factor of F_{e,gamma}.

    F factors as exp(hbar S) * R^{-1} with S the symmetric hbar^1 part;
    returns hbar log R.  At the bundled truncations every tensor component
    is a single generator, i.e. primitive.
    """
    ctx = data.ctx
    f = data.F[gamma]
    f1 = f.hbar_coefficient(1)
    sym = (f1 + f1.flip()).scale(F(1, 2)).hbar_shift(1)
    r_inv = ctx.mul(ctx.inverse(ctx.exp(sym)), f)
    return ctx.hbar_log(ctx.inverse(r_inv))


def r_factor_components_primitive(data: GammaQUEData, gamma: int) -> bool:
    ell = r_matrix_factor_log(data, gamma)
    for (a, sl), _c in ell.coeffs.items():
        if any(len(w) != 1 for w, _ in sl):
            return False
    return True


# -- bundled problems -------------------------------------------------------------


def bundled_problems() -> dict[str, "Problem"]:
    """The six shipped problem files, regenerated deterministically."""
    from gammastack.problemfile import Problem, quantum_sections_from_data

    return {
        "abelian": Problem(abelian_gamma_lba(), None, None, 5, 3, 4),
        "axb": Problem(axb_gamma_lba(), None, None, 4, 3, 4),
        "sl2-weyl": Problem(sl2_weyl_gamma_lba(), sl2_r(), None, 3, 3, 4),
        "trivial-que": Problem(
            trivial_que_base(), None, quantum_sections_from_data(trivial_que_data(3, 4)), 4, 3, 4
        ),
        "abelian-que": Problem(
            abelian_twisted_gamma_lba(),
            None,
            quantum_sections_from_data(abelian_que_data(3, 4)),
            4,
            3,
            4,
        ),
        "sl2-que": Problem(
            sl2_weyl_gamma_lba(), sl2_r(), quantum_sections_from_data(sl2_que_data(3, 4)), 3, 3, 4
        ),
    }


def write_bundled_data(directory) -> list[str]:
    from pathlib import Path

    from gammastack.problemfile import serialize_problem

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, problem in bundled_problems().items():
        text = serialize_problem(problem, header=f"bundled problem: {name}")
        (directory / f"{name}.glb").write_text(text, encoding="utf-8")
        written.append(f"{name}.glb")
    return written
