"""Line-oriented text format for problems (.glb files).

Sections are [algebra], [group], [action g], [twist g], [rmatrix],
[truncation], and the quantum sections [quantum-coproduct x],
[quantum-twist g], [quantum-morphism g x], [quantum-gauge g h].  Scalars
are integers or p/q; monomial words are space-separated basis labels with
"1" for the empty word; tensor slots are separated by "|".  Parsing is
strict with line numbers in every error; serialization is canonical, so
accepted canonical files round-trip byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from gammastack.liealg import FiniteGroup, GammaLieBialgebra, LieBialgebra, Tensor2
from gammastack.quantum import PLAIN, GammaQUEData, HElement, Key, QueContext

F = Fraction


class ProblemParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class QuantumSections:
    """Raw quantum data in index form, independent of truncation context."""

    coproduct: dict[int, dict[Key, Fraction]] = field(default_factory=dict)
    twists: dict[int, dict[Key, Fraction]] = field(default_factory=dict)
    morphisms: dict[tuple[int, int], dict[Key, Fraction]] = field(default_factory=dict)
    gauges: dict[tuple[int, int], dict[Key, Fraction]] = field(default_factory=dict)


@dataclass
class Problem:
    G: GammaLieBialgebra
    r: Tensor2 | None
    quantum: QuantumSections | None
    degree: int
    hbar: int
    pbw: int


def _parse_scalar(tok: str, line: int) -> Fraction:
    try:
        if "/" in tok:
            p, q = tok.split("/")
            return F(int(p), int(q))
        return F(int(tok))
    except (ValueError, ZeroDivisionError) as exc:
        raise ProblemParseError(f"bad scalar {tok!r}: {exc}", line)


def parse_problem(text: str) -> Problem:
    lines = text.splitlines()
    section: tuple | None = None
    dim = None
    labels: list[str] = []
    label_index: dict[str, int] = {}
    bracket: dict = {}
    cobracket: dict = {}
    group_labels: list[str] = []
    group_index: dict[str, int] = {}
    rows: dict[int, list[int]] = {}
    actions: dict[int, dict[tuple[int, int], Fraction]] = {}
    twists: dict[int, Tensor2] = {}
    rmatrix: Tensor2 | None = None
    trunc = {"degree": 4, "hbar": 3, "pbw": 4}
    q = QuantumSections()
    seen_quantum = False

    def glabel(tok: str, ln: int) -> int:
        if tok not in group_index:
            raise ProblemParseError(f"unknown group element {tok!r}", ln)
        return group_index[tok]

    def blabel(tok: str, ln: int) -> int:
        if tok not in label_index:
            raise ProblemParseError(f"unknown basis label {tok!r}", ln)
        return label_index[tok]

    def parse_word(tok: str, ln: int) -> tuple[int, ...]:
        tok = tok.strip()
        if tok == "1":
            return ()
        return tuple(sorted(blabel(t, ln) for t in tok.split()))

    def parse_term_slots(parts: list[str], ln: int, slots: int) -> tuple[int, Fraction, tuple]:
        if len(parts) < 3:
            raise ProblemParseError("term needs hbar power, coefficient, slots", ln)
        a = int(parts[1])
        c = _parse_scalar(parts[2], ln)
        body = " ".join(parts[3:])
        slot_toks = body.split("|")
        if len(slot_toks) != slots:
            raise ProblemParseError(f"expected {slots} tensor slots", ln)
        words = tuple(parse_word(t, ln) for t in slot_toks)
        return a, c, words

    for ln, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ProblemParseError("unterminated section header", ln)
            head = line[1:-1].split()
            section = (head[0], tuple(head[1:]), ln)
            if head[0].startswith("quantum-"):
                seen_quantum = True
            continue
        if section is None:
            raise ProblemParseError("content before any section", ln)
        kind, args, _ = section
        parts = line.split()
        if kind == "algebra":
            if parts[0] == "dim":
                dim = int(parts[1])
            elif parts[0] == "labels":
                labels = parts[1:]
                label_index = {l: i for i, l in enumerate(labels)}
                if dim is not None and len(labels) != dim:
                    raise ProblemParseError("label count does not match dim", ln)
            elif parts[0] == "bracket":
                if len(parts) < 5 or parts[3] != "=":
                    raise ProblemParseError("bracket syntax: bracket a b = c1 l1 ...", ln)
                i, j = blabel(parts[1], ln), blabel(parts[2], ln)
                toks = parts[4:]
                for t in range(0, len(toks), 2):
                    c = _parse_scalar(toks[t], ln)
                    k = blabel(toks[t + 1], ln)
                    bracket[(i, j, k)] = bracket.get((i, j, k), F(0)) + c
                    bracket[(j, i, k)] = bracket.get((j, i, k), F(0)) - c
            elif parts[0] == "cobracket":
                if len(parts) < 5 or parts[2] != "=":
                    raise ProblemParseError("cobracket syntax: cobracket a = c1 l1 l2 ...", ln)
                k = blabel(parts[1], ln)
                toks = parts[3:]
                for t in range(0, len(toks), 3):
                    c = _parse_scalar(toks[t], ln)
                    i, j = blabel(toks[t + 1], ln), blabel(toks[t + 2], ln)
                    cobracket[(k, i, j)] = cobracket.get((k, i, j), F(0)) + c
                    cobracket[(k, j, i)] = cobracket.get((k, j, i), F(0)) - c
            else:
                raise ProblemParseError(f"unknown algebra entry {parts[0]!r}", ln)
        elif kind == "group":
            if parts[0] == "labels":
                group_labels = parts[1:]
                group_index = {l: i for i, l in enumerate(group_labels)}
            elif parts[0] == "row":
                if parts[2] != "=":
                    raise ProblemParseError("row syntax: row g = g1 g2 ...", ln)
                g = glabel(parts[1], ln)
                rows[g] = [glabel(t, ln) for t in parts[3:]]
            else:
                raise ProblemParseError(f"unknown group entry {parts[0]!r}", ln)
        elif kind == "action":
            g = glabel(args[0], ln)
            if parts[0] != "map" or parts[2] != "=":
                raise ProblemParseError("action syntax: map x = c1 l1 ...", ln)
            j = blabel(parts[1], ln)
            toks = parts[3:]
            mat = actions.setdefault(g, {})
            for t in range(0, len(toks), 2):
                c = _parse_scalar(toks[t], ln)
                i = blabel(toks[t + 1], ln)
                mat[(i, j)] = c
        elif kind == "twist":
            g = glabel(args[0], ln)
            if parts[0] != "term":
                raise ProblemParseError("twist syntax: term c a b", ln)
            c = _parse_scalar(parts[1], ln)
            i, j = blabel(parts[2], ln), blabel(parts[3], ln)
            t = twists.setdefault(g, {})
            t[(i, j)] = t.get((i, j), F(0)) + c
            t[(j, i)] = t.get((j, i), F(0)) - c
        elif kind == "rmatrix":
            if parts[0] != "term":
                raise ProblemParseError("rmatrix syntax: term c a b", ln)
            c = _parse_scalar(parts[1], ln)
            i, j = blabel(parts[2], ln), blabel(parts[3], ln)
            rmatrix = rmatrix or {}
            rmatrix[(i, j)] = rmatrix.get((i, j), F(0)) + c
        elif kind == "truncation":
            if parts[0] not in trunc:
                raise ProblemParseError(f"unknown truncation entry {parts[0]!r}", ln)
            trunc[parts[0]] = int(parts[1])
        elif kind == "quantum-coproduct":
            i = blabel(args[0], ln)
            a, c, words = parse_term_slots(parts, ln, 2)
            key = (a, tuple((w, PLAIN) for w in words))
            d = q.coproduct.setdefault(i, {})
            d[key] = d.get(key, F(0)) + c
        elif kind == "quantum-twist":
            g = glabel(args[0], ln)
            a, c, words = parse_term_slots(parts, ln, 2)
            key = (a, tuple((w, PLAIN) for w in words))
            d = q.twists.setdefault(g, {})
            d[key] = d.get(key, F(0)) + c
        elif kind == "quantum-morphism":
            g = glabel(args[0], ln)
            i = blabel(args[1], ln)
            a, c, words = parse_term_slots(parts, ln, 1)
            key = (a, tuple((w, PLAIN) for w in words))
            d = q.morphisms.setdefault((g, i), {})
            d[key] = d.get(key, F(0)) + c
        elif kind == "quantum-gauge":
            g, h = glabel(args[0], ln), glabel(args[1], ln)
            a, c, words = parse_term_slots(parts, ln, 1)
            key = (a, tuple((w, PLAIN) for w in words))
            d = q.gauges.setdefault((g, h), {})
            d[key] = d.get(key, F(0)) + c
        else:
            raise ProblemParseError(f"unknown section [{kind}]", ln)

    if dim is None or not labels:
        raise ProblemParseError("missing [algebra] dim/labels", len(lines))
    if not group_labels:
        raise ProblemParseError("missing [group] section", len(lines))
    try:
        lba = LieBialgebra(dim, labels, bracket, cobracket)
        table = [rows[g] for g in range(len(group_labels))]
        group = FiniteGroup(group_labels, table)
        ident = {
            g: [[F(int(i == j)) for j in range(dim)] for i in range(dim)]
            for g in range(len(group_labels))
        }
        theta = {}
        for g in range(len(group_labels)):
            if g in actions:
                m = [[F(0)] * dim for _ in range(dim)]
                for (i, j), c in actions[g].items():
                    m[i][j] = c
                theta[g] = m
            else:
                theta[g] = ident[g]
        f = {g: twists.get(g, {}) for g in range(len(group_labels))}
        G = GammaLieBialgebra(lba, group, theta, f)
    except (KeyError, ValueError) as exc:
        raise ProblemParseError(f"structural error assembling problem: {exc}", len(lines))
    return Problem(
        G,
        rmatrix,
        q if seen_quantum else None,
        trunc["degree"],
        trunc["hbar"],
        trunc["pbw"],
    )


def build_que_data(problem: Problem, M: int | None = None, D: int | None = None) -> GammaQUEData:
    """Instantiate the quantum sections at a truncation (defaults from file)."""
    if problem.quantum is None:
        raise ValueError("problem file carries no quantum data")
    M = M if M is not None else problem.hbar
    D = D if D is not None else problem.pbw
    q = problem.quantum
    G = problem.G
    dim = G.lba.dim
    probe = QueContext(G, M, D)
    images = []
    for i in range(dim):
        coeffs = q.coproduct.get(i)
        if coeffs is None:
            images.append(probe._primitive_image(i))
        else:
            images.append(HElement(probe, 2, coeffs))
    ctx = QueContext(G, M, D, delta_images=images)
    F_ = {}
    for g in G.group.elements():
        coeffs = q.twists.get(g)
        F_[g] = HElement(ctx, 2, coeffs) if coeffs is not None else ctx.unit(2)
    i_images = {}
    for g in G.group.elements():
        imgs = []
        for i in range(dim):
            coeffs = q.morphisms.get((g, i))
            imgs.append(HElement(ctx, 1, coeffs) if coeffs is not None else ctx.gen(i))
        i_images[g] = imgs
    v = {}
    for g in G.group.elements():
        for h in G.group.elements():
            coeffs = q.gauges.get((g, h))
            v[(g, h)] = HElement(ctx, 1, coeffs) if coeffs is not None else ctx.unit(1)
    return GammaQUEData(ctx, F_, i_images, v)


# -- serialization ---------------------------------------------------------------


def _scalar_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _word_str(word: tuple[int, ...], labels: list[str]) -> str:
    return " ".join(labels[i] for i in word) if word else "1"


def _helement_lines(coeffs: dict[Key, Fraction], labels: list[str]) -> list[str]:
    out = []
    for (a, slots), c in sorted(coeffs.items()):
        body = "|".join(_word_str(w, labels) for w, _ in slots)
        out.append(f"term {a} {_scalar_str(c)} {body}")
    return out


def serialize_problem(problem: Problem, header: str | None = None) -> str:
    G = problem.G
    labels = G.lba.labels
    glabels = G.group.labels
    dim = G.lba.dim
    lines: list[str] = []
    if header:
        lines.append(f"# {header}")
    lines.append("[algebra]")
    lines.append(f"dim {dim}")
    lines.append("labels " + " ".join(labels))
    for i in range(dim):
        for j in range(i + 1, dim):
            terms = [
                (k, G.lba.bracket_coeff(i, j, k))
                for k in range(dim)
                if G.lba.bracket_coeff(i, j, k)
            ]
            if terms:
                body = " ".join(f"{_scalar_str(c)} {labels[k]}" for k, c in terms)
                lines.append(f"bracket {labels[i]} {labels[j]} = {body}")
    for k in range(dim):
        terms = []
        for i in range(dim):
            for j in range(i + 1, dim):
                c = G.lba.cobracket.get((k, i, j), F(0))
                if c:
                    terms.append(f"{_scalar_str(c)} {labels[i]} {labels[j]}")
        if terms:
            lines.append(f"cobracket {labels[k]} = " + " ".join(terms))
    lines.append("")
    lines.append("[group]")
    lines.append("labels " + " ".join(glabels))
    for g in G.group.elements():
        lines.append(
            f"row {glabels[g]} = " + " ".join(glabels[G.group.mul(g, h)] for h in G.group.elements())
        )
    ident = [[F(int(i == j)) for j in range(dim)] for i in range(dim)]
    for g in G.group.elements():
        if G.theta[g] == ident:
            continue
        lines.append("")
        lines.append(f"[action {glabels[g]}]")
        for j in range(dim):
            terms = [
                f"{_scalar_str(G.theta[g][i][j])} {labels[i]}"
                for i in range(dim)
                if G.theta[g][i][j]
            ]
            lines.append(f"map {labels[j]} = " + " ".join(terms))
    for g in G.group.elements():
        upper = [((i, j), c) for (i, j), c in sorted(G.f[g].items()) if i < j and c]
        if upper:
            lines.append("")
            lines.append(f"[twist {glabels[g]}]")
            for (i, j), c in upper:
                lines.append(f"term {_scalar_str(c)} {labels[i]} {labels[j]}")
    if problem.r:
        lines.append("")
        lines.append("[rmatrix]")
        for (i, j), c in sorted(problem.r.items()):
            if c:
                lines.append(f"term {_scalar_str(c)} {labels[i]} {labels[j]}")
    lines.append("")
    lines.append("[truncation]")
    lines.append(f"degree {problem.degree}")
    lines.append(f"hbar {problem.hbar}")
    lines.append(f"pbw {problem.pbw}")
    if problem.quantum is not None:
        q = problem.quantum
        for i in sorted(q.coproduct):
            lines.append("")
            lines.append(f"[quantum-coproduct {labels[i]}]")
            lines.extend(_helement_lines(q.coproduct[i], labels))
        for g in sorted(q.twists):
            lines.append("")
            lines.append(f"[quantum-twist {glabels[g]}]")
            lines.extend(_helement_lines(q.twists[g], labels))
        for (g, i) in sorted(q.morphisms):
            lines.append("")
            lines.append(f"[quantum-morphism {glabels[g]} {labels[i]}]")
            lines.extend(_helement_lines(q.morphisms[(g, i)], labels))
        for (g, h) in sorted(q.gauges):
            lines.append("")
            lines.append(f"[quantum-gauge {glabels[g]} {glabels[h]}]")
            lines.extend(_helement_lines(q.gauges[(g, h)], labels))
    return "\n".join(lines) + "\n"


def quantum_sections_from_data(data: GammaQUEData) -> QuantumSections:
    """Extract serializable raw sections from instantiated quantum data."""
    ctx = data.ctx
    q = QuantumSections()
    for i, img in enumerate(ctx.delta_images):
        q.coproduct[i] = dict(img.coeffs)
    for g, f in data.F.items():
        q.twists[g] = dict(f.coeffs)
    for g, imgs in data.i_images.items():
        for i, img in enumerate(imgs):
            q.morphisms[(g, i)] = dict(img.coeffs)
    for key, v in data.v.items():
        q.gauges[key] = dict(v.coeffs)
    return q
