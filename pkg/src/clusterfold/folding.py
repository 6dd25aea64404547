"""Admissible group actions on seeds and the quotient (folding) construction.

A finite group Π of index permutations is admissible when the skew form is
invariant under moving either argument independently within its orbit.  The
folded seed has one index per orbit, multipliers ``d_i * |orbit|`` and skew
form ``{e_Πi, e_Πj} = {e_i, e_j}``.

Coordinates: N uses the basis ``e_i`` and M uses ``f_i = e_i^*/d_i``.  In
these coordinates

* ``q``:  ``e_i -> e_Πi``  (orbit sum of N-coordinates),
* ``s*``: ``f_i -> f_Πi``  (orbit sum of M-coordinates),
* ``q*``: ``f_Πi -> (1/|Πi|) Σ f_i'`` (the invariant subspace of M_R),
* ``s``:  ``e_Πi -> (1/|Πi|) Σ e_i'``.
"""

from __future__ import annotations

import json
from importlib import resources
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .cones import primitive
from .lattice_core import Seed
from .poly import LaurentExpr, MonomialMap, series_mul, trim
from .scattering import (
    A_RING,
    GenericPath,
    NonGenericError,
    NotFiniteTypeError,
    complete_rank2,
    finite_type_diagram,
    initial_diagram,
    ScatteringDiagram,
    Wall,
    check_consistency,
    equivalence_witnesses,
    g_x,
    incoming_walls,
    nterms_for,
    path_product,
    pi_act_wall,
    sample_general_points,
)

Perm = tuple[int, ...]


class AdmissibilityError(ValueError):
    """The action does not preserve the skew form; carries a witness."""

    def __init__(self, message: str, witness: dict):
        super().__init__(message)
        self.witness = witness


def _compose(a: Perm, b: Perm) -> Perm:
    """``a ∘ b``."""
    return tuple(a[b[i]] for i in range(len(a)))


def perm_from_cycles(cycles: Iterable[Sequence[int]], n: int, one_based: bool = True) -> Perm:
    p = list(range(n))
    off = 1 if one_based else 0
    for cyc in cycles:
        cyc = [c - off for c in cyc]
        if any(c < 0 or c >= n for c in cyc):
            raise ValueError(f"cycle {cyc} out of range for {n} indices")
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            p[a] = b
    if sorted(p) != list(range(n)):
        raise ValueError("cycles do not define a permutation")
    return tuple(p)


@dataclass(frozen=True)
class GroupAction:
    """A finite permutation group acting on the index set of ``seed``."""

    seed: Seed
    generators: tuple[Perm, ...]
    elements: tuple[Perm, ...]
    orbits: tuple[tuple[int, ...], ...]

    @classmethod
    def generate(cls, seed: Seed, generators: Iterable[Sequence[int]]) -> "GroupAction":
        r = seed.rank
        gens = tuple(tuple(g) for g in generators)
        for g in gens:
            if sorted(g) != list(range(r)):
                raise ValueError(f"{g} is not a permutation of {r} indices")
        ident = tuple(range(r))
        elements = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = _compose(g, a)
                    if b not in elements:
                        elements.add(b)
                        nxt.append(b)
            frontier = nxt
        seen: set[int] = set()
        orbits = []
        for i in range(r):
            if i in seen:
                continue
            orb = tuple(sorted({p[i] for p in elements}))
            seen.update(orb)
            orbits.append(orb)
        return cls(seed, gens, tuple(sorted(elements)), tuple(orbits))

    @property
    def orbit_index(self) -> tuple[int, ...]:
        idx = [0] * self.seed.rank
        for a, orb in enumerate(self.orbits):
            for i in orb:
                idx[i] = a
        return tuple(idx)

    def to_json(self) -> dict:
        out = []
        for g in self.generators:
            cycles, seen = [], set()
            for i in range(len(g)):
                if i in seen or g[i] == i:
                    continue
                cyc, j = [], i
                while j not in seen:
                    seen.add(j)
                    cyc.append(j + 1)
                    j = g[j]
                cycles.append(cyc)
            out.append(cycles)
        return {"generators": out}


def load_action(seed: Seed, path: str | Path) -> GroupAction:
    data = json.loads(Path(path).read_text())
    return action_from_json(seed, data)


def action_from_json(seed: Seed, data: dict) -> GroupAction:
    gens = [perm_from_cycles(g, seed.rank) for g in data.get("generators", [])]
    return check_admissible(seed, gens)


def check_admissible(s: Seed, gens: Iterable[Sequence[int]]) -> GroupAction:
    """Generate the group and verify ``{e_πi, e_π'j} = {e_i, e_j}``.

    Also requires multipliers constant on orbits and frozen indices preserved.
    Raises :class:`AdmissibilityError` with a 1-based witness otherwise.
    """
    act = GroupAction.generate(s, gens)
    r = s.rank
    for p in act.elements:
        for i in range(r):
            if s.d[p[i]] != s.d[i]:
                raise AdmissibilityError("multipliers differ along an orbit", {"i": i + 1, "pi": [x + 1 for x in p]})
            if (i in s.frozen) != (p[i] in s.frozen):
                raise AdmissibilityError("action mixes frozen and unfrozen indices", {"i": i + 1})
    for p in act.elements:
        for pp in act.elements:
            for i in range(r):
                for j in range(r):
                    if s.skew[p[i]][pp[j]] != s.skew[i][j]:
                        w = {"i": i + 1, "j": j + 1, "pi": [x + 1 for x in p], "pi_prime": [x + 1 for x in pp]}
                        raise AdmissibilityError(
                            f"{{e_{p[i] + 1}, e_{pp[j] + 1}}} != {{e_{i + 1}, e_{j + 1}}}", w
                        )
    return act


@dataclass(frozen=True)
class FoldingMap:
    """The quotient seed together with the lattice maps ``q, s, q*, s*``."""

    action: GroupAction
    source: Seed
    target: Seed
    q: tuple[tuple[int, ...], ...]  # r̄ x r
    s: tuple[tuple[Fraction, ...], ...]  # r x r̄
    q_star: tuple[tuple[Fraction, ...], ...]  # r x r̄, M̄_R -> M_R in f-coordinates
    s_star: tuple[tuple[int, ...], ...]  # r̄ x r, M -> M̄ in f-coordinates

    @property
    def rank(self) -> int:
        return self.target.rank

    def q_vec(self, n: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(a * b for a, b in zip(row, n)) for row in self.q)

    def s_star_vec(self, m: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(a * b for a, b in zip(row, m)) for row in self.s_star)

    def q_star_vec(self, y: Sequence) -> tuple[Fraction, ...]:
        return tuple(sum(Fraction(a) * b for a, b in zip(row, y)) for row in self.q_star)

    def s_vec(self, n: Sequence) -> tuple[Fraction, ...]:
        return tuple(sum(a * Fraction(b) for a, b in zip(row, n)) for row in self.s)

    def x_map(self) -> MonomialMap:
        """``q̃`` on the X-ring over N."""
        return MonomialMap(self.q, self.source.rank)

    def a_map(self) -> MonomialMap:
        """``q̃ = φ_(s*, q)`` on the A_prin ring over M°⊕N."""
        r = self.source.rank
        rows = [list(row) + [0] * r for row in self.s_star] + [[0] * r + list(row) for row in self.q]
        return MonomialMap(rows, 2 * r)

    def lift_n(self, nb: Sequence[int]) -> tuple[int, ...]:
        """A lattice preimage under ``q`` (first index of each orbit)."""
        out = [0] * self.source.rank
        for a, orb in enumerate(self.action.orbits):
            out[orb[0]] = nb[a]
        return tuple(out)

    def check(self) -> None:
        """Assert ``q∘s = id`` and the skew-form and ``s*`` compatibilities."""
        r, rb = self.source.rank, self.rank
        for a in range(rb):
            e = tuple(int(i == a) for i in range(rb))
            if self.q_vec(self.s_vec(e)) != tuple(Fraction(x) for x in e):
                raise AssertionError("q∘s is not the identity")
        for i in range(r):
            ei = tuple(int(k == i) for k in range(r))
            for j in range(r):
                ej = tuple(int(k == j) for k in range(r))
                if self.target.skew_pair(self.q_vec(ei), self.q_vec(ej)) != self.source.skew_pair(ei, ej):
                    raise AssertionError("skew form not compatible with q")
            if self.s_star_vec(self.source.p_star(ei)) != self.target.p_star(self.q_vec(ei)):
                raise AssertionError("s*({n,.}) != {q n,.}")


def fold_seed(a: GroupAction) -> FoldingMap:
    s = a.seed
    r = s.rank
    orbits = a.orbits
    rb = len(orbits)
    reps = [orb[0] for orb in orbits]
    skew = [[s.skew[reps[x]][reps[y]] for y in range(rb)] for x in range(rb)]
    d = [s.d[reps[x]] * len(orbits[x]) for x in range(rb)]
    frozen = [x for x in range(rb) if reps[x] in s.frozen]
    labels = [",".join(s.labels[i] for i in orb) for orb in orbits]
    target = Seed(skew, d, frozen, labels)
    idx = a.orbit_index
    q = tuple(tuple(int(idx[i] == x) for i in range(r)) for x in range(rb))
    s_mat = tuple(tuple(Fraction(int(idx[i] == x), len(orbits[x])) for x in range(rb)) for i in range(r))
    fm = FoldingMap(a, s, target, q, s_mat, s_mat, q)
    fm.check()
    return fm


def q_tilde(fm: FoldingMap, f: LaurentExpr) -> LaurentExpr:
    """Fold an X-ring (rank r) or A_prin-ring (rank 2r) expression."""
    r = fm.source.rank
    if f.nvars == r:
        return fm.x_map()(f)
    if f.nvars == 2 * r:
        return fm.a_map()(f)
    raise ValueError(f"expression has {f.nvars} variables; expected {r} or {2 * r}")


def fold_wall(fm: FoldingMap, w: Wall, order: int) -> Wall | None:
    """Folded wall, or ``None`` when the wall meets ``q*(M̄_R)`` in too small a set."""
    rb = fm.rank
    pre = w.support.preimage(fm.q_star)
    if pre.dim != rb - 1:
        return None
    qn = fm.q_vec(w.n0)
    nbar = primitive(qn)
    mult = sum(qn) // sum(nbar)
    nt = nterms_for(order, nbar)
    coeffs = [0] * nt
    for j, c in enumerate(w.coeffs):
        if j * mult < nt:
            coeffs[j * mult] += c
    return Wall(nbar, pre, trim(coeffs))


def fold_diagram(fm: FoldingMap, d: ScatteringDiagram, check_interior: bool = True) -> ScatteringDiagram:
    """Coarsen, then intersect every wall with ``q*(M̄_R)``, pull back, fold the function and merge.

    With ``check_interior``, verifies that a general point of each folded wall
    maps into the relative interior of its source wall.
    """
    if d.seed != fm.source:
        raise ValueError("diagram seed differs from the folding source")
    folded: list[tuple[Wall, Wall]] = []
    for w in d.coarsen().walls:
        fw = fold_wall(fm, w, d.order)
        if fw is not None:
            folded.append((w, fw))
    if check_interior:
        for w, fw in folded:
            y = fw.support.interior_point([1009 + 7 * i for i in range(len(fw.support.rays))])
            for j, l in enumerate(fw.support.lineality):
                y = tuple(a + Fraction(13 + j, 1013) * b for a, b in zip(y, l))
            x = fm.q_star_vec(y)
            if any(y) and not w.support.in_relative_interior(x):
                raise NonGenericError(f"folded point {y} lands on the boundary of a source wall")
    merged: list[Wall] = []
    for _, fw in folded:
        for i, v in enumerate(merged):
            if v.n0 == fw.n0 and v.support == fw.support:
                merged[i] = Wall(v.n0, v.support, series_mul(v.coeffs, fw.coeffs, nterms_for(d.order, v.n0)))
                break
        else:
            merged.append(fw)
    return ScatteringDiagram(fm.target, d.order, [w for w in merged if not w.is_trivial])


def folded_point_product(fm: FoldingMap, d: ScatteringDiagram, y: Sequence) -> tuple[tuple[int, ...] | None, tuple[int, ...]]:
    """``∏ q̃(g_𝔡)`` over source walls containing ``q*(y)``, as ``(n̄0, coeffs)``.

    All contributing folded normals must agree (the walls through a folded
    general point commute).
    """
    x = fm.q_star_vec(y)
    normal = None
    acc: list[int] = [1]
    for w in d.coarsen().walls:
        if d.seed.pairing(w.n0, x) != 0 or not w.support.contains(x):
            continue
        fw_n = primitive(fm.q_vec(w.n0))
        mult = sum(fm.q_vec(w.n0)) // sum(fw_n)
        nt = nterms_for(d.order, fw_n)
        c = [0] * nt
        for j, a in enumerate(w.coeffs):
            if j * mult < nt:
                c[j * mult] += a
        if normal is None:
            normal = fw_n
        elif normal != fw_n:
            raise NonGenericError(f"walls through q*({y}) have different folded normals")
        acc = series_mul(acc, c, nt)
    return normal, trim(acc) if normal is not None else (1,)


def verify_folded_equivalence(
    fm: FoldingMap,
    d_source: ScatteringDiagram,
    k: int | None = None,
    direct: ScatteringDiagram | None = None,
    folded: ScatteringDiagram | None = None,
    loops: int = 20,
    sample_seed: int = 0,
) -> tuple[bool, dict]:
    """Fold ``d_source`` and check consistency, equivalence and pointwise folding.

    ``direct`` is the diagram computed on the folded seed (completion or finite
    type); when omitted it is computed if possible.  ``folded`` overrides the
    folded diagram (used for negative controls).
    """
    k = d_source.order if k is None else k
    fd = folded if folded is not None else fold_diagram(fm, d_source)
    report: dict = {"walls": len(fd.walls)}
    bad_loops = check_consistency(fd, loops, sample_seed)
    report["consistent"] = not bad_loops
    if bad_loops:
        report["loop_witness"] = bad_loops[0]
    if direct is None:
        try:
            if fm.rank == 2:
                direct = complete_rank2(initial_diagram(fm.target, k), k)
            else:
                direct = finite_type_diagram(fm.target, k)
        except NotFiniteTypeError:
            direct = None
    if direct is not None:
        wit = equivalence_witnesses(fd, direct, sample_seed)
        report["equivalent"] = not wit
        if wit:
            report["equivalence_witness"] = wit[0]
    rng = random.Random(sample_seed)
    coarse = d_source.coarsen()
    pointwise = True
    for n0 in fd.normals():
        for y in sample_general_points([fd], n0, [w.support for w in fd.walls_on(n0)], rng):
            lhs = g_x(fd, y)[1]
            rhs = folded_point_product(fm, coarse, y)[1]
            if lhs != rhs:
                pointwise = False
                report["pointwise_witness"] = {"point": [str(v) for v in y], "folded": list(lhs), "source": list(rhs)}
                break
    report["pointwise"] = pointwise
    ok = report["consistent"] and report.get("equivalent", True) and pointwise
    report["ok"] = ok
    return ok, report


def is_pi_invariant_element(a: GroupAction, p, k: int | None = None) -> bool:
    """Whether a wall-list element is invariant under every generator.

    ``p`` is a :class:`ScatteringDiagram` or a list of walls; invariance is
    tested up to equivalence of the wall sets.
    """
    if isinstance(p, ScatteringDiagram):
        d = p
    elif isinstance(p, (list, tuple)) and all(isinstance(w, Wall) for w in p):
        d = ScatteringDiagram(a.seed, k or 8, list(p))
    else:
        raise TypeError("unsupported representation; pass a ScatteringDiagram or a wall list")
    if k is not None:
        d = ScatteringDiagram(d.seed, k, d.walls)
    for g in a.generators:
        moved = d.with_walls([pi_act_wall(g, w) for w in d.walls])
        if equivalence_witnesses(d, moved):
            return False
    return True


def lifted_path_check(
    fm: FoldingMap,
    d_source: ScatteringDiagram,
    d_folded: ScatteringDiagram,
    points: Sequence[Sequence],
    monomials: Iterable[Sequence[int]],
    scale: Fraction = Fraction(1, 10**6),
    seed: int = 0,
) -> bool:
    """Compare a folded path product with ``q̃`` of a perturbed lifted path.

    The folded polyline is mapped by ``q*`` and nudged by a small generic
    vector so that it avoids the joints of the source diagram.  Equality is
    ``q̃(p(z)) = p̄(q̃(z))`` on A_prin monomials.
    """
    rng = random.Random(seed)
    r = fm.source.rank
    p_bar = path_product(d_folded, GenericPath.through(d_folded, points), A_RING)
    for _ in range(20):
        shift = tuple(Fraction(rng.randint(-1000, 1000), 997) * scale for _ in range(r))
        lifted = [tuple(x + s for x, s in zip(fm.q_star_vec(y), shift)) for y in points]
        try:
            path = GenericPath.through(d_source, lifted)
        except NonGenericError:
            continue
        p = path_product(d_source, path, A_RING)
        break
    else:
        raise NonGenericError("could not perturb the lifted path into general position")
    order = min(d_source.order, d_folded.order)
    amap = fm.a_map()
    for m in monomials:
        z = LaurentExpr.monomial(m)
        if amap(p.apply(z, order)) != p_bar.apply(amap(z), order):
            return False
    return True


ACTION_FIXTURES = ("pi_A2_swap", "pi_A3", "pi_S24", "pi_trivial")


def fixture_action(seed: Seed, name: str) -> GroupAction:
    """Load a shipped group-action fixture against ``seed``."""
    if name not in ACTION_FIXTURES:
        raise KeyError(f"unknown action fixture {name!r}; choose from {ACTION_FIXTURES}")
    text = resources.files("clusterfold.data").joinpath(f"{name}.json").read_text()
    return action_from_json(seed, json.loads(text))


def _move(pi: Sequence[int], v: Sequence) -> tuple:
    out = [0] * len(pi)
    for i, p in enumerate(pi):
        out[p] = v[i]
    return tuple(out)


def incoming_invariant(a: GroupAction, d: ScatteringDiagram) -> bool:
    """Whether the incoming walls of ``d`` form a Π-invariant set up to equivalence."""
    inc = d.with_walls(incoming_walls(d))
    for g in a.generators:
        moved = inc.with_walls([pi_act_wall(g, w) for w in inc.walls])
        if equivalence_witnesses(inc, moved):
            return False
    return True


def check_equivariance(a: GroupAction, d: ScatteringDiagram, count: int = 50, seed: int = 0) -> tuple[bool, list[dict]]:
    """``π·g_x = g_{(π⁻¹)* x}`` at ``count`` general points on the walls of ``d``.

    ``π`` acts on a wall-crossing element by moving the normal, and
    ``(π⁻¹)*`` permutes the coordinates of ``x`` in the same way.
    """
    rng = random.Random(seed)
    walls = d.nontrivial()
    if not walls:
        return True, []
    pts: list[tuple] = []
    i = 0
    while len(pts) < count and i < 50 * count:
        w = walls[i % len(walls)]
        pts.extend(sample_general_points([d], w.n0, [w.support], rng, 1))
        i += 1
    bad = []
    for x in pts[:count]:
        n0, coeffs = g_x(d, x)
        for g in a.elements:
            try:
                m0, mc = g_x(d, _move(g, x))
            except NonGenericError:
                continue
            moved = None if n0 is None else _move(g, n0)
            if (moved, coeffs) != (m0, mc):
                bad.append({"point": [str(v) for v in x], "pi": [p + 1 for p in g]})
    return not bad, bad
