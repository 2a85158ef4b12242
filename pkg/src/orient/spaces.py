"""Intersection rings of model spaces and their Chern-class calculus.

A model space is a tree of points, projective spaces, projective bundles and
products.  Its ring is finite and free over the coefficient ring with one
generator per tower level; the generator of a level of rank r satisfies one
defining relation expressing its r-th power through lower powers with
Chern-class coefficients of the dual bundle.  Elements are kept in normal
form (every level exponent below the level rank) by rewriting with these
relations, so multiplication is exact: no truncation is involved in the
ring structure itself.

Level generators are named x1, x2, ... in depth-first order.  Every level
also registers a named first Chern class for its tautological quotient line
bundle: h1, h2, ... for projective-space levels and xi1, xi2, ... for
bundle levels, with the alias ``h`` when the tower has a single level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import fgl as fgl_mod
from .equivariant import Character, TorusContext, char_c1
from .errors import (
    MalformedTowerError,
    OrientError,
    UnsupportedIntegrationError,
)
from .fgl import (
    BETA,
    FormalGroupLaw,
    apply_univariate,
    coefficient_variables,
    dual_class,
    fgl_add,
    formal_inverse,
    n_series,
)
from .series import Q, TruncatedSeries, Variable, VariableTable


# -- model trees -------------------------------------------------------------

@dataclass(frozen=True)
class Point:
    @property
    def dim(self) -> int:
        return 0


@dataclass(frozen=True)
class ProjSpace:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise MalformedTowerError("projective space needs n >= 0")

    @property
    def dim(self) -> int:
        return self.n


@dataclass(frozen=True)
class Summand:
    """One line summand of a split bundle: a root and a torus character.

    The root is the first Chern class of the underlying line bundle: either
    a ring element, a callable producing one from the ring under
    construction, or None for a trivial root.
    """

    root: object = None
    char: tuple[int, ...] = ()


class BundleSpec:
    """A formal sum of line summands."""

    def __init__(self, summands: Sequence[Summand] = ()):
        self.summands = tuple(summands)

    @property
    def rank(self) -> int:
        return len(self.summands)

    @classmethod
    def empty(cls):
        return cls(())

    @classmethod
    def trivial(cls, rank: int):
        return cls(tuple(Summand() for _ in range(rank)))

    @classmethod
    def of_characters(cls, chars: Sequence[Sequence[int]]):
        return cls(tuple(Summand(None, tuple(c)) for c in chars))

    def __repr__(self):
        return f"BundleSpec(rank={self.rank})"


@dataclass(frozen=True)
class ProjBundle:
    base: object
    bundle: BundleSpec

    @property
    def dim(self) -> int:
        return self.base.dim + self.bundle.rank - 1


@dataclass(frozen=True)
class Product:
    left: object
    right: object

    @property
    def dim(self) -> int:
        return self.left.dim + self.right.dim


@dataclass
class Level:
    name: str
    index: int
    rank: int
    rhs: TruncatedSeries
    kind: str  # "proj" | "bundle"
    line_name: str


# -- the ring ----------------------------------------------------------------

class IntersectionRing:
    """Finite free module over the coefficient ring with tower-monomial basis."""

    def __init__(self, theory: FormalGroupLaw, model, ctx: TorusContext | None,
                 table: VariableTable):
        self.theory = theory
        self.model = model
        self.ctx = ctx
        self.table = table
        self.levels: list[Level] = []
        self.line_classes: dict[str, TruncatedSeries] = {}
        self.dim = model.dim

    @property
    def rank(self) -> int:
        r = 1
        for lvl in self.levels:
            r *= lvl.rank
        return r

    @property
    def positive_room(self) -> int:
        """Upper bound on the weight of any nonzero normal-form monomial."""
        room = sum(lvl.rank - 1 for lvl in self.levels)
        for v in self.table.variables:
            if v.codegree > 0 and v.cap is not None:
                room += v.cap
        return room

    # -- element constructors ---------------------------------------------

    def zero(self, pos_bound=None, neg_bound=None):
        return TruncatedSeries.zero(self.table, pos_bound, neg_bound)

    def one(self, pos_bound=None, neg_bound=None):
        return TruncatedSeries.constant(self.table, 1, pos_bound, neg_bound)

    def constant(self, value, pos_bound=None, neg_bound=None):
        return TruncatedSeries.constant(self.table, value, pos_bound, neg_bound)

    def line_class(self, name: str) -> TruncatedSeries:
        try:
            return self.line_classes[name]
        except KeyError:
            raise OrientError(f"unknown line class {name!r}") from None

    def basis(self) -> list[TruncatedSeries]:
        elems = [self.one()]
        for lvl in self.levels:
            elems = [e * TruncatedSeries.monomial(self.table, {lvl.name: k})
                     for k in range(lvl.rank) for e in elems]
        return [self.reduce(e) for e in elems]

    # -- arithmetic ---------------------------------------------------------

    def reduce(self, s: TruncatedSeries) -> TruncatedSeries:
        """Normal form: rewrite every level power >= rank via its relation."""
        if not self.levels:
            return s
        pending = dict(s.coeffs)
        out: dict[tuple[int, ...], Fraction] = {}
        while pending:
            exps, coeff = pending.popitem()
            lvl = self._violating_level(exps)
            if lvl is None:
                acc = out.get(exps, Q(0)) + coeff
                if acc:
                    out[exps] = acc
                else:
                    out.pop(exps, None)
                continue
            e = list(exps)
            e[lvl.index] -= lvl.rank
            rest = TruncatedSeries(self.table, {tuple(e): coeff},
                                   s.pos_bound, s.neg_bound, _trusted=True)
            for ee, cc in (rest * lvl.rhs).coeffs.items():
                acc = pending.get(ee, Q(0)) + cc
                if acc:
                    pending[ee] = acc
                else:
                    pending.pop(ee, None)
        return TruncatedSeries(self.table, out, s.pos_bound, s.neg_bound, _trusted=True)

    def _violating_level(self, exps) -> Level | None:
        for lvl in self.levels:
            if exps[lvl.index] >= lvl.rank:
                return lvl
        return None

    def mul(self, a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
        return self.reduce(a * b)

    def pow(self, a: TruncatedSeries, n: int) -> TruncatedSeries:
        result = self.one(a.pos_bound, a.neg_bound)
        for _ in range(n):
            result = self.mul(result, a)
        return result

    def product(self, factors) -> TruncatedSeries:
        result = None
        for f in factors:
            result = f if result is None else self.mul(result, f)
        return result if result is not None else self.one()

    def invert(self, a: TruncatedSeries) -> TruncatedSeries:
        return a.invert_unit(multiply=self.mul)

    def fgl_sum(self, a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
        return fgl_add(self.theory, a, b, multiply=self.mul)

    def twist(self, x: TruncatedSeries, d: int) -> TruncatedSeries:
        """First Chern class of the d-th tensor power of a line bundle."""
        return apply_univariate(self.theory, n_series(self.theory, d), x,
                                multiply=self.mul,
                                complete=fgl_mod.n_series_complete(self.theory, d))

    def dual(self, x: TruncatedSeries) -> TruncatedSeries:
        """First Chern class of the dual line bundle."""
        return dual_class(self.theory, x, multiply=self.mul)

    def summand_class(self, summand: Summand) -> TruncatedSeries:
        root = summand.root
        if root is None:
            root = self.zero()
        elif callable(root):
            root = root(self)
        elif not isinstance(root, TruncatedSeries):
            raise MalformedTowerError(f"cannot resolve bundle root {root!r}")
        root = root.convert(self.table, root.pos_bound, root.neg_bound)
        if root.constant_term() != 0:
            raise MalformedTowerError("bundle root has a nonzero constant term")
        char = tuple(summand.char)
        if any(char):
            if self.ctx is None:
                raise MalformedTowerError("character summand needs a torus context")
            c = char_c1(Character(char), self.ctx, self.theory, self.table)
            return self.fgl_sum(root, c) if root else c
        return self.reduce(root)

    def __repr__(self):
        return f"IntersectionRing({self.theory.kind}, dim={self.dim}, rank={self.rank})"


def _walk(model) -> list:
    if isinstance(model, Point):
        return []
    if isinstance(model, ProjSpace):
        return [("proj", model)]
    if isinstance(model, ProjBundle):
        return _walk(model.base) + [("bundle", model)]
    if isinstance(model, Product):
        return _walk(model.left) + _walk(model.right)
    raise MalformedTowerError(f"not a model space: {model!r}")


def build_space(theory: FormalGroupLaw, model, ctx: TorusContext | None = None
                ) -> IntersectionRing:
    """Construct the intersection ring of a model space.

    Every level's defining relation is asserted to reduce to zero before the
    ring is returned.
    """
    nodes = _walk(model)
    variables = list(coefficient_variables(theory.kind, theory.order))
    if ctx is not None:
        variables.extend(ctx.zeta_variables())
    for k in range(len(nodes)):
        variables.append(Variable(f"x{k + 1}", 1))
    table = VariableTable(variables)
    ring = IntersectionRing(theory, model, ctx, table)

    proj_count = 0
    bundle_count = 0
    for k, (kind, node) in enumerate(nodes):
        name = f"x{k + 1}"
        xi = TruncatedSeries.variable(table, name)
        if kind == "proj":
            proj_count += 1
            line_name = f"h{proj_count}"
            rank = node.n + 1
            rhs = ring.zero()
        else:
            bundle_count += 1
            line_name = f"xi{bundle_count}"
            spec = node.bundle
            if spec.rank < 1:
                raise MalformedTowerError("projective bundle of rank zero")
            rank = spec.rank
            duals = [ring.dual(ring.summand_class(s)) for s in spec.summands]
            elem = _elementary_symmetric(ring, duals)
            rhs = ring.zero()
            for i in range(1, rank + 1):
                sign = 1 if i % 2 else -1
                term = ring.mul(elem[i], ring.pow(xi, rank - i))
                rhs = rhs + term.scale(sign)
        ring.levels.append(Level(name, table.index(name), rank, rhs, kind, line_name))
        ring.line_classes[line_name] = xi
    if len(ring.levels) == 1:
        ring.line_classes.setdefault("h", ring.line_classes[ring.levels[0].line_name])

    for lvl in ring.levels:
        if not _relation_holds(ring, lvl):
            raise OrientError(f"defining relation fails at level {lvl.name}")
    return ring


def _relation_holds(ring: IntersectionRing, lvl: Level) -> bool:
    xi = TruncatedSeries.variable(ring.table, lvl.name)
    total = ring.pow(xi, lvl.rank) - ring.reduce(lvl.rhs)
    return ring.reduce(total).is_zero()


def _elementary_symmetric(ring: IntersectionRing, roots) -> list[TruncatedSeries]:
    elem = [ring.one()] + [ring.zero() for _ in roots]
    for r in roots:
        for i in range(len(roots), 0, -1):
            elem[i] = elem[i] + ring.mul(elem[i - 1], r)
    return elem


# -- Chern-class operations ---------------------------------------------------

def chern(bundle: BundleSpec, i: int, ring: IntersectionRing) -> TruncatedSeries:
    """i-th Chern class: elementary symmetric in the summand line classes."""
    if i < 0 or i > bundle.rank:
        raise OrientError(f"Chern index {i} out of range for rank {bundle.rank}")
    classes = [ring.summand_class(s) for s in bundle.summands]
    return _elementary_symmetric(ring, classes)[i]


def euler(bundle: BundleSpec, ring: IntersectionRing) -> TruncatedSeries:
    """Product of the summand line classes; equals the top Chern class."""
    classes = [ring.summand_class(s) for s in bundle.summands]
    return ring.product(classes)


def c1_tensor(l1: TruncatedSeries, l2: TruncatedSeries, ring: IntersectionRing
              ) -> TruncatedSeries:
    """First Chern class of a tensor product of line bundles."""
    return ring.fgl_sum(l1, l2)


def minus_divisor_pushed(alpha: TruncatedSeries, line: TruncatedSeries,
                         ring: IntersectionRing) -> TruncatedSeries:
    """Intersection with the formal negative of a divisor, pushed forward.

    Evaluates g(c1) * c1 * alpha where g is the inverse-factor series of the
    theory; this equals multiplication by the dual line class.
    """
    g = formal_inverse(ring.theory).g
    gval = apply_univariate(ring.theory, g, line, multiply=ring.mul)
    return ring.mul(ring.mul(gval, line), alpha)


def nilpotency_index(line: TruncatedSeries, ring: IntersectionRing) -> int:
    """Smallest k with line**k = 0 in the ring."""
    if line.is_zero():
        return 1
    return line.nilpotency_index(multiply=ring.mul, ceiling=ring.positive_room + 2)


def line_bundle_class(ring: IntersectionRing, x: TruncatedSeries) -> TruncatedSeries:
    """The multiplicative-theory class of a line bundle with first Chern class x."""
    if BETA not in ring.table:
        raise OrientError("line bundle classes need the multiplicative theory")
    beta = TruncatedSeries.variable(ring.table, BETA, x.pos_bound, x.neg_bound)
    return ring.invert(ring.one(x.pos_bound, x.neg_bound) - ring.mul(beta, x))


# -- integration --------------------------------------------------------------

def _binom_poly(a: int, n: int) -> Fraction:
    """Binomial coefficient as the degree-n polynomial, valid for any integer a."""
    num = 1
    for t in range(n):
        num *= a - t
    return Q(num, math.factorial(n))


def _psi(n: int, e: int) -> Fraction:
    """Euler characteristic of the e-th power of the hyperplane operator on
    n-dimensional projective space."""
    return sum((Q(math.comb(e, j) * (-1) ** j) * _binom_poly(n - j, n)
                for j in range(e + 1)), Q(0))


def _integrable_levels(ring: IntersectionRing) -> list[tuple[Level, int]]:
    if any(lvl.kind != "proj" for lvl in ring.levels):
        raise UnsupportedIntegrationError(
            "direct integration needs a tower of projective spaces and products")
    return [(lvl, lvl.rank - 1) for lvl in ring.levels]


def integrate(alpha: TruncatedSeries, ring: IntersectionRing) -> TruncatedSeries:
    """Pushforward to the point; a coefficient-ring scalar.

    Additive theory: the coefficient of the top monomial, normalized so the
    top power of each hyperplane class integrates to 1.  Multiplicative
    theory: the Euler-characteristic functional, computed per factor through
    the power basis of the dual tautological class.  The universal theory has
    no direct integration.
    """
    if ring.theory.kind == fgl_mod.UNIVERSAL:
        raise UnsupportedIntegrationError("no direct integration for the universal theory")
    levels = _integrable_levels(ring)
    alpha = ring.reduce(alpha)
    t = ring.table
    out: dict[tuple[int, ...], Fraction] = {}
    beta_index = t.index(BETA) if BETA in t else None
    result = TruncatedSeries.zero(t, alpha.pos_bound, alpha.neg_bound)
    for exps, coeff in alpha.coeffs.items():
        rest = list(exps)
        value = coeff
        if ring.theory.kind == fgl_mod.ADDITIVE:
            ok = True
            for lvl, n in levels:
                if exps[lvl.index] != n:
                    ok = False
                    break
                rest[lvl.index] = 0
            if not ok:
                continue
        else:
            shift = 0
            for lvl, n in levels:
                e = exps[lvl.index]
                value *= _psi(n, e)
                shift += e
                rest[lvl.index] = 0
            if value == 0:
                continue
            if shift:
                if beta_index is None:
                    raise OrientError("multiplicative integration needs beta")
                rest[beta_index] -= shift
        key = tuple(rest)
        acc = out.get(key, Q(0)) + value
        if acc:
            out[key] = acc
        else:
            out.pop(key, None)
    result.coeffs.update(out)
    return TruncatedSeries(t, result.coeffs, alpha.pos_bound, alpha.neg_bound)


# -- power basis of the dual tautological class (multiplicative theory) -------

def ktheory_basis_decompose(alpha: TruncatedSeries, ring: IntersectionRing
                            ) -> dict[tuple[int, ...], TruncatedSeries]:
    """Rewrite a class as a combination of products of powers of the dual
    tautological classes (1 - beta*h per projective-space factor).

    Returns a map from power vectors to coefficient-ring scalars.
    """
    levels = _integrable_levels(ring)
    if BETA not in ring.table:
        raise OrientError("the power-basis conversion needs the multiplicative theory")
    t = ring.table
    beta_index = t.index(BETA)
    alpha = ring.reduce(alpha)
    out: dict[tuple[int, ...], dict] = {}
    for exps, coeff in alpha.coeffs.items():
        rest = list(exps)
        parts: list[list[tuple[int, Fraction]]] = []
        shift = 0
        for lvl, n in levels:
            e = exps[lvl.index]
            rest[lvl.index] = 0
            shift += e
            parts.append([(j, Q(math.comb(e, j) * (-1) ** j)) for j in range(e + 1)])
        rest[beta_index] -= shift
        stack = [((), Q(1))]
        for choices in parts:
            stack = [(vec + (j,), c * cj) for vec, c in stack for j, cj in choices]
        for vec, c in stack:
            slot = out.setdefault(vec, {})
            key = tuple(rest)
            acc = slot.get(key, Q(0)) + c * coeff
            if acc:
                slot[key] = acc
            else:
                slot.pop(key, None)
    return {vec: TruncatedSeries(t, slot, alpha.pos_bound, alpha.neg_bound)
            for vec, slot in out.items() if slot}


def ktheory_basis_recompose(decomposition: dict[tuple[int, ...], TruncatedSeries],
                            ring: IntersectionRing) -> TruncatedSeries:
    """Inverse of the power-basis conversion."""
    levels = _integrable_levels(ring)
    t = ring.table
    beta = TruncatedSeries.variable(t, BETA)
    duals = []
    for lvl, n in levels:
        h = TruncatedSeries.variable(t, lvl.name)
        duals.append(ring.one() - beta * h)
    total = ring.zero()
    for vec, scalar in decomposition.items():
        term = scalar.convert(t, scalar.pos_bound, scalar.neg_bound)
        for j, d in zip(vec, duals):
            term = ring.mul(term, ring.pow(d, j))
        total = total + term
    return ring.reduce(total)
