"""Truncated equivariant coefficient rings and Euler-class localization.

The coefficient ring of a rank-r torus is realized with one parameter per
character-basis element, each of codegree 1 and truncated by a per-variable
cap: zeta_l^i = 0 at truncation exponent i.  Raising i refines the ring and
restricting exponents recovers the coarser answers exactly, so computations
stabilize as in an inverse limit.

A localized element is a fraction whose numerator is a truncated series and
whose denominator is a multiset of nonzero characters, each standing for the
first Chern class of the corresponding one-dimensional representation.
Denominators stay symbolic, so equal characters cancel exactly; equality is
decided by cross-multiplication, but only when the truncation certifiably
exceeds the combined degrees, otherwise an explicit error is raised.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import (
    CharacterError,
    DenominatorError,
    OrientError,
    TruncationInsufficientError,
)
from .fgl import (
    ADDITIVE,
    FormalGroupLaw,
    apply_univariate,
    fgl_add,
    n_series,
    n_series_complete,
)
from .series import Q, TruncatedSeries, Variable, VariableTable


@dataclass(frozen=True)
class Character:
    """An integral character of the torus, written in the fixed basis."""

    weights: tuple[int, ...]

    def __init__(self, weights: Iterable[int]):
        object.__setattr__(self, "weights", tuple(int(w) for w in weights))

    def is_zero(self) -> bool:
        return not any(self.weights)

    def __neg__(self):
        return Character(tuple(-w for w in self.weights))

    def __add__(self, other):
        return Character(tuple(a + b for a, b in zip(self.weights, other.weights)))

    def __str__(self):
        parts = []
        for l, w in enumerate(self.weights, start=1):
            if not w:
                continue
            if w == 1:
                parts.append(f"t{l}")
            elif w == -1:
                parts.append(f"-t{l}")
            else:
                parts.append(f"{w}*t{l}")
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out


def basis_character(rank: int, l: int, weight: int = 1) -> Character:
    w = [0] * rank
    w[l] = weight
    return Character(w)


@dataclass(frozen=True)
class TorusContext:
    """A split torus of the given rank with a per-variable truncation.

    ``truncation`` is the exponent i with zeta_l^i = 0; it must be at least 2.
    """

    rank: int
    truncation: int

    def __post_init__(self):
        if self.rank < 1:
            raise OrientError("torus rank must be positive")
        if self.truncation < 2:
            raise OrientError("truncation exponent must be at least 2")

    def zeta_names(self) -> tuple[str, ...]:
        return tuple(f"z{l + 1}" for l in range(self.rank))

    def zeta_variables(self) -> tuple[Variable, ...]:
        return tuple(Variable(name, 1, cap=self.truncation - 1)
                     for name in self.zeta_names())

    def with_truncation(self, truncation: int) -> "TorusContext":
        return TorusContext(self.rank, truncation)

    def point_table(self, theory: FormalGroupLaw) -> VariableTable:
        from .fgl import coefficient_variables
        return VariableTable(coefficient_variables(theory.kind, theory.order)
                             + self.zeta_variables())


def char_c1(character: Character, ctx: TorusContext, theory: FormalGroupLaw,
            table: VariableTable, pos_bound: int | None = None,
            neg_bound: int | None = None) -> TruncatedSeries:
    """Equivariant first Chern class of the representation with this character.

    Folds the n-fold group-law sums of the torus parameters; the additive
    theory gives the plain linear form.
    """
    if theory.kind != ADDITIVE and theory.order < ctx.truncation:
        required = ctx.truncation
        if neg_bound is not None:
            required = min(required, neg_bound + 2)
        if theory.order < required:
            raise TruncationInsufficientError(
                "group-law order %d below the equivariant truncation %d"
                % (theory.order, ctx.truncation),
                knob="order", needed=required)
    parts = []
    for l, a in enumerate(character.weights):
        if not a:
            continue
        zeta = TruncatedSeries.variable(table, f"z{l + 1}", pos_bound, neg_bound)
        parts.append(apply_univariate(theory, n_series(theory, a), zeta,
                                      complete=n_series_complete(theory, a)))
    if not parts:
        return TruncatedSeries.zero(table, pos_bound, neg_bound)
    total = parts[0]
    for p in parts[1:]:
        total = fgl_add(theory, total, p)
    return total


def linear_part(character: Character, table: VariableTable,
                pos_bound: int | None = None,
                neg_bound: int | None = None) -> TruncatedSeries:
    """The weight-1 part of the character class: the plain linear form."""
    coeffs = {}
    for l, a in enumerate(character.weights):
        if a:
            coeffs[f"z{l + 1}"] = a
    out = TruncatedSeries.zero(table, pos_bound, neg_bound)
    for name, a in coeffs.items():
        out = out + TruncatedSeries.monomial(table, {name: 1}, a, pos_bound, neg_bound)
    return out


class CharClassCache:
    """Memoizes character classes and denominator products per table."""

    def __init__(self, ctx: TorusContext, theory: FormalGroupLaw):
        self.ctx = ctx
        self.theory = theory
        self._chars: dict = {}
        self._products: dict = {}

    def char_series(self, character: Character, table: VariableTable,
                    pos_bound, neg_bound) -> TruncatedSeries:
        key = (character.weights, table, pos_bound, neg_bound)
        if key not in self._chars:
            self._chars[key] = char_c1(character, self.ctx, self.theory, table,
                                       pos_bound, neg_bound)
        return self._chars[key]

    def product(self, den: Mapping[Character, int], table: VariableTable,
                pos_bound, neg_bound) -> TruncatedSeries:
        key = (tuple(sorted((c.weights, e) for c, e in den.items())),
               table, pos_bound, neg_bound)
        if key not in self._products:
            result = TruncatedSeries.constant(table, 1, pos_bound, neg_bound)
            for c, e in sorted(den.items(), key=lambda item: item[0].weights):
                s = self.char_series(c, table, pos_bound, neg_bound)
                for _ in range(e):
                    result = result * s
            self._products[key] = result
        return self._products[key]


class LocalizedElement:
    """A fraction numerator / product of character Euler classes."""

    __slots__ = ("ctx", "theory", "num", "den", "num_codeg")

    def __init__(self, ctx: TorusContext, theory: FormalGroupLaw,
                 num: TruncatedSeries, den: Mapping[Character, int] | None = None,
                 num_codeg: int | None = None):
        self.ctx = ctx
        self.theory = theory
        self.num = num
        self.den = {c: int(e) for c, e in (den or {}).items() if e}
        for c, e in self.den.items():
            if c.is_zero():
                raise CharacterError("zero character in a denominator")
            if e < 0:
                raise CharacterError("negative denominator exponent")
        if num_codeg is None:
            num_codeg = num.max_codegree()
            num_codeg = 0 if num_codeg is None else num_codeg
        self.num_codeg = num_codeg

    # -- bookkeeping ---------------------------------------------------------

    @property
    def den_codegree(self) -> int:
        return sum(self.den.values())

    def horizon(self) -> int | None:
        """Weights strictly below this are computed exactly."""
        cap = self.num.table.min_cap_plus_one()
        bound = self.num.pos_bound
        if bound is not None:
            bound += 1
        if cap is None:
            return bound
        if bound is None:
            return cap
        return min(cap, bound)

    def _check_window(self, extra_codeg: int = 0):
        hor = self.horizon()
        need = max(self.num_codeg, extra_codeg) + self.den_codegree + 1
        if hor is not None and need > hor:
            raise TruncationInsufficientError(
                "truncation horizon %d cannot certify degrees up to %d" % (hor, need),
                knob="cap", needed=need)
        return need

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def scale(self, value) -> "LocalizedElement":
        return LocalizedElement(self.ctx, self.theory, self.num.scale(value),
                                self.den, self.num_codeg)

    def __neg__(self):
        return self.scale(-1)

    def _cache(self, cache):
        return cache if cache is not None else CharClassCache(self.ctx, self.theory)

    def _compatible(self, other: "LocalizedElement"):
        if self.ctx != other.ctx or self.theory.key != other.theory.key:
            raise OrientError("localized elements from different contexts")
        if self.num.table != other.num.table:
            raise OrientError("localized elements over different tables")

    def __str__(self):
        if not self.den:
            return str(self.num)
        dens = " * ".join(
            f"[{c}]" + (f"^{e}" if e > 1 else "")
            for c, e in sorted(self.den.items(), key=lambda item: item[0].weights))
        return f"({self.num}) / ({dens})"

    def __repr__(self):
        return f"LocalizedElement({self})"

    # -- ring structure --------------------------------------------------------

    def add(self, other: "LocalizedElement", cache=None) -> "LocalizedElement":
        return loc_sum([self, other], cache)

    def mul(self, other: "LocalizedElement", cache=None) -> "LocalizedElement":
        self._compatible(other)
        den = dict(self.den)
        for c, e in other.den.items():
            den[c] = den.get(c, 0) + e
        out = LocalizedElement(self.ctx, self.theory, self.num * other.num, den,
                               self.num_codeg + other.num_codeg)
        out._check_window()
        return out

    def __add__(self, other):
        return self.add(other)

    def __mul__(self, other):
        if isinstance(other, LocalizedElement):
            return self.mul(other)
        return LocalizedElement(self.ctx, self.theory, self.num * other, self.den,
                                None)

    def eq(self, other: "LocalizedElement", cache=None) -> bool:
        self._compatible(other)
        cache = self._cache(cache)
        common: dict[Character, int] = dict(self.den)
        for c, e in other.den.items():
            common[c] = max(common.get(c, 0), e)
        pos, neg = self.num.merged_profile(other.num)
        table = self.num.table
        miss_a = {c: e - self.den.get(c, 0) for c, e in common.items()
                  if e - self.den.get(c, 0)}
        miss_b = {c: e - other.den.get(c, 0) for c, e in common.items()
                  if e - other.den.get(c, 0)}
        lhs = self.num * cache.product(miss_a, table, pos, neg)
        rhs = other.num * cache.product(miss_b, table, pos, neg)
        probe = LocalizedElement(self.ctx, self.theory, lhs, common,
                                 max(self.num_codeg + sum(miss_a.values()),
                                     other.num_codeg + sum(miss_b.values())))
        probe._check_window()
        return lhs == rhs

    def __eq__(self, other):
        if not isinstance(other, LocalizedElement):
            return NotImplemented
        return self.eq(other)

    __hash__ = None

    # -- verdicts ---------------------------------------------------------------

    def assert_constant(self, value, cache=None) -> bool:
        """True iff the element equals the coefficient-ring scalar exactly.

        The check cross-multiplies and requires the truncation to exceed the
        combined numerator and denominator degrees; an uncertifiable window
        raises rather than passing silently.
        """
        table = self.num.table
        if isinstance(value, TruncatedSeries):
            scalar = value.convert(table, self.num.pos_bound, self.num.neg_bound)
        else:
            scalar = TruncatedSeries.constant(table, value, self.num.pos_bound,
                                              self.num.neg_bound)
        if self.num.is_zero() and scalar.is_zero():
            return True
        cache = self._cache(cache)
        c_codeg = scalar.max_codegree()
        c_codeg = 0 if c_codeg is None else c_codeg
        self._check_window(extra_codeg=c_codeg + self.den_codegree)
        product = cache.product(self.den, table, self.num.pos_bound,
                                self.num.neg_bound)
        return self.num == scalar * product

    def polynomial_part(self, cache=None) -> TruncatedSeries:
        """The polynomial P with numerator = P * (denominator product).

        Solved weight by weight through the certified window; raises
        DenominatorError when the element is not divisible, i.e. when it is
        not the image of a polynomial class.
        """
        cache = self._cache(cache)
        table = self.num.table
        pos, neg = self.num.pos_bound, self.num.neg_bound
        d = self.den_codegree
        if d == 0:
            return self.num
        hor = self.horizon()
        if hor is None:
            top = max(self.num.max_pos_weight() - d, 0)
        else:
            top = hor - 1 - d
            if top < 0:
                raise TruncationInsufficientError(
                    "horizon too small to divide by the denominator",
                    knob="cap", needed=d + 1)
        for w in range(min(d, self.num.max_pos_weight() + 1)):
            if not self.num.weight_component(w).is_zero():
                raise DenominatorError(
                    "numerator has weight-%d terms below the denominator degree" % w)
        product = cache.product(self.den, table, pos, neg)
        lead = TruncatedSeries.constant(table, 1, pos, neg)
        for c, e in self.den.items():
            lin = linear_part(c, table, pos, neg)
            for _ in range(e):
                lead = lead * lin
        quotient = TruncatedSeries.zero(table, pos, neg)
        for w in range(top + 1):
            rem = self.num.weight_component(d + w)
            for w2 in range(w):
                rem = rem - quotient.weight_component(w2) * product.weight_component(d + w - w2)
            quotient = quotient + _divide_by_linear_forms(rem, self.den, table)
        return quotient

    def nonequivariant_value(self, cache=None) -> TruncatedSeries:
        """The value at zero torus parameters of the polynomial part."""
        p = self.polynomial_part(cache)
        return p.weight_component(0)

    def restricted(self, truncation: int) -> "LocalizedElement":
        """Restrict to a coarser per-variable truncation exponent."""
        ctx2 = self.ctx.with_truncation(truncation)
        table2 = VariableTable(tuple(
            Variable(v.name, v.codegree, truncation - 1)
            if v.name in ctx2.zeta_names() else v
            for v in self.num.table.variables))
        pos = self.num.pos_bound
        if pos is not None:
            pos = min(pos, truncation - 1)
        num2 = self.num.convert(table2, pos, self.num.neg_bound)
        return LocalizedElement(ctx2, self.theory, num2, self.den, self.num_codeg)


def _divide_by_linear_forms(poly: TruncatedSeries, den: Mapping[Character, int],
                            table: VariableTable) -> TruncatedSeries:
    q = poly
    for c, e in den.items():
        form = linear_part(c, table, poly.pos_bound, poly.neg_bound)
        for _ in range(e):
            q = _divide_linear(q, form)
    return q


def _divide_linear(poly: TruncatedSeries, form: TruncatedSeries) -> TruncatedSeries:
    """Exact division by a linear form; raises DenominatorError on failure."""
    table = poly.table
    pivot = None
    for exps, c in form.coeffs.items():
        for i, e in enumerate(exps):
            if e:
                pivot = (i, c)
                break
        if pivot:
            break
    if pivot is None:
        raise DenominatorError("division by the zero form")
    j, aj = pivot
    q = TruncatedSeries.zero(table, poly.pos_bound, poly.neg_bound)
    r = poly
    while True:
        d = max((e[j] for e in r.coeffs), default=0)
        if d == 0:
            break
        top = {}
        for exps, c in r.coeffs.items():
            if exps[j] == d:
                e = list(exps)
                e[j] = d - 1
                top[tuple(e)] = c / aj
        q_term = TruncatedSeries(table, top, poly.pos_bound, poly.neg_bound,
                                 _trusted=True)
        q = q + q_term
        r = r - q_term * form
    if not r.is_zero():
        raise DenominatorError("numerator is not divisible by the denominator")
    return q


def loc_sum(elements, cache=None) -> LocalizedElement:
    """Sum of localized elements over their common denominator."""
    elements = list(elements)
    if not elements:
        raise OrientError("empty localized sum")
    first = elements[0]
    for e in elements[1:]:
        first._compatible(e)
    cache = first._cache(cache)
    common: dict[Character, int] = {}
    for el in elements:
        for c, e in el.den.items():
            common[c] = max(common.get(c, 0), e)
    table = first.num.table
    pos, neg = first.num.pos_bound, first.num.neg_bound
    for el in elements[1:]:
        pos, neg = (TruncatedSeries.zero(table, pos, neg)
                    .merged_profile(el.num))
    total = TruncatedSeries.zero(table, pos, neg)
    codeg = 0
    for el in elements:
        missing = {c: e - el.den.get(c, 0) for c, e in common.items()
                   if e - el.den.get(c, 0)}
        total = total + el.num * cache.product(missing, table, pos, neg)
        codeg = max(codeg, el.num_codeg + sum(missing.values()))
    out = LocalizedElement(first.ctx, first.theory, total, common, codeg)
    out._check_window()
    return out


def loc_combine(op: str, a: LocalizedElement, b: LocalizedElement,
                cache=None) -> LocalizedElement:
    """Combine two localized elements: op is "add" or "mul"."""
    if op == "add":
        return a.add(b, cache)
    if op == "mul":
        return a.mul(b, cache)
    raise OrientError(f"unknown combination {op!r}")


def invert_equivariant_euler(bundle, ring, ctx: TorusContext,
                             pos_bound: int | None = None,
                             neg_bound: int | None = None,
                             cache=None) -> LocalizedElement:
    """Inverse Euler class of a bundle all of whose characters are nonzero.

    Each line summand contributes one symbolic character denominator; a
    nilpotent root is expanded through the finite geometric series.  The
    product of the result with the Euler class cross-multiplies to one.
    """
    theory = ring.theory
    if cache is None:
        cache = CharClassCache(ctx, theory)
    table = ring.table
    num = TruncatedSeries.constant(table, 1, pos_bound, neg_bound)
    den: dict[Character, int] = {}
    codeg = 0
    for s in bundle.summands:
        char = Character(s.char)
        if char.is_zero():
            raise CharacterError(
                "cannot invert the Euler class: a summand has zero character")
        root = ring.summand_class(type(s)(s.root, ()))
        root = root.with_profile(pos_bound, neg_bound)
        if root.is_zero():
            den[char] = den.get(char, 0) + 1
            continue
        c = ring.reduce(cache.char_series(char, table, pos_bound, neg_bound))
        total = ring.fgl_sum(c, root)
        excess = total - c
        k = excess.nilpotency_index(multiply=ring.mul,
                                    ceiling=ring.positive_room + 2)
        factor_num = TruncatedSeries.zero(table, pos_bound, neg_bound)
        for t in range(k):
            term = ring.mul(ring.pow(excess, t), ring.pow(c, k - 1 - t))
            factor_num = factor_num + term.scale((-1) ** t)
        num = ring.mul(num, factor_num)
        den[char] = den.get(char, 0) + k
        codeg += k - 1
    return LocalizedElement(ctx, theory, num, den, codeg)


def assert_constant(a: LocalizedElement, value, cache=None) -> bool:
    """True iff the localized element equals the scalar exactly."""
    return a.assert_constant(value, cache)
