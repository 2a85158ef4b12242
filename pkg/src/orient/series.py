"""Exact sparse arithmetic for truncated multivariate series over the rationals.

A series is a dictionary mapping exponent vectors to nonzero ``Fraction``
coefficients, together with the table of variables the exponents refer to and
a truncation profile.  Every variable carries an integer codegree.  The
profile consists of

* an optional bound on the total weight contributed by positive-codegree
  variables (``pos_bound``),
* an optional bound on the total weight contributed by negative-codegree
  variables (``neg_bound``), and
* optional per-variable exponent caps recorded in the table (``cap`` is the
  largest exponent that survives; higher powers vanish).

Monomials violating the profile are discarded by every operation, so a value
is always the faithful image of its truncation class.  Binary operations
require equal tables and combine profiles by taking the coarser one, i.e. the
smaller bound.  Coefficient-like variables (codegree <= 0, no cap) may carry
negative exponents; geometric variables may not.

All values are immutable after construction and safe to share between
threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from operator import add as _iadd
from typing import Iterable, Mapping

from .errors import (
    NotInvertibleError,
    ProfileError,
    SubstitutionError,
    TableMismatchError,
)

Q = Fraction

_INVERSION_CEILING = 512


@dataclass(frozen=True)
class Variable:
    """One variable: a name, its codegree, and an optional exponent cap."""

    name: str
    codegree: int
    cap: int | None = None

    def __post_init__(self):
        if self.cap is not None and self.cap < 0:
            raise ValueError(f"cap for {self.name} must be nonnegative")


class VariableTable:
    """Immutable, value-comparable list of variables.

    Two independently built tables with the same variables are equal and
    interchangeable; series operations rely on this.
    """

    __slots__ = ("variables", "_index", "_pos", "_neg", "_caps", "_hash")

    def __init__(self, variables: Iterable[Variable]):
        vs = tuple(variables)
        names = [v.name for v in vs]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        self.variables = vs
        self._index = {v.name: i for i, v in enumerate(vs)}
        self._pos = tuple((i, v.codegree) for i, v in enumerate(vs) if v.codegree > 0)
        self._neg = tuple((i, -v.codegree) for i, v in enumerate(vs) if v.codegree < 0)
        self._caps = tuple((i, v.cap) for i, v in enumerate(vs) if v.cap is not None)
        self._hash = hash(vs)

    def __eq__(self, other):
        return isinstance(other, VariableTable) and self.variables == other.variables

    def __hash__(self):
        return self._hash

    def __len__(self):
        return len(self.variables)

    def __contains__(self, name: str):
        return name in self._index

    def __repr__(self):
        return "VariableTable(%s)" % ", ".join(v.name for v in self.variables)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise TableMismatchError(f"unknown variable {name!r}") from None

    def variable(self, name: str) -> Variable:
        return self.variables[self.index(name)]

    def zero_exps(self) -> tuple[int, ...]:
        return (0,) * len(self.variables)

    def pos_weight(self, exps) -> int:
        w = 0
        for i, c in self._pos:
            w += exps[i] * c
        return w

    def neg_weight(self, exps) -> int:
        w = 0
        for i, c in self._neg:
            w += exps[i] * c
        return w

    def codegree(self, exps) -> int:
        return sum(e * v.codegree for e, v in zip(exps, self.variables))

    def violates_caps(self, exps) -> bool:
        return any(exps[i] > cap for i, cap in self._caps)

    def min_cap_plus_one(self) -> int | None:
        """Smallest vanishing power among capped positive variables, or None."""
        caps = [cap + 1 for i, cap in self._caps if self.variables[i].codegree > 0]
        return min(caps) if caps else None

    def validate_exps(self, exps) -> None:
        for e, v in zip(exps, self.variables):
            if e < 0 and (v.codegree > 0 or v.cap is not None):
                raise ProfileError(f"negative exponent on {v.name}")


def _merge_bound(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class TruncatedSeries:
    """A truncated series: table, sparse coefficient map, profile bounds."""

    __slots__ = ("table", "coeffs", "pos_bound", "neg_bound")

    def __init__(self, table: VariableTable, coeffs: Mapping[tuple[int, ...], Fraction],
                 pos_bound: int | None = None, neg_bound: int | None = None,
                 _trusted: bool = False):
        self.table = table
        self.pos_bound = pos_bound
        self.neg_bound = neg_bound
        if _trusted:
            self.coeffs = dict(coeffs)
        else:
            clean: dict[tuple[int, ...], Fraction] = {}
            for exps, c in coeffs.items():
                exps = tuple(exps)
                table.validate_exps(exps)
                c = Q(c)
                if c == 0 or self._drops(exps):
                    continue
                clean[exps] = c
            self.coeffs = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def _filtered(cls, table, coeffs, pos_bound, neg_bound):
        """Internal: drop zero and out-of-profile monomials, skip validation."""
        out = cls.zero(table, pos_bound, neg_bound)
        clean = {}
        for exps, c in coeffs.items():
            if c and not out._drops(exps):
                clean[exps] = c
        out.coeffs = clean
        return out

    @classmethod
    def zero(cls, table, pos_bound=None, neg_bound=None):
        return cls(table, {}, pos_bound, neg_bound, _trusted=True)

    @classmethod
    def constant(cls, table, value, pos_bound=None, neg_bound=None):
        value = Q(value)
        coeffs = {} if value == 0 else {table.zero_exps(): value}
        return cls(table, coeffs, pos_bound, neg_bound, _trusted=True)

    @classmethod
    def variable(cls, table, name, pos_bound=None, neg_bound=None):
        return cls.monomial(table, {name: 1}, 1, pos_bound, neg_bound)

    @classmethod
    def monomial(cls, table, exponents: Mapping[str, int], coefficient=1,
                 pos_bound=None, neg_bound=None):
        exps = list(table.zero_exps())
        for name, e in exponents.items():
            exps[table.index(name)] = e
        return cls(table, {tuple(exps): Q(coefficient)}, pos_bound, neg_bound)

    # -- profile -----------------------------------------------------------

    def _drops(self, exps) -> bool:
        t = self.table
        if t.violates_caps(exps):
            return True
        if self.pos_bound is not None and t.pos_weight(exps) > self.pos_bound:
            return True
        if self.neg_bound is not None and t.neg_weight(exps) > self.neg_bound:
            return True
        return False

    def with_profile(self, pos_bound, neg_bound) -> "TruncatedSeries":
        """Reduce to the given bounds (dropping newly violating monomials)."""
        return TruncatedSeries(self.table, self.coeffs, pos_bound, neg_bound)

    def merged_profile(self, other) -> tuple[int | None, int | None]:
        return (_merge_bound(self.pos_bound, other.pos_bound),
                _merge_bound(self.neg_bound, other.neg_bound))

    # -- predicates and views ------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def constant_term(self) -> Fraction:
        return self.coeffs.get(self.table.zero_exps(), Q(0))

    def support_names(self) -> set[str]:
        names = set()
        for exps in self.coeffs:
            for i, e in enumerate(exps):
                if e:
                    names.add(self.table.variables[i].name)
        return names

    def max_codegree(self):
        return max((self.table.codegree(e) for e in self.coeffs), default=None)

    def min_codegree(self):
        return min((self.table.codegree(e) for e in self.coeffs), default=None)

    def max_pos_weight(self) -> int:
        return max((self.table.pos_weight(e) for e in self.coeffs), default=0)

    def is_homogeneous(self) -> bool:
        return len({self.table.codegree(e) for e in self.coeffs}) <= 1

    def weight_component(self, w: int) -> "TruncatedSeries":
        """The part of the series whose positive-codegree weight equals w."""
        t = self.table
        part = {e: c for e, c in self.coeffs.items() if t.pos_weight(e) == w}
        return TruncatedSeries(t, part, self.pos_bound, self.neg_bound, _trusted=True)

    def coefficient(self, exponents: Mapping[str, int]) -> Fraction:
        """Stored coefficient of the monomial, or 0.

        Raises ProfileError when the monomial lies outside the truncation
        profile, so a dropped position is never mistaken for a true zero.
        """
        exps = list(self.table.zero_exps())
        for name, e in exponents.items():
            exps[self.table.index(name)] = e
        exps = tuple(exps)
        self.table.validate_exps(exps)
        if self._drops(exps):
            raise ProfileError(f"monomial {exponents} lies outside the profile")
        return self.coeffs.get(exps, Q(0))

    # -- arithmetic ----------------------------------------------------------

    def _check_table(self, other):
        if self.table != other.table:
            raise TableMismatchError("series use different variable tables")

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            return other
        return TruncatedSeries.constant(self.table, other, self.pos_bound, self.neg_bound)

    def __add__(self, other):
        other = self._coerce(other)
        self._check_table(other)
        pos, neg = self.merged_profile(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            s = out.get(e, Q(0)) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        if pos == self.pos_bound == other.pos_bound and \
           neg == self.neg_bound == other.neg_bound:
            return TruncatedSeries(self.table, out, pos, neg, _trusted=True)
        return TruncatedSeries._filtered(self.table, out, pos, neg)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.table, {e: -c for e, c in self.coeffs.items()},
                               self.pos_bound, self.neg_bound, _trusted=True)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, value) -> "TruncatedSeries":
        value = Q(value)
        if value == 0:
            return TruncatedSeries.zero(self.table, self.pos_bound, self.neg_bound)
        return TruncatedSeries(self.table, {e: c * value for e, c in self.coeffs.items()},
                               self.pos_bound, self.neg_bound, _trusted=True)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        self._check_table(other)
        pos, neg = self.merged_profile(other)
        t = self.table
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return TruncatedSeries.zero(t, pos, neg)
        if len(a) > len(b):
            a, b = b, a
        # Sort the bigger factor by positive weight so the inner loop can stop
        # as soon as the bound is exceeded.
        b_items = sorted(((t.pos_weight(e), e, c) for e, c in b.items()),
                         key=lambda item: item[0])
        caps = t._caps
        negs = t._neg
        zero = Q(0)
        out: dict[tuple[int, ...], Fraction] = {}
        for ea, ca in a.items():
            wa = t.pos_weight(ea)
            for wb, eb, cb in b_items:
                if pos is not None and wa + wb > pos:
                    break
                e = tuple(map(_iadd, ea, eb))
                dead = False
                for i, cap in caps:
                    if e[i] > cap:
                        dead = True
                        break
                if dead:
                    continue
                if neg is not None:
                    w = 0
                    for i, c in negs:
                        w += e[i] * c
                    if w > neg:
                        continue
                out[e] = out.get(e, zero) + ca * cb
        out = {e: c for e, c in out.items() if c}
        return TruncatedSeries(t, out, pos, neg, _trusted=True)

    __rmul__ = __mul__

    def __truediv__(self, value):
        return self.scale(Q(1) / Q(value))

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("exponent must be an integer")
        if n < 0:
            return self._invert_monomial(n)
        result = TruncatedSeries.constant(self.table, 1, self.pos_bound, self.neg_bound)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def _invert_monomial(self, n: int) -> "TruncatedSeries":
        # Negative powers exist only for a single monomial in invertible
        # (uncapped, codegree <= 0) variables.
        if len(self.coeffs) != 1:
            raise NotInvertibleError("negative power of a non-monomial series")
        (exps, coeff), = self.coeffs.items()
        for e, v in zip(exps, self.table.variables):
            if e and (v.codegree > 0 or v.cap is not None):
                raise NotInvertibleError(f"variable {v.name} is not invertible")
        new = tuple(e * n for e in exps)
        return TruncatedSeries(self.table, {new: coeff ** n},
                               self.pos_bound, self.neg_bound)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TruncatedSeries.constant(self.table, other)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if self.table != other.table:
            return False
        pos, neg = self.merged_profile(other)
        return (self.with_profile(pos, neg).coeffs ==
                other.with_profile(pos, neg).coeffs)

    __hash__ = None

    # -- composition ---------------------------------------------------------

    def substitute(self, bindings: Mapping[str, "TruncatedSeries"],
                   table: VariableTable | None = None,
                   pos_bound: int | None = None,
                   neg_bound: int | None = None) -> "TruncatedSeries":
        """Exact composition: replace bound variables by series.

        Unbound variables are carried through by name into the target table.
        A binding with nonzero constant term is only admitted when this
        series is an untruncated polynomial, because composing a truncation
        with a unit shift would silently corrupt low-order coefficients.
        """
        if table is None:
            for s in bindings.values():
                table = s.table
                break
            if table is None:
                raise SubstitutionError("no bindings and no target table")
        for name, s in bindings.items():
            self.table.index(name)
            if s.table != table:
                raise TableMismatchError("bindings use different tables")
        if pos_bound is None and neg_bound is None:
            for s in bindings.values():
                pos_bound = _merge_bound(pos_bound, s.pos_bound)
                neg_bound = _merge_bound(neg_bound, s.neg_bound)
        shifting = [n for n, s in bindings.items() if s.constant_term() != 0]
        if shifting:
            truncated = (self.pos_bound is not None or self.neg_bound is not None
                         or any(self.table.variable(n).cap is not None
                                for n in self.support_names()))
            if truncated:
                raise SubstitutionError(
                    "binding with nonzero constant term (%s) substituted into a "
                    "truncated series" % ", ".join(sorted(shifting)))
        carried: dict[int, int] = {}
        for i, v in enumerate(self.table.variables):
            if v.name not in bindings:
                carried[i] = table.index(v.name) if v.name in table else -1
        powers: dict[str, list[TruncatedSeries]] = {
            name: [TruncatedSeries.constant(table, 1, pos_bound, neg_bound)]
            for name in bindings
        }

        def power(name: str, k: int) -> TruncatedSeries:
            cache = powers[name]
            while len(cache) <= k:
                cache.append(cache[-1] * bindings[name])
            return cache[k]

        probe = TruncatedSeries.zero(table, pos_bound, neg_bound)
        zero_shift = table.zero_exps()
        out: dict[tuple[int, ...], Fraction] = {}
        for exps, coeff in self.coeffs.items():
            term = None
            shift = list(zero_shift)
            shifted = False
            dead = False
            for i, e in enumerate(exps):
                if not e:
                    continue
                name = self.table.variables[i].name
                if name in bindings:
                    p = power(name, e)
                    if p.is_zero():
                        dead = True
                        break
                    term = p if term is None else term * p
                else:
                    if carried[i] < 0:
                        raise TableMismatchError(
                            f"variable {name!r} missing from the target table")
                    shift[carried[i]] = e
                    shifted = True
            if dead:
                continue
            if term is None:
                items = [(tuple(zero_shift), Q(1))]
            else:
                items = term.coeffs.items()
            for e, c in items:
                if shifted:
                    e = tuple(map(_iadd, e, shift))
                    if probe._drops(e):
                        continue
                out[e] = out.get(e, Q(0)) + c * coeff
        out = {e: c for e, c in out.items() if c}
        return TruncatedSeries(table, out, pos_bound, neg_bound, _trusted=True)

    def convert(self, table: VariableTable,
                pos_bound: int | None = None,
                neg_bound: int | None = None) -> "TruncatedSeries":
        """Re-express over another table, matching variables by name.

        Monomials violating the target profile are dropped (this is how a
        computation at a fine truncation is restricted to a coarser one).
        """
        if pos_bound is None:
            pos_bound = self.pos_bound
        if neg_bound is None:
            neg_bound = self.neg_bound
        mapping = []
        for i, v in enumerate(self.table.variables):
            j = table.index(v.name) if v.name in table else -1
            mapping.append(j)
            if j >= 0 and table.variables[j].codegree != v.codegree:
                raise TableMismatchError(f"codegree of {v.name} differs between tables")
        out: dict[tuple[int, ...], Fraction] = {}
        for exps, c in self.coeffs.items():
            new = [0] * len(table)
            for i, e in enumerate(exps):
                if not e:
                    continue
                if mapping[i] < 0:
                    raise TableMismatchError(
                        f"variable {self.table.variables[i].name!r} missing from target")
                new[mapping[i]] = e
            out[tuple(new)] = c
        return TruncatedSeries(table, out, pos_bound, neg_bound)

    def invert_unit(self, multiply=None) -> "TruncatedSeries":
        """Inverse of a series with a nonzero constant term.

        The non-constant part must be nilpotent under the profile (or under
        the supplied multiplication, e.g. one that also reduces by ring
        relations); the inverse is the finite geometric series.
        """
        c = self.constant_term()
        if c == 0:
            raise NotInvertibleError("zero constant term")
        mul = multiply if multiply is not None else (lambda x, y: x * y)
        n = self - c
        result = TruncatedSeries.constant(self.table, Q(1) / c,
                                          self.pos_bound, self.neg_bound)
        if n.is_zero():
            return result
        if any(self.table.pos_weight(e) == 0 for e in n.coeffs):
            raise NotInvertibleError(
                "non-constant part has a weight-zero term; inverse is not finite")
        term = result
        for _ in range(_INVERSION_CEILING):
            term = mul(term, n).scale(Q(-1) / c)
            if term.is_zero():
                return result
            result = result + term
        raise NotInvertibleError("non-constant part is not nilpotent at this profile")

    def nilpotency_index(self, multiply=None, ceiling: int = _INVERSION_CEILING) -> int:
        """Smallest k with self**k == 0 under the profile/multiplication."""
        if self.is_zero():
            return 1
        mul = multiply if multiply is not None else (lambda x, y: x * y)
        if any(self.table.pos_weight(e) == 0 for e in self.coeffs):
            raise NotInvertibleError("series has a weight-zero term; not nilpotent")
        power = self
        k = 1
        while not power.is_zero():
            power = mul(power, self)
            k += 1
            if k > ceiling:
                raise NotInvertibleError("nilpotency bound not established")
        return k

    # -- display -------------------------------------------------------------

    def sorted_items(self):
        t = self.table
        return sorted(self.coeffs.items(),
                      key=lambda item: (t.pos_weight(item[0]), t.neg_weight(item[0]), item[0]))

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for exps, c in self.sorted_items():
            factors = []
            for e, v in zip(exps, self.table.variables):
                if e == 1:
                    factors.append(v.name)
                elif e:
                    factors.append(f"{v.name}^{e}")
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            elif c == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(str(c) + "*" + "*".join(factors))
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return f"TruncatedSeries({self})"


def poly_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Exact product reduced by the coarser of the two profiles."""
    return a * b


def series_substitute(f: TruncatedSeries, bindings, table=None,
                      pos_bound=None, neg_bound=None) -> TruncatedSeries:
    """Exact composition; see TruncatedSeries.substitute."""
    return f.substitute(bindings, table, pos_bound, neg_bound)


def invert_unit_series(f: TruncatedSeries) -> TruncatedSeries:
    """Inverse of a unit series under its profile."""
    return f.invert_unit()


def coefficient(f: TruncatedSeries, exponents) -> Fraction:
    """Stored coefficient of a monomial inside the profile."""
    return f.coefficient(exponents)
