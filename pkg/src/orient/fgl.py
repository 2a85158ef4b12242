"""Formal group laws over exact coefficient rings.

Three laws are built in.  The additive law is u+v over the empty coefficient
ring; the multiplicative law is u+v-beta*u*v over Q[beta]; the universal
rational law is recovered from a logarithm with free coefficients,

    l(u) = u + m1*u^2 + ... + m_{N-1}*u^N,      F = l^{-1}(l(u) + l(v)),

truncated at total degree N over Q[m1, ..., m_{N-1}].  The variable u and v
carry codegree +1 and the coefficients beta, m_i carry codegree -1, -i, so
every law is codegree-homogeneous of degree 1.

The stored law keeps all terms of total degree <= N.  Derived univariate
series (the inverse-factor series g and the n-fold sums [n]) are reported
with degrees <= N-1, i.e. modulo u^N.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import OrientError, SubstitutionError, TruncationInsufficientError
from .series import Q, TruncatedSeries, Variable, VariableTable

ADDITIVE = "additive"
MULTIPLICATIVE = "multiplicative"
UNIVERSAL = "universal"
KINDS = (ADDITIVE, MULTIPLICATIVE, UNIVERSAL)

BETA = "beta"


def coefficient_variables(kind: str, order: int) -> tuple[Variable, ...]:
    """The coefficient-ring variables of a theory."""
    if kind == ADDITIVE:
        return ()
    if kind == MULTIPLICATIVE:
        return (Variable(BETA, -1),)
    if kind == UNIVERSAL:
        return tuple(Variable(f"m{i}", -i) for i in range(1, order))
    raise OrientError(f"unknown theory kind {kind!r}")


@dataclass
class FormalGroupLaw:
    """A bivariate law F(u, v) truncated at total degree ``order``."""

    kind: str
    order: int
    table: VariableTable
    law: TruncatedSeries
    coeff_names: tuple[str, ...]
    log: TruncatedSeries | None = None
    exp: TruncatedSeries | None = None
    _inverse: "InverseSeries | None" = field(default=None, repr=False)
    _n_cache: dict = field(default_factory=dict, repr=False)

    @property
    def key(self):
        return (self.kind, self.order)

    @property
    def complete(self) -> bool:
        """True when the stored law is the whole law, not a truncation."""
        return self.kind in (ADDITIVE, MULTIPLICATIVE)

    def u(self) -> TruncatedSeries:
        return TruncatedSeries.variable(self.table, "u", self.order)

    def v(self) -> TruncatedSeries:
        return TruncatedSeries.variable(self.table, "v", self.order)

    def __str__(self):
        return f"{self.kind} law at order {self.order}: F = {self.law}"


@dataclass(frozen=True)
class InverseSeries:
    """The series g with g(0) = -1 and F(u, u*g(u)) = 0 modulo u^order."""

    g: TruncatedSeries
    fgl: FormalGroupLaw
    verified: bool


_FGL_CACHE: dict[tuple[str, int], FormalGroupLaw] = {}


def make_fgl(kind: str, order: int) -> FormalGroupLaw:
    if order < 2:
        raise OrientError("truncation order must be at least 2")
    key = (kind, order)
    if key in _FGL_CACHE:
        return _FGL_CACHE[key]
    coeffs = coefficient_variables(kind, order)
    table = VariableTable(coeffs + (Variable("u", 1), Variable("v", 1)))
    u = TruncatedSeries.variable(table, "u", order)
    v = TruncatedSeries.variable(table, "v", order)
    log = exp = None
    if kind == ADDITIVE:
        law = u + v
    elif kind == MULTIPLICATIVE:
        beta = TruncatedSeries.variable(table, BETA, order)
        law = u + v - beta * u * v
    else:
        log, exp, law = _universal_law(table, order)
    fgl = FormalGroupLaw(kind, order, table, law, tuple(v.name for v in coeffs),
                         log, exp)
    if not (law.substitute({"v": TruncatedSeries.zero(table, order)}, table, order) == u):
        raise OrientError("law does not satisfy F(u, 0) = u")
    if not _is_symmetric(fgl):
        raise OrientError("law is not commutative")
    _FGL_CACHE[key] = fgl
    return fgl


def _universal_law(table: VariableTable, order: int):
    u = TruncatedSeries.variable(table, "u", order)
    v = TruncatedSeries.variable(table, "v", order)
    log = u
    for i in range(1, order):
        log = log + TruncatedSeries.monomial(table, {f"m{i}": 1, "u": i + 1}, 1, order)
    exp = _reverse_univariate(log, table, order)
    s = log + log.substitute({"u": v}, table, order)
    return log, exp, exp.substitute({"u": s}, table, order)


def _reverse_univariate(f: TruncatedSeries, table: VariableTable, order: int) -> TruncatedSeries:
    """Compositional inverse of f = u + O(u^2), exact through degree order."""
    u = TruncatedSeries.variable(table, "u", order)
    higher = f - u
    phi = u
    for _ in range(order):
        phi = u - higher.substitute({"u": phi}, table, order)
    return phi


def _is_symmetric(fgl: FormalGroupLaw) -> bool:
    iu = fgl.table.index("u")
    iv = fgl.table.index("v")
    swapped = {}
    for exps, c in fgl.law.coeffs.items():
        e = list(exps)
        e[iu], e[iv] = e[iv], e[iu]
        swapped[tuple(e)] = c
    return swapped == fgl.law.coeffs


def _split_uv(fgl: FormalGroupLaw, exps):
    iu = fgl.table.index("u")
    iv = fgl.table.index("v")
    rest = list(exps)
    a, b = rest[iu], rest[iv]
    rest[iu] = rest[iv] = 0
    return a, b, tuple(rest)


def _assemble(fgl: FormalGroupLaw, law_coeffs, table, pos, neg, factor):
    """Sum coeff * factor(alpha, gamma) * (carried coefficient monomial) over
    the stored law monomials, accumulating exactly under the profile."""
    from fractions import Fraction as Q
    probe = TruncatedSeries.zero(table, pos, neg)
    names = [v.name for v in fgl.table.variables]
    idx = {n: table.index(n) for n in names if n in table}
    width = len(table)
    out: dict[tuple, Q] = {}
    for exps, coeff in law_coeffs.items():
        alpha, gamma, rest = _split_uv(fgl, exps)
        term = factor(alpha, gamma)
        if term is None or term.is_zero():
            continue
        shift = None
        if any(rest):
            s = [0] * width
            for i, e in enumerate(rest):
                if e:
                    s[idx[names[i]]] = e
            shift = tuple(s)
        for e, c in term.coeffs.items():
            if shift is not None:
                e = tuple(x + y for x, y in zip(e, shift))
                if probe._drops(e):
                    continue
            out[e] = out.get(e, Q(0)) + c * coeff
    out = {e: c for e, c in out.items() if c}
    return TruncatedSeries(table, out, pos, neg, _trusted=True)


def _powers_until_zero(x: TruncatedSeries, ceiling: int, mul):
    """[x^0, x^1, ...] stopping after a zero power or at index ceiling."""
    pows = [TruncatedSeries.constant(x.table, 1, x.pos_bound, x.neg_bound)]
    for _ in range(ceiling):
        nxt = mul(pows[-1], x)
        pows.append(nxt)
        if nxt.is_zero():
            break
    return pows


def fgl_add(fgl: FormalGroupLaw, a: TruncatedSeries, b: TruncatedSeries,
            multiply=None) -> TruncatedSeries:
    """F(a, b) for nilpotent arguments sharing a table.

    ``multiply`` may reduce by ring relations; plain profile multiplication
    is used otherwise.  Raises when the law's order is too small to cover
    all products of nonvanishing powers of the arguments.
    """
    if a.table != b.table:
        raise SubstitutionError("arguments use different tables")
    if a.constant_term() != 0 or b.constant_term() != 0:
        raise SubstitutionError("group-law sum needs zero constant terms")
    mul = multiply if multiply is not None else (lambda x, y: x * y)
    order = fgl.order
    pows_a = _powers_until_zero(a, order + 1, mul)
    pows_b = _powers_until_zero(b, order + 1, mul)

    def nonzero(pows, k):
        return k < len(pows) and not pows[k].is_zero()

    # Degree-d law terms carry coefficient weight d-1, so under a negative
    # bound only degrees up to neg+1 can contribute; a complete law never
    # misses terms at all.
    _, neg_eff = a.merged_profile(b)
    if not fgl.complete and (neg_eff is None or order < neg_eff + 1):
        for alpha in range(1, order + 1):
            gamma = order + 1 - alpha
            if (gamma >= 1 and nonzero(pows_a, alpha) and nonzero(pows_b, gamma)
                    and not mul(pows_a[alpha], pows_b[gamma]).is_zero()):
                ka = len(pows_a) - 1 if pows_a[-1].is_zero() else None
                kb = len(pows_b) - 1 if pows_b[-1].is_zero() else None
                needed = (ka + kb - 2) if (ka is not None and kb is not None) else None
                if needed is not None and neg_eff is not None:
                    needed = min(needed, neg_eff + 1)
                raise TruncationInsufficientError(
                    "group-law order %d too small for these arguments" % order,
                    knob="order", needed=needed)

    table = a.table
    pos, neg = a.merged_profile(b)
    return _assemble(fgl, fgl.law.coeffs, table, pos, neg,
                     lambda alpha, gamma: (mul(pows_a[alpha], pows_b[gamma])
                                           if nonzero(pows_a, alpha)
                                           and nonzero(pows_b, gamma) else None))


def apply_univariate(fgl: FormalGroupLaw, f: TruncatedSeries, x: TruncatedSeries,
                     multiply=None, complete: bool = False) -> TruncatedSeries:
    """Evaluate a series f(u) over the law's table at a nilpotent argument x.

    Used for the n-fold sums and the inverse-class series.  Raises when x has
    a nonvanishing power beyond the stored degrees of f, unless the caller
    marks f as complete or a coefficient-weight bound makes the missing
    degrees irrelevant (the stored series are codegree-homogeneous, so their
    degree-d coefficients have weight d-1).
    """
    if x.constant_term() != 0:
        raise SubstitutionError("univariate evaluation needs a zero constant term")
    mul = multiply if multiply is not None else (lambda s, t: s * t)
    iu = fgl.table.index("u")
    iv = fgl.table.index("v")
    top = max((exps[iu] for exps in f.coeffs), default=0)
    guard_at = None
    if not complete and f.pos_bound is not None:
        if x.neg_bound is None or f.pos_bound <= x.neg_bound:
            guard_at = f.pos_bound + 1
    pows = _powers_until_zero(x, max(top, guard_at or 0) + 1, mul)

    def nonzero(k):
        return k < len(pows) and not pows[k].is_zero()

    if guard_at is not None and nonzero(guard_at):
        kx = len(pows) - 1 if pows[-1].is_zero() else None
        needed = kx
        if x.neg_bound is not None:
            needed = x.neg_bound + 2 if needed is None else min(needed, x.neg_bound + 2)
        raise TruncationInsufficientError(
            "argument power %d survives past the stored series degrees" % guard_at,
            knob="order", needed=needed)
    table = x.table
    for exps in f.coeffs:
        if exps[iv]:
            raise SubstitutionError("series is not univariate in u")
    return _assemble(fgl, f.coeffs, table, x.pos_bound, x.neg_bound,
                     lambda alpha, gamma: pows[alpha] if nonzero(alpha) else None)


def formal_inverse(fgl: FormalGroupLaw) -> InverseSeries:
    """The series g with F(u, u*g(u)) = 0 and g(0) = -1.

    Determined law by law (negated logarithm for the universal case, the
    geometric series for the multiplicative one) and then verified against
    the defining identity inside the truncated ring.
    """
    if fgl._inverse is not None:
        return fgl._inverse
    table, order = fgl.table, fgl.order
    u = fgl.u()
    if fgl.kind == ADDITIVE:
        w = -u
    elif fgl.kind == MULTIPLICATIVE:
        beta = TruncatedSeries.variable(table, BETA, order)
        w = -u * (beta * u - 1).invert_unit().scale(-1)
    else:
        w = fgl.exp.substitute({"u": -fgl.log}, table, order)
    residual = fgl.law.substitute({"u": u, "v": w}, table, order)
    if not residual.is_zero():
        raise OrientError("formal inverse failed to verify; kernel bug")
    iu = table.index("u")
    g_coeffs = {}
    for exps, c in w.coeffs.items():
        e = list(exps)
        if e[iu] < 1:
            raise OrientError("inverse series not divisible by u; kernel bug")
        e[iu] -= 1
        g_coeffs[tuple(e)] = c
    g = TruncatedSeries(table, g_coeffs, order - 1)
    if g.constant_term() != -1:
        raise OrientError("formal inverse has wrong constant term; kernel bug")
    inv = InverseSeries(g=g, fgl=fgl, verified=True)
    fgl._inverse = inv
    return inv


def inverse_class_series(fgl: FormalGroupLaw) -> TruncatedSeries:
    """The series u*g(u): first Chern class of the dual of a line bundle."""
    return fgl.u() * formal_inverse(fgl).g


def dual_class(fgl: FormalGroupLaw, x: TruncatedSeries, multiply=None) -> TruncatedSeries:
    """c1 of the dual line bundle: evaluate u*g(u) at x."""
    return apply_univariate(fgl, inverse_class_series(fgl), x, multiply,
                            complete=fgl.kind == ADDITIVE)


def n_series(fgl: FormalGroupLaw, n: int) -> TruncatedSeries:
    """The n-fold group-law sum [n](u), reported modulo u^order."""
    full = _n_series_full(fgl, n)
    return full.with_profile(fgl.order - 1, full.neg_bound)


def n_series_complete(fgl: FormalGroupLaw, n: int) -> bool:
    """True when the reported [n](u) is the whole series, not a truncation."""
    if fgl.kind == ADDITIVE:
        return True
    if fgl.kind == MULTIPLICATIVE:
        return 0 <= n <= fgl.order - 1
    return False


def _n_series_full(fgl: FormalGroupLaw, n: int) -> TruncatedSeries:
    if n in fgl._n_cache:
        return fgl._n_cache[n]
    table, order = fgl.table, fgl.order
    if n == 0:
        result = TruncatedSeries.zero(table, order)
    elif n > 0:
        prev = _n_series_full(fgl, n - 1)
        result = fgl.law.substitute({"u": prev, "v": fgl.u()}, table, order)
    else:
        w = fgl.u() * formal_inverse(fgl).g
        result = _n_series_full(fgl, -n).substitute({"u": w}, table, order)
    fgl._n_cache[n] = result
    return result


def specialize_universal(x: TruncatedSeries, target: str) -> TruncatedSeries:
    """Image of a series over Q[m1, m2, ...] under the classifying map.

    The additive target sends every m_i to 0; the multiplicative target sends
    m_i to beta^i / (i+1), the logarithm coefficients of the multiplicative
    law.  Other variables are carried through unchanged.
    """
    if target not in (ADDITIVE, MULTIPLICATIVE):
        raise OrientError(f"cannot specialize to {target!r}")
    m_vars = []
    rest = []
    for v in x.table.variables:
        if v.name.startswith("m") and v.name[1:].isdigit():
            m_vars.append((v, int(v.name[1:])))
        else:
            rest.append(v)
    if target == MULTIPLICATIVE:
        if BETA in x.table:
            raise OrientError("series already carries beta; target table collides")
        new_vars = (Variable(BETA, -1),) + tuple(rest)
    else:
        new_vars = tuple(rest)
    table = VariableTable(new_vars)
    bindings = {}
    for v, i in m_vars:
        if v.codegree != -i:
            raise OrientError(f"{v.name} does not look like a logarithm coefficient")
        if target == ADDITIVE:
            bindings[v.name] = TruncatedSeries.zero(table, x.pos_bound, x.neg_bound)
        else:
            bindings[v.name] = TruncatedSeries.monomial(
                table, {BETA: i}, Q(1, i + 1), x.pos_bound, x.neg_bound)
    if not bindings:
        return x.convert(table)
    return x.substitute(bindings, table, x.pos_bound, x.neg_bound)
