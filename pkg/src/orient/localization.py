"""Fixed-point localization sums for virtual classes, with direct cross-checks.

A problem is a list of fixed components.  Each component carries a trivially
acted base model, the moving two-term normal data (all characters nonzero),
a fixed-part obstruction bundle and the restricted integrand.  The sum pushes

    integrand * e(obstruction) * e(N1) / e(N0)

to the point for every component and adds the resulting fractions over their
common symbolic denominator.  When a reference model is attached, the value
is compared with direct integration; for the universal theory the comparison
runs through both coefficient specializations.

The multiplicative-theory comparison carries a normalization factor beta^dim
for the dimension of the reference model, matching the degree in which the
fundamental class of the model lives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .equivariant import (
    Character,
    CharClassCache,
    LocalizedElement,
    TorusContext,
    char_c1,
    loc_sum,
)
from .errors import (
    CharacterError,
    DenominatorError,
    OrientError,
    TruncationInsufficientError,
)
from .fgl import (
    ADDITIVE,
    BETA,
    MULTIPLICATIVE,
    UNIVERSAL,
    FormalGroupLaw,
    make_fgl,
    specialize_universal,
)
from .series import TruncatedSeries
from .spaces import (
    BundleSpec,
    IntersectionRing,
    Point,
    ProjSpace,
    build_space,
    euler,
    integrate,
)


@dataclass(frozen=True)
class FixedComponentSpec:
    """One torus-fixed component of a localization problem.

    The integrand is the restriction of the global integrand to this
    component: a ring element, or a callable (ring, pos_bound, neg_bound)
    -> ring element so it can be rebuilt at any working truncation.
    """

    base: object
    moving0: BundleSpec
    moving1: BundleSpec = field(default_factory=BundleSpec.empty)
    obstruction: BundleSpec = field(default_factory=BundleSpec.empty)
    integrand: object = 1

    @property
    def virtual_dim(self) -> int:
        return (self.base.dim + self.moving0.rank - self.moving1.rank
                - self.obstruction.rank)


@dataclass(frozen=True)
class DirectModel:
    """A non-equivariant reference: a model space and an integrand on it."""

    model: object
    integrand: object  # callable(ring) -> ring element


@dataclass(frozen=True)
class VirtualLocalizationProblem:
    theory: FormalGroupLaw
    ctx: TorusContext
    components: tuple[FixedComponentSpec, ...]
    direct: DirectModel | None = None

    def __post_init__(self):
        if not self.components:
            raise OrientError("a localization problem needs at least one component")


def standard_pn_fixed_data(n: int, power: int, theory: FormalGroupLaw,
                           ctx: TorusContext) -> VirtualLocalizationProblem:
    """The n+1 coordinate fixed points of projective n-space.

    Tangent characters at the i-th point are t_j - t_i; the hyperplane class
    restricts to the character class of -t_i.  The integrand is that
    restriction raised to ``power``.
    """
    if ctx.rank != n + 1:
        raise OrientError("torus rank must be n+1 for the standard fixed data")
    components = []
    for i in range(n + 1):
        chars = []
        for j in range(n + 1):
            if j != i:
                w = [0] * (n + 1)
                w[j] += 1
                w[i] -= 1
                chars.append(tuple(w))
        minus_ti = [0] * (n + 1)
        minus_ti[i] = -1
        restriction = tuple(minus_ti)

        def integrand(ring, pos, neg, _r=restriction, _p=power):
            c = char_c1(Character(_r), ctx, ring.theory, ring.table, pos, neg)
            return ring.pow(c, _p)

        components.append(FixedComponentSpec(
            base=Point(),
            moving0=BundleSpec.of_characters(chars),
            integrand=integrand,
        ))
    direct = DirectModel(ProjSpace(n),
                         lambda ring: ring.pow(ring.line_class("h"), power))
    return VirtualLocalizationProblem(theory, ctx, tuple(components), direct)


def virtual_class_smooth(ring: IntersectionRing, obstruction: BundleSpec
                         ) -> TruncatedSeries:
    """Virtual class of a smooth component: the Euler class of its obstruction
    bundle (the fundamental class when the bundle has rank zero)."""
    if obstruction.rank == 0:
        return ring.one()
    return euler(obstruction, ring)


def _resolve_integrand(spec, ring, pos, neg):
    integrand = spec.integrand
    if callable(integrand):
        integrand = integrand(ring, pos, neg)
    if not isinstance(integrand, TruncatedSeries):
        integrand = ring.constant(integrand)
    return ring.reduce(integrand.convert(ring.table, pos, neg))


def _push_to_point(num: TruncatedSeries, ring: IntersectionRing,
                   point_table) -> TruncatedSeries:
    if not ring.levels:
        return num.convert(point_table)
    return integrate(num, ring).convert(point_table)


def localize(problem: VirtualLocalizationProblem,
             pos_bound: int | None = None,
             neg_bound: int | None = None,
             cache: CharClassCache | None = None) -> LocalizedElement:
    """Evaluate the fixed-point sum as one localized element.

    Raises when the truncation cannot certify the combined degrees; a driver
    may then retry at a finer truncation.
    """
    theory, ctx = problem.theory, problem.ctx
    pos = pos_bound if pos_bound is not None else ctx.truncation - 1
    if cache is None:
        cache = CharClassCache(ctx, theory)
    point_table = ctx.point_table(theory)

    vdims = {comp.virtual_dim for comp in problem.components}
    if len(vdims) != 1:
        raise OrientError("components disagree on the virtual dimension")

    neg = neg_bound
    if neg is None and theory.kind != ADDITIVE:
        neg = _shape_window(problem, pos)

    rings = []
    integrands = []
    for comp in problem.components:
        for spec in (comp.moving0, comp.moving1):
            for s in spec.summands:
                if Character(s.char).is_zero():
                    raise CharacterError("moving normal data has a zero character")
        ring = build_space(theory, comp.base, ctx)
        rings.append(ring)
        integrands.append(_resolve_integrand(comp, ring, pos, neg))

    if neg_bound is None and theory.kind != ADDITIVE:
        refined = _negative_window(problem, integrands, pos)
        if refined > neg:
            integrands = [_resolve_integrand(comp, ring, pos, refined)
                          for comp, ring in zip(problem.components, rings)]
        else:
            integrands = [f.with_profile(pos, refined) for f in integrands]
        neg = refined

    contributions = []
    for comp, ring, integrand in zip(problem.components, rings, integrands):
        numer = ring.mul(integrand, virtual_class_smooth(ring, comp.obstruction)
                         .with_profile(pos, neg))
        if comp.moving1.rank:
            numer = ring.mul(numer, euler(comp.moving1, ring).with_profile(pos, neg))
        inverse = invert_moving(comp.moving0, ring, ctx, pos, neg, cache)
        numer = ring.mul(numer, inverse.num)
        codeg = integrand.max_codegree()
        codeg = 0 if codeg is None else codeg
        codeg += comp.obstruction.rank + comp.moving1.rank + inverse.num_codeg
        if theory.kind == ADDITIVE:
            codeg -= comp.base.dim
        pushed = _push_to_point(numer, ring, point_table)
        contributions.append(LocalizedElement(ctx, theory, pushed, inverse.den,
                                              codeg))
    return loc_sum(contributions, cache)


def invert_moving(bundle: BundleSpec, ring: IntersectionRing, ctx: TorusContext,
                  pos_bound, neg_bound, cache) -> LocalizedElement:
    from .equivariant import invert_equivariant_euler
    return invert_equivariant_euler(bundle, ring, ctx, pos_bound, neg_bound, cache)


def _shape_window(problem, pos: int) -> int:
    """Provisional coefficient-weight bound from ranks alone (integrands of
    nonnegative codegree)."""
    total_rank0 = sum(c.moving0.rank for c in problem.components)
    c_lower = min(c.obstruction.rank + c.moving1.rank - c.moving0.rank
                  for c in problem.components) + total_rank0
    max_dim = max(c.base.dim for c in problem.components)
    return max(pos - c_lower, 0) + max_dim + 1


def _negative_window(problem, integrands, pos: int) -> int:
    """Bound on coefficient-variable weight needed through the final sum."""
    total_rank0 = sum(c.moving0.rank for c in problem.components)
    c_lower = None
    max_dim = 0
    for comp, f in zip(problem.components, integrands):
        m = f.min_codegree()
        m = 0 if m is None else min(m, 0)
        c = m + comp.obstruction.rank + comp.moving1.rank - comp.moving0.rank
        c_lower = c if c_lower is None else min(c_lower, c)
        max_dim = max(max_dim, comp.base.dim)
    c_lower = (c_lower or 0) + total_rank0
    return max(pos - c_lower, 0) + max_dim + 1


def specialize_element(element: LocalizedElement, target: str) -> LocalizedElement:
    """Push a universal-theory localized element along a coefficient
    specialization; the symbolic denominators are carried unchanged."""
    num = specialize_universal(element.num, target)
    theory = make_fgl(target, element.theory.order)
    return LocalizedElement(element.ctx, theory, num, element.den,
                            element.num_codeg)


def direct_value(direct: DirectModel, theory: FormalGroupLaw) -> TruncatedSeries:
    """Direct integration of the reference integrand over the reference model."""
    ring = build_space(theory, direct.model)
    integrand = direct.integrand
    if callable(integrand):
        integrand = integrand(ring)
    if not isinstance(integrand, TruncatedSeries):
        integrand = ring.constant(integrand)
    return integrate(ring.reduce(integrand), ring)


def _expected_scalar(value: TruncatedSeries, element: LocalizedElement,
                     model_dim: int) -> TruncatedSeries:
    table = element.num.table
    expected = value.convert(table, element.num.pos_bound, element.num.neg_bound)
    if element.theory.kind == MULTIPLICATIVE and model_dim:
        twist = TruncatedSeries.monomial(table, {BETA: model_dim}, 1,
                                         element.num.pos_bound,
                                         element.num.neg_bound)
        expected = expected * twist
    return expected


def _verdict(element: LocalizedElement, direct: DirectModel,
             cache=None) -> dict:
    value = direct_value(direct, element.theory)
    expected = _expected_scalar(value, element, direct.model.dim)
    strict = element.assert_constant(expected, cache)
    report = {
        "direct": value,
        "expected": expected,
        "strict": strict,
    }
    if strict:
        report["value"] = expected
        report["pass"] = True
        return report
    try:
        got = element.nonequivariant_value(cache)
    except DenominatorError as err:
        report["value"] = None
        report["pass"] = False
        report["reason"] = str(err)
        return report
    report["value"] = got
    report["pass"] = bool(got == expected)
    return report


def compare_with_direct(problem: VirtualLocalizationProblem,
                        pos_bound: int | None = None,
                        neg_bound: int | None = None,
                        cache: CharClassCache | None = None) -> dict:
    """Localize, then check the value against direct integration.

    For the universal theory both coefficient specializations must pass
    against the direct values of the corresponding built-in theories.
    """
    if problem.direct is None:
        raise OrientError("no direct-model reference attached to the problem")
    if cache is None:
        cache = CharClassCache(problem.ctx, problem.theory)
    element = localize(problem, pos_bound, neg_bound, cache)
    report = {"localized": element, "theory": problem.theory.kind}
    if problem.theory.kind == UNIVERSAL:
        parts = {}
        verdict = True
        for target in (ADDITIVE, MULTIPLICATIVE):
            special = specialize_element(element, target)
            parts[target] = _verdict(special, problem.direct)
            verdict = verdict and parts[target]["pass"]
        report["parts"] = parts
        report["verdict"] = verdict
    else:
        part = _verdict(element, problem.direct, cache)
        report.update(part)
        report["verdict"] = part["pass"]
    return report


def run_with_auto_raise(build: Callable[[FormalGroupLaw, TorusContext], object],
                        kind: str, rank: int, cap: int,
                        order: int | None = None, max_raise: int = 8):
    """Run a truncation-dependent computation, retrying at finer truncations.

    ``build`` receives a theory and a torus context; when it raises a
    truncation error the named knob is enlarged, up to ``max_raise`` retries.
    Returns (result, theory, ctx).
    """
    if order is None:
        order = max(min(cap, 6), 4)
    attempts = 0
    while True:
        theory = make_fgl(kind, order)
        ctx = TorusContext(rank, cap)
        try:
            return build(theory, ctx), theory, ctx
        except TruncationInsufficientError as err:
            attempts += 1
            if attempts > max_raise:
                raise
            if err.knob == "cap":
                cap = max(cap + 2, err.needed or 0)
            else:
                order = max(order + 2, err.needed or 0)
