"""Exact intersection-theory calculator parameterized by a formal group law.

The package computes in oriented intersection theories (the additive,
multiplicative and universal rational ones) on model spaces built from
projective-bundle towers, and evaluates equivariant fixed-point localization
sums with consistency checks against direct integration.  All arithmetic is
exact rational; nothing is ever rounded.
"""

from .errors import (
    CharacterError,
    DenominatorError,
    MalformedTowerError,
    NotInvertibleError,
    OrientError,
    ProfileError,
    SubstitutionError,
    TableMismatchError,
    TaskError,
    TruncationInsufficientError,
    UnsupportedIntegrationError,
)
from .series import (
    Q,
    TruncatedSeries,
    Variable,
    VariableTable,
    coefficient,
    invert_unit_series,
    poly_mul,
    series_substitute,
)
from .fgl import (
    ADDITIVE,
    BETA,
    MULTIPLICATIVE,
    UNIVERSAL,
    FormalGroupLaw,
    InverseSeries,
    dual_class,
    fgl_add,
    formal_inverse,
    make_fgl,
    n_series,
    specialize_universal,
)
from .spaces import (
    BundleSpec,
    IntersectionRing,
    Point,
    ProjBundle,
    ProjSpace,
    Product,
    Summand,
    build_space,
    c1_tensor,
    chern,
    euler,
    integrate,
    ktheory_basis_decompose,
    ktheory_basis_recompose,
    line_bundle_class,
    minus_divisor_pushed,
    nilpotency_index,
)
from .equivariant import (
    Character,
    CharClassCache,
    LocalizedElement,
    TorusContext,
    assert_constant,
    basis_character,
    char_c1,
    invert_equivariant_euler,
    loc_combine,
    loc_sum,
)
from .localization import (
    DirectModel,
    FixedComponentSpec,
    VirtualLocalizationProblem,
    compare_with_direct,
    localize,
    run_with_auto_raise,
    specialize_element,
    standard_pn_fixed_data,
    virtual_class_smooth,
)
