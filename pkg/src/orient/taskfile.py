"""Task-file parsing and the integrand expression grammar.

Task files are JSON documents.  Common fields:

    theory      "chow" | "ktheory" | "universal"
    task        "integrate" | "localize" | "fgl-inverse" | "n-series"
                | "check-axioms"
    truncation  {"order": int, "cap": int, "max_raise": int}   (all optional)

Integrand expressions form a small arithmetic grammar over named classes:
integers, beta, +, -, *, integer powers with ^, parentheses, and the atoms
c1(name), e(bundle), twist(d, name), kline(d, name), charc1(a1, ..., ar),
kchar(a1, ..., ar).  The last two are available inside localize components,
where torus parameters exist; kchar builds the multiplicative-theory class
of the one-dimensional representation with the given character, and kline
the class of the d-th tensor power of a named line bundle.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

from .equivariant import Character, TorusContext, char_c1
from .errors import OrientError, TaskError
from .fgl import ADDITIVE, BETA, MULTIPLICATIVE, UNIVERSAL
from .series import TruncatedSeries
from .spaces import (
    BundleSpec,
    IntersectionRing,
    Point,
    ProjBundle,
    ProjSpace,
    Product,
    Summand,
    euler,
)

THEORY_NAMES = {"chow": ADDITIVE, "ktheory": MULTIPLICATIVE, "universal": UNIVERSAL}

_TOKEN = re.compile(r"\s*(\d+|[A-Za-z_][A-Za-z_0-9]*|[()+\-*^,])")


def tokenize(text: str) -> list[str]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise TaskError(f"bad character in expression: {text[pos:]!r}")
            break
        out.append(m.group(1))
        pos = m.end()
    return out


@dataclass
class ExprEnv:
    ring: IntersectionRing
    ctx: TorusContext | None = None
    bundles: dict | None = None
    pos_bound: int | None = None
    neg_bound: int | None = None

    def constant(self, value):
        return self.ring.constant(value, self.pos_bound, self.neg_bound)


class _Parser:
    def __init__(self, tokens: list[str], env: ExprEnv):
        self.tokens = tokens
        self.i = 0
        self.env = env

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None:
            raise TaskError("unexpected end of expression")
        if expected is not None and tok != expected:
            raise TaskError(f"expected {expected!r}, found {tok!r}")
        self.i += 1
        return tok

    def parse(self):
        value = self.expr()
        if self.peek() is not None:
            raise TaskError(f"trailing tokens in expression: {self.tokens[self.i:]}")
        return value

    def expr(self):
        value = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek() == "*":
            self.take()
            value = self.env.ring.mul(value, self.unary())
        return value

    def unary(self):
        if self.peek() == "-":
            self.take()
            return -self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            sign = 1
            if self.peek() == "-":
                self.take()
                sign = -1
            tok = self.take()
            if not tok.isdigit():
                raise TaskError(f"exponent must be an integer, found {tok!r}")
            n = sign * int(tok)
            if n >= 0:
                return self.env.ring.pow(base, n)
            return base ** n
        return base

    def int_arg(self):
        sign = 1
        if self.peek() == "-":
            self.take()
            sign = -1
        tok = self.take()
        if not tok.isdigit():
            raise TaskError(f"expected an integer, found {tok!r}")
        return sign * int(tok)

    def int_vector(self):
        out = [self.int_arg()]
        while self.peek() == ",":
            self.take()
            out.append(self.int_arg())
        return tuple(out)

    def atom(self):
        tok = self.take()
        env = self.env
        if tok.isdigit():
            return env.constant(int(tok))
        if tok == "(":
            value = self.expr()
            self.take(")")
            return value
        if tok == BETA:
            if BETA not in env.ring.table:
                raise TaskError("beta exists only in the ktheory theory")
            return TruncatedSeries.variable(env.ring.table, BETA,
                                            env.pos_bound, env.neg_bound)
        if tok == "c1":
            self.take("(")
            name = self.take()
            self.take(")")
            return env.ring.line_class(name).with_profile(env.pos_bound,
                                                          env.neg_bound)
        if tok == "e":
            self.take("(")
            name = self.take()
            self.take(")")
            spec = (env.bundles or {}).get(name)
            if spec is None:
                raise TaskError(f"unknown bundle {name!r}")
            return euler(spec, env.ring).with_profile(env.pos_bound, env.neg_bound)
        if tok == "twist":
            self.take("(")
            d = self.int_arg()
            self.take(",")
            name = self.take()
            self.take(")")
            line = env.ring.line_class(name).with_profile(env.pos_bound,
                                                          env.neg_bound)
            return env.ring.twist(line, d)
        if tok == "kline":
            self.take("(")
            d = self.int_arg()
            self.take(",")
            name = self.take()
            self.take(")")
            from .spaces import line_bundle_class
            line = env.ring.line_class(name).with_profile(env.pos_bound,
                                                          env.neg_bound)
            return line_bundle_class(env.ring, env.ring.twist(line, d))
        if tok == "charc1":
            self.take("(")
            weights = self.int_vector()
            self.take(")")
            return self._char_class(weights)
        if tok == "kchar":
            self.take("(")
            weights = self.int_vector()
            self.take(")")
            c = self._char_class(weights)
            if BETA not in env.ring.table:
                raise TaskError("kchar exists only in the ktheory theory")
            beta = TruncatedSeries.variable(env.ring.table, BETA,
                                            env.pos_bound, env.neg_bound)
            one = env.ring.one(env.pos_bound, env.neg_bound)
            return env.ring.invert(one - env.ring.mul(beta, c))
        raise TaskError(f"unknown token {tok!r} in expression")

    def _char_class(self, weights):
        env = self.env
        if env.ctx is None:
            raise TaskError("character classes need a torus context")
        if len(weights) != env.ctx.rank:
            raise TaskError("character length does not match the torus rank")
        return char_c1(Character(weights), env.ctx, env.ring.theory,
                       env.ring.table, env.pos_bound, env.neg_bound)


def evaluate_expression(text: str, env: ExprEnv) -> TruncatedSeries:
    tokens = tokenize(text)
    if not tokens:
        return env.ring.zero(env.pos_bound, env.neg_bound)
    return _Parser(tokens, env).parse()


def parse_space(node) -> object:
    if not isinstance(node, dict) or len(node) != 1:
        raise TaskError(f"bad space node: {node!r}")
    (kind, payload), = node.items()
    if kind == "point":
        return Point()
    if kind == "proj":
        if not isinstance(payload, int) or payload < 0:
            raise TaskError("proj needs a nonnegative integer")
        return ProjSpace(payload)
    if kind == "product":
        if not isinstance(payload, list) or len(payload) != 2:
            raise TaskError("product needs exactly two factors")
        return Product(parse_space(payload[0]), parse_space(payload[1]))
    if kind == "bundle":
        base = parse_space(payload["base"])
        summands = [parse_summand(s) for s in payload["summands"]]
        return ProjBundle(base, BundleSpec(summands))
    raise TaskError(f"unknown space kind {kind!r}")


def parse_summand(node) -> Summand:
    if not isinstance(node, dict):
        raise TaskError(f"bad bundle summand: {node!r}")
    root = node.get("root", 0)
    char = tuple(node.get("char", ()))
    if root in (0, "0", None, ""):
        return Summand(None, char)
    if not isinstance(root, str):
        raise TaskError("bundle roots are expressions or 0")

    def resolve(ring, _text=root):
        return evaluate_expression(_text, ExprEnv(ring))

    return Summand(resolve, char)


def parse_bundles(node) -> dict[str, BundleSpec]:
    out = {}
    for name, summands in (node or {}).items():
        out[name] = BundleSpec([parse_summand(s) for s in summands])
    return out


def load_task(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as err:
        raise TaskError(f"cannot read task file: {err}") from err
    if not isinstance(data, dict):
        raise TaskError("task file must hold a JSON object")
    validate_task(data)
    return data


VALID_TASKS = ("integrate", "localize", "fgl-inverse", "n-series", "check-axioms")


def validate_task(data: dict) -> None:
    theory = data.get("theory")
    if theory not in THEORY_NAMES:
        raise TaskError(f"theory must be one of {sorted(THEORY_NAMES)}")
    task = data.get("task")
    if task not in VALID_TASKS:
        raise TaskError(f"task must be one of {VALID_TASKS}")
    trunc = data.get("truncation", {})
    if not isinstance(trunc, dict):
        raise TaskError("truncation must be an object")
    for key in trunc:
        if key not in ("order", "cap", "max_raise"):
            raise TaskError(f"unknown truncation knob {key!r}")
        if not isinstance(trunc[key], int) or trunc[key] < 0:
            raise TaskError(f"truncation knob {key!r} must be a nonnegative integer")
    if task == "integrate":
        if "space" not in data or "integrand" not in data:
            raise TaskError("integrate needs a space and an integrand")
    if task == "localize":
        if "standard_pn" not in data and "components" not in data:
            raise TaskError("localize needs standard_pn or components")
    if task == "n-series" and not isinstance(data.get("n"), int):
        raise TaskError("n-series needs an integer n")


def scalar_to_string(value: Fraction) -> str:
    return str(Fraction(value))


def series_payload(series: TruncatedSeries) -> list:
    """Deterministic machine rendering: sorted [monomial, coefficient] pairs."""
    out = []
    for exps, coeff in series.sorted_items():
        factors = []
        for e, v in zip(exps, series.table.variables):
            if e == 1:
                factors.append(v.name)
            elif e:
                factors.append(f"{v.name}^{e}")
        out.append(["*".join(factors) if factors else "1", scalar_to_string(coeff)])
    return out
