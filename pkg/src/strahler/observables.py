"""Observables: rational expressions over order-relative branch counts.

An observable is parsed from text like ``"S2/S1"`` or ``"(S1-1)*S1"``.
Variables are order-relative: when an expectation is taken at base order r,
``Sj`` denotes the branch count at order r+j-1, so one expression serves
every base order. Evaluation is exact rational arithmetic with the
convention 0/0 = 0 (a window above the root order contributes nothing);
a nonzero numerator over zero is an error.

Grammar (ASCII, whitespace insignificant)::

    expr   := term  (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := base  ("^" uint)?
    base   := "S" uint | uint | "(" expr ")"

Exponents must be literal non-negative integers; rational constants are
written as quotients (e.g. ``1/2``). Any divisor that is identically the
zero polynomial is rejected at parse time.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence, Tuple

# AST nodes are tuples: ("var", j), ("lit", int), ("+"|"-"|"*"|"/", a, b),
# ("^", base, uint). Immutable, hashable, cheap to compare.
Node = tuple


class ObservableSyntaxError(ValueError):
    """Unparseable observable text; ``position`` is the first bad byte offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class NonzeroOverZeroError(ZeroDivisionError):
    """A nonzero quantity was divided by zero during evaluation."""


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take_uint(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise ObservableSyntaxError("expected an unsigned integer", start)
        return int(self.text[start : self.pos])


def _parse_expr(s: _Scanner) -> Node:
    node = _parse_term(s)
    while s.peek() in ("+", "-"):
        op = s.text[s.pos]
        s.pos += 1
        node = (op, node, _parse_term(s))
    return node


def _parse_term(s: _Scanner) -> Node:
    node = _parse_factor(s)
    while s.peek() in ("*", "/"):
        op = s.text[s.pos]
        s.pos += 1
        node = (op, node, _parse_factor(s))
    return node


def _parse_factor(s: _Scanner) -> Node:
    node = _parse_base(s)
    if s.peek() == "^":
        s.pos += 1
        node = ("^", node, s.take_uint())
    return node


def _parse_base(s: _Scanner) -> Node:
    c = s.peek()
    if c == "S":
        s.pos += 1
        j = s.take_uint()
        if j < 1:
            raise ObservableSyntaxError("variable index must be >= 1", s.pos - 1)
        return ("var", j)
    if c.isdigit():
        return ("lit", s.take_uint())
    if c == "(":
        s.pos += 1
        node = _parse_expr(s)
        if s.peek() != ")":
            raise ObservableSyntaxError("expected ')'", s.pos)
        s.pos += 1
        return node
    if c == "":
        raise ObservableSyntaxError("unexpected end of expression", s.pos)
    raise ObservableSyntaxError(f"unexpected character {c!r}", s.pos)


def _arity(node: Node) -> int:
    op = node[0]
    if op == "var":
        return node[1]
    if op == "lit":
        return 0
    if op == "^":
        return _arity(node[1])
    return max(_arity(node[1]), _arity(node[2]))


def _print(node: Node) -> str:
    op = node[0]
    if op == "var":
        return f"S{node[1]}"
    if op == "lit":
        return str(node[1])
    if op == "^":
        base = _print(node[1])
        if node[1][0] not in ("var", "lit"):
            base = f"({base})"
        return f"{base}^{node[2]}"
    return f"({_print(node[1])}{op}{_print(node[2])})"


def _eval(node: Node, values: Sequence[int]) -> Fraction:
    op = node[0]
    if op == "var":
        return Fraction(values[node[1] - 1])
    if op == "lit":
        return Fraction(node[1])
    if op == "^":
        return _eval(node[1], values) ** node[2]
    a = _eval(node[1], values)
    b = _eval(node[2], values)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0:
        if a == 0:
            return Fraction(0)
        raise NonzeroOverZeroError(f"{a} / 0 in observable evaluation")
    return a / b


def _shift(node: Node, first_value: int) -> Node:
    """Substitute S1 := first_value and renumber S(j) -> S(j-1)."""
    op = node[0]
    if op == "var":
        return ("lit", first_value) if node[1] == 1 else ("var", node[1] - 1)
    if op == "lit":
        return node
    if op == "^":
        return ("^", _shift(node[1], first_value), node[2])
    return (op, _shift(node[1], first_value), _shift(node[2], first_value))


# --- rational normal form ----------------------------------------------------
#
# A multivariate polynomial is a dict {exponent tuple: Fraction}; a rational
# form is a (num, den) pair of those. Used to reject zero divisors at parse
# time and to feed the asymptotic pipeline for single-variable observables.


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for ea, ca in p.items():
        for eb, cb in q.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            c = out.get(e, 0) + ca * cb
            if c:
                out[e] = c
            elif e in out:
                del out[e]
    return out


def _poly_add(p: dict, q: dict, sign: int = 1) -> dict:
    out = dict(p)
    for e, c in q.items():
        c2 = out.get(e, 0) + sign * c
        if c2:
            out[e] = c2
        elif e in out:
            del out[e]
    return out


def _rational(node: Node, arity: int) -> Tuple[dict, dict]:
    zero_exp = (0,) * arity
    one = {zero_exp: Fraction(1)}
    op = node[0]
    if op == "var":
        e = tuple(1 if i == node[1] - 1 else 0 for i in range(arity))
        return {e: Fraction(1)}, one
    if op == "lit":
        return ({zero_exp: Fraction(node[1])} if node[1] else {}), one
    if op == "^":
        bn, bd = _rational(node[1], arity)
        rn, rd = one, one
        for _ in range(node[2]):
            rn = _poly_mul(rn, bn)
            rd = _poly_mul(rd, bd)
        return rn, rd
    an, ad = _rational(node[1], arity)
    bn, bd = _rational(node[2], arity)
    if op == "+":
        return _poly_add(_poly_mul(an, bd), _poly_mul(bn, ad)), _poly_mul(ad, bd)
    if op == "-":
        return _poly_add(_poly_mul(an, bd), _poly_mul(bn, ad), -1), _poly_mul(ad, bd)
    if op == "*":
        return _poly_mul(an, bn), _poly_mul(ad, bd)
    return _poly_mul(an, bd), _poly_mul(ad, bn)


class Observable:
    """A parsed observable: evaluable exactly, rebindable, printable."""

    __slots__ = ("ast", "arity", "_text")

    def __init__(self, ast: Node):
        self.ast = ast
        self.arity = max(1, _arity(ast))
        self._text: str | None = None

    @property
    def text(self) -> str:
        """Canonical form; reparsing it yields an equal AST."""
        if self._text is None:
            self._text = _print(self.ast)
        return self._text

    def __str__(self) -> str:
        return self.text

    def __repr__(self) -> str:
        return f"Observable({self.text!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Observable) and self.ast == other.ast

    def __hash__(self) -> int:
        return hash(self.ast)

    def evaluate(self, values: Sequence[int]) -> Fraction:
        """Exact value at the given branch-count window (0/0 = 0)."""
        if len(values) < self.arity:
            raise ValueError(
                f"observable needs {self.arity} values, got {len(values)}"
            )
        return _eval(self.ast, values)

    def bind_first(self, value: int) -> "Observable":
        """Fix the first variable to ``value`` and renumber the rest down."""
        if self.arity < 2:
            raise ValueError("bind_first requires arity >= 2")
        return Observable(_shift(self.ast, value))

    def rational_coeffs(self) -> Tuple[list, list]:
        """Numerator/denominator coefficient lists (ascending powers of S1).

        Only defined for single-variable observables; used for the Laurent
        expansion around infinity.
        """
        if self.arity != 1:
            raise ValueError("rational form requires a single-variable observable")
        num, den = _rational(self.ast, 1)

        def as_list(p: dict) -> list:
            if not p:
                return [Fraction(0)]
            deg = max(e[0] for e in p)
            return [p.get((i,), Fraction(0)) for i in range(deg + 1)]

        return as_list(num), as_list(den)


def _check_divisors(node: Node, arity: int):
    op = node[0]
    if op in ("var", "lit"):
        return
    if op == "^":
        _check_divisors(node[1], arity)
        return
    _check_divisors(node[1], arity)
    _check_divisors(node[2], arity)
    if op == "/":
        num, _den = _rational(node[2], arity)
        if not num:
            raise ObservableSyntaxError("division by the zero polynomial", 0)


def parse(text: str) -> Observable:
    """Parse observable text, rejecting malformed input with a byte offset."""
    for i, ch in enumerate(text):
        if ord(ch) > 127:
            raise ObservableSyntaxError(f"non-ASCII character {ch!r}", i)
    s = _Scanner(text)
    ast = _parse_expr(s)
    s.skip_ws()
    if s.pos != len(text):
        raise ObservableSyntaxError("trailing characters after expression", s.pos)
    obs = Observable(ast)
    _check_divisors(ast, obs.arity)
    return obs
