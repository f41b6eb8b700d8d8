"""Laurent polynomials over named variables and a small safe expression parser.

Monomials are sorted tuples of ``(name, exponent)`` pairs with nonzero
exponents; a polynomial is a dict from monomial to Fraction.  The parser
accepts ``+ - * /``, ``^`` or ``**`` with integer exponents, parentheses,
integers and variable names.
"""
from __future__ import annotations

import ast
from fractions import Fraction
from typing import Mapping

from .errors import LgError

ONE = ()


def mono(spec: Mapping[str, int]) -> tuple:
    return tuple(sorted((v, int(k)) for v, k in spec.items() if int(k)))


def mono_mul(a: tuple, b: tuple) -> tuple:
    d = dict(a)
    for v, k in b:
        d[v] = d.get(v, 0) + k
    return mono(d)


def mono_pow(a: tuple, k: int) -> tuple:
    return mono({v: e * k for v, e in a})


def mono_str(m: tuple) -> str:
    if not m:
        return "1"
    return "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)


def poly_add(a: dict, b: dict, sign=1) -> dict:
    out = dict(a)
    for m, c in b.items():
        v = out.get(m, 0) + sign * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = mono_mul(ma, mb)
            v = out.get(m, 0) + ca * cb
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def poly_pow(a: dict, k: int) -> dict:
    if k < 0:
        if len(a) != 1:
            raise LgError("NOT_FACTORED", "negative power of a polynomial with several terms")
        (m, c), = a.items()
        return {mono_pow(m, k): Fraction(c) ** k}
    out = {ONE: Fraction(1)}
    for _ in range(k):
        out = poly_mul(out, a)
    return out


def poly_str(p: dict) -> str:
    if not p:
        return "0"
    parts = []
    for m, c in sorted(p.items()):
        c = Fraction(c)
        ms = mono_str(m)
        if ms == "1":
            body = str(abs(c))
        elif abs(c) == 1:
            body = ms
        else:
            body = f"{abs(c)}*{ms}"
        parts.append(("-" if c < 0 else "+", body))
    s = " ".join(f"{sg} {b}" for sg, b in parts)
    return s[2:] if s.startswith("+ ") else "-" + s[2:]


def substitute_poly(p: dict, var: str, image: dict) -> dict:
    """Replace ``var`` by the polynomial ``image`` (negative powers need a monomial image)."""
    out: dict = {}
    for m, c in p.items():
        d = dict(m)
        k = d.pop(var, 0)
        term = {mono(d): Fraction(c)}
        if k:
            term = poly_mul(term, poly_pow(image, k))
        out = poly_add(out, term)
    return out


# ---------------------------------------------------------------------------
# parsing


def _prepare(text: str) -> ast.AST:
    try:
        return ast.parse(text.replace("^", "**"), mode="eval").body
    except SyntaxError as exc:
        raise LgError("CONFIG_PARSE", f"cannot parse {text!r}: {exc.msg}") from None


def _int_exponent(node) -> int:
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return node.value
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _int_exponent(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    raise LgError("CONFIG_PARSE", "exponents must be integer literals")


def parse_poly(text: str) -> dict:
    """Parse into a Laurent polynomial (division only by monomials)."""
    return _poly(_prepare(text))


def _poly(node) -> dict:
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return {ONE: Fraction(node.value)} if node.value else {}
    if isinstance(node, ast.Name):
        return {((node.id, 1),): Fraction(1)}
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        p = _poly(node.operand)
        return {m: -c for m, c in p.items()} if isinstance(node.op, ast.USub) else p
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Add):
            return poly_add(_poly(node.left), _poly(node.right))
        if isinstance(node.op, ast.Sub):
            return poly_add(_poly(node.left), _poly(node.right), -1)
        if isinstance(node.op, ast.Mult):
            return poly_mul(_poly(node.left), _poly(node.right))
        if isinstance(node.op, ast.Div):
            return poly_mul(_poly(node.left), poly_pow(_poly(node.right), -1))
        if isinstance(node.op, ast.Pow):
            return poly_pow(_poly(node.left), _int_exponent(node.right))
    raise LgError("CONFIG_PARSE", f"unsupported syntax: {ast.dump(node)[:60]}")


def parse_factored(text: str) -> tuple:
    """Parse a product of powers of polynomials.

    Returns ``(constant, [(poly, power), ...])``; sums are kept as single
    factors so that their factored shape survives.
    """
    return _factored(_prepare(text))


def _factored(node) -> tuple:
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Mult, ast.Div)):
        cl, fl = _factored(node.left)
        cr, fr = _factored(node.right)
        if isinstance(node.op, ast.Mult):
            return cl * cr, fl + fr
        if cr == 0:
            raise LgError("CONFIG_PARSE", "division by zero")
        return cl / cr, fl + [(p, -k) for p, k in fr]
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
        k = _int_exponent(node.right)
        c, f = _factored(node.left)
        return c ** k, [(p, e * k) for p, e in f]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        c, f = _factored(node.operand)
        return -c, f
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return Fraction(node.value), []
    p = _poly(node)
    if not p:
        raise LgError("CONFIG_PARSE", "zero factor")
    if len(p) == 1:
        (m, c), = p.items()
        return Fraction(c), ([({m: Fraction(1)}, 1)] if m else [])
    return Fraction(1), [(p, 1)]
