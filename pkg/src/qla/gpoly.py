"""Exact polynomials over a Z2-graded coordinate chart.

A :class:`GradedPoly` is a finite sum of monomials ``c * x^e * theta_{i1} ... theta_{ik}``
with rational ``c``, non-negative exponents on the even coordinates and a strictly
increasing list of odd coordinates. The odd part is kept in chart declaration order;
any reordering sign is folded into the coefficient, so two polynomials are equal
exactly when their term maps agree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

EVEN = 0
ODD = 1

_PARITY_NAMES = {"even": EVEN, "odd": ODD, 0: EVEN, 1: ODD}

Scalar = Union[int, Fraction]


def parse_parity(value) -> int:
    try:
        return _PARITY_NAMES[value]
    except (KeyError, TypeError):
        raise ValueError(f"parity must be 'even' or 'odd', got {value!r}") from None


def parity_name(p: int) -> str:
    return "odd" if p % 2 else "even"


@dataclass(frozen=True)
class Coord:
    name: str
    parity: int = EVEN
    weight: int = 0

    def __post_init__(self):
        object.__setattr__(self, "parity", parse_parity(self.parity))
        if not isinstance(self.weight, int) or self.weight < 0:
            raise ValueError(f"weight of {self.name!r} must be a non-negative integer")


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class SuperChart:
    """An ordered list of coordinates, each with a Grassmann parity and a weight.

    The declaration order fixes the canonical ordering of odd monomials.
    """

    __slots__ = ("coords", "_index", "_even", "_odd", "_hash")

    def __init__(self, coords: Iterable):
        cs = []
        for c in coords:
            if not isinstance(c, Coord):
                c = Coord(*c)
            if not _IDENT.match(c.name):
                raise ValueError(f"invalid coordinate name {c.name!r}")
            cs.append(c)
        self.coords: tuple[Coord, ...] = tuple(cs)
        self._index = {}
        for i, c in enumerate(self.coords):
            if c.name in self._index:
                raise ValueError(f"duplicate coordinate name {c.name!r}")
            self._index[c.name] = i
        self._even = tuple(c.name for c in self.coords if c.parity == EVEN)
        self._odd = tuple(c.name for c in self.coords if c.parity == ODD)
        self._hash = hash(self.coords)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.coords)

    @property
    def even_names(self) -> tuple[str, ...]:
        return self._even

    @property
    def odd_names(self) -> tuple[str, ...]:
        return self._odd

    def __contains__(self, name) -> bool:
        return name in self._index

    def __iter__(self):
        return iter(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, name: str) -> Coord:
        try:
            return self.coords[self._index[name]]
        except KeyError:
            raise KeyError(f"unknown coordinate {name!r}") from None

    def parity(self, name: str) -> int:
        return self[name].parity

    def weight(self, name: str) -> int:
        return self[name].weight

    def slot(self, name: str) -> tuple[int, int]:
        """Return (parity, position among coordinates of that parity)."""
        c = self[name]
        pool = self._odd if c.parity else self._even
        return c.parity, pool.index(name)

    def __eq__(self, other) -> bool:
        return isinstance(other, SuperChart) and self.coords == other.coords

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{c.name}:{parity_name(c.parity)}/{c.weight}" for c in self.coords)
        return f"SuperChart({inner})"

    # constructors for the polynomial ring
    def zero(self) -> "GradedPoly":
        return GradedPoly(self, {})

    def one(self) -> "GradedPoly":
        return self.const(1)

    def const(self, c: Scalar) -> "GradedPoly":
        return GradedPoly(self, {(self._zero_exps(), ()): Fraction(c)})

    def gen(self, name: str) -> "GradedPoly":
        p, k = self.slot(name)
        if p == ODD:
            return GradedPoly(self, {(self._zero_exps(), (k,)): Fraction(1)})
        exps = [0] * len(self._even)
        exps[k] = 1
        return GradedPoly(self, {(tuple(exps), ()): Fraction(1)})

    def gens(self) -> dict[str, "GradedPoly"]:
        return {n: self.gen(n) for n in self.names}

    def _zero_exps(self) -> tuple[int, ...]:
        return (0,) * len(self._even)

    def parse(self, text: str) -> "GradedPoly":
        return parse(text, self)


class ChartMismatch(ValueError):
    pass


def _merge_odd(a: tuple[int, ...], b: tuple[int, ...]):
    """Sign and sorted union of two odd monomials, or (0, None) if they share a generator."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    out = []
    sign = 1
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        if a[i] < b[j]:
            out.append(a[i])
            i += 1
        elif a[i] > b[j]:
            # b[j] jumps over the remaining generators of a
            if (la - i) % 2:
                sign = -sign
            out.append(b[j])
            j += 1
        else:
            return 0, None
    out.extend(a[i:])
    out.extend(b[j:])
    return sign, tuple(out)


class GradedPoly:
    """Canonical-form element of the polynomial superalgebra of a chart.

    Instances are immutable. Arithmetic with Python ints and Fractions promotes
    them to constants over the same chart.
    """

    __slots__ = ("chart", "_terms", "_hash")

    def __init__(self, chart: SuperChart, terms: Mapping):
        self.chart = chart
        self._terms = {k: v for k, v in terms.items() if v != 0}
        self._hash = None

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.chart.const(other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return self.chart == other.chart and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.chart, frozenset(self._terms.items())))
        return self._hash

    def _coerce(self, other) -> "GradedPoly":
        if isinstance(other, GradedPoly):
            if other.chart != self.chart:
                raise ChartMismatch("polynomials live over different charts")
            return other
        if isinstance(other, (int, Fraction)):
            return self.chart.const(other)
        raise TypeError(f"cannot combine GradedPoly with {type(other).__name__}")

    def __add__(self, other) -> "GradedPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for k, v in other._terms.items():
            s = out.get(k, 0) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return GradedPoly(self.chart, out)

    __radd__ = __add__

    def __neg__(self) -> "GradedPoly":
        return GradedPoly(self.chart, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other) -> "GradedPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "GradedPoly":
        return (-self) + other

    def __mul__(self, other) -> "GradedPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out: dict = {}
        for (e1, o1), c1 in self._terms.items():
            for (e2, o2), c2 in other._terms.items():
                sign, odd = _merge_odd(o1, o2)
                if not sign:
                    continue
                key = (tuple(a + b for a, b in zip(e1, e2)), odd)
                s = out.get(key, 0) + sign * c1 * c2
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return GradedPoly(self.chart, out)

    def __rmul__(self, other) -> "GradedPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other) -> "GradedPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int) -> "GradedPoly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = self.chart.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c: Scalar) -> "GradedPoly":
        c = Fraction(c)
        if not c:
            return self.chart.zero()
        return GradedPoly(self.chart, {k: v * c for k, v in self._terms.items()})

    # grading
    def term_parity(self, key) -> int:
        return len(key[1]) % 2

    def term_weight(self, key) -> int:
        chart = self.chart
        w = sum(e * chart.weight(n) for e, n in zip(key[0], chart.even_names))
        return w + sum(chart.weight(chart.odd_names[i]) for i in key[1])

    def parity(self) -> str:
        """'even', 'odd', 'mixed' or 'zero'."""
        ps = {len(o) % 2 for (_, o) in self._terms}
        if not ps:
            return "zero"
        if len(ps) > 1:
            return "mixed"
        return parity_name(ps.pop())

    def weight(self):
        """Common weight of all terms, 'zero' for the zero polynomial, else 'inhomogeneous'."""
        ws = {self.term_weight(k) for k in self._terms}
        if not ws:
            return "zero"
        if len(ws) > 1:
            return "inhomogeneous"
        return ws.pop()

    def degree(self) -> int:
        return max((sum(e) + len(o) for (e, o) in self._terms), default=0)

    def constant_term(self) -> Fraction:
        return self._terms.get((self.chart._zero_exps(), ()), Fraction(0))

    def is_constant(self) -> bool:
        z = (self.chart._zero_exps(), ())
        return all(k == z for k in self._terms)

    def homogeneous_parity(self) -> int | None:
        """Parity as 0/1, None for the zero polynomial; raises on mixed parity."""
        p = self.parity()
        if p == "mixed":
            raise ValueError(f"polynomial {self} has mixed parity")
        if p == "zero":
            return None
        return ODD if p == "odd" else EVEN

    # calculus
    def diff(self, name: str) -> "GradedPoly":
        """Left partial derivative with respect to coordinate ``name``."""
        p, k = self.chart.slot(name)
        out: dict = {}
        if p == EVEN:
            for (e, o), c in self._terms.items():
                n = e[k]
                if n:
                    e2 = e[:k] + (n - 1,) + e[k + 1 :]
                    out[(e2, o)] = out.get((e2, o), 0) + c * n
        else:
            for (e, o), c in self._terms.items():
                if k in o:
                    pos = o.index(k)
                    o2 = o[:pos] + o[pos + 1 :]
                    out[(e, o2)] = out.get((e, o2), 0) + (-c if pos % 2 else c)
        return GradedPoly(self.chart, out)

    def substitute(self, images: Mapping[str, "GradedPoly"], target: SuperChart | None = None) -> "GradedPoly":
        return substitute(self, images, target)

    def recast(self, chart: SuperChart) -> "GradedPoly":
        """Same element viewed over ``chart``, which must declare every coordinate used here."""
        if chart == self.chart:
            return self
        images = {}
        for c in self.chart:
            if c.name in chart:
                if chart.parity(c.name) != c.parity:
                    raise ValueError(f"coordinate {c.name!r} changes parity between charts")
                images[c.name] = chart.gen(c.name)
        used = self.used_coords()
        missing = [n for n in used if n not in images]
        if missing:
            raise ValueError(f"coordinates {missing} are not declared in target chart")
        for c in self.chart:
            images.setdefault(c.name, chart.zero())
        return substitute(self, images, chart)

    def used_coords(self) -> list[str]:
        chart = self.chart
        used = set()
        for e, o in self._terms:
            used.update(n for n, k in zip(chart.even_names, e) if k)
            used.update(chart.odd_names[i] for i in o)
        return [n for n in chart.names if n in used]

    # printing
    def sorted_terms(self):
        return sorted(self._terms.items(), key=_term_order)

    def monomial_text(self, key) -> str:
        e, o = key
        chart = self.chart
        odd = set(o)
        parts = []
        for c in chart:
            par, k = chart.slot(c.name)
            if par == EVEN and e[k]:
                parts.append(c.name if e[k] == 1 else f"{c.name}^{e[k]}")
            elif par == ODD and k in odd:
                parts.append(c.name)
        return "*".join(parts)

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        out = []
        for i, (key, c) in enumerate(self.sorted_terms()):
            mono = self.monomial_text(key)
            if i == 0:
                if not mono:
                    out.append(str(c))
                elif c == 1:
                    out.append(mono)
                else:
                    out.append(f"{c}*{mono}")
            else:
                a = abs(c)
                body = str(a) if not mono else (mono if a == 1 else f"{a}*{mono}")
                out.append(("- " if c < 0 else "+ ") + body)
        return " ".join(out)

    def __repr__(self) -> str:
        return f"GradedPoly({str(self)!r})"


def _term_order(item):
    (e, o), _ = item
    return (sum(e) + len(o), tuple(-x for x in e), o)


def substitute(f: GradedPoly, images: Mapping[str, GradedPoly], target: SuperChart | None = None) -> GradedPoly:
    """Evaluate the algebra morphism sending each coordinate of ``f.chart`` to its image.

    Every coordinate needs an image of matching parity (zero is allowed for
    either parity); images must share one target chart.
    """
    chart = f.chart
    missing = [n for n in chart.names if n not in images]
    if missing:
        raise KeyError(f"no image given for coordinates {missing}")
    if target is None:
        charts = {images[n].chart for n in chart.names}
        if len(charts) > 1:
            raise ChartMismatch("substitution images live over different charts")
        target = charts.pop() if charts else chart
    for n in chart.names:
        img = images[n]
        if img.chart != target:
            raise ChartMismatch(f"image of {n!r} is not over the target chart")
        p = img.parity()
        if p == "mixed" or (p != "zero" and p != parity_name(chart.parity(n))):
            raise ValueError(
                f"image of {n!r} has parity {p}, expected {parity_name(chart.parity(n))}"
            )
    even_imgs = [images[n] for n in chart.even_names]
    odd_imgs = [images[n] for n in chart.odd_names]
    powers: dict = {}

    def power(i, k):
        key = (i, k)
        if key not in powers:
            powers[key] = even_imgs[i] ** k
        return powers[key]

    result = target.zero()
    for (e, o), c in f.items():
        term = target.const(c)
        for i, k in enumerate(e):
            if k:
                term = term * power(i, k)
                if not term:
                    break
        if term:
            for i in o:
                term = term * odd_imgs[i]
                if not term:
                    break
        result = result + term
    return result


# ---------------------------------------------------------------------------
# expression parser

class ParseError(ValueError):
    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        super().__init__(message if pos is None else f"{message} at position {pos}")


_TOKEN = re.compile(r"(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.)", re.S)


def _tokenize(text: str):
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m.group(1) is not None:
            toks.append(("nat", int(m.group(1)), pos))
        elif m.group(2) is not None:
            toks.append(("ident", m.group(2), pos))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", pos)
            toks.append((ch, ch, pos))
        pos = m.end()
    toks.append(("end", None, n))
    return toks


class _Parser:
    def __init__(self, text: str, chart: SuperChart):
        self.toks = _tokenize(text)
        self.i = 0
        self.chart = chart

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind):
        t = self.take()
        if t[0] != kind:
            raise ParseError(f"expected {kind!r}, found {t[1] if t[1] is not None else 'end of input'!r}", t[2])
        return t

    def parse(self) -> GradedPoly:
        value = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected {t[1]!r}", t[2])
        return value

    def expr(self) -> GradedPoly:
        value = self.term()
        while self.peek()[0] in "+-":
            op = self.take()[0]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> GradedPoly:
        value = self.factor()
        while self.peek()[0] == "*":
            self.take()
            value = value * self.factor()
        return value

    def factor(self) -> GradedPoly:
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            t = self.peek()
            if t[0] != "nat":
                raise ParseError("exponent must be a non-negative integer", t[2])
            self.take()
            nxt = self.peek()
            if nxt[0] == "/":
                raise ParseError("exponent must be a non-negative integer", nxt[2])
            return base ** t[1]
        return base

    def atom(self) -> GradedPoly:
        t = self.peek()
        if t[0] == "(":
            self.take()
            value = self.expr()
            self.expect(")")
            return value
        if t[0] == "ident":
            self.take()
            if t[1] not in self.chart:
                raise ParseError(f"undeclared variable {t[1]!r}", t[2])
            return self.chart.gen(t[1])
        if t[0] in ("nat", "-"):
            return self.chart.const(self.rational())
        raise ParseError(
            f"unexpected {t[1] if t[1] is not None else 'end of input'!r}", t[2]
        )

    def rational(self) -> Fraction:
        sign = 1
        if self.peek()[0] == "-":
            self.take()
            sign = -1
        num = self.expect("nat")[1]
        if self.peek()[0] == "/":
            self.take()
            den_tok = self.expect("nat")
            if den_tok[1] == 0:
                raise ParseError("division by zero", den_tok[2])
            return Fraction(sign * num, den_tok[1])
        return Fraction(sign * num)


def parse(text: str, chart: SuperChart) -> GradedPoly:
    """Parse an expression in the chart's variables into canonical form.

    Grammar::

        expr     := term (('+'|'-') term)*
        term     := factor ('*' factor)*
        factor   := atom ('^' nat)?
        atom     := rational | identifier | '(' expr ')'
        rational := ('-')? nat ('/' nat)?
    """
    return _Parser(text, chart).parse()


def homogeneous_parity(f: GradedPoly) -> int | None:
    return f.homogeneous_parity()


def check_parity(f: GradedPoly, expected: int, what: str) -> None:
    p = f.parity()
    if p == "zero":
        return
    if p == "mixed" or p != parity_name(expected):
        raise ValueError(f"{what} must be {parity_name(expected)} (or zero), got {p}: {f}")


def koszul(*parities: int) -> int:
    """(-1) raised to the product of the given parities."""
    prod = 1
    for p in parities:
        prod *= p % 2
    return -1 if prod else 1


def sign(n: int) -> int:
    return -1 if n % 2 else 1
