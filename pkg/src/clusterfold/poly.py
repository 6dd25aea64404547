"""Exact Laurent polynomials and graded truncated series.

Exponent vectors are tuples of ints, coefficients are Python ints.  A
``LaurentExpr`` never stores a zero coefficient.  Truncation is always with
respect to a linear grading ``deg(exp) = sum(w_i * exp_i)`` whose weights are
supplied by the caller (all ones for N, zeros on the M-block and ones on the
N-block for the principal-coefficient lattice M°⊕N).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

Exp = tuple[int, ...]


class DivisionError(ArithmeticError):
    """Raised when an exact integer computation would need a division."""


def _as_exp(exp: Iterable[int]) -> Exp:
    return tuple(int(x) for x in exp)


def graded_key(exp: Exp, weights: Sequence[int] | None = None):
    """Sort key: degree first (under ``weights``, default all ones), then lex."""
    if weights is None:
        deg = sum(exp)
    else:
        deg = sum(w * e for w, e in zip(weights, exp))
    return (deg, exp)


class LaurentExpr:
    """Multivariate Laurent polynomial with integer coefficients.

    Parameters
    ----------
    terms : mapping from exponent tuple to int
    nvars : ambient rank; inferred from ``terms`` when omitted

    Examples
    --------
    >>> x = LaurentExpr.monomial((1, 0))
    >>> ((1 + x) * (1 - x)).to_json()
    [{'exp': [0, 0], 'coef': '1'}, {'exp': [2, 0], 'coef': '-1'}]
    """

    __slots__ = ("_terms", "nvars")

    def __init__(self, terms: Mapping[Exp, int] | None = None, nvars: int | None = None):
        clean: dict[Exp, int] = {}
        if terms:
            for exp, c in terms.items():
                c = int(c)
                if c:
                    clean[_as_exp(exp)] = c
        if nvars is None:
            if not clean:
                raise ValueError("nvars is required for an empty expression")
            nvars = len(next(iter(clean)))
        for exp in clean:
            if len(exp) != nvars:
                raise ValueError(f"exponent {exp} does not have length {nvars}")
        self._terms = clean
        self.nvars = nvars

    # construction
    @classmethod
    def zero(cls, nvars: int) -> "LaurentExpr":
        return cls({}, nvars)

    @classmethod
    def one(cls, nvars: int) -> "LaurentExpr":
        return cls({(0,) * nvars: 1}, nvars)

    @classmethod
    def monomial(cls, exp: Iterable[int], coef: int = 1) -> "LaurentExpr":
        exp = _as_exp(exp)
        return cls({exp: coef}, len(exp))

    @classmethod
    def variable(cls, nvars: int, i: int) -> "LaurentExpr":
        return cls.monomial(tuple(int(j == i) for j in range(nvars)))

    # access
    @property
    def terms(self) -> dict[Exp, int]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Exp, int]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Exp]:
        return iter(self._terms)

    def coeff(self, exp: Iterable[int]) -> int:
        return self._terms.get(_as_exp(exp), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def constant_term(self) -> int:
        return self._terms.get((0,) * self.nvars, 0)

    def degree_range(self, weights: Sequence[int] | None = None) -> tuple[int, int]:
        if not self._terms:
            raise ValueError("degree of the zero expression")
        degs = [graded_key(e, weights)[0] for e in self._terms]
        return min(degs), max(degs)

    def is_positive(self) -> bool:
        """True iff every coefficient is a positive integer (and f is nonzero)."""
        return bool(self._terms) and all(c > 0 for c in self._terms.values())

    # arithmetic
    def _coerce(self, other) -> "LaurentExpr":
        if isinstance(other, LaurentExpr):
            if other.nvars != self.nvars:
                raise ValueError(f"rank mismatch: {self.nvars} vs {other.nvars}")
            return other
        if isinstance(other, int):
            return LaurentExpr({(0,) * self.nvars: other}, self.nvars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return type(self)._wrap(self, out)

    __radd__ = __add__

    def __neg__(self):
        return type(self)._wrap(self, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Exp, int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return type(self)._wrap(self, out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            if not self.is_monomial():
                raise DivisionError("negative power of a non-monomial Laurent polynomial")
            (exp, c), = self._terms.items()
            if c not in (1, -1):
                raise DivisionError("inverse of a monomial with non-unit coefficient")
            return type(self)._wrap(self, {tuple(x * e for x in exp): c ** (-e)})
        result = type(self)._wrap(self, {(0,) * self.nvars: 1})
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def scale(self, c: int) -> "LaurentExpr":
        return type(self)._wrap(self, {e: c * v for e, v in self._terms.items()})

    def shift(self, exp: Iterable[int]) -> "LaurentExpr":
        """Multiply by the monomial z^exp."""
        exp = _as_exp(exp)
        return type(self)._wrap(
            self, {tuple(a + b for a, b in zip(e, exp)): c for e, c in self._terms.items()}
        )

    def truncate(self, order: int, weights: Sequence[int] | None = None) -> "LaurentExpr":
        return LaurentExpr(
            {e: c for e, c in self._terms.items() if graded_key(e, weights)[0] <= order},
            self.nvars,
        )

    @classmethod
    def _wrap(cls, like: "LaurentExpr", terms: dict[Exp, int]) -> "LaurentExpr":
        # internal results already have tuple exponents of the right length
        out = object.__new__(LaurentExpr)
        out._terms = {e: c for e, c in terms.items() if c}
        out.nvars = like.nvars
        return out

    # comparison
    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = LaurentExpr({(0,) * self.nvars: other}, self.nvars)
        if not isinstance(other, LaurentExpr):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.nvars, frozenset(self._terms.items())))

    # presentation
    def sorted_items(self, weights: Sequence[int] | None = None) -> list[tuple[Exp, int]]:
        return sorted(self._terms.items(), key=lambda ec: graded_key(ec[0], weights))

    def to_json(self, weights: Sequence[int] | None = None) -> list[dict]:
        return [{"exp": list(e), "coef": str(c)} for e, c in self.sorted_items(weights)]

    @classmethod
    def from_json(cls, data: list[dict], nvars: int | None = None) -> "LaurentExpr":
        terms: dict[Exp, int] = {}
        for item in data:
            e = _as_exp(item["exp"])
            terms[e] = terms.get(e, 0) + int(item["coef"])
        if nvars is None and not terms:
            raise ValueError("cannot infer rank of an empty polynomial")
        return cls(terms, nvars)

    def format(self, names: Sequence[str] | None = None) -> str:
        if not self._terms:
            return "0"
        names = names or [f"z{i + 1}" for i in range(self.nvars)]
        parts = []
        for exp, c in self.sorted_items():
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(exp) if k
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"LaurentExpr({self.format()})"


class TruncatedSeries(LaurentExpr):
    """A ``LaurentExpr`` reduced modulo all exponents of degree above ``order``.

    All exponents must have degree in ``[0, order]`` under ``weights``; products
    are re-truncated, so truncation behaves as a ring homomorphism.
    """

    __slots__ = ("order", "weights")

    def __init__(
        self,
        terms: Mapping[Exp, int] | None = None,
        order: int = 8,
        weights: Sequence[int] | None = None,
        nvars: int | None = None,
    ):
        if order < 0:
            raise ValueError("truncation order must be nonnegative")
        if nvars is None:
            nvars = len(weights) if weights is not None else None
        super().__init__(terms, nvars)
        self.order = order
        self.weights = tuple(weights) if weights is not None else (1,) * self.nvars
        kept = {}
        for e, c in self._terms.items():
            deg = sum(w * x for w, x in zip(self.weights, e))
            if deg < 0:
                raise ValueError(f"exponent {e} has negative degree")
            if deg <= order:
                kept[e] = c
        self._terms = kept

    @classmethod
    def from_laurent(cls, f: LaurentExpr, order: int, weights: Sequence[int] | None = None):
        return cls(f.terms, order, weights, f.nvars)

    @classmethod
    def _wrap(cls, like, terms):
        return TruncatedSeries(terms, like.order, like.weights, like.nvars)

    def _coerce(self, other):
        other = super()._coerce(other)
        if isinstance(other, TruncatedSeries) and other.order != self.order:
            raise ValueError(f"truncation order mismatch: {self.order} vs {other.order}")
        return other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        # skip products that are certainly above the order
        w = self.weights
        deg_b = [(sum(a * b for a, b in zip(w, e)), e, c) for e, c in other._terms.items()]
        out: dict[Exp, int] = {}
        for e1, c1 in self._terms.items():
            d1 = sum(a * b for a, b in zip(w, e1))
            for d2, e2, c2 in deg_b:
                if d1 + d2 > self.order:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return TruncatedSeries(out, self.order, w, self.nvars)

    __rmul__ = __mul__

    def pow_int(self, e: int) -> "TruncatedSeries":
        """``self**e`` for any integer ``e``; the constant term must be 1."""
        if self.constant_term() != 1:
            raise DivisionError("pow_int needs constant term 1")
        one = TruncatedSeries({(0,) * self.nvars: 1}, self.order, self.weights, self.nvars)
        if e < 0:
            h = self - one
            # the non-constant part has positive degree, so the geometric series ends
            inv = one
            term = one
            for _ in range(self.order):
                term = term * (-h)
                if term.is_zero():
                    break
                inv = inv + term
            return inv.pow_int(-e)
        return LaurentExpr.__pow__(self, e)

    def __pow__(self, e: int):
        return self.pow_int(e)

    def inverse(self) -> "TruncatedSeries":
        return self.pow_int(-1)

    def __repr__(self) -> str:
        return f"TruncatedSeries({self.format()}, order={self.order})"


def pow_int(f: TruncatedSeries, e: int) -> TruncatedSeries:
    return f.pow_int(e)


def mul(a: LaurentExpr, b: LaurentExpr) -> LaurentExpr:
    return a * b


# univariate helpers: wall functions are series in a single variable t = z^{n0}


def series_power(coeffs: Sequence[int], e: int | Fraction, nterms: int) -> list[int]:
    """Coefficients of ``(sum coeffs[j] t^j) ** e`` up to ``t^(nterms-1)``.

    ``coeffs[0]`` must be 1; ``e`` may be negative or rational.  Uses the
    recurrence from ``f g' = e f' g``.  Every coefficient of the result must be
    an integer, otherwise :class:`DivisionError` is raised.
    """
    if not coeffs or coeffs[0] != 1:
        raise DivisionError("series_power needs constant term 1")
    e = Fraction(e)
    if nterms <= 0:
        return []
    g: list[int] = [1]
    if e == 0:
        return g + [0] * (nterms - 1)
    if e.denominator == 1 and e >= 0:
        # plain integer power: binomial-style repeated multiplication is exact
        return _int_power(coeffs, int(e), nterms)
    a = list(coeffs) + [0] * max(0, nterms - len(coeffs))
    for n in range(1, nterms):
        acc = Fraction(0)
        for j in range(1, n + 1):
            if a[j]:
                acc += (e * j - (n - j)) * a[j] * g[n - j]
        val = acc / n
        if val.denominator != 1:
            raise DivisionError(f"non-integral coefficient {val} in power {e}")
        g.append(int(val))
    return g


def _int_power(coeffs: Sequence[int], e: int, nterms: int) -> list[int]:
    result = [1] + [0] * (nterms - 1)
    base = list(coeffs[:nterms]) + [0] * max(0, nterms - len(coeffs))
    while e:
        if e & 1:
            result = series_mul(result, base, nterms)
        e >>= 1
        if e:
            base = series_mul(base, base, nterms)
    return result


def series_mul(a: Sequence[int], b: Sequence[int], nterms: int) -> list[int]:
    out = [0] * nterms
    for i, x in enumerate(a[:nterms]):
        if x:
            for j, y in enumerate(b[: nterms - i]):
                if y:
                    out[i + j] += x * y
    return out


def trim(coeffs: Sequence[int]) -> tuple[int, ...]:
    c = list(coeffs)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


class MonomialMap:
    """Linear map on exponent lattices, applied termwise to Laurent expressions.

    ``matrix`` has one row per target coordinate and one column per source
    coordinate, so ``exp -> matrix @ exp``.
    """

    def __init__(self, matrix: Sequence[Sequence[int]], source_rank: int | None = None):
        self.matrix = tuple(tuple(int(x) for x in row) for row in matrix)
        if source_rank is None:
            if not self.matrix:
                raise ValueError("source_rank needed for a map with no rows")
            source_rank = len(self.matrix[0])
        if any(len(row) != source_rank for row in self.matrix):
            raise ValueError("ragged monomial map matrix")
        self.source_rank = source_rank
        self.target_rank = len(self.matrix)

    @classmethod
    def identity(cls, n: int) -> "MonomialMap":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def negation(cls, n: int) -> "MonomialMap":
        return cls([[-int(i == j) for j in range(n)] for i in range(n)])

    def image(self, exp: Sequence[int]) -> Exp:
        if len(exp) != self.source_rank:
            raise ValueError(f"exponent of length {len(exp)}, map expects {self.source_rank}")
        return tuple(sum(a * b for a, b in zip(row, exp)) for row in self.matrix)

    def __call__(self, f: LaurentExpr) -> LaurentExpr:
        return apply_monomial_map(self, f)

    def compose(self, other: "MonomialMap") -> "MonomialMap":
        """``self ∘ other``."""
        cols = list(zip(*other.matrix)) if other.matrix else []
        m = [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in self.matrix]
        return MonomialMap(m, other.source_rank)


def apply_monomial_map(mmap: MonomialMap, f: LaurentExpr) -> LaurentExpr:
    if f.nvars != mmap.source_rank:
        raise ValueError(f"rank mismatch: expression has {f.nvars}, map expects {mmap.source_rank}")
    out: dict[Exp, int] = {}
    for e, c in f.items():
        img = mmap.image(e)
        out[img] = out.get(img, 0) + c
    return LaurentExpr(out, mmap.target_rank)
