"""Symmetric polynomials in non-commuting variables, with exact coefficients.

Alphabets are graded families of generators: power sums ("p", k) of degree k,
letters ("x", i) of degree 1, variation symbols ("y", j) of degree j, and
process symbols ("X", j) of degree j used by the n-fold integral recursion.
Words are stored in run-length form, tuples of (generator, exponent) with no
two adjacent pairs sharing a generator, so x1*x1 and x1^2 are the same term.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .partitions import Composition, Partition, PartitionError, compositions

LETTER_EXPANSION_MAX_N = 6
LETTER_EXPANSION_MAX_DEGREE = 8
P_BASIS_MAX_DEGREE = 20
SERIES_MAX_ORDER = 12

_GRADE_ONE_FAMILIES = {"x"}


class NCSymError(ValueError):
    """Bound violation or alphabet mismatch in the nc-polynomial algebra."""


def generator_degree(gen) -> int:
    family, index = gen
    return 1 if family in _GRADE_ONE_FAMILIES else index


def generator_name(gen) -> str:
    family, index = gen
    if family == "X":
        return "X" if index == 1 else f"X{index}"
    return f"{family}{index}"


def word_degree(word) -> int:
    return sum(generator_degree(g) * e for g, e in word)


def _normalize(pairs):
    out = []
    for gen, exp in pairs:
        if exp == 0:
            continue
        if out and out[-1][0] == gen:
            out[-1] = (gen, out[-1][1] + exp)
        else:
            out.append((gen, exp))
    return tuple(out)


def _flatten(word):
    flat = []
    for gen, exp in word:
        flat.extend([gen] * exp)
    return tuple(flat)


def _term_key(word):
    return (word_degree(word), _flatten(word))


class NCPolynomial:
    """Formal linear combination of words over one graded alphabet."""

    __slots__ = ("alphabet", "terms")

    def __init__(self, alphabet: str, terms=None):
        self.alphabet = alphabet
        self.terms = {}
        if terms:
            for word, coeff in dict(terms).items():
                c = Fraction(coeff)
                if c != 0:
                    self.terms[_normalize(word)] = c

    @classmethod
    def zero(cls, alphabet: str) -> "NCPolynomial":
        return cls(alphabet)

    @classmethod
    def one(cls, alphabet: str) -> "NCPolynomial":
        return cls(alphabet, {(): Fraction(1)})

    @classmethod
    def generator(cls, alphabet: str, gen, coeff=1) -> "NCPolynomial":
        return cls(alphabet, {((gen, 1),): Fraction(coeff)})

    def _check_compatible(self, other):
        if self.alphabet != other.alphabet:
            raise NCSymError(
                f"alphabet mismatch: {self.alphabet!r} vs {other.alphabet!r}"
            )

    def __add__(self, other):
        self._check_compatible(other)
        terms = dict(self.terms)
        for w, c in other.terms.items():
            new = terms.get(w, Fraction(0)) + c
            if new == 0:
                terms.pop(w, None)
            else:
                terms[w] = new
        out = NCPolynomial(self.alphabet)
        out.terms = terms
        return out

    def __neg__(self):
        out = NCPolynomial(self.alphabet)
        out.terms = {w: -c for w, c in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return NCPolynomial.zero(self.alphabet)
            out = NCPolynomial(self.alphabet)
            out.terms = {w: c * other for w, c in self.terms.items()}
            return out
        self._check_compatible(other)
        terms = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = _normalize(w1 + w2)
                new = terms.get(w, Fraction(0)) + c1 * c2
                if new == 0:
                    terms.pop(w, None)
                else:
                    terms[w] = new
        out = NCPolynomial(self.alphabet)
        out.terms = terms
        return out

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __eq__(self, other):
        return (
            isinstance(other, NCPolynomial)
            and self.alphabet == other.alphabet
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.alphabet, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def degree(self) -> int:
        return max((word_degree(w) for w in self.terms), default=0)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda item: _term_key(item[0]))

    def rename(self, mapping, alphabet: str) -> "NCPolynomial":
        """Apply a generator -> generator substitution (e.g. y_j -> p_j)."""
        terms = {}
        for word, coeff in self.terms.items():
            new = _normalize((mapping(g), e) for g, e in word)
            terms[new] = terms.get(new, Fraction(0)) + coeff
        return NCPolynomial(alphabet, terms)

    def evaluate(self, values, one=None):
        """Evaluate with numbers or matrices substituted for the generators.

        `values` maps generators to values; matrix-valued generators combine
        with the matrix product. `one` is the multiplicative unit for the
        empty word; it defaults to 1 and must be supplied (e.g. an identity
        matrix) when evaluating with matrices and a constant term is present.
        """

        def mul(a, b):
            try:
                return a @ b
            except TypeError:
                return a * b

        total = None
        for word, coeff in self.sorted_terms():
            if word:
                factor = None
                for gen, exp in word:
                    v = values[gen]
                    for _ in range(exp):
                        factor = v if factor is None else mul(factor, v)
                term = float(coeff) * factor
            else:
                if one is None:
                    one = 1
                term = float(coeff) * one
            total = term if total is None else total + term
        if total is None:
            return 0.0 if one is None else 0.0 * one
        return total

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for i, (word, coeff) in enumerate(self.sorted_terms()):
            mag = abs(coeff)
            body = "*".join(generator_name(g) for g in _flatten(word)) or "1"
            if mag != 1 or not word:
                body = f"{mag}*{body}" if word else str(mag)
            if i == 0:
                parts.append(body if coeff > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self):
        return f"NCPolynomial({self.alphabet!r}, {str(self)})"


def _require_interval(sigma: Partition):
    if not sigma.is_interval():
        raise NCSymError(f"{sigma!r} is not an interval partition")


def q_basis(sigma: Partition) -> NCPolynomial:
    """The monomial p_|V1| p_|V2| ... read off an interval partition."""
    _require_interval(sigma)
    word = tuple((("p", size), 1) for size in sigma.block_sizes())
    return NCPolynomial("p", {word: Fraction(1)})


def p_basis(sigma: Partition) -> NCPolynomial:
    """Distinct-neighbor polynomial of an interval partition, in power sums.

    P_sigma = sum over interval partitions pi >= sigma of
    (-1)^(|sigma| - |pi|) times the ordered word of block sizes of pi;
    coarsenings correspond to merging consecutive blocks of sigma.
    """
    _require_interval(sigma)
    if sigma.n > P_BASIS_MAX_DEGREE:
        raise NCSymError(f"p_basis bound is degree {P_BASIS_MAX_DEGREE}")
    sizes = sigma.block_sizes()
    r = len(sizes)
    terms = {}
    for merge in compositions(r):
        word, pos = [], 0
        for part in merge.parts:
            word.append((("p", sum(sizes[pos : pos + part])), 1))
            pos += part
        sign = (-1) ** (r - len(merge.parts))
        w = _normalize(word)
        terms[w] = terms.get(w, Fraction(0)) + sign
    return NCPolynomial("p", terms)


def _check_expansion_bounds(degree: int, n_letters: int):
    if n_letters > LETTER_EXPANSION_MAX_N or n_letters < 1:
        raise NCSymError(
            f"letter count must be in 1..{LETTER_EXPANSION_MAX_N}, got {n_letters}"
        )
    if degree > LETTER_EXPANSION_MAX_DEGREE:
        raise NCSymError(
            f"total degree {degree} exceeds expansion bound "
            f"{LETTER_EXPANSION_MAX_DEGREE}"
        )


def expand_letters(poly: NCPolynomial, n_letters: int) -> NCPolynomial:
    """Brute-force oracle: substitute p_k = x_1^k + ... + x_N^k and expand."""
    if poly.alphabet != "p":
        raise NCSymError("expand_letters acts on p-alphabet polynomials")
    _check_expansion_bounds(poly.degree(), n_letters)
    terms = {}
    for word, coeff in poly.terms.items():
        flat = _flatten(word)  # sequence of ("p", k) generators
        indices = [0] * len(flat)
        while True:
            pairs = tuple(
                (("x", indices[j] + 1), flat[j][1]) for j in range(len(flat))
            )
            w = _normalize(pairs)
            new = terms.get(w, Fraction(0)) + coeff
            if new == 0:
                terms.pop(w, None)
            else:
                terms[w] = new
            # odometer over [n_letters]^len(flat)
            for j in range(len(flat) - 1, -1, -1):
                indices[j] += 1
                if indices[j] < n_letters:
                    break
                indices[j] = 0
            else:
                break
    out = NCPolynomial("x")
    out.terms = terms
    return out


def distinct_neighbor_bruteforce(u: Composition, n_letters: int) -> NCPolynomial:
    """Sum of x_i(1)^u(1) ... x_i(r)^u(r) over tuples with distinct neighbors."""
    _check_expansion_bounds(u.degree, n_letters)
    r = len(u.parts)
    terms = {}

    def rec(pos, prev, word):
        if pos == r:
            w = tuple(word)
            terms[w] = terms.get(w, Fraction(0)) + 1
            return
        for i in range(1, n_letters + 1):
            if i != prev:
                word.append((("x", i), u.parts[pos]))
                rec(pos + 1, i, word)
                word.pop()

    rec(0, 0, [])
    out = NCPolynomial("x")
    out.terms = terms
    return out


def stochastic_integral_poly(k: int) -> NCPolynomial:
    """Right side of the k-fold integral identity, in variation symbols y_j.

    sum_(j=1..k) (-1)^(k-j) sum over compositions (m_1..m_j) of k of
    y_(m_1) ... y_(m_j).
    """
    if not (1 <= k <= SERIES_MAX_ORDER):
        raise NCSymError(f"k must be in 1..{SERIES_MAX_ORDER}, got {k}")
    terms = {}
    for c in compositions(k):
        sign = (-1) ** (k - len(c.parts))
        word = _normalize((("y", m), 1) for m in c.parts)
        terms[word] = terms.get(word, Fraction(0)) + sign
    return NCPolynomial("y", terms)


def psi_poly(n: int) -> NCPolynomial:
    """n-fold stochastic integral of a mean-t-normalized process.

    psi_0 = 1 and
    psi_n = X psi_(n-1)
            + sum_(j=2..n) (-1)^(j-1) sum_(k=0..n-j) C(k+j-2, j-2)
              X^(j) psi_(n-j-k),
    with X^(j) acting from the left, in the written order.
    """
    if not (0 <= n <= SERIES_MAX_ORDER):
        raise NCSymError(f"n must be in 0..{SERIES_MAX_ORDER}, got {n}")
    psis = [NCPolynomial.one("X")]
    x1 = NCPolynomial.generator("X", ("X", 1))
    for m in range(1, n + 1):
        acc = x1 * psis[m - 1]
        for j in range(2, m + 1):
            xj = NCPolynomial.generator("X", ("X", j))
            sign = (-1) ** (j - 1)
            for k in range(0, m - j + 1):
                weight = comb(k + j - 2, j - 2)
                acc = acc + (sign * weight) * (xj * psis[m - j - k])
        psis.append(acc)
    return psis[n]


def composition_of(sigma: Partition) -> Composition:
    try:
        return Composition.from_partition(sigma)
    except PartitionError as exc:
        raise NCSymError(str(exc)) from None


__all__ = [
    "NCPolynomial",
    "NCSymError",
    "composition_of",
    "distinct_neighbor_bruteforce",
    "expand_letters",
    "generator_degree",
    "generator_name",
    "p_basis",
    "psi_poly",
    "q_basis",
    "stochastic_integral_poly",
    "word_degree",
]
