"""Moment/free-cumulant conversions and mixed free cumulants of tuples.

All combinatorial conversions default to exact rational arithmetic: inputs
given as ints or fractions.Fraction come back exact, so the Mobius sums never
cancel silently. Floats pass through unchanged when that is what the caller
supplies.

The single-variable conversions share one convention: Mob(pi) means the
Mobius function Mob(pi, 1_n) of NC(n), which makes the two directions exact
two-sided inverses of each other.
"""

from __future__ import annotations

from functools import lru_cache

from .partitions import Partition, _mobius_to_top, enumerate_nc

EXACT_CONVERSION_BOUND = 12
MIXED_WORD_BOUND = 8


class CumulantError(ValueError):
    """Invalid conversion request (length over bound, undefined moments)."""


def _check_length(n: int, bound: int):
    if n < 1:
        raise CumulantError("sequence must have length >= 1")
    if n > bound:
        raise CumulantError(f"length {n} exceeds the exact-mode bound {bound}")


@lru_cache(maxsize=None)
def _profile_tables(n: int):
    """Per-order weight tables over NC(n), collapsed by block-size profile.

    Returns (mobius_table, count_table): each maps a sorted tuple of block
    sizes to the summed Mobius weight Mob(pi, 1) resp. the number of NC(n)
    partitions with that profile. Products of moments/cumulants over blocks
    depend only on the profile, so conversions reduce to short sums.
    """
    mob = {}
    cnt = {}
    for pi in enumerate_nc(n):
        profile = tuple(sorted(pi.block_sizes()))
        mob[profile] = mob.get(profile, 0) + _mobius_to_top(pi)
        cnt[profile] = cnt.get(profile, 0) + 1
    return mob, cnt


def _profile_product(profile, values):
    out = 1
    for size in profile:
        out = out * values[size - 1]
    return out


def moments_to_cumulants(moments) -> list:
    """Free cumulants (kappa_1..kappa_n) from raw moments (m_1..m_n)."""
    moments = list(moments)
    _check_length(len(moments), EXACT_CONVERSION_BOUND)
    kappas = []
    for n in range(1, len(moments) + 1):
        mob, _ = _profile_tables(n)
        kappa = 0
        for profile, weight in mob.items():
            kappa = kappa + weight * _profile_product(profile, moments)
        kappas.append(kappa)
    return kappas


def cumulants_to_moments(kappas) -> list:
    """Raw moments from free cumulants; exact inverse of moments_to_cumulants."""
    kappas = list(kappas)
    _check_length(len(kappas), EXACT_CONVERSION_BOUND)
    moments = []
    for n in range(1, len(kappas) + 1):
        _, cnt = _profile_tables(n)
        m = 0
        for profile, count in cnt.items():
            m = m + count * _profile_product(profile, kappas)
        moments.append(m)
    return moments


def tau_pi(pi: Partition, word, tau):
    """Product over the blocks of pi of the moment of the block's sub-word.

    `tau` is a functional on words: a callable accepting a tuple of the
    labels from `word` indexed by a block, in increasing position order.
    """
    word = tuple(word)
    if len(word) != pi.n:
        raise CumulantError(f"word length {len(word)} != partition size {pi.n}")
    out = 1
    for block in pi.blocks:
        sub = tuple(word[i - 1] for i in block)
        value = tau(sub)
        if value is None:
            raise CumulantError(f"moment functional undefined on sub-word {sub}")
        out = out * value
    return out


def mixed_free_cumulant(word, tau):
    """Mixed free cumulant R[a_u(1), ..., a_u(n)] of a word of variables.

    Sums Mob(pi, 1) * tau_pi over pi in NC(n). Vanishes whenever the word
    mixes at least two free variables (the defining property used to reduce
    joint cumulants of free sums to per-summand ones).
    """
    word = tuple(word)
    _check_length(len(word), MIXED_WORD_BOUND)
    total = 0
    for pi in enumerate_nc(len(word)):
        total = total + _mobius_to_top(pi) * tau_pi(pi, word, tau)
    return total


def word_functional_from_moments(moments):
    """Functional on power-words of a single variable: tau[X^a X^b ...] = m_(a+b+...)."""
    moments = list(moments)

    def tau(sub):
        total = sum(sub)
        if total > len(moments):
            raise CumulantError(
                f"moment m_{total} required but only {len(moments)} supplied"
            )
        return moments[total - 1]

    return tau


def free_joint_functional(moments_by_label):
    """Joint moment functional of freely independent variables.

    Given per-label moment sequences, builds tau[word] by the free
    moment-cumulant formula: sum over NC partitions whose blocks are
    label-constant of the product of per-label cumulants.
    """
    cumulants = {
        label: moments_to_cumulants(m) for label, m in moments_by_label.items()
    }
    cache = {}

    def tau(word):
        word = tuple(word)
        if word in cache:
            return cache[word]
        n = len(word)
        total = 0
        for pi in enumerate_nc(n):
            term = 1
            for block in pi.blocks:
                labels = {word[i - 1] for i in block}
                if len(labels) > 1:
                    term = 0
                    break
                (label,) = labels
                ks = cumulants[label]
                if len(block) > len(ks):
                    raise CumulantError(
                        f"cumulant of order {len(block)} required for {label!r}"
                    )
                term = term * ks[len(block) - 1]
            total = total + term
        cache[word] = total
        return total

    return tau


def power_sum_joint_cumulant(powers, moments, count):
    """Joint cumulant of power sums of `count` free identically distributed terms.

    For one summand X with the given moments, computes
    R(X^u(1), ..., X^u(k)) by the Mobius sum; the joint cumulant of the sums
    over `count` free copies is count times that, since mixed cumulants
    across distinct summands vanish. Also returns the defect
    count * (R(...) - m_(u(1)+...+u(k))), the quantity whose vanishing in the
    limit drives joint convergence of the variation tuple.
    """
    powers = tuple(int(u) for u in powers)
    if not powers or any(u < 1 for u in powers):
        raise CumulantError(f"powers must be positive, got {powers}")
    moments = list(moments)
    total_order = sum(powers)
    if total_order > len(moments):
        raise CumulantError(
            f"need moments up to order {total_order}, got {len(moments)}"
        )
    tau = word_functional_from_moments(moments)
    r_one = mixed_free_cumulant(powers, tau)
    defect = count * (r_one - moments[total_order - 1])
    return count * r_one, defect


def free_poisson_moments(lam, n: int) -> list:
    """First n moments of the free Poisson law with rate lam (all cumulants lam)."""
    return cumulants_to_moments([lam] * n)


__all__ = [
    "CumulantError",
    "EXACT_CONVERSION_BOUND",
    "MIXED_WORD_BOUND",
    "cumulants_to_moments",
    "free_joint_functional",
    "free_poisson_moments",
    "mixed_free_cumulant",
    "moments_to_cumulants",
    "power_sum_joint_cumulant",
    "tau_pi",
    "word_functional_from_moments",
]
