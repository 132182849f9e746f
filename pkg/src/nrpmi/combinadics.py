"""Combinatorial index coding shared by the Type II codebooks.

Beam combinations, tap selections, and the subset-restriction group pick are
all reported as a single integer ranking the chosen subset.  The ranking used
by the protocol maps index 0 to the subset {n-k, ..., n-1} and index
C(n,k)-1 to {0, ..., k-1}:

    index(S) = sum_i C(n - 1 - S[i], k - i)      (S strictly increasing)

All arithmetic is exact integer arithmetic.
"""

import math
from collections.abc import Sequence

from .errors import DomainError, FormatError


def binomial(x: int, y: int) -> int:
    """C(x, y), extended with C(x, y) = 0 whenever x < y.

    The zero extension is required by the subset-restriction encoding, whose
    sum runs over terms with x < y for high group indices.
    """
    if x < 0 or y < 0:
        raise DomainError(f"binomial arguments must be nonnegative, got ({x}, {y})")
    return math.comb(x, y)


def decode_combination(index: int, n: int, k: int) -> tuple[int, ...]:
    """Recover the strictly increasing k-subset of [0, n) with the given rank."""
    if k < 0 or k > n:
        raise DomainError(f"subset size k={k} outside [0, {n}]")
    total = binomial(n, k)
    if not 0 <= index < total:
        raise FormatError(f"combination index {index} outside [0, {total})")
    out = []
    s = 0
    for i in range(k):
        # Largest x* with index - s >= C(x*, k - i); scan from the top so the
        # first hit wins.
        for x_star in range(n - 1 - i, k - 2 - i, -1):
            e = binomial(x_star, k - i)
            if index - s >= e:
                s += e
                out.append(n - 1 - x_star)
                break
    return tuple(out)


def encode_combination(subset: Sequence[int], n: int, k: int) -> int:
    """Rank of a strictly increasing k-subset of [0, n); inverse of decode."""
    if len(subset) != k:
        raise DomainError(f"expected {k} elements, got {len(subset)}")
    prev = -1
    for v in subset:
        if not prev < v < n:
            raise DomainError(f"subset {tuple(subset)} not strictly increasing in [0, {n})")
        prev = v
    return sum(binomial(n - 1 - v, k - i) for i, v in enumerate(subset))


def split_beam_index(flat: int, n1: int) -> tuple[int, int]:
    """Split a flat in-group beam index into (horizontal, vertical) parts."""
    if flat < 0:
        raise DomainError(f"flat beam index {flat} negative")
    return flat % n1, flat // n1


def decode_group_restriction(beta1: int, o1: int, o2: int) -> list[tuple[int, int, int]]:
    """Recover the 4 restricted beam groups from the integer behind B1.

    Returns [(g, r1, r2), ...] with g strictly increasing, r1 = g mod O1 and
    r2 = (g - r1) / O1.
    """
    if o1 * o2 < 4:
        raise DomainError(f"O1*O2={o1 * o2} cannot host 4 restricted groups")
    groups = decode_combination(beta1, o1 * o2, 4)
    return [(g, g % o1, g // o1) for g in groups]


def encode_group_restriction(groups: Sequence[int], o1: int, o2: int) -> int:
    """Integer encoding of 4 strictly increasing group indices below O1*O2."""
    if o1 * o2 < 4:
        raise DomainError(f"O1*O2={o1 * o2} cannot host 4 restricted groups")
    return encode_combination(groups, o1 * o2, 4)
