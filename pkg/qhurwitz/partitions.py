"""Integer partitions, symmetric group class data and irreducible characters."""
import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

from sympy.polys.domains import QQ

from constants import LOGGER_NAME
from qhurwitz.errors import UsageError, WeightMismatch

logger = logging.getLogger(LOGGER_NAME)


@dataclass(frozen=True, order=True)
class Partition:
    """Weakly decreasing tuple of positive parts; serializes as "2,1,1"."""
    parts: tuple = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 1 for p in parts):
            raise UsageError(f"partition parts must be positive: {parts}")
        object.__setattr__(self, "parts", tuple(sorted(parts, reverse=True)))

    @classmethod
    def parse(cls, text):
        text = text.strip()
        if not text or text in ("0", "()"):
            return cls(())
        try:
            return cls(tuple(int(p) for p in text.split(",")))
        except ValueError:
            raise UsageError(f"cannot read partition '{text}'; expected comma-separated parts")

    @property
    def weight(self):
        return sum(self.parts)

    @property
    def length(self):
        return len(self.parts)

    @property
    def colength(self):
        return self.weight - self.length

    def multiplicities(self):
        return Counter(self.parts)

    def conjugate(self):
        if not self.parts:
            return self
        return Partition(tuple(sum(1 for p in self.parts if p > i) for i in range(self.parts[0])))

    def cells(self):
        return [(i, j) for i, row in enumerate(self.parts, start=1) for j in range(1, row + 1)]

    def __str__(self):
        return ",".join(str(p) for p in self.parts)

    def __len__(self):
        return self.length


@dataclass(frozen=True)
class ProfileList:
    """Ordered ramification profiles of a common weight N; "2,1;2,1" on the wire."""
    profiles: tuple

    def __post_init__(self):
        profiles = tuple(p if isinstance(p, Partition) else Partition(tuple(p)) for p in self.profiles)
        if not profiles:
            raise UsageError("a profile list needs at least one partition")
        weights = {p.weight for p in profiles}
        if len(weights) != 1:
            raise WeightMismatch(f"profiles have different weights {sorted(weights)}",
                                 witness=";".join(str(p) for p in profiles))
        object.__setattr__(self, "profiles", profiles)

    @classmethod
    def parse(cls, text):
        return cls(tuple(Partition.parse(chunk) for chunk in text.split(";")))

    @property
    def weight(self):
        return self.profiles[0].weight

    @property
    def colengths(self):
        return tuple(p.colength for p in self.profiles)

    def __iter__(self):
        return iter(self.profiles)

    def __len__(self):
        return len(self.profiles)

    def __str__(self):
        return ";".join(str(p) for p in self.profiles)


def _partitions_bounded(n, largest):
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions_bounded(n - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def partitions_of(n):
    """All partitions of n in reverse-lexicographic order."""
    if n < 0:
        raise UsageError(f"cannot partition a negative integer {n}")
    return tuple(Partition(parts) for parts in _partitions_bounded(n, n))


def count_partitions(n):
    """p(n) by the Euler pentagonal recurrence (independent of the enumeration)."""
    table = [1] + [0] * n
    for m in range(1, n + 1):
        total, k = 0, 1
        while True:
            for pentagonal in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
                if pentagonal > m:
                    break
                total += (-1) ** (k + 1) * table[m - pentagonal]
            if k * (3 * k - 1) // 2 > m:
                break
            k += 1
        table[m] = total
    return table[n]


@lru_cache(maxsize=None)
def colength_partitions(n, colength):
    """Partitions of n whose colength equals the given value, i.e. length n - colength."""
    return tuple(p for p in partitions_of(n) if p.colength == colength)


def z_mu(mu):
    """Order of the centralizer: prod_i m_i! i^m_i."""
    value = 1
    for part, count in mu.multiplicities().items():
        value *= math.factorial(count) * part ** count
    return QQ(value)


def class_size(mu):
    return QQ(math.factorial(mu.weight)) / z_mu(mu)


def hook_lengths(lam):
    conjugate = lam.conjugate().parts
    return [lam.parts[i - 1] - j + conjugate[j - 1] - i + 1 for i, j in lam.cells()]


@lru_cache(maxsize=None)
def dim_irrep(lam):
    """Dimension d_lambda by the hook-length formula."""
    return QQ(math.factorial(lam.weight) // math.prod(hook_lengths(lam)))


def _beta_set(parts):
    length = len(parts)
    return tuple(part + length - 1 - index for index, part in enumerate(parts))


def _from_beta_set(beta):
    beta = sorted(beta, reverse=True)
    length = len(beta)
    return tuple(b - (length - 1 - index) for index, b in enumerate(beta) if b - (length - 1 - index) > 0)


@lru_cache(maxsize=None)
def _mn_character(lam_parts, mu_parts):
    if not mu_parts:
        return 1
    strip, rest = mu_parts[0], mu_parts[1:]
    beta = _beta_set(lam_parts)
    occupied = set(beta)
    total = 0
    for b in beta:
        target = b - strip
        if target < 0 or target in occupied:
            continue
        height = sum(1 for other in beta if target < other < b)
        reduced = _from_beta_set([target if x == b else x for x in beta])
        total += (-1) ** height * _mn_character(reduced, rest)
    return total


def character(lam, mu):
    """chi_lambda(mu) by the Murnaghan-Nakayama rule on beta-sets (memoized)."""
    if lam.weight != mu.weight:
        raise WeightMismatch(f"|lambda| = {lam.weight} differs from |mu| = {mu.weight}",
                             witness=f"{lam} vs {mu}")
    return QQ(_mn_character(lam.parts, mu.parts))


def colength_contents(lam):
    """Colength and the multiset of contents j - i, listed row by row."""
    return lam.colength, tuple(j - i for i, j in lam.cells())


def euler_characteristic(n, mu, d):
    if mu.weight != n:
        raise WeightMismatch(f"|mu| = {mu.weight} differs from N = {n}")
    if d < 0:
        raise UsageError("d must be non-negative")
    return n + mu.length - d


def riemann_hurwitz_genus(n, mu, d):
    """Genus g with chi = 2 - 2g, or None when chi is odd."""
    chi = euler_characteristic(n, mu, d)
    if chi % 2:
        return None
    return (2 - chi) // 2


# Brute-force class data on explicit permutations of range(N)

def cycle_type(perm):
    return Partition(tuple(len(cycle) for cycle in _cycles(perm)))


def compose(p, r):
    """(p o r)(i) = p[r[i]]."""
    return tuple(p[i] for i in r)


@lru_cache(maxsize=None)
def permutations_of(n):
    return tuple(itertools.permutations(range(n)))


@lru_cache(maxsize=None)
def conjugacy_class(mu):
    return tuple(perm for perm in permutations_of(mu.weight) if cycle_type(perm) == mu)


@lru_cache(maxsize=None)
def _character_table_bruteforce(n):
    """Character table from traces of permutation matrices on tabloids.

    Permutation characters are orthogonalized against class sizes in
    reverse-lexicographic order, which refines dominance order.
    """
    classes = partitions_of(n)
    sizes = {nu: len(conjugacy_class(nu)) for nu in classes}
    group_order = math.factorial(n)

    def inner(f, g):
        return sum(QQ(sizes[nu]) * f[nu] * g[nu] for nu in classes) / group_order

    table = {}
    for shape in classes:
        chi = {nu: QQ(_count_fixed_tabloids(conjugacy_class(nu)[0], shape.parts)) for nu in classes}
        for found in table.values():
            coefficient = inner(chi, found)
            chi = {nu: chi[nu] - coefficient * found[nu] for nu in classes}
        table[shape] = chi
    return table


def character_bruteforce(lam, mu):
    if mu.weight != lam.weight:
        raise WeightMismatch(f"|lambda| = {lam.weight} differs from |mu| = {mu.weight}")
    return _character_table_bruteforce(lam.weight)[lam][mu]


def _count_fixed_tabloids(perm, shape):
    """Number of tabloids of the given shape fixed by perm."""
    cycles = [len(p) for p in _cycles(perm)]

    @lru_cache(maxsize=None)
    def fill(index, remaining):
        if index == len(cycles):
            return 1
        total = 0
        for row, space in enumerate(remaining):
            if space >= cycles[index]:
                updated = list(remaining)
                updated[row] -= cycles[index]
                total += fill(index + 1, tuple(updated))
        return total

    return fill(0, tuple(shape))


def _cycles(perm):
    seen = [False] * len(perm)
    cycles = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cycle, current = [], start
        while not seen[current]:
            seen[current] = True
            cycle.append(current)
            current = perm[current]
        cycles.append(tuple(cycle))
    return cycles
