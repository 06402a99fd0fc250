"""Pure Hurwitz numbers, weight factors and weighted Hurwitz numbers H^d."""
import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache, partial

import mpmath
from sympy.polys.domains import QQ
from sympy.utilities.iterables import multiset_permutations

from constants import LOGGER_NAME, N_BRUTE
from qhurwitz.errors import TooLarge, UsageError, ZeroColengthProfile
from qhurwitz.exactalg import RatFuncQ, exact_str, inverse_q_factors
from qhurwitz.numeric import fmt, ordered_map, to_mpf
from qhurwitz.partitions import (Partition, ProfileList, character, class_size, colength_partitions, compose,
                                 conjugacy_class, cycle_type, dim_irrep, partitions_of)

logger = logging.getLogger(LOGGER_NAME)

WEIGHT_MODES = ("G-product", "G-dual")
HURWITZ_METHODS = ("character", "bruteforce")


@dataclass(frozen=True)
class WeightParams:
    """Finite parameter list c_1..c_B for the generic weight engine."""
    c: tuple = ()
    mode: str = "G-dual"

    def __post_init__(self):
        if self.mode not in WEIGHT_MODES:
            raise UsageError(f"weight mode must be one of {WEIGHT_MODES}, got '{self.mode}'")
        object.__setattr__(self, "c", tuple(self.c))


@dataclass(frozen=True)
class HurwitzResult:
    value: object
    n: int
    d: int
    mu: object
    method: str = "character"
    extra: dict = field(default_factory=dict, compare=False)

    def to_json(self):
        if isinstance(self.value, (mpmath.mpf, mpmath.mpc)):
            value = fmt(self.value)
        else:
            value = exact_str(self.value)
        payload = {"mu": str(self.mu), "d": self.d, "value": value, "method": self.method}
        payload.update(self.extra)
        return payload


# Pure Hurwitz numbers

def pure_hurwitz_bruteforce(profiles, n_brute=N_BRUTE):
    """(1/N!) #{(h_1..h_k) : h_i in cyc(mu_i), h_1...h_k = id}.

    Products over the first k-1 classes are accumulated as a multiset of
    permutations; the last factor is then determined, so only its cycle type
    is checked.
    """
    n = profiles.weight
    if n > n_brute:
        logger.error(f"Brute-force Hurwitz count requested at N={n} above cut-off {n_brute}")
        raise TooLarge(f"N = {n} exceeds the brute-force cut-off {n_brute}", witness=str(profiles))
    *heads, last = profiles.profiles
    products = Counter({tuple(range(n)): 1})
    for mu in heads:
        step = Counter()
        for perm, mult in products.items():
            for h in conjugacy_class(mu):
                step[compose(perm, h)] += mult
        products = step
    # h_k = (h_1...h_{k-1})^{-1} has the same cycle type as the partial product
    count = sum(mult for perm, mult in products.items() if cycle_type(perm) == last)
    return QQ(count, math.factorial(n))


@lru_cache(maxsize=None)
def _central_character(lam, mu):
    return class_size(mu) * character(lam, mu) / dim_irrep(lam)


@lru_cache(maxsize=None)
def _frobenius_sorted(profile_key):
    n = profile_key[0].weight
    group_order = QQ(math.factorial(n))
    total = QQ(0)
    for lam in partitions_of(n):
        term = (dim_irrep(lam) / group_order) ** 2
        for mu in profile_key:
            term *= _central_character(lam, mu)
            if term == 0:
                break
        total += term
    return total


def pure_hurwitz_frobenius(profiles):
    """Frobenius character formula; symmetric in the profiles, cached on their sorted tuple."""
    if not isinstance(profiles, ProfileList):
        profiles = ProfileList(tuple(profiles))
    return _frobenius_sorted(tuple(sorted(profiles.profiles, reverse=True)))


def pure_hurwitz(profiles, method="character", n_brute=N_BRUTE):
    if method == "character":
        return pure_hurwitz_frobenius(profiles)
    if method == "bruteforce":
        return pure_hurwitz_bruteforce(profiles, n_brute)
    raise UsageError(f"Hurwitz method must be one of {HURWITZ_METHODS}, got '{method}'")


# Symmetric-function weights

def _scale(value, rational):
    if isinstance(value, (mpmath.mpf, mpmath.mpc)):
        return value * to_mpf(rational)
    return value * rational


def _ordered_power_sum(exponents, c, strict):
    """Sum over index chains b_1 < ... < b_k (strict) or b_1 <= ... <= b_k of prod c_{b_i}^{e_i}."""
    if not exponents:
        return 1
    chains = [value ** exponents[0] for value in c]
    for e in exponents[1:]:
        acc = 0
        step = []
        for j, value in enumerate(c):
            if strict:
                step.append(acc * value ** e)
                acc = acc + chains[j]
            else:
                acc = acc + chains[j]
                step.append(acc * value ** e)
        chains = step
    return sum(chains, 0)


def sym_weight_eval(lam, c, kind):
    """m_lambda(c) ("monomial") or f_lambda(c) ("forgotten") over a finite list c."""
    if kind not in ("monomial", "forgotten"):
        raise UsageError(f"symmetric function kind must be monomial or forgotten, got '{kind}'")
    if not lam.parts:
        return 1
    c = list(c)
    strict = kind == "monomial"
    if strict and len(c) < lam.length:
        return 0
    total = 0
    for ordering in multiset_permutations(list(lam.parts)):
        total = total + _ordered_power_sum(ordering, c, strict)
    return total


def weight_factor_generic(colengths, c, mode):
    """W_G (G-product) or the dual weight W~_G (G-dual) of a colength tuple.

    W_G = (prod_j m_j!/k!) m_lambda(c) and W~_G = (-1)^(k+d) (prod_j m_j!/k!) f_lambda(c),
    with lambda the partition formed by the colengths.
    """
    if any(ell < 1 for ell in colengths):
        raise ZeroColengthProfile(f"colength tuple {tuple(colengths)} contains a zero entry")
    k, d = len(colengths), sum(colengths)
    lam = Partition(tuple(colengths))
    norm = QQ(math.prod(math.factorial(m) for m in lam.multiplicities().values()), math.factorial(k))
    if mode == "G-product":
        return _scale(sym_weight_eval(lam, c, "monomial"), norm)
    if mode == "G-dual":
        return _scale(sym_weight_eval(lam, c, "forgotten"), norm * (-1) ** (k + d))
    raise UsageError(f"weight mode must be one of {WEIGHT_MODES}, got '{mode}'")


@lru_cache(maxsize=None)
def _quantum_weight_closed(colengths):
    k, d = len(colengths), sum(colengths)
    total = RatFuncQ.zero()
    for ordering in multiset_permutations(list(colengths)):
        total = total + inverse_q_factors(itertools.accumulate(ordering))
    norm = math.prod(math.factorial(m) for m in Counter(colengths).values())
    return total * QQ((-1) ** (d - k) * norm, math.factorial(k))


def quantum_weight(profiles):
    """Closed-form quantum weight W~_{H_q} of a profile tuple, exact in Q(q)."""
    colengths = profiles.colengths if isinstance(profiles, ProfileList) else tuple(profiles)
    if any(ell == 0 for ell in colengths):
        logger.error(f"Quantum weight requested for colength tuple {colengths}")
        raise ZeroColengthProfile(f"profile with colength 0 in {colengths}",
                                  witness=str(profiles) if isinstance(profiles, ProfileList) else None)
    return _quantum_weight_closed(tuple(sorted(colengths)))


def quantum_weight_truncated(colengths, q_value, truncation=60):
    """Multi-geometric sum over 1 <= b_1 <= ... <= b_k <= B with c_b = q^(b-1), numerically."""
    q_value = mpmath.mpf(q_value)
    c = [q_value ** i for i in range(truncation)]
    return weight_factor_generic(tuple(colengths), c, "G-dual")


# Weighted Hurwitz numbers

def _compositions(d, k):
    for cuts in itertools.combinations(range(1, d), k - 1):
        bounds = (0,) + cuts + (d,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(k))


def profile_tuples(n, d):
    """Ordered tuples of partitions of n with positive colengths summing to d."""
    for k in range(1, d + 1):
        for composition in _compositions(d, k):
            choices = [colength_partitions(n, ell) for ell in composition]
            if any(not options for options in choices):
                continue
            yield from itertools.product(*choices)


def _grouped_tuples(n, d):
    grouped = Counter(tuple(sorted(profiles, reverse=True)) for profiles in profile_tuples(n, d))
    return sorted(grouped.items())


def _weighted_term(item, mu, weight_fn, method, n_brute):
    key, count = item
    pure = pure_hurwitz(ProfileList(key + (mu,)), method, n_brute)
    if pure == 0:
        return None
    return _scale(weight_fn(key), pure * count)


def _weighted_sum(mu, d, weight_fn, method, n_brute, zero):
    if d < 0:
        raise UsageError("d must be non-negative")
    if d == 0:
        return pure_hurwitz(ProfileList((mu,)), method, n_brute)
    groups = _grouped_tuples(mu.weight, d)
    logger.debug(f"H^{d}({mu}): {len(groups)} unordered profile tuples")
    terms = ordered_map(partial(_weighted_term, mu=mu, weight_fn=weight_fn, method=method, n_brute=n_brute), groups)
    total = zero
    for term in terms:
        if term is not None:
            total = total + term
    return total


def _quantum_key_weight(key):
    return quantum_weight(ProfileList(key))


def quantum_weighted_hurwitz(mu, d, method="character", n_brute=N_BRUTE):
    """H^d_{H_q}(mu) as an exact rational function; H^0(mu) is the pure number H(mu)."""
    value = _weighted_sum(mu, d, _quantum_key_weight, method, n_brute, RatFuncQ.zero())
    if not isinstance(value, RatFuncQ):
        value = RatFuncQ.constant(value)
    return HurwitzResult(value, mu.weight, d, mu, method)


class _GenericKeyWeight:
    """Picklable weight callback bound to a parameter list."""

    def __init__(self, params):
        self.params = params

    def __call__(self, key):
        return weight_factor_generic(tuple(p.colength for p in key), self.params.c, self.params.mode)


def generic_weighted_hurwitz(mu, d, params, method="character", n_brute=N_BRUTE):
    """H^d_G or H^d_{G~} for a finite parameter list; values live in the ring of the c_i."""
    value = _weighted_sum(mu, d, _GenericKeyWeight(params), method, n_brute, 0)
    return HurwitzResult(value, mu.weight, d, mu, method, extra={"mode": params.mode})


def hurwitz_table(n, d_max, method="character", n_brute=N_BRUTE):
    """H^d(mu) for every partition mu of n and 0 <= d <= d_max, in reverse-lex then d order."""
    logger.info(f"Building quantum Hurwitz table for N={n}, d <= {d_max} ({method})")
    return [quantum_weighted_hurwitz(mu, d, method, n_brute)
            for mu in partitions_of(n) for d in range(d_max + 1)]
