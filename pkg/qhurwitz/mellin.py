"""Numeric H_q(z), its large-|z| asymptotics, the Mellin-Barnes kernel A_{H_q,k}
and contour quadrature of the adapted basis.

All evaluations run inside ``mpmath.workprec`` blocks derived from the
``NumericParams`` they receive, never from the global mpmath precision.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import mpmath
from mpmath.calculus.quadrature import GaussLegendre

from constants import LOGGER_NAME
from qhurwitz.errors import (ContourTooShort, NonRealResult, PolePoint, PoleProximity, PrecisionLoss, UsageError,
                             WrongRegion)
from qhurwitz.numeric import fmt, ordered_map, to_mp

logger = logging.getLogger(LOGGER_NAME)

ASYMPTOTIC_VARIANTS = ("derived", "printed")
ORIENTATIONS = ("reflected", "direct")
CONTOUR_SHAPES = ("rectangle", "hairpin")
PANEL_LENGTH = mpmath.mpf(1) / 2
RESIDUE_RADIUS = mpmath.mpf(1) / 4
RESIDUE_POINTS = 64


# H_q(z) = prod_{m>=0} (1 - q^m z)^(-1) = sum_{n>=0} z^n / (q;q)_n for |z| < 1

@dataclass(frozen=True)
class HqEvaluator:
    params: object
    asymptotic_threshold: float = 100.0
    cross_check: bool = False
    series_radius: float = 0.5
    cross_check_factor: float = 4.0

    def product_cutoff(self, z):
        """Smallest M with q^M|z| / ((1-q)(1-q^M|z|)) below 2^-precision_bits."""
        with self.params.workprec(10):
            q, size, eps = self.params.q_mp(), abs(mpmath.mpmathify(z)), self.params.epsilon()
            if size == 0:
                return 0
            cutoff, qm = 0, mpmath.mpf(1)
            while True:
                cutoff += 1
                qm *= q
                if qm * size < 1 and qm * size / ((1 - q) * (1 - qm * size)) < eps:
                    return cutoff

    def regime(self, z):
        """series where every term ratio |z|/(1-q^n) stays below series_radius, product elsewhere."""
        size = abs(mpmath.mpmathify(z))
        if size < self.series_radius * (1 - self.params.q_mp()):
            return "series"
        if self.cross_check and mpmath.re(z) < 0 and size >= self.asymptotic_threshold:
            return "product+asymptotic"
        return "product"

    def asymptotic_bound(self, z):
        """Size of the dropped log(-q/z; q)_inf correction, times cross_check_factor."""
        q = self.params.q_mp()
        return self.cross_check_factor * q / ((1 - q) ** 2 * abs(z))


def _log_q_product(z, q, eps, pole_guard=None):
    """sum_{m<M} log(1 - q^m z) with M from the geometric tail bound."""
    total, qm, size = mpmath.mpf(0), mpmath.mpf(1), abs(z)
    while True:
        factor = 1 - qm * z
        if pole_guard is not None and abs(factor) < pole_guard:
            return None, qm
        total += mpmath.log(factor)
        qm *= q
        if qm * size < 1 and qm * size / ((1 - q) * (1 - qm * size)) < eps:
            return total, qm


def _q_binomial_series(z, q, eps):
    """sum z^n / (q;q)_n; each term ratio is z / (1 - q^(n+1))."""
    term, total, qn = mpmath.mpf(1), mpmath.mpf(1), mpmath.mpf(1)
    while True:
        qn *= q
        term *= z / (1 - qn)
        total += term
        ratio = abs(z) / (1 - qn * q)
        if ratio < 1 and abs(term) * ratio / (1 - ratio) < eps * abs(total):
            return total


def hq_eval(z, ev):
    """H_q(z): the q-binomial series near the origin, a log-space truncated product elsewhere.

    With ev.cross_check set, product values at |z| >= asymptotic_threshold in the left half plane are
    compared with hq_asymptotic and PrecisionLoss is raised when they disagree.
    """
    params = ev.params
    with params.workprec(10):
        z = mpmath.mpmathify(z)
        if z == 0:
            return mpmath.mpf(1)
        regime = ev.regime(z)
        if regime == "series":
            value = _q_binomial_series(z, params.q_mp(), params.epsilon())
            return value.real if isinstance(z, mpmath.mpf) else value
        log_sum, qm = _log_q_product(z, params.q_mp(), params.epsilon(), params.separation_threshold())
        if log_sum is None:
            logger.error(f"H_q evaluated within {fmt(params.separation_threshold(), 5)} of a pole at z={fmt(z, 20)}")
            raise PoleProximity(f"z = {fmt(z, 20)} is too close to the pole 1/q^m with q^m = {fmt(qm, 10)}",
                                witness=fmt(z, 20))
        value = mpmath.exp(-log_sum)
        if isinstance(z, mpmath.mpf):
            value = value.real
        if regime == "product+asymptotic":
            residual = abs(-log_sum - hq_asymptotic(z, ev))
            bound = ev.asymptotic_bound(z)
            logger.debug(f"H_q({fmt(z, 10)}): product vs asymptotic log residual {fmt(residual, 5)}")
            if residual > bound:
                logger.error(f"H_q({fmt(z, 10)}) disagrees with its asymptotic form by {fmt(residual, 5)}")
                raise PrecisionLoss(f"product and asymptotic log H_q differ by {fmt(residual, 10)} at z = {fmt(z, 20)}",
                                    witness={"z": fmt(z, 20), "residual": fmt(residual, 10), "bound": fmt(bound, 10)})
    return value


def qpochhammer_inf(z, params):
    """(z; q)_inf = prod_{m>=0} (1 - q^m z), entire in z."""
    with params.workprec(10):
        z = mpmath.mpmathify(z)
        q, eps = params.q_mp(), params.epsilon()
        product, qm = mpmath.mpf(1), mpmath.mpf(1)
        while True:
            product *= 1 - qm * z
            qm *= q
            if qm * abs(z) < 1 and qm * abs(z) / ((1 - q) * (1 - qm * abs(z))) < eps:
                return product


def q_constant(q):
    """C_q = -(pi^2/6)(1/log q + log q/(2 pi^2))."""
    log_q = mpmath.log(q)
    return -(mpmath.pi ** 2 / 6) * (1 / log_q + log_q / (2 * mpmath.pi ** 2))


def periodic_part(x, q, variant="derived", eps=None):
    """sum_k cos(2 pi k log x/log q) / (k sinh(2 pi^2 k/log q)); the printed variant omits 1/k."""
    log_q, log_x = mpmath.log(q), mpmath.log(x)
    eps = eps or mpmath.eps
    terms = []
    k = 1
    while True:
        term = mpmath.cos(2 * mpmath.pi * k * log_x / log_q) / mpmath.sinh(2 * mpmath.pi ** 2 * k / log_q)
        if variant == "derived":
            term /= k
        terms.append(term)
        if abs(term) < eps * max(1, abs(terms[0])):
            return mpmath.fsum(terms)
        k += 1


def periodic_term_ratio(q):
    """|second term / first term| of the periodic sum at log x = 0."""
    a = 2 * mpmath.pi ** 2 / abs(mpmath.log(q))
    return mpmath.sinh(a) / (2 * mpmath.sinh(2 * a))


def hq_asymptotic(z, ev, variant="derived"):
    """Large-|z| form of log H_q(z) in the left half plane.

    derived: L^2/(2 log q) - L/2 - S(-z) - C_q with L = log(-z).
    printed: linear term -L/(2 log q) and no 1/k in S.
    """
    if variant not in ASYMPTOTIC_VARIANTS:
        raise UsageError(f"asymptotic variant must be one of {ASYMPTOTIC_VARIANTS}, got '{variant}'")
    params = ev.params
    with params.workprec(10):
        z = mpmath.mpmathify(z)
        if mpmath.re(z) >= 0:
            logger.error(f"Asymptotic H_q requested at Re z >= 0 (z={fmt(z, 10)})")
            raise WrongRegion(f"asymptotic form needs Re z < 0, got z = {fmt(z, 20)}", witness=fmt(z, 20))
        q = params.q_mp()
        log_q, big_l = mpmath.log(q), mpmath.log(-z)
        linear = big_l / 2 if variant == "derived" else big_l / (2 * log_q)
        return big_l ** 2 / (2 * log_q) - linear - periodic_part(-z, q, variant, params.epsilon()) - q_constant(q)


# Mellin-Barnes kernel

@dataclass(frozen=True)
class MBKernel:
    """A_{H_q,k}(s) = (-beta)^(1-k) Gamma(1-k-s) prod_m (-beta q^m)^(-s) Gamma(c_m)/Gamma(s+c_m),
    c_m = -1/(beta q^m), with the product truncated at M and a second-order tail correction."""
    k: int
    params: object
    tol: float = 1e-20
    z_max: float = 64.0
    guard: int = 8
    tail_correction_order: int = 2
    product_cutoff: int = field(init=False)
    extra_bits: int = field(init=False)
    _constants: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        q = float(self.params.q)
        cutoff = math.ceil(math.log(self.tol / (self.z_max ** 2 + self.z_max + 1)) / math.log(q)) + self.guard
        object.__setattr__(self, "product_cutoff", cutoff)
        object.__setattr__(self, "extra_bits", int(cutoff * math.log2(1 / q)) + 10)
        with mpmath.workprec(self.params.precision_bits + self.extra_bits):
            beta, q_mp = self.params.beta_mp(), self.params.q_mp()
            c = [-1 / (beta * q_mp ** m) for m in range(cutoff)]
            log_c_sum = mpmath.fsum(mpmath.log(value) for value in c)
            g0 = mpmath.fsum(mpmath.loggamma(value) for value in c)
            tail_scale = -beta * q_mp ** cutoff / (1 - q_mp)
            third_order = beta ** 2 * q_mp ** (2 * cutoff) / (1 - q_mp ** 2)
            object.__setattr__(self, "_constants",
                               (tuple(c), log_c_sum, g0, tail_scale, third_order, mpmath.log(-beta)))
        logger.debug(f"MB kernel k={self.k}: M={cutoff}, extra bits {self.extra_bits}")

    def tail_bound(self, s):
        """Size of the first neglected term of the product tail at s."""
        third_order = self._constants[4]
        return abs(s) ** 3 * third_order

    def log_value(self, s):
        c, log_c_sum, g0, tail_scale, _, log_minus_beta = self._constants
        with mpmath.workprec(self.params.precision_bits + self.extra_bits):
            s = mpmath.mpc(s)
            nearest = int(mpmath.nint(mpmath.re(s)))
            if nearest >= 1 - self.k and abs(s - nearest) < self.params.separation_threshold():
                logger.error(f"Kernel A_{self.k} evaluated on its pole s={nearest}")
                raise PolePoint(f"s = {fmt(s, 15)} is a pole of Gamma(1-k-s) for k = {self.k}", witness=nearest)
            bound = self.tail_bound(s)
            if bound > self.tol:
                logger.error(f"Kernel product tail {fmt(bound, 5)} above tolerance at s={fmt(s, 10)}")
                raise PrecisionLoss(f"product tail bound {fmt(bound, 5)} exceeds {self.tol} at s = {fmt(s, 15)}",
                                    witness=fmt(s, 15))
            tail = -s * (s - 1) / 2 * tail_scale
            return ((1 - self.k) * log_minus_beta + mpmath.loggamma(1 - self.k - s) + s * log_c_sum + g0
                    - mpmath.fsum(mpmath.loggamma(s + value) for value in c) + tail)

    def __call__(self, s):
        with mpmath.workprec(self.params.precision_bits + self.extra_bits):
            return mpmath.exp(self.log_value(s))

    def product_at(self, n):
        """The Gamma-ratio product alone at a positive integer s = n."""
        c, log_c_sum, g0, tail_scale, _, _ = self._constants
        with mpmath.workprec(self.params.precision_bits + self.extra_bits):
            tail = -n * (n - 1) * tail_scale / 2
            return mpmath.exp(n * log_c_sum + g0 - mpmath.fsum(mpmath.loggamma(n + value) for value in c) + tail)


def mb_kernel(s, kern):
    return kern(s)


# Contour quadrature

@dataclass(frozen=True)
class ContourSpec:
    """Closed contour around the real-axis poles, traversed counter-clockwise.

    rectangle: lower leg left to right, up at s_max, upper leg right to left, down at left_turn.
    hairpin: the same legs from left_turn + delta, closed on the left by a half circle of radius
    delta through left_turn. Both cross the real axis at left_turn and s_max and differ only off
    the axis, so they enclose the same poles. None means chosen per kernel.
    """
    delta: float = 0.25
    left_turn: object = None
    s_max: object = None
    nodes_per_unit: int = 48
    tol: float = 1e-14
    s_cap: int = 64
    shape: str = "rectangle"

    def __post_init__(self):
        if not 0 < self.delta < 0.5:
            raise UsageError(f"contour offset must lie in (0, 1/2), got {self.delta}")
        panel_nodes = self.nodes_per_unit // 2
        if self.nodes_per_unit % 2 or panel_nodes % 3 or (panel_nodes // 3) & (panel_nodes // 3 - 1):
            raise UsageError(f"nodes_per_unit must be 6 * 2^j (12, 24, 48, 96, ...), got {self.nodes_per_unit}")
        if self.shape not in CONTOUR_SHAPES:
            raise UsageError(f"contour shape must be one of {CONTOUR_SHAPES}, got '{self.shape}'")

    @classmethod
    def parse(cls, text, **defaults):
        """"delta,left,smax,nodes[,shape]" with "auto" for left/smax."""
        fields = [item.strip() for item in str(text).split(",")]
        if len(fields) not in (4, 5):
            raise UsageError(f"contour needs delta,left,smax,nodes[,shape]; got '{text}'")
        try:
            delta = float(fields[0])
            left = None if fields[1] == "auto" else float(fields[1])
            s_max = None if fields[2] == "auto" else float(fields[2])
            nodes = int(fields[3])
        except ValueError as e:
            raise UsageError(f"cannot read contour '{text}': {e}")
        if len(fields) == 5:
            defaults["shape"] = fields[4]
        return cls(delta=delta, left_turn=left, s_max=s_max, nodes_per_unit=nodes, **defaults)

    @property
    def degree(self):
        return int(math.log2(self.nodes_per_unit // 6)) + 1

    def refined(self):
        return replace(self, nodes_per_unit=self.nodes_per_unit * 2)

    def left_for(self, k):
        return mpmath.mpf(1 - k) - PANEL_LENGTH if self.left_turn is None else mpmath.mpf(self.left_turn)

    def describe(self, k, s_max):
        return {"shape": self.shape, "delta": self.delta, "left_turn": fmt(self.left_for(k), 10),
                "s_max": fmt(s_max, 10), "nodes_per_unit": self.nodes_per_unit}


@dataclass(frozen=True)
class MellinWeight:
    """w(s) = sign * s^power * exp(s log_base) * (cos(pi s) if reflected)."""
    log_base: object
    reflected: bool
    power: int = 0
    sign: int = -1

    @classmethod
    def for_argument(cls, x, scale=1, power=0, orientation="reflected"):
        """Weight reproducing phi_k(scale * x) (or D^power phi_k) from the kernel, x > 0."""
        if orientation not in ORIENTATIONS:
            raise UsageError(f"orientation must be one of {ORIENTATIONS}, got '{orientation}'")
        x, scale = to_mp(x), to_mp(scale)
        if x <= 0:
            raise UsageError(f"contour evaluation needs x > 0, got {fmt(x, 15)}")
        if orientation == "direct":
            return cls(mpmath.log(scale * x), False, power, 1)
        # poles of A at integers n: w(n) = sign (-scale x)^n
        return cls(mpmath.log(abs(scale) * x), scale > 0, power, -1)

    def __call__(self, s):
        value = mpmath.exp(s * self.log_base)
        if self.reflected:
            value *= mpmath.cos(mpmath.pi * s)
        if self.power:
            value *= s ** self.power
        return self.sign * value


@lru_cache(maxsize=None)
def _legendre_nodes(degree, prec):
    return tuple(GaussLegendre(mpmath.mp).calc_nodes(degree, prec))


def _segment_nodes(start, end, degree, prec):
    length = abs(end - start)
    panels = max(1, int(mpmath.ceil(length / PANEL_LENGTH - mpmath.mpf(10) ** -10)))
    step = (end - start) / panels
    points, weights = [], []
    for p in range(panels):
        mid = start + step * (p + mpmath.mpf(1) / 2)
        for t, w in _legendre_nodes(degree, prec):
            points.append(mid + step * t / 2)
            weights.append(w * step / 2)
    return points, weights


def _arc_nodes(centre, radius, start_angle, end_angle, degree, prec):
    """Gauss-Legendre panels in the angle along s = centre + radius e^(i theta)."""
    length = abs(end_angle - start_angle) * radius
    panels = max(1, int(mpmath.ceil(length / PANEL_LENGTH - mpmath.mpf(10) ** -10)))
    step = (end_angle - start_angle) / panels
    points, weights = [], []
    for p in range(panels):
        mid = start_angle + step * (p + mpmath.mpf(1) / 2)
        for t, w in _legendre_nodes(degree, prec):
            theta = mid + step * t / 2
            point = centre + radius * mpmath.expj(theta)
            points.append(point)
            weights.append(w * step / 2 * 1j * (point - centre))
    return points, weights


@dataclass(frozen=True)
class ContourNodes:
    points: tuple
    weights: tuple
    left_turn: object
    s_max: object


def contour_nodes(k, spec, s_max):
    prec = mpmath.mp.prec
    delta = mpmath.mpf(spec.delta)
    left = spec.left_for(k)
    start = left if spec.shape == "rectangle" else left + delta
    legs = [mpmath.mpc(start, -delta), mpmath.mpc(s_max, -delta), mpmath.mpc(s_max, delta),
            mpmath.mpc(start, delta)]
    if spec.shape == "rectangle":
        legs.append(legs[0])
    points, weights = [], []
    for begin, end in zip(legs, legs[1:]):
        seg_points, seg_weights = _segment_nodes(begin, end, spec.degree, prec)
        points += seg_points
        weights += seg_weights
    if spec.shape == "hairpin":
        arc_points, arc_weights = _arc_nodes(start, delta, mpmath.pi / 2, 3 * mpmath.pi / 2, spec.degree, prec)
        points += arc_points
        weights += arc_weights
    return ContourNodes(tuple(points), tuple(weights), left, s_max)


def choose_s_max(kern, spec, weights):
    """Smallest half-integer right edge where |A w| has fallen below tol * 1e-3 of its early size and decays."""
    if spec.s_max is not None:
        return mpmath.mpf(spec.s_max)
    start = int(spec.left_for(kern.k) + 2) + PANEL_LENGTH
    reference, previous = None, None
    s = start
    while s <= spec.s_cap:
        sample = mpmath.mpc(s, spec.delta)
        size = max(abs(kern(sample) * w(sample)) for w in weights)
        reference = size if reference is None else max(reference, size)
        if previous is not None and size < previous and size < spec.tol * mpmath.mpf(10) ** -3 * reference:
            logger.debug(f"Contour for k={kern.k}: s_max={fmt(s, 6)}, |A w| = {fmt(size, 5)}")
            return s
        previous = size
        s += 1
    logger.error(f"Integrand for k={kern.k} still {fmt(previous, 5)} at the cap s={spec.s_cap}")
    raise ContourTooShort(f"integrand above tolerance at s_max cap {spec.s_cap} for k = {kern.k}",
                          witness=fmt(previous, 10))


@dataclass(frozen=True)
class ContourResult:
    values: tuple
    contour: dict
    kernel_cutoff: int
    kernel_tail_bound: object
    truncation_bound: object

    @property
    def value(self):
        return self.values[0]

    def to_json(self):
        return {"value": fmt(self.values[0]), "contour": self.contour, "kernel_cutoff": self.kernel_cutoff,
                "kernel_tail_bound": fmt(self.kernel_tail_bound, 5), "truncation_bound": fmt(self.truncation_bound, 5)}


def contour_integrals(kern, spec, weights, jobs=None):
    """(1/2 pi i) closed-contour integrals of A(s) w(s) for several weights sharing one set of nodes."""
    params = kern.params
    with params.workprec(16):
        s_max = choose_s_max(kern, spec, weights)
        nodes = contour_nodes(kern.k, spec, s_max)
        logger.debug(f"Contour k={kern.k}: {len(nodes.points)} nodes up to s_max={fmt(s_max, 6)}")
        kernel_values = ordered_map(kern, nodes.points, jobs)
        results = []
        for w in weights:
            total = mpmath.fsum(a * w(s) * dz for a, s, dz in zip(kernel_values, nodes.points, nodes.weights))
            value = total / (2j * mpmath.pi)
            if abs(value.imag) > 10 * spec.tol * max(1, abs(value)):
                logger.error(f"Contour integral has imaginary part {fmt(value.imag, 5)}")
                raise NonRealResult(f"imaginary part {fmt(value.imag, 5)} above tolerance",
                                    witness=fmt(value, 20))
            results.append(value.real)
        corner = mpmath.mpc(s_max, spec.delta)
        truncation = max(abs(kern(corner) * w(corner)) for w in weights)
        tail_bound = kern.tail_bound(corner)
    return ContourResult(tuple(results), spec.describe(kern.k, s_max), kern.product_cutoff, tail_bound, truncation)


def phi_mellin_eval(k, x, contour, kern, scale=1, orientation="reflected", power=0, jobs=None):
    """phi_k(scale * x) (or D^power of it) as a contour integral of the kernel."""
    if kern.k != k:
        raise UsageError(f"kernel built for k={kern.k} used for k={k}")
    with kern.params.workprec(16):
        weight = MellinWeight.for_argument(x, scale, power, orientation)
    return contour_integrals(kern, contour, [weight], jobs)


def kernel_residue(kern, pole, points=RESIDUE_POINTS, radius=RESIDUE_RADIUS, weight=None):
    """(1/2 pi i) integral of A (times weight) over a small circle, trapezoidal rule."""
    with kern.params.workprec(16):
        samples = []
        for index in range(points):
            offset = radius * mpmath.expj(2 * mpmath.pi * index / points)
            s = pole + offset
            value = kern(s) * offset
            if weight is not None:
                value *= weight(s)
            samples.append(value)
        return mpmath.fsum(samples) / points


def pole_set_audit(kern):
    """Residues of A_k at s = -k (not a pole) and s = 1-k (first pole)."""
    with kern.params.workprec(16):
        at_minus_k = kernel_residue(kern, -kern.k)
        at_first = kernel_residue(kern, 1 - kern.k)
    scale = max(abs(at_first), mpmath.mpf(10) ** -300)
    convention = "1-k+j" if abs(at_minus_k) / scale < 1e-12 else "-k+j"
    logger.info(f"Pole set for k={kern.k}: residue at -k {fmt(abs(at_minus_k), 5)}, at 1-k {fmt(at_first, 10)}")
    return {"convention": convention, "residue_at_minus_k": at_minus_k, "residue_at_one_minus_k": at_first}


def kernel_decay(kern, points=(5.5, 10.5, 20.5)):
    """log|A| at increasing real half-integers; the decay is superlinear when the slopes steepen."""
    with kern.params.workprec(16):
        logs = [mpmath.re(kern.log_value(mpmath.mpf(s))) for s in points]
        slopes = [(logs[i + 1] - logs[i]) / (points[i + 1] - points[i]) for i in range(len(points) - 1)]
        beta, log_q = kern.params.beta_mp(), mpmath.log(kern.params.q_mp())
        leading = [s * mpmath.log(-beta * s) ** 2 / (2 * log_q) for s in points]
    superlinear = all(slope < 0 for slope in slopes) and all(b < a for a, b in zip(slopes, slopes[1:]))
    return {"points": list(points), "log_abs": logs, "slopes": slopes, "leading_term": leading,
            "superlinear": superlinear}
