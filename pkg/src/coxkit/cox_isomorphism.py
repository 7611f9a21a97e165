"""Construction of the isomorphism onto standard conditional probability.

The pipeline certifies, stage by stage, that a plausibility model is a
transformed probability measure and constructs the transform:

1. affine normalization onto [0,1] (min P ↦ 0, max P ↦ 1);
2. the scaling exponent m solved from the negation map — every
   normalized complement pair (u, w) must satisfy u^m + w^m = 1 for one
   common m, and the negation fixed point is then h = (1/2)^(1/m);
3. certification that the normalized-and-scaled table is multiplicative
   on every witnessed decomposition (power maps preserve
   multiplicativity, so this is decided by the data, not by m);
4. the sum rule N(x) = 1−x and its functional equation, finite
   additivity, a truncated countable-additivity certificate, and the
   Kolmogorov verdicts K1–K3 on the transformed table;
5. an additive generator recovered constructively (dyadic square-root
   chains plus piecewise-linear interpolation) over the certified
   composition, with its associativity residual.

Exact rational arithmetic is kept whenever the model is exact and the
exponent admits perfect roots; otherwise the pipeline runs in float64
within the configured tolerance.  Intermediate quantities (reference
points, generator scale) are reported in canonicalized form; the
composite transform is what is unique.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    DegenerateRange,
    NoFixedPoint,
    NonAssociativeData,
    PipelineError,
    PreconditionUnmet,
)
from .event_algebra import Event
from .plausibility_model import (
    DEGENERATE,
    GENERAL,
    TRIVIAL,
    ConflictReport,
    CountableCertificate,
    NegationMap,
    PlausibilityModel,
    classify,
    infer_composition,
    infer_negation,
)
from .structure_checks import (
    FAIL,
    PASS,
    SKIPPED,
    CheckEntry,
    CheckReport,
    CoxConfig,
    check_algebra_closure,
    check_associativity_constrained,
    check_cancellativity,
    check_composition_monotonicity,
    check_inclusion_monotonicity,
    find_identity,
    _timed,
)
from .values import PValue, exact_pow

STAGES = (
    "algebra_closure",
    "inclusion_monotonicity",
    "decomposability",
    "negation",
    "composition_monotonicity",
    "cancellativity",
    "identity",
    "associativity_constrained",
    "associativity_unconstrained",
    "normalization",
    "scaling",
    "product_rule",
    "sum_rule",
    "repeated_event_convergence",
    "generator",
    "finite_additivity",
    "countable_additivity",
    "kolmogorov",
)


# ---------------------------------------------------------------------------
# canonical transform


class CanonicalForm:
    """Φ(x) = ((x − lo)/(hi − lo))^m, the certified order isomorphism
    onto [0,1] under which ∘ is multiplication.

    ``compose`` evaluates x∘y = Φ⁻¹(Φ(x)·Φ(y)); exact rationals are
    preserved whenever m admits perfect roots.
    """

    def __init__(self, lo: PValue, hi: PValue, m_float: float, m_exact: Fraction | None):
        self.lo = lo
        self.hi = hi
        self.m_float = m_float
        self.m_exact = m_exact
        self.exact = (
            m_exact is not None and lo.is_exact and hi.is_exact
        )
        self._span = hi - lo

    def phi(self, x: PValue) -> PValue:
        u = (PValue.of(x) - self.lo) / self._span
        if self.exact and u.is_exact:
            powered = exact_pow(u.as_fraction(), self.m_exact)
            if powered is not None:
                return PValue.of(powered)
        return PValue.of(self._pow_float(max(u.approx, 0.0), self.m_float))

    def phi_inv(self, u: PValue) -> PValue:
        u = PValue.of(u)
        if self.exact and u.is_exact:
            powered = exact_pow(u.as_fraction(), 1 / self.m_exact)
            if powered is not None:
                return self.lo + self._span * PValue.of(powered)
        root = self._pow_float(max(u.approx, 0.0), 1.0 / self.m_float)
        return self.lo + self._span * PValue.of(root)

    def compose(self, x: PValue, y: PValue) -> PValue:
        return self.phi_inv(self.phi(x) * self.phi(y))

    @staticmethod
    def _pow_float(base: float, exp: float) -> float:
        if base == 0.0:
            return 0.0
        return math.exp(math.log(base) * exp)

    # float-only fast path for the generator machinery
    def phi_float(self, x: float) -> float:
        u = (x - self.lo.approx) / self._span.approx
        return self._pow_float(max(u, 0.0), self.m_float)

    def phi_inv_float(self, u: float) -> float:
        return self.lo.approx + self._span.approx * self._pow_float(
            max(u, 0.0), 1.0 / self.m_float
        )

    def compose_float(self, x: float, y: float) -> float:
        return self.phi_inv_float(self.phi_float(x) * self.phi_float(y))

    def describe(self) -> dict:
        return {
            "lo": self.lo.to_json(),
            "hi": self.hi.to_json(),
            "m": self.m_exact and f"{self.m_exact.numerator}/{self.m_exact.denominator}"
            or self.m_float,
            "exact": self.exact,
        }


# ---------------------------------------------------------------------------
# normalization and scaling


def normalize(model: PlausibilityModel):
    """Affine map of the table onto [0,1]: (x − min P)/(max P − min P).

    min P and max P are the constants P(∅|·) and P(Ω|·).  Raises
    DegenerateRange when they coincide.
    """
    lo = model.min_value()
    hi = model.max_value()
    if not lo < hi:
        raise DegenerateRange(f"max P = min P = {lo}")
    span = hi - lo
    table = {k: (v - lo) / span for k, v in model.table.items()}
    return table, lo, hi


@dataclass
class ScalingResult:
    h: PValue
    m: PValue
    m_float: float
    m_exact: Fraction | None
    bisect_h: float
    note: str = ""


def scaling_exponent(
    negation_pairs, tolerance: float = 1e-9, want_exact: bool = False
) -> ScalingResult:
    """Solve for the exponent m making every normalized complement pair
    satisfy u^m + w^m = 1, and report the negation fixed point h.

    ``negation_pairs`` are the (u, N(u)) pairs of the normalized
    negation map.  The fixed point found by bisecting the interpolated
    negation against the diagonal is cross-checked against
    h = (1/2)^(1/m).  Raises NoFixedPoint when the pairs are not those
    of a strictly decreasing map through the diagonal, or when no common
    exponent exists.
    """
    pairs = [(PValue.of(u), PValue.of(w)) for u, w in negation_pairs]
    boundary_ok = any(u.approx == 0.0 and w.approx == 1.0 for u, w in pairs) and any(
        u.approx == 1.0 and w.approx == 0.0 for u, w in pairs
    )
    if not boundary_ok:
        raise NoFixedPoint("negation map lacks N(0)=1 / N(1)=0 endpoints")
    informative = [
        (u.approx, w.approx)
        for u, w in pairs
        if 0.0 < u.approx < 1.0
    ]
    for u, w in informative:
        if not 0.0 < w < 1.0:
            raise NoFixedPoint(
                f"N({u}) = {w} leaves (0,1): not strictly decreasing through the diagonal"
            )
    if not informative:
        raise NoFixedPoint("no interior negation pairs to scale with")

    estimates = sorted(_solve_pair_exponent(u, w) for u, w in set(informative))
    m_float = estimates[len(estimates) // 2]
    spread = max(abs(e - m_float) for e in estimates)
    if spread > max(1e-7, math.sqrt(tolerance)) * max(1.0, m_float):
        raise NoFixedPoint(
            f"no common scaling exponent: estimates spread over {spread:.3g}"
        )

    m_exact = None
    if want_exact:
        m_exact = _certify_exact_exponent(m_float, negation_pairs)
    if m_exact is not None:
        m_value = PValue.of(m_exact)
        m_float = float(m_exact)
        h_exact = exact_pow(Fraction(1, 2), 1 / m_exact)
        h = PValue.of(h_exact) if h_exact is not None else PValue.of(0.5 ** (1.0 / m_float))
    else:
        m_value = PValue.of(m_float)
        h = PValue.of(0.5 ** (1.0 / m_float))

    bisect_h = _bisect_fixed_point(sorted(set(informative)) )
    note = f"{len(set(informative))} interior pairs; bisected fixed point {bisect_h:.12g}"
    if abs(bisect_h - h.approx) > 1e-6:
        note += " (interpolation coarse; exponent solution is authoritative)"
    return ScalingResult(h, m_value, m_float, m_exact, bisect_h, note)


def _solve_pair_exponent(u: float, w: float) -> float:
    """Unique m > 0 with u^m + w^m = 1 (strictly decreasing in m)."""

    def f(m):
        return u**m + w**m - 1.0

    lo, hi = 1.0, 1.0
    while f(lo) <= 0.0:
        lo /= 2.0
        if lo < 1e-12:
            return 0.0
    while f(hi) > 0.0:
        hi *= 2.0
        if hi > 1e12:
            return math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def _certify_exact_exponent(m_float: float, pairs) -> Fraction | None:
    candidates = []
    for den in (1, 2, 3, 4, 5, 6, 8, 12, 24, 48):
        cand = Fraction(m_float).limit_denominator(den)
        if cand > 0 and cand not in candidates:
            candidates.append(cand)
    candidates.sort(key=lambda c: abs(float(c) - m_float))
    for cand in candidates:
        if abs(float(cand) - m_float) > 1e-6 * max(1.0, m_float):
            continue
        ok = True
        for u, w in pairs:
            u, w = PValue.of(u), PValue.of(w)
            if not (u.is_exact and w.is_exact):
                ok = False
                break
            pu = exact_pow(u.as_fraction(), cand)
            pw = exact_pow(w.as_fraction(), cand)
            if pu is None or pw is None or pu + pw != 1:
                ok = False
                break
        if ok:
            return cand
    return None


def _bisect_fixed_point(pairs) -> float:
    """Diagonal crossing of the piecewise-linear interpolation through
    the observed negation pairs (plus the forced endpoints)."""
    xs = [0.0] + [u for u, _ in pairs] + [1.0]
    ys = [1.0] + [w for _, w in pairs] + [0.0]
    order = np.argsort(xs)
    xs = np.asarray(xs)[order]
    ys = np.asarray(ys)[order]

    def n_hat(t):
        return float(np.interp(t, xs, ys))

    lo, hi = 0.0, 1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if n_hat(mid) > mid:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# sum rule and additivity


@dataclass
class SumRuleResult:
    residual_identity: float
    residual_equation: float
    pairs_checked: int
    pairs_skipped: int
    exact_zero: bool


def verify_sum_rule(
    value_map: dict,
    nmap: NegationMap,
    comp_entries,
    tolerance: float,
) -> SumRuleResult:
    """Residuals of N(x) = 1−x and of the negation functional equation
    y·N(x/y) = N(x)·N(N(y)/N(x)) on the transformed table.

    ``value_map`` sends original values to transformed ones; the
    functional equation is evaluated with the observed transformed
    negation map (looked up within tolerance in float mode), not with
    the hoped-for closed form.
    """
    t_neg = _ValueLookup(tolerance)
    for x, nx in nmap.items():
        t_neg.put(value_map[x], value_map[nx])
    one = PValue.of(1)
    res_identity = 0.0
    exact_zero = True
    for x, nx in nmap.items():
        tx, tnx = value_map[x], value_map[nx]
        diff = tnx - (one - tx)
        res_identity = max(res_identity, abs(diff.approx))
        if not (diff.is_exact and diff.as_fraction() == 0):
            exact_zero = False

    res_eq = 0.0
    checked = skipped = 0
    for (p, q), r in comp_entries:
        y = value_map[p]
        x = value_map[r]
        if not (0.0 < x.approx <= y.approx and y.approx < 1.0):
            continue
        ratio1 = x / y
        n_ratio1 = t_neg.get(ratio1)
        n_x = t_neg.get(x)
        n_y = t_neg.get(y)
        if n_ratio1 is None or n_x is None or n_y is None or n_x.approx == 0.0:
            skipped += 1
            continue
        ratio2 = n_y / n_x
        n_ratio2 = t_neg.get(ratio2)
        if n_ratio2 is None:
            skipped += 1
            continue
        lhs = y * n_ratio1
        rhs = n_x * n_ratio2
        diff = lhs - rhs
        checked += 1
        res_eq = max(res_eq, abs(diff.approx))
        if not (diff.is_exact and diff.as_fraction() == 0):
            exact_zero = False
    return SumRuleResult(res_identity, res_eq, checked, skipped, exact_zero)


class _ValueLookup:
    """Value-keyed dictionary; float keys match within tolerance."""

    def __init__(self, tolerance: float):
        self.tolerance = tolerance
        self._exact: dict = {}
        self._keys: list = []
        self._vals: list = []
        self._sorted = None

    def put(self, key: PValue, value: PValue):
        self._exact[key] = value
        self._keys.append(key.approx)
        self._vals.append(value)
        self._sorted = None

    def get(self, key: PValue):
        hit = self._exact.get(key)
        if hit is not None:
            return hit
        if key.is_exact:
            return None
        if self._sorted is None:
            order = np.argsort(self._keys)
            self._sorted = (
                np.asarray(self._keys)[order],
                [self._vals[i] for i in order],
            )
        keys, vals = self._sorted
        idx = int(np.searchsorted(keys, key.approx))
        for j in (idx - 1, idx, idx + 1):
            if 0 <= j < len(keys) and abs(keys[j] - key.approx) <= self.tolerance:
                return vals[j]
        return None


@dataclass
class AdditivityResult:
    finite_pairs: int
    finite_families: int
    max_error: float
    exact_zero: bool
    counterexample: dict | None = None


def check_additivity(
    algebra,
    transformed: dict,
    config: CoxConfig,
    exact: bool,
) -> AdditivityResult:
    """Finite additivity of the transformed table over disjoint unions.

    All disjoint pairs are enumerated (submasks of each complement);
    larger families up to the configured cap are sampled from random
    atom partitions with the recorded seed.  In exact mode the error
    must be identically zero.
    """
    events = algebra.events
    is_power = algebra.is_power_set
    contains = algebra.contains_mask
    tol = config.tolerance
    max_err = 0.0
    exact_zero = True
    pairs = families = 0
    for b in events:
        if b.is_empty:
            continue
        bm = b.mask
        for a in events:
            rest = a.complement().mask
            sub = rest
            while True:
                sub = (sub - 1) & rest
                if (is_power or contains(sub)) and (is_power or contains(a.mask | sub)):
                    lhs = transformed[(a.mask | sub, bm)]
                    rhs = transformed[(a.mask, bm)] + transformed[(sub, bm)]
                    diff = lhs - rhs
                    pairs += 1
                    err = abs(diff.approx)
                    if err > max_err:
                        max_err = err
                    nonzero_exact = diff.is_exact and diff.as_fraction() != 0
                    if diff.is_exact and not nonzero_exact:
                        pass
                    else:
                        exact_zero = False
                    if (exact and nonzero_exact) or err > tol:
                        return AdditivityResult(
                            pairs,
                            families,
                            err,
                            False,
                            counterexample={
                                "A": list(Event(algebra.space, a.mask).members),
                                "A'": list(Event(algebra.space, sub).members),
                                "B": list(Event(algebra.space, bm).members),
                                "P(A∪A'|B)": lhs.to_json(),
                                "P(A|B)+P(A'|B)": rhs.to_json(),
                            },
                        )
                if sub == 0:
                    break
    rng = random.Random(config.sample_seed)
    atoms = list(range(algebra.space.size))
    for _ in range(200):
        k = rng.randint(3, max(3, config.additivity_family_cap))
        rng.shuffle(atoms)
        cut = sorted(rng.sample(range(1, len(atoms) + 1), min(k - 1, len(atoms))))
        parts = []
        prev = 0
        for c in cut + [len(atoms)]:
            part = 0
            for i in atoms[prev:c]:
                part |= 1 << i
            if part and (is_power or contains(part)):
                parts.append(part)
            prev = c
        if len(parts) < 3:
            continue
        union = 0
        for p in parts:
            union |= p
        if not (is_power or contains(union)):
            continue
        b = algebra.space.full_mask
        lhs = transformed[(union, b)]
        rhs = transformed[(parts[0], b)]
        for p in parts[1:]:
            rhs = rhs + transformed[(p, b)]
        diff = lhs - rhs
        families += 1
        err = abs(diff.approx)
        max_err = max(max_err, err)
        if not (diff.is_exact and diff.as_fraction() == 0):
            exact_zero = False
        if err > tol:
            return AdditivityResult(
                pairs,
                families,
                err,
                False,
                counterexample={"family_size": len(parts), "error": err},
            )
    return AdditivityResult(pairs, families, max_err, exact_zero)


# ---------------------------------------------------------------------------
# generator recovery


@dataclass
class GeneratorResult:
    """Additive generator samples with the PWL interpolation rule.

    g is strictly increasing with g(identity) = 0 and g(reference) = −1;
    the generator is unique up to rescaling, and the reference pins the
    scale.  ``residual_max`` is max |g(x∘y) − g(x) − g(y)| over the
    supplied grid pairs.
    """

    samples: list
    residual_max: float
    identity: float
    reference: float
    _values: np.ndarray = field(repr=False, default=None)
    _gvals: np.ndarray = field(repr=False, default=None)

    def evaluate(self, x):
        return np.interp(x, self._values, self._gvals)

    def strictly_increasing(self) -> bool:
        return bool(np.all(np.diff(self._values) > 0) and np.all(np.diff(self._gvals) > 0))


def recover_generator(
    compose,
    grid,
    identity: float = 1.0,
    reference: float = 0.5,
    tolerance: float = 1e-9,
    max_levels: int = 80,
) -> GeneratorResult:
    """Recover g with x∘y = g⁻¹(g(x)+g(y)) by the dyadic method.

    ∘ must be a continuous, strictly increasing, cancellative operation
    with the given two-sided identity, evaluable at arbitrary float
    pairs.  Square roots s_{k+1} (s∘s = s_k) are found by bisection;
    dyadic levels are filled by repeated composition and extended by
    monotone piecewise-linear interpolation.  Raises NonAssociativeData
    when the data cannot carry an additive representation: a failed
    strictness probe or a residual above tolerance.
    """
    grid = sorted(float(x) for x in grid)
    if not grid or grid[0] <= 0.0 or grid[-1] > identity * (1 + 1e-12):
        raise PreconditionUnmet("grid must lie in (0, identity]")
    if abs(compose(reference, identity) - reference) > 1e-9 * max(1.0, reference) or abs(
        compose(identity, reference) - reference
    ) > 1e-9 * max(1.0, reference):
        raise NonAssociativeData(f"{identity} is not a two-sided identity")
    probes = np.linspace(reference, identity, 9)
    squares = [compose(t, t) for t in probes]
    if any(b - a <= 0 for a, b in zip(squares, squares[1:])):
        raise NonAssociativeData("t∘t is not strictly increasing: no generator exists")

    depth = 15
    step_count = 1 << depth
    # square-root chain: s_k with g(s_k) = -2^-k
    s = reference
    for _ in range(depth):
        s = _bisect_sqrt(compose, s, identity)
    # anchors a_j = reference-fold j times: g = -j
    floor_needed = grid[0] * grid[0]
    anchors = [identity]
    while anchors[-1] > floor_needed and len(anchors) < max_levels:
        anchors.append(compose(anchors[-1], reference))
    values = []
    gvals = []
    for j, anchor in enumerate(anchors[:-1]):
        v = anchor
        base_g = -float(j)
        for i in range(step_count):
            values.append(v)
            gvals.append(base_g - i / step_count)
            v = compose(v, s)
    values.append(anchors[-1])
    gvals.append(-float(len(anchors) - 1))
    values = np.asarray(values[::-1])
    gvals = np.asarray(gvals[::-1])
    keep = np.concatenate(([True], np.diff(values) > 0))
    values, gvals = values[keep], gvals[keep]

    def g(x):
        return np.interp(x, values, gvals)

    arr = np.asarray(grid)
    gx = g(arr)
    residual = 0.0
    floor = values[0]
    for i, x in enumerate(grid):
        for j, y in enumerate(grid):
            xy = compose(x, y)
            if xy < floor:
                continue
            residual = max(residual, abs(float(g(xy)) - float(gx[i]) - float(gx[j])))
    stride = max(1, len(values) // 512)
    samples = [(float(v), float(gv)) for v, gv in zip(values[::stride], gvals[::stride])]
    if samples[-1][0] != float(values[-1]):
        samples.append((float(values[-1]), float(gvals[-1])))
    result = GeneratorResult(
        samples=samples,
        residual_max=residual,
        identity=identity,
        reference=reference,
        _values=values,
        _gvals=gvals,
    )
    if residual > tolerance:
        raise NonAssociativeData(
            f"generator residual {residual:.3g} exceeds tolerance {tolerance:.3g}"
        )
    return result


def _bisect_sqrt(compose, target: float, identity: float) -> float:
    lo, hi = target, identity
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if compose(mid, mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# results


@dataclass
class IsomorphismResult:
    e: PValue
    min_p: PValue
    max_p: PValue
    h: PValue | None
    m: PValue | None
    generator_samples: list
    generator_residual: float | None
    transformed: dict
    residuals: dict
    k_verdicts: dict
    mode: str
    canonical: dict
    canonical_form: object = None

    def transformed_value(self, a_mask: int, b_mask: int) -> PValue:
        return self.transformed[(a_mask, b_mask)]

    def to_json(self, algebra) -> dict:
        table = []
        for b in algebra.events:
            if b.is_empty:
                continue
            for a in algebra.events:
                table.append(
                    {
                        "of": list(a.members),
                        "given": list(b.members),
                        "value": self.transformed[(a.mask, b.mask)].to_json(),
                    }
                )
        return {
            "e": self.e.to_json(),
            "min_p": self.min_p.to_json(),
            "max_p": self.max_p.to_json(),
            "h": self.h.to_json() if self.h is not None else None,
            "m": self.m.to_json() if self.m is not None else None,
            "canonical": self.canonical,
            "generator": {
                "interpolation": "piecewise-linear",
                "residual_max": self.generator_residual,
                "samples": self.generator_samples[:64],
            },
            "residuals": self.residuals,
            "kolmogorov": self.k_verdicts,
            "mode": self.mode,
            "table": table,
        }


@dataclass
class ProbabilityModel:
    algebra: object
    table: dict
    k1: str
    k2: str
    k3: str

    def value(self, a: Event, b: Event) -> PValue:
        return self.table[(a.mask, b.mask)]

    def as_plausibility_model(self, tolerance=None) -> PlausibilityModel:
        return PlausibilityModel(
            self.algebra, self.table, tolerance=tolerance or 1e-9
        )


# ---------------------------------------------------------------------------
# the pipeline


def full_pipeline(model: PlausibilityModel, config: CoxConfig | None = None):
    """Run every check and construction stage in dependency order.

    Returns (report, probability_model, isomorphism_result); the latter
    two are None when a stage failed.  Downstream entries of a failed
    stage are marked skipped, so the report always carries one entry per
    stage.
    """
    config = config or CoxConfig()
    report = CheckReport(
        context={
            "atoms": model.algebra.space.size,
            "events": len(model.algebra.events),
            "mode": model.mode,
            "tolerance": config.tolerance,
            "sample_seed": config.sample_seed,
        }
    )
    cls = classify(model)
    report.add(CheckEntry("classification", PASS, mode=model.mode, note=cls))
    if cls in (DEGENERATE, TRIVIAL):
        return _direct_embedding(model, cls, report, config)

    def bail(reason_stage):
        for name in STAGES:
            if report.entry(name) is None:
                report.add(
                    CheckEntry(name, SKIPPED, mode=model.mode, note=f"prerequisite {reason_stage} failed")
                )
        return report, None, None

    entry = check_algebra_closure(model)
    report.add(entry)
    if entry.verdict == FAIL:
        return bail("algebra_closure")

    entry = check_inclusion_monotonicity(model, config)
    report.add(entry)
    if entry.verdict == FAIL:
        return bail("inclusion_monotonicity")

    start = time.perf_counter()
    table = infer_composition(model)
    elapsed = (time.perf_counter() - start) * 1e3
    if isinstance(table, ConflictReport):
        report.add(
            CheckEntry(
                "decomposability",
                FAIL,
                mode=model.mode,
                counterexample=table.describe(model.algebra),
                elapsed_ms=elapsed,
            )
        )
        return bail("decomposability")
    report.add(
        CheckEntry(
            "decomposability",
            PASS,
            mode=model.mode,
            note=f"{len(table)} ∘ entries inferred",
            elapsed_ms=elapsed,
        )
    )

    start = time.perf_counter()
    nmap = infer_negation(model)
    elapsed = (time.perf_counter() - start) * 1e3
    if isinstance(nmap, ConflictReport):
        report.add(
            CheckEntry(
                "negation",
                FAIL,
                mode=model.mode,
                counterexample=nmap.describe(model.algebra),
                elapsed_ms=elapsed,
            )
        )
        return bail("negation")
    report.add(
        CheckEntry(
            "negation",
            PASS,
            mode=model.mode,
            note=f"{len(nmap)} N entries inferred",
            elapsed_ms=elapsed,
        )
    )

    for check in (check_composition_monotonicity, check_cancellativity, find_identity):
        entry = check(table, model)
        report.add(entry)
        if entry.verdict == FAIL:
            return bail(entry.name)
    entry = check_associativity_constrained(table, model, config)
    report.add(entry)
    if entry.verdict == FAIL:
        return bail("associativity_constrained")

    from .product_extension import (
        CompositionClosure,
        check_associativity_unconstrained,
        densified_range,
        repeated_event_convergence,
    )

    closure = CompositionClosure(table, model.tolerance)
    entry = check_associativity_unconstrained(model, config, closure=closure)
    report.add(entry)
    if entry.verdict == FAIL:
        return bail("associativity_unconstrained")

    # normalization
    try:
        start = time.perf_counter()
        norm_table, lo, hi = normalize(model)
        report.add(
            CheckEntry(
                "normalization",
                PASS,
                mode=model.mode,
                witness={"min_p": lo.to_json(), "max_p": hi.to_json()},
                elapsed_ms=(time.perf_counter() - start) * 1e3,
            )
        )
    except DegenerateRange as exc:
        report.add(CheckEntry("normalization", FAIL, mode=model.mode, note=str(exc)))
        return bail("normalization")

    # scaling
    span = hi - lo
    norm_pairs = [((x - lo) / span, (nx - lo) / span) for x, nx in nmap.items()]
    try:
        start = time.perf_counter()
        scaling = scaling_exponent(
            norm_pairs, tolerance=config.tolerance, want_exact=model.exact
        )
        report.add(
            CheckEntry(
                "scaling",
                PASS,
                mode="exact" if scaling.m_exact is not None else "float",
                witness={"h": scaling.h.to_json(), "m": scaling.m.to_json()},
                note=scaling.note,
                elapsed_ms=(time.perf_counter() - start) * 1e3,
            )
        )
    except NoFixedPoint as exc:
        report.add(CheckEntry("scaling", FAIL, mode=model.mode, note=str(exc)))
        return bail("scaling")

    canonical = CanonicalForm(lo, hi, scaling.m_float, scaling.m_exact)
    value_map = {}
    transform_exact = canonical.exact
    for v in model.range_values:
        t = canonical.phi(v)
        if not t.is_exact:
            transform_exact = False
        value_map[v] = t
    if not transform_exact:
        value_map = {k: v.demoted() for k, v in value_map.items()}
    transformed = {k: value_map[v] for k, v in model.table.items()}
    t_mode = "exact" if transform_exact else "float"

    # product rule certification: the transformed ∘ must be multiplication
    start = time.perf_counter()
    residual_product = 0.0
    product_ce = None
    for (x, y), z in table.items():
        diff = value_map[x] * value_map[y] - value_map[z]
        err = abs(diff.approx)
        residual_product = max(residual_product, err)
        exact_bad = diff.is_exact and diff.as_fraction() != 0
        if (transform_exact and exact_bad) or err > config.tolerance:
            product_ce = {
                "x": x.to_json(),
                "y": y.to_json(),
                "x∘y": z.to_json(),
                "Φ(x)Φ(y)": (value_map[x] * value_map[y]).to_json(),
                "Φ(x∘y)": value_map[z].to_json(),
            }
            break
    elapsed = (time.perf_counter() - start) * 1e3
    if product_ce is not None:
        report.add(
            CheckEntry(
                "product_rule",
                FAIL,
                mode=t_mode,
                counterexample=product_ce,
                elapsed_ms=elapsed,
            )
        )
        return bail("product_rule")
    report.add(
        CheckEntry(
            "product_rule",
            PASS,
            mode=t_mode,
            note=(
                f"max |Φ(x)Φ(y) − Φ(x∘y)| = {residual_product:.3g} over "
                f"{len(table)} entries; associativity holds on all value triples"
            ),
            elapsed_ms=elapsed,
        )
    )

    # sum rule
    start = time.perf_counter()
    sum_rule = verify_sum_rule(value_map, nmap, table.items(), config.tolerance)
    elapsed = (time.perf_counter() - start) * 1e3
    sum_ok = (
        sum_rule.exact_zero
        if transform_exact
        else max(sum_rule.residual_identity, sum_rule.residual_equation)
        <= config.tolerance
    )
    report.add(
        CheckEntry(
            "sum_rule",
            PASS if sum_ok else FAIL,
            mode=t_mode,
            note=(
                f"max |N(x)−(1−x)| = {sum_rule.residual_identity:.3g}; "
                f"functional-equation residual {sum_rule.residual_equation:.3g} "
                f"on {sum_rule.pairs_checked} pairs ({sum_rule.pairs_skipped} off-domain)"
            ),
            elapsed_ms=elapsed,
        )
    )
    if not sum_ok:
        return bail("sum_rule")

    # repeated-event convergence on a deterministic witness
    entry = _convergence_entry(model, canonical, config)
    report.add(entry)
    if entry.verdict == FAIL:
        return bail("repeated_event_convergence")

    # generator on the certified composition
    start = time.perf_counter()
    try:
        grid = _generator_grid(model, canonical, config)
        gen = recover_generator(
            canonical.compose_float,
            grid,
            identity=hi.approx,
            reference=canonical.phi_inv_float(0.5),
            tolerance=config.tolerance,
        )
        gen_entry = CheckEntry(
            "generator",
            PASS,
            mode="float",
            note=(
                f"dyadic construction on {len(grid)} support points; "
                f"residual {gen.residual_max:.3g}"
            ),
            elapsed_ms=(time.perf_counter() - start) * 1e3,
        )
        gen_samples, gen_residual = gen.samples, gen.residual_max
    except (NonAssociativeData, PreconditionUnmet) as exc:
        gen_entry = CheckEntry("generator", FAIL, mode="float", note=str(exc))
        gen_samples, gen_residual = [], None
    report.add(gen_entry)
    if gen_entry.verdict == FAIL:
        return bail("generator")

    # additivity
    start = time.perf_counter()
    add = check_additivity(model.algebra, transformed, config, transform_exact)
    elapsed = (time.perf_counter() - start) * 1e3
    finite_ok = add.counterexample is None and (
        add.exact_zero if transform_exact else add.max_error <= config.tolerance
    )
    report.add(
        CheckEntry(
            "finite_additivity",
            PASS if finite_ok else FAIL,
            mode=t_mode,
            note=(
                f"{add.finite_pairs} disjoint pairs, {add.finite_families} sampled "
                f"families (cap {config.additivity_family_cap}), max error {add.max_error:.3g}"
            ),
            counterexample=add.counterexample,
            elapsed_ms=elapsed,
        )
    )
    if not finite_ok:
        return bail("finite_additivity")

    report.add(_countable_entry(model, transformed, config))

    k1_err = max(
        abs((transformed[(model.algebra.space.full_mask, b.mask)] - PValue.of(1)).approx)
        for b in model.algebra.events
        if not b.is_empty
    )
    k2_min = min(v.approx for v in transformed.values())
    k1 = PASS if k1_err <= (0 if transform_exact else config.tolerance) else FAIL
    k2 = PASS if k2_min >= -(0 if transform_exact else config.tolerance) else FAIL
    countable_entry = report.entry("countable_additivity")
    k3 = PASS if finite_ok and countable_entry.verdict != FAIL else FAIL
    report.add(
        CheckEntry(
            "kolmogorov",
            PASS if (k1 == PASS and k2 == PASS and k3 == PASS) else FAIL,
            mode=t_mode,
            witness={"K1": k1, "K2": k2, "K3": k3},
            note=f"max |P(Ω|B)−1| = {k1_err:.3g}, min value = {k2_min:.3g}",
        )
    )

    prob = ProbabilityModel(model.algebra, transformed, k1, k2, k3)
    iso = IsomorphismResult(
        e=hi,
        min_p=lo,
        max_p=hi,
        h=scaling.h,
        m=scaling.m,
        generator_samples=gen_samples,
        generator_residual=gen_residual,
        transformed=transformed,
        residuals={
            "product_rule": residual_product,
            "sum_rule_identity": sum_rule.residual_identity,
            "sum_rule_equation": sum_rule.residual_equation,
            "generator": gen_residual,
            "finite_additivity": add.max_error,
        },
        k_verdicts={"K1": k1, "K2": k2, "K3": k3},
        mode=t_mode,
        canonical=canonical.describe(),
        canonical_form=canonical,
    )
    return report, prob, iso


def _convergence_entry(model, canonical, config) -> CheckEntry:
    from .product_extension import repeated_event_convergence

    def run():
        full = model.algebra.full
        bottom = model.value_by_masks(0, full.mask)
        top = model.value_by_masks(full.mask, full.mask)
        best = None
        for c in model.algebra.events:
            v = model.value(c, full)
            if bottom < v < top:
                score = abs(canonical.phi(v).approx - 0.5)
                if best is None or score < best[0]:
                    best = (score, c)
        if best is None:
            return CheckEntry("", SKIPPED, note="no strictly intermediate value given Ω")
        c = best[1]
        result = repeated_event_convergence(
            model, c, full, i_max=min(config.i_max, 24), completion=canonical, config=config
        )
        if result.verdict != "converges":
            return CheckEntry(
                "",
                FAIL,
                counterexample={
                    "C": list(c.members),
                    "verdict": result.verdict,
                    "delta": result.delta.to_json() if result.delta else None,
                },
            )
        shown = ", ".join(v.to_json() if isinstance(v.to_json(), str) else f"{v.approx:.3g}" for v in result.values[:4])
        return CheckEntry(
            "",
            PASS,
            witness={"C": list(c.members), "delta": result.delta.to_json()},
            note=f"v_i = {shown}, … → {result.delta.to_json()}",
        )

    return _timed("repeated_event_convergence", model.mode, run)


def _generator_grid(model, canonical, config):
    """Support points for the in-pipeline generator: observed canonical
    values densified by float products, capped at ~120 points."""
    floor = 2.0**-16
    seeds = sorted(
        {
            canonical.phi(v).approx
            for v in model.range_values
            if 0.0 < canonical.phi(v).approx < 1.0
        },
        reverse=True,
    )[:24]
    grid = set(seeds) | {1.0}
    eps = 1.0 / 40.0
    frontier = list(seeds)
    for _ in range(8):
        ordered = sorted(grid)
        gap = max(
            (b - a for a, b in zip(ordered, ordered[1:])), default=0.0
        )
        if gap <= eps or not frontier:
            break
        new = set()
        for u in frontier:
            for s in seeds:
                p = u * s
                if p >= floor and p not in grid:
                    new.add(p)
                q = 1.0 - p
                if q >= floor and 0.0 < q < 1.0 and q not in grid:
                    new.add(q)
        grid |= new
        frontier = sorted(new, reverse=True)
        if len(grid) > 4000:
            break
    grid = sorted(u for u in grid if u >= floor)
    values = [canonical.phi_inv_float(u) for u in grid]
    if len(values) > 120:
        stride = len(values) / 120.0
        values = [values[int(i * stride)] for i in range(120)] + [values[-1]]
    return sorted(set(values))


def _countable_entry(model, transformed, config) -> CheckEntry:
    def run():
        cert = model.countable
        if cert is None:
            return CheckEntry(
                "", SKIPPED, note="no declared countably-atomic stream"
            )
        n = cert.depth
        partial = cert.partial_sum(n)
        gap = cert.declared_limit - partial
        bound = cert.tail(n)
        ok = gap <= bound
        return CheckEntry(
            "",
            PASS if ok else FAIL,
            witness={
                "depth": n,
                "partial_sum": f"{partial.numerator}/{partial.denominator}",
                "gap": f"{gap.numerator}/{gap.denominator}",
                "tail_bound": f"{bound.numerator}/{bound.denominator}",
            },
            note=f"certified: gap at depth {n} is {float(gap):.3g} ≤ declared tail {float(bound):.3g}",
        )

    return _timed("countable_additivity", model.mode, run)


def _direct_embedding(model, cls, report, config):
    """Degenerate and trivial structures embed onto {0,1} directly."""
    for name in STAGES[:-3]:
        report.add(
            CheckEntry(name, SKIPPED, mode=model.mode, note=f"{cls}: direct two-point embedding")
        )
    top = model.max_value()
    zero, one = PValue.of(0), PValue.of(1)
    transformed = {
        k: (one if v == top else zero) for k, v in model.table.items()
    }
    add = check_additivity(model.algebra, transformed, config, True)
    finite_ok = add.counterexample is None and add.exact_zero
    report.add(
        CheckEntry(
            "finite_additivity",
            PASS if finite_ok else FAIL,
            mode="exact",
            note=f"{add.finite_pairs} disjoint pairs on the embedded table",
            counterexample=add.counterexample,
        )
    )
    report.add(_countable_entry(model, transformed, config))
    full = model.algebra.space.full_mask
    k1 = PASS if all(
        transformed[(full, b.mask)] == one
        for b in model.algebra.events
        if not b.is_empty
    ) else FAIL
    k2 = PASS
    k3 = PASS if finite_ok and report.entry("countable_additivity").verdict != FAIL else FAIL
    overall = PASS if (k1 == PASS and k3 == PASS and finite_ok) else FAIL
    report.add(
        CheckEntry(
            "kolmogorov",
            overall,
            mode="exact",
            witness={"K1": k1, "K2": k2, "K3": k3},
            note=f"{cls} case: two-point embedding",
        )
    )
    if overall == FAIL:
        return report, None, None
    prob = ProbabilityModel(model.algebra, transformed, k1, k2, k3)
    iso = IsomorphismResult(
        e=top,
        min_p=model.min_value(),
        max_p=top,
        h=None,
        m=None,
        generator_samples=[],
        generator_residual=None,
        transformed=transformed,
        residuals={},
        k_verdicts={"K1": k1, "K2": k2, "K3": k3},
        mode="exact",
        canonical={"embedding": "two-point", "class": cls},
    )
    return report, prob, iso


def cox_transform(model: PlausibilityModel, config: CoxConfig | None = None):
    """Full pipeline; returns (ProbabilityModel, IsomorphismResult) or
    raises PipelineError labeled with the first failing stage."""
    report, prob, iso = full_pipeline(model, config)
    if prob is None:
        stage = next((e.name for e in report.entries if e.verdict == FAIL), "unknown")
        raise PipelineError(stage, "pipeline stage failed", report)
    return prob, iso
