"""Consistency under extension: n-fold products, unconstrained
associativity, repeated-event convergence, and range densification.

A product structure carries the rectangle rule
P(A₁×…×Aₙ | B₁×…×Bₙ) = P(A₁|B₁) ∘ … ∘ P(Aₙ|Bₙ).  Because ∘ is only
partially observed, rectangle values are resolved through one of two
oracles:

* ``CompositionClosure`` — the saturation of the witnessed table under
  the product rule: whenever (a₁,b₁,c₁) and (a₂,b₂,c₂) are witnessed
  decompositions and a₁∘a₂, b₁∘b₂ are resolvable, the product witnesses
  (a₁∘a₂) ∘ (b₁∘b₂) = c₁∘c₂, which either defines new cells or merges
  unknown ones (union-find).  A functional clash during saturation is an
  extension inconsistency.
* a canonical completion (supplied by the isomorphism pipeline once the
  structure is certified multiplicative) under which every composition
  resolves.

Checks that must not assume the conclusion (unconstrained associativity)
use the closure and report coverage; constructive operations (building
the dice pair, convergence sequences, densified grids) use the
completion.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field

from .errors import (
    ExtensionInconsistent,
    MeshUnreachable,
    PreconditionUnmet,
)
from .event_algebra import Event, EventAlgebra, ProductAlgebra
from .plausibility_model import (
    GENERAL,
    CompositionTable,
    PlausibilityModel,
    classify,
)
from .structure_checks import FAIL, PASS, CheckEntry, CoxConfig, _timed, _value_sets
from .values import PValue


class CompositionClosure:
    """Saturation of a witnessed composition table under the product rule.

    ``resolve(x, y)`` returns the forced value of x∘y or None.  The
    first functional clash encountered, if any, is kept in ``conflict``.

    Internally everything runs on small-int value ids (distinct values
    already differ by more than the tolerance after model construction,
    so id equality carries the tolerance semantics).  Saturation is
    quadratic in the witnessed-triple count and is skipped above
    MAX_TRIPLES: direct lookups remain, coverage shrinks, verdicts keep
    their meaning.
    """

    MAX_TRIPLES = 800

    def __init__(self, table: CompositionTable, tolerance: float, max_rounds: int = 4):
        self.tolerance = tolerance
        self.conflict = None
        values = sorted(
            {v for key in table.entries for v in key} | set(table.entries.values())
        )
        self._values = values
        self._ids = {v: i for i, v in enumerate(values)}
        self._parent: dict = {}
        self._value: dict = {}
        triples = set()
        for (x, y), z in table.items():
            cell = (self._ids[x], self._ids[y])
            zi = self._ids[z]
            self._set_value(cell, zi)
            triples.add(cell + (zi,))
        self.saturated = len(triples) <= self.MAX_TRIPLES
        if self.saturated:
            self._saturate(triples, max_rounds)

    def _find(self, cell):
        parent = self._parent
        root = cell
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(cell, cell) != cell:
            parent[cell], cell = root, parent[cell]
        return root

    def _set_value(self, cell, value_id):
        root = self._find(cell)
        existing = self._value.get(root)
        if existing is None:
            self._value[root] = value_id
        elif existing != value_id and self.conflict is None:
            self.conflict = (cell, self._values[existing], self._values[value_id])

    def _union(self, c1, c2) -> bool:
        r1, r2 = self._find(c1), self._find(c2)
        if r1 == r2:
            return False
        v1, v2 = self._value.get(r1), self._value.get(r2)
        self._parent[r1] = r2
        if v1 is not None:
            if v2 is None:
                self._value[r2] = v1
            elif v1 != v2 and self.conflict is None:
                self.conflict = ((r1, r2), self._values[v1], self._values[v2])
        return True

    def resolve(self, x: PValue, y: PValue) -> PValue | None:
        xi = self._ids.get(x)
        yi = self._ids.get(y)
        if xi is None or yi is None:
            return None
        vi = self._value.get(self._find((xi, yi)))
        return None if vi is None else self._values[vi]

    def _saturate(self, triples: set, max_rounds: int):
        find, union = self._find, self._union
        value = self._value
        for _ in range(max_rounds):
            changed = False
            snapshot = sorted(triples)
            for a1, b1, c1 in snapshot:
                for a2, b2, c2 in snapshot:
                    pa = value.get(find((a1, a2)))
                    if pa is None:
                        continue
                    pb = value.get(find((b1, b2)))
                    if pb is None:
                        continue
                    if union((pa, pb), (c1, c2)):
                        changed = True
                    v = value.get(find((pa, pb)))
                    if v is not None:
                        t = (pa, pb, v)
                        if t not in triples:
                            triples.add(t)
                            changed = True
                        t = (c1, c2, v)
                        if t not in triples:
                            triples.add(t)
                            changed = True
            if not changed or self.conflict is not None:
                return


@dataclass
class ProductStructure:
    """The n-fold extension of a base model.

    ``algebra`` is materialized when the product atom count fits the
    enumeration cap and lazy otherwise.  ``rectangle_value`` resolves
    the table rule through the oracle; None means the partial ∘ cannot
    resolve the rectangle (only possible with the closure oracle).
    """

    base: PlausibilityModel
    n: int
    algebra: object
    oracle: object
    checks: list = field(default_factory=list)

    def factor_value(self, a_mask: int, b_mask: int) -> PValue:
        return self.base.value_by_masks(a_mask, b_mask)

    def rectangle_value(self, factor_pairs) -> PValue | None:
        """Value of P(A₁×…×Aₙ | B₁×…×Bₙ), left-associated.

        ``factor_pairs`` is a sequence of (a_mask, b_mask) in the base
        algebra; every bᵢ must be nonempty.
        """
        if any(b == 0 for _, b in factor_pairs):
            raise PreconditionUnmet("conditioning rectangle has an empty factor")
        values = [self.base.value_by_masks(a, b) for a, b in factor_pairs]
        acc = values[0]
        for v in values[1:]:
            acc = self._compose(acc, v)
            if acc is None:
                return None
        return acc

    def _compose(self, x, y):
        if hasattr(self.oracle, "compose"):
            return self.oracle.compose(x, y)
        return self.oracle.resolve(x, y)

    def as_model(self) -> PlausibilityModel:
        """Materialize the product as a full plausibility model.

        Needs a materialized product algebra and a completion oracle:
        non-rectangle events are evaluated by decomposing into product
        blocks and summing the recovered (canonical) values, then
        mapping back — the finite-additivity extension of the rectangle
        rule.
        """
        if isinstance(self.algebra, ProductAlgebra) or self.algebra is None:
            raise PreconditionUnmet("product algebra is lazy; cannot materialize")
        if not hasattr(self.oracle, "phi"):
            raise PreconditionUnmet("materialization needs a certified completion")
        if self.n == 1:
            return self.base
        completion = self.oracle
        base = self.base
        full = base.algebra.space.full_mask
        base_blocks = base.algebra.blocks()
        lazy = ProductAlgebra((base.algebra,) * self.n)
        block_measure: dict[int, PValue] = {}
        for combo in itertools.product(base_blocks, repeat=self.n):
            mass = completion.phi(base.value_by_masks(combo[0], full))
            for b in combo[1:]:
                mass = mass * completion.phi(base.value_by_masks(b, full))
            block_measure[lazy.rectangle_mask(combo)] = mass
        blocks = sorted(block_measure)

        def measure(mask: int) -> PValue:
            total = None
            for b in blocks:
                if b & mask == b:
                    total = block_measure[b] if total is None else total + block_measure[b]
            return PValue.of(0) if total is None else total

        table = {}
        for given in self.algebra.events:
            if given.is_empty:
                continue
            m_given = measure(given.mask)
            if m_given.approx == 0.0:
                raise PreconditionUnmet(
                    "conditioning event with zero recovered mass"
                )
            for ev in self.algebra.events:
                ratio = measure(ev.mask & given.mask) / m_given
                table[(ev.mask, given.mask)] = completion.phi_inv(ratio)
        return PlausibilityModel(self.algebra, table, tolerance=base.tolerance)


def extend(
    model: PlausibilityModel,
    n: int,
    completion=None,
    config: CoxConfig | None = None,
    skip_prechecks: bool = False,
) -> ProductStructure:
    """Build the n-fold product structure and re-run the base axioms on
    it (sampled beyond the enumeration cap, seed recorded).

    Raises ExtensionInconsistent when the product violates an axiom:
    rectangle values that depend on association order, order-reversing
    nested rectangles, or values escaping [min P, max P].
    """
    config = config or CoxConfig()
    if n < 1:
        raise PreconditionUnmet("fold count must be >= 1")
    if not skip_prechecks:
        _require_base_checks(model, config)

    if completion is None:
        from .plausibility_model import ConflictReport, infer_composition

        table = infer_composition(model)
        if isinstance(table, ConflictReport):
            raise PreconditionUnmet("decomposability fails on the base model")
        oracle = CompositionClosure(table, model.tolerance)
        if oracle.conflict is not None:
            cell, v1, v2 = oracle.conflict
            raise ExtensionInconsistent(
                f"product rule forces two values for one ∘ cell: "
                f"{v1} vs {v2}"
            )
    else:
        oracle = completion

    if n == 1:
        return ProductStructure(model, 1, model.algebra, oracle, checks=[])

    lazy = ProductAlgebra((model.algebra,) * n)
    product_size = model.algebra.space.size**n
    if product_size <= config.enumeration_cap:
        from .event_algebra import product_algebra

        algebra = model.algebra
        for _ in range(n - 1):
            algebra = product_algebra(algebra, model.algebra, config.enumeration_cap)
    else:
        algebra = lazy
    structure = ProductStructure(model, n, algebra, oracle)
    structure.checks = _product_consistency_checks(structure, lazy, config)
    return structure


def _require_base_checks(model: PlausibilityModel, config: CoxConfig):
    from .plausibility_model import ConflictReport, infer_composition, infer_negation
    from .structure_checks import (
        check_associativity_constrained,
        check_cancellativity,
        check_composition_monotonicity,
        check_inclusion_monotonicity,
        find_identity,
    )

    if classify(model) != GENERAL:
        return
    entry = check_inclusion_monotonicity(model, config)
    if entry.verdict == FAIL:
        raise PreconditionUnmet("base model fails inclusion monotonicity")
    table = infer_composition(model)
    if isinstance(table, ConflictReport):
        raise PreconditionUnmet("base model fails decomposability")
    nmap = infer_negation(model)
    if isinstance(nmap, ConflictReport):
        raise PreconditionUnmet("base model fails negation functionality")
    for check in (
        check_composition_monotonicity,
        check_cancellativity,
        find_identity,
        check_associativity_constrained,
    ):
        if check(table, model).verdict == FAIL:
            raise PreconditionUnmet(f"base model fails {check.__name__}")


def _product_consistency_checks(
    structure: ProductStructure, lazy: ProductAlgebra, config: CoxConfig
) -> list:
    """Axioms 1–4 on the product, restricted to rectangles plus sampled
    complements; raises ExtensionInconsistent on violation."""
    model = structure.base
    rng = random.Random(config.sample_seed)
    events = [e.mask for e in model.algebra.events]
    nonempty = [m for m in events if m != 0]
    n = structure.n
    checks = []

    def sample_rect(include_empty=True):
        pool = events if include_empty else nonempty
        return tuple(rng.choice(pool) for _ in range(n))

    lo, hi = model.min_value(), model.max_value()
    budget = min(config.sample_budget, 4000)

    # Axiom 3 on the product: decomposability of rectangle triples.
    resolved = checked = 0
    for _ in range(budget):
        r1 = sample_rect()
        r2 = sample_rect()
        r3 = sample_rect(include_empty=False)
        r13 = tuple(a & c for a, c in zip(r1, r3))
        if any(m == 0 for m in r13):
            continue
        v_12_3 = structure.rectangle_value(
            list(zip((a & b for a, b in zip(r1, r2)), r3))
        )
        v_1_3 = structure.rectangle_value(list(zip(r1, r3)))
        v_2_13 = structure.rectangle_value(list(zip(r2, r13)))
        if v_12_3 is None or v_1_3 is None or v_2_13 is None:
            continue
        composed = structure._compose(v_1_3, v_2_13)
        if composed is None:
            continue
        checked += 1
        if not composed.close_to(v_12_3, model.tolerance):
            raise ExtensionInconsistent(
                "product decomposability clash on sampled rectangles: "
                f"{composed} vs {v_12_3}"
            )
        if v_12_3 < lo or v_12_3 > hi:
            raise ExtensionInconsistent(
                f"product value {v_12_3} escapes [{lo}, {hi}]"
            )
    checks.append(
        {
            "name": "product_decomposability",
            "verdict": PASS,
            "note": f"{checked} sampled rectangle triples, seed {config.sample_seed}",
        }
    )

    # Association-order independence of the rectangle rule (n >= 3).
    if n >= 3:
        mismatches = _association_scan(structure, rng, budget)
        if mismatches:
            raise ExtensionInconsistent(
                "rectangle value depends on association order: " + mismatches
            )
        checks.append(
            {
                "name": "product_association_independence",
                "verdict": PASS,
                "note": f"sampled foldings agree",
            }
        )

    # Axiom 2 on the product: nested rectangles stay ordered.
    ordered = 0
    for _ in range(budget):
        sub = sample_rect()
        sup = tuple(s | rng.choice(events) for s in sub)
        given = sample_rect(include_empty=False)
        v_sub = structure.rectangle_value(list(zip(sub, given)))
        v_sup = structure.rectangle_value(list(zip(sup, given)))
        if v_sub is None or v_sup is None:
            continue
        ordered += 1
        if v_sub > v_sup:
            raise ExtensionInconsistent(
                f"nested rectangles reverse order: {v_sub} > {v_sup}"
            )
    checks.append(
        {
            "name": "product_monotonicity",
            "verdict": PASS,
            "note": f"{ordered} sampled nested pairs",
        }
    )

    # Axiom 4 on the product: sampled complements through N where defined.
    from .plausibility_model import ConflictReport, infer_negation

    nmap = infer_negation(model)
    if not isinstance(nmap, ConflictReport):
        involutions = 0
        for _ in range(budget // 4):
            rect = sample_rect()
            given = sample_rect(include_empty=False)
            v = structure.rectangle_value(list(zip(rect, given)))
            if v is None:
                continue
            nv = nmap.get(v)
            if nv is None:
                continue
            nnv = nmap.get(nv)
            involutions += 1
            if nnv is not None and not nnv.close_to(v, model.tolerance):
                raise ExtensionInconsistent(
                    f"negation fails involution on product value {v}"
                )
        checks.append(
            {
                "name": "product_negation",
                "verdict": PASS,
                "note": f"{involutions} sampled complement values",
            }
        )
    return checks


def _association_scan(structure: ProductStructure, rng, budget) -> str:
    model = structure.base
    events = [e.mask for e in model.algebra.events]
    nonempty = [m for m in events if m != 0]
    n = structure.n
    for _ in range(budget):
        pairs = [(rng.choice(events), rng.choice(nonempty)) for _ in range(n)]
        values = [model.value_by_masks(a, b) for a, b in pairs]
        results = [r for r in _foldings(values, structure) if r is not None]
        for a, b in itertools.combinations(results, 2):
            if not a.close_to(b, model.tolerance):
                return (
                    f"foldings of {[v.to_json() for v in values]} give "
                    f"{a.to_json()} and {b.to_json()}"
                )
    return ""


def _foldings(values, structure):
    """All bracketing results for up to 4 factors (enough for the checks)."""
    if len(values) == 2:
        yield structure._compose(values[0], values[1])
        return
    for split in range(1, len(values)):
        for left in _foldings_value(values[:split], structure):
            if left is None:
                continue
            for right in _foldings_value(values[split:], structure):
                if right is None:
                    continue
                yield structure._compose(left, right)


def _foldings_value(values, structure):
    if len(values) == 1:
        yield values[0]
        return
    yield from _foldings(values, structure)


# ---------------------------------------------------------------------------
# unconstrained associativity


def check_associativity_unconstrained(
    model: PlausibilityModel,
    config: CoxConfig | None = None,
    closure: CompositionClosure | None = None,
    completion=None,
) -> CheckEntry:
    """(x∘y)∘z = x∘(y∘z) on unconstrained triples x = P(A|D),
    y = P(B|D), z = P(C|D) sharing one conditioning event.

    Lookups resolve through the product-rule closure (the factorized
    events (A,Ω,Ω), (Ω,B,Ω), (Ω,Ω,C) given (D,D,D) realize these triples
    in the 3-fold extension).  Unresolvable triples are counted, not
    asserted.  When a certified completion is available, every triple is
    re-verified under it as well.
    """
    config = config or CoxConfig()

    def run():
        nonlocal closure
        if closure is None:
            from .plausibility_model import ConflictReport, infer_composition

            table = infer_composition(model)
            if isinstance(table, ConflictReport):
                return CheckEntry("", "skipped", note="decomposability failed")
            closure = CompositionClosure(table, model.tolerance)
        if closure.conflict is not None:
            cell, v1, v2 = closure.conflict
            return CheckEntry(
                "",
                FAIL,
                counterexample={
                    "reason": "product-rule closure forces two values for one cell",
                    "values": [v1.to_json(), v2.to_json()],
                },
            )
        value_sets = _value_sets(model)
        work = sum(len(vs) ** 3 for vs in value_sets.values())
        sampled_note = ""
        if work > config.work_threshold:
            rng = random.Random(config.sample_seed)
            value_sets = {
                m: tuple(rng.sample(vs, min(len(vs), 12)))
                for m, vs in value_sets.items()
            }
            sampled_note = f"; value sets sampled to 12, seed {config.sample_seed}"
        # first realizing event per (value, D) for replayable witnesses
        realizer: dict = {}
        for (a_mask, b_mask), v in model.pairs():
            realizer.setdefault((v, b_mask), a_mask)
        checked = unresolved = 0
        seen = set()
        for d in model.algebra.events:
            if d.is_empty:
                continue
            vs = value_sets[d.mask]
            for x, y, z in itertools.product(vs, repeat=3):
                if (x, y, z) in seen:
                    continue
                seen.add((x, y, z))
                xy = closure.resolve(x, y)
                yz = closure.resolve(y, z)
                left = closure.resolve(xy, z) if xy is not None else None
                right = closure.resolve(x, yz) if yz is not None else None
                if left is None or right is None:
                    unresolved += 1
                    continue
                checked += 1
                if not left.close_to(right, model.tolerance):
                    members = lambda m: list(Event(model.algebra.space, m).members)
                    return CheckEntry(
                        "",
                        FAIL,
                        counterexample={
                            "triple (x,y,z)": [x.to_json(), y.to_json(), z.to_json()],
                            "(x∘y)∘z": left.to_json(),
                            "x∘(y∘z)": right.to_json(),
                            "events": {
                                "A": members(realizer[(x, d.mask)]),
                                "B": members(realizer[(y, d.mask)]),
                                "C": members(realizer[(z, d.mask)]),
                                "D": members(d.mask),
                            },
                        },
                    )
        note = f"{checked} resolved value triples, {unresolved} unresolved{sampled_note}"
        if completion is not None:
            certified_fail = _certified_triple_scan(model, completion, value_sets)
            if certified_fail is not None:
                return certified_fail
            note += f"; all {checked + unresolved} re-verified under certified completion"
        return CheckEntry("", PASS, note=note)

    return _timed("associativity_unconstrained", model.mode, run)


def _certified_triple_scan(model, completion, value_sets):
    seen = set()
    for d_mask, vs in value_sets.items():
        for x, y, z in itertools.product(vs, repeat=3):
            if (x, y, z) in seen:
                continue
            seen.add((x, y, z))
            left = completion.compose(completion.compose(x, y), z)
            right = completion.compose(x, completion.compose(y, z))
            if not left.close_to(right, model.tolerance):
                return CheckEntry(
                    "",
                    FAIL,
                    counterexample={
                        "triple (x,y,z)": [x.to_json(), y.to_json(), z.to_json()],
                        "(x∘y)∘z": left.to_json(),
                        "x∘(y∘z)": right.to_json(),
                        "oracle": "certified completion",
                    },
                )
    return None


# ---------------------------------------------------------------------------
# repeated events


@dataclass
class ConvergenceResult:
    """The repeated-event sequence vᵢ = P(C×…×C | D×…×D) and its limit.

    ``verdict`` is "converges" (to P(∅|D), with a geometric tail
    certificate), "stalls" (limit strictly above P(∅|D): a structural
    failure), or "unresolved" (the partial ∘ ran out of data).
    """

    values: list
    delta: PValue | None
    verdict: str
    structural_failure: bool
    note: str = ""

    def csv_rows(self):
        yield "i,v_i"
        for i, v in enumerate(self.values, start=1):
            yield f"{i},{v.to_json()}"


def repeated_event_convergence(
    model: PlausibilityModel,
    c: Event,
    d: Event,
    i_max: int = 64,
    completion=None,
    config: CoxConfig | None = None,
) -> ConvergenceResult:
    """Iterate the repeated-event value and certify its limit.

    Requires P(∅|D) < P(C|D) < P(Ω|D).  With a certified completion the
    sequence is the exact geometric vᵢ = Φ⁻¹(Φ(v₁)ⁱ) and the limit
    P(∅|D) is certified by the geometric tail; with only witnessed data
    the chain stops where ∘ stops resolving.
    """
    config = config or CoxConfig()
    bottom = model.value_by_masks(0, d.mask)
    top = model.value_by_masks(model.algebra.space.full_mask, d.mask)
    v1 = model.value(c, d)
    if not (bottom < v1 < top):
        raise PreconditionUnmet(
            f"P(C|D) = {v1} is not strictly between {bottom} and {top}"
        )
    tol = config.convergence_tol

    if completion is not None:
        u1 = completion.phi(v1)
        values = []
        u = u1
        for _ in range(i_max):
            values.append(completion.phi_inv(u))
            u = u * u1
        ratio = u1.to_json()
        return ConvergenceResult(
            values=values,
            delta=bottom,
            verdict="converges",
            structural_failure=False,
            note=(
                f"geometric with ratio Φ(v₁) = {ratio}; "
                f"tail after i={i_max} bounded by v_{i_max}·Φ(v₁)^k → {bottom}"
            ),
        )

    from .plausibility_model import ConflictReport, infer_composition

    table = infer_composition(model)
    if isinstance(table, ConflictReport):
        raise PreconditionUnmet("decomposability fails; no composition to iterate")
    closure = CompositionClosure(table, model.tolerance)
    values = [v1]
    while len(values) < i_max:
        nxt = closure.resolve(values[-1], v1)
        if nxt is None:
            return ConvergenceResult(
                values=values,
                delta=None,
                verdict="unresolved",
                structural_failure=False,
                note=f"∘ unresolvable past i={len(values)} on witnessed data",
            )
        if nxt == values[-1]:
            stalled_above = values[-1] > bottom
            return ConvergenceResult(
                values=values + [nxt],
                delta=values[-1],
                verdict="stalls" if stalled_above else "converges",
                structural_failure=stalled_above,
                note="sequence is constant from here"
                + ("; limit exceeds P(∅|D): cancellativity is violated" if stalled_above else ""),
            )
        values.append(nxt)
    delta = values[-1]
    converged = (delta - bottom).approx <= tol
    return ConvergenceResult(
        values=values,
        delta=delta if not converged else bottom,
        verdict="converges" if converged else "stalls",
        structural_failure=not converged,
        note=f"reached i={i_max}",
    )


# ---------------------------------------------------------------------------
# densification


def densified_range(
    model: PlausibilityModel,
    eps: float,
    completion=None,
    i_max: int = 64,
    max_points: int = 60000,
) -> list:
    """Extension-generated values filling [P(∅|B), P(Ω|B)] to mesh ≤ ε.

    Products of observed values (and their negation images) are generated
    through the completion until the largest gap in original coordinates
    is at most ε.  Raises MeshUnreachable for trivial models or when the
    budget runs out first.
    """
    if classify(model) != GENERAL:
        raise MeshUnreachable("no strictly intermediate value to densify with")
    if completion is None:
        raise PreconditionUnmet("densification needs a certified completion")
    lo, hi = model.min_value(), model.max_value()
    one = PValue.of(1)
    seeds = sorted(
        {completion.phi(v) for v in model.range_values if lo < v < hi},
        reverse=True,
    )
    grid = {completion.phi(lo), completion.phi(hi)} | set(seeds)
    grid |= {one - u for u in seeds}

    def mesh_gap():
        originals = sorted(completion.phi_inv(u) for u in grid)
        return max((b - a).approx for a, b in zip(originals, originals[1:]))

    if mesh_gap() <= eps:
        return sorted(completion.phi_inv(u) for u in grid)
    frontier = list(seeds)
    for _ in range(i_max):
        new = set()
        for u in frontier:
            for s in seeds:
                prod = u * s
                if prod.approx <= 0.0:
                    continue
                if prod not in grid:
                    new.add(prod)
        # negation images fill the upper end of the interval
        new |= {one - u for u in new if 0.0 < (one - u).approx < 1.0}
        new -= grid
        if not new:
            break
        grid |= new
        frontier = sorted(new, reverse=True)
        if mesh_gap() <= eps:
            return sorted(completion.phi_inv(u) for u in grid)
        if len(grid) > max_points:
            break
    raise MeshUnreachable(
        f"mesh {eps} not reached with {len(grid)} generated values"
    )
