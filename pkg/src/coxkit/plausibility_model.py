"""Conditional plausibility assignments and the inferred ∘ and N tables.

A model holds P(A|B) for every pair of events with B nonempty, together
with the observed value range.  The composition table ∘ (defined by
P(A∩B|C) = P(A|C) ∘ P(B|A∩C)) and the negation map N (defined by
P(Aᶜ|B) = N(P(A|B))) are inferred by enumerating witnesses; a
functional conflict is the corresponding axiom's failure signal and is
reported with both witnessing triples.

Arithmetic is exact (rational) when every table entry is exact;
otherwise the whole model is demoted to float64 and values closer than
the functional-conflict tolerance are clustered onto one representative.
Models are immutable after construction and the inference operations are
pure, so triple enumeration can be partitioned across workers with a
deterministic merge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import PreconditionUnmet
from .event_algebra import Event, EventAlgebra
from .values import DEFAULT_TOLERANCE, PValue, cluster_representatives

DEGENERATE = "degenerate"
TRIVIAL = "trivial"
GENERAL = "general"


@dataclass(frozen=True)
class CountableCertificate:
    """A declared truncated atom stream with an analytic tail bound.

    The stream's atom weights are ratioⁱ (i ≥ 1); the declared limit of
    the partial sums is ratio/(1−ratio) and the tail after depth n is
    ratioⁿ⁺¹/(1−ratio) — "2^-n" for the half-ratio stream.  Countable
    additivity is certified against this bound, never verified on an
    actual infinite space.
    """

    ratio: "Fraction"
    depth: int = 20

    def weight(self, i: int):
        return self.ratio**i

    def partial_sum(self, n: int):
        return sum(self.ratio**i for i in range(1, n + 1))

    @property
    def declared_limit(self):
        return self.ratio / (1 - self.ratio)

    def tail(self, n: int):
        return self.ratio ** (n + 1) / (1 - self.ratio)

    def to_json(self) -> dict:
        return {
            "weights": f"({self.ratio})^i",
            "ratio": f"{self.ratio.numerator}/{self.ratio.denominator}",
            "depth": self.depth,
            "tail": "2^-n" if self.ratio == Fraction(1, 2) else "ratio^(n+1)/(1-ratio)",
        }

    @staticmethod
    def from_json(data: dict) -> "CountableCertificate":
        from fractions import Fraction as F

        if "ratio" in data:
            ratio = F(data["ratio"])
        elif data.get("weights") == "2^-i":
            ratio = F(1, 2)
        else:
            raise ValueError(f"unsupported weight rule in {data}")
        return CountableCertificate(ratio=ratio, depth=int(data.get("depth", 20)))


@dataclass(frozen=True)
class Witness:
    """Events realizing one decomposability instance P(A∩B|C)=P(A|C)∘P(B|A∩C)."""

    a_mask: int
    b_mask: int
    c_mask: int

    def describe(self, algebra: EventAlgebra) -> dict:
        ev = lambda m: list(Event(algebra.space, m).members)
        return {"A": ev(self.a_mask), "B": ev(self.b_mask), "C": ev(self.c_mask)}


@dataclass(frozen=True)
class ConflictReport:
    """Two witnesses assigning different values to one table key."""

    kind: str  # "composition" | "negation" | "explicit"
    key: tuple
    values: tuple
    witnesses: tuple
    message: str = ""

    def describe(self, algebra: EventAlgebra) -> dict:
        return {
            "kind": self.kind,
            "key": [v.to_json() for v in self.key],
            "values": [v.to_json() for v in self.values],
            "witnesses": [
                w.describe(algebra) if isinstance(w, Witness) else w
                for w in self.witnesses
            ],
            "message": self.message,
        }


@dataclass
class CompositionTable:
    """Partial binary operation on observed values, with provenance.

    ``entries`` maps (x, y) -> x∘y; ``provenance`` keeps the first
    witness per entry plus a count; ``source`` distinguishes inferred
    entries from explicitly supplied ones.
    """

    entries: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)

    def get(self, x: PValue, y: PValue) -> PValue | None:
        return self.entries.get((x, y))

    def items(self):
        return self.entries.items()

    def __len__(self):
        return len(self.entries)

    def record(self, key, value, witness, origin="inferred", tol=DEFAULT_TOLERANCE):
        """Insert one entry; returns a ConflictReport on a functional clash."""
        existing = self.entries.get(key)
        if existing is None:
            self.entries[key] = value
            self.provenance[key] = witness
            self.counts[key] = 1
            self.source[key] = origin
            return None
        self.counts[key] += 1
        if existing.close_to(value, tol):
            return None
        return ConflictReport(
            kind="composition" if origin == "inferred" else "explicit",
            key=key,
            values=(existing, value),
            witnesses=(self.provenance[key], witness),
        )


@dataclass
class NegationMap:
    """Partial involution on observed values: x -> N(x)."""

    entries: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)

    def get(self, x: PValue) -> PValue | None:
        return self.entries.get(x)

    def items(self):
        return self.entries.items()

    def __len__(self):
        return len(self.entries)

    def record(self, key, value, witness, origin="inferred", tol=DEFAULT_TOLERANCE):
        existing = self.entries.get(key)
        if existing is None:
            self.entries[key] = value
            self.provenance[key] = witness
            self.source[key] = origin
            return None
        if existing.close_to(value, tol):
            return None
        return ConflictReport(
            kind="negation" if origin == "inferred" else "explicit",
            key=(key,),
            values=(existing, value),
            witnesses=(self.provenance[key], witness),
        )

    def involution_violations(self, tol=DEFAULT_TOLERANCE):
        out = []
        for x, nx in self.entries.items():
            nnx = self.entries.get(nx)
            if nnx is not None and not nnx.close_to(x, tol):
                out.append((x, nx, nnx))
        return out

    def strictly_decreasing(self) -> bool:
        dom = sorted(self.entries)
        for a, b in zip(dom, dom[1:]):
            if not self.entries[a] > self.entries[b]:
                return False
        return True


class PlausibilityModel:
    """The raw assignment P(A|B) over an event algebra.

    The table must be total: defined for every pair of algebra events
    with B ≠ ∅.  ``explicit_composition`` / ``explicit_negation`` carry
    optional user-supplied tables, cross-checked against the inferred
    ones.  ``countable`` optionally carries a declared truncated atom
    stream for countable-additivity certification.
    """

    def __init__(
        self,
        algebra: EventAlgebra,
        table: dict,
        tolerance: float = DEFAULT_TOLERANCE,
        explicit_composition: tuple = (),
        explicit_negation: tuple = (),
        countable=None,
    ):
        self.algebra = algebra
        self.tolerance = tolerance
        self.explicit_composition = tuple(explicit_composition)
        self.explicit_negation = tuple(explicit_negation)
        self.countable = countable

        normalized = {}
        for (a_mask, b_mask), value in table.items():
            normalized[(a_mask, b_mask)] = PValue.of(value)
        expected = len(algebra.events) * (len(algebra.events) - 1)
        missing = []
        for b in algebra.events:
            if b.is_empty:
                continue
            for a in algebra.events:
                if (a.mask, b.mask) not in normalized:
                    missing.append((a.members, b.members))
        if missing:
            raise PreconditionUnmet(
                f"table is not total: {len(missing)} missing pairs, "
                f"first {missing[0]}"
            )
        if len(normalized) != expected:
            extra = set(normalized) - {
                (a.mask, b.mask)
                for b in algebra.events
                if not b.is_empty
                for a in algebra.events
            }
            raise PreconditionUnmet(f"table has {len(extra)} foreign pairs")

        self.exact = all(v.is_exact for v in normalized.values())
        if not self.exact:
            demoted = {k: v.demoted() for k, v in normalized.items()}
            reps = cluster_representatives(demoted.values(), tolerance)
            normalized = {k: reps.get(v, v) for k, v in demoted.items()}
        self._table = normalized
        self.range_values = tuple(sorted(set(normalized.values())))

    # -- lookups ---------------------------------------------------------

    def value_by_masks(self, a_mask: int, b_mask: int) -> PValue:
        return self._table[(a_mask, b_mask)]

    def value(self, a: Event, b: Event) -> PValue:
        return self._table[(a.mask, b.mask)]

    def pairs(self):
        """Iterate ((a_mask, b_mask), value) in canonical order."""
        for b in self.algebra.events:
            if b.is_empty:
                continue
            for a in self.algebra.events:
                yield (a.mask, b.mask), self._table[(a.mask, b.mask)]

    @property
    def table(self) -> dict:
        return dict(self._table)

    def observed_tops(self) -> set[PValue]:
        full = self.algebra.space.full_mask
        return {
            self._table[(full, b.mask)]
            for b in self.algebra.events
            if not b.is_empty
        }

    def observed_bottoms(self) -> set[PValue]:
        return {
            self._table[(0, b.mask)] for b in self.algebra.events if not b.is_empty
        }

    def min_value(self) -> PValue:
        return self.range_values[0]

    def max_value(self) -> PValue:
        return self.range_values[-1]

    @property
    def mode(self) -> str:
        return "exact" if self.exact else "float"

    def __repr__(self):
        return (
            f"PlausibilityModel({self.algebra.space.size} atoms, "
            f"{len(self.algebra.events)} events, {self.mode})"
        )


def infer_composition(model: PlausibilityModel):
    """Enumerate decomposability witnesses and build the ∘ table.

    All (A, B, C) with C ≠ ∅ and A∩C ≠ ∅ are enumerated literally
    (value-keyed shortcuts are unsound on adversarial tables).  Returns
    the CompositionTable, or a ConflictReport naming the two witnesses
    of the first functional clash.  Deterministic: events are scanned in
    canonical mask order.
    """
    tol = model.tolerance
    event_masks = [e.mask for e in model.algebra.events]
    # The tight loops run on small-int value ids: after construction,
    # distinct values differ by more than the tolerance (floats were
    # clustered), so id equality is exactly the close_to semantics.
    ids = {v: i for i, v in enumerate(model.range_values)}
    vals = model.range_values
    # rows[b_mask][a_mask] = id of P(A|B), in canonical order so the
    # first reported conflict never depends on the caller's dict order
    rows: dict[int, dict[int, int]] = {}
    for (a_mask, b_mask), v in model.pairs():
        rows.setdefault(b_mask, {})[a_mask] = ids[v]
    entries: dict = {}
    provenance: dict = {}
    counts: dict = {}
    for c_mask, row_c in rows.items():
        for a_mask, x in row_c.items():
            ac_mask = a_mask & c_mask
            if ac_mask == 0:
                continue
            row_ac = rows[ac_mask]
            for b_mask in event_masks:
                y = row_ac[b_mask]
                z = row_c[a_mask & b_mask]
                key = (x, y)
                existing = entries.get(key)
                if existing is None:
                    entries[key] = z
                    provenance[key] = Witness(a_mask, b_mask, c_mask)
                    counts[key] = 1
                elif existing == z:
                    counts[key] += 1
                else:
                    return ConflictReport(
                        kind="composition",
                        key=(vals[x], vals[y]),
                        values=(vals[existing], vals[z]),
                        witnesses=(
                            provenance[key],
                            Witness(a_mask, b_mask, c_mask),
                        ),
                    )
    table = CompositionTable(
        entries={(vals[x], vals[y]): vals[z] for (x, y), z in entries.items()},
        provenance={(vals[x], vals[y]): w for (x, y), w in provenance.items()},
        counts={(vals[x], vals[y]): c for (x, y), c in counts.items()},
        source={(vals[x], vals[y]): "inferred" for (x, y) in entries},
    )
    for entry in model.explicit_composition:
        x, y, z = (PValue.of(v) for v in entry)
        conflict = table.record((x, y), z, "explicit", origin="explicit", tol=tol)
        if conflict is not None:
            return conflict
    return table


def infer_negation(model: PlausibilityModel):
    """Enumerate complement witnesses and build the negation map.

    Records P(A|B) -> P(Aᶜ|B) over all pairs; a functional clash is the
    negation axiom's failure and is returned as a ConflictReport.
    """
    nmap = NegationMap()
    tol = model.tolerance
    full = model.algebra.space.full_mask
    lookup = model._table
    for b in model.algebra.events:
        if b.is_empty:
            continue
        for a in model.algebra.events:
            x = lookup[(a.mask, b.mask)]
            nx = lookup[(full ^ a.mask, b.mask)]
            conflict = nmap.record(x, nx, Witness(a.mask, 0, b.mask), tol=tol)
            if conflict is not None:
                return conflict
    for entry in model.explicit_negation:
        x, nx = (PValue.of(v) for v in entry)
        conflict = nmap.record(x, nx, "explicit", origin="explicit", tol=tol)
        if conflict is not None:
            return conflict
    return nmap


def classify(model: PlausibilityModel) -> str:
    """degenerate (< 4 events), trivial (no strictly intermediate value),
    or general."""
    if len(model.algebra.events) < 4:
        return DEGENERATE
    lookup = model._table
    full = model.algebra.space.full_mask
    for b in model.algebra.events:
        if b.is_empty:
            continue
        bottom = lookup[(0, b.mask)]
        top = lookup[(full, b.mask)]
        for a in model.algebra.events:
            v = lookup[(a.mask, b.mask)]
            if bottom < v < top:
                return GENERAL
    return TRIVIAL
