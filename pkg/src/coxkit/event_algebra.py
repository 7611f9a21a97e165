"""Finite sample spaces, events as bit-vectors, and event algebras.

Events are canonical bit-vectors in a fixed atom order, so set equality
is integer equality and the whole lattice is cheap to enumerate.  An
event algebra must contain the empty event and the full space and be
closed under complement and pairwise union; ``verify_algebra_closure``
checks this exhaustively and reports a witness on failure.

Product spaces join atom labels with "⊗".  Products of algebras are
materialized by fixpoint closure when the product atom count stays
within the enumeration cap, and held lazily (generating rectangles plus
a block partition for membership tests) beyond it: the dice-pair power
set with 2^36 events is not materializable.

Everything here is immutable after construction and safe to share
across concurrent workers.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .errors import CapExceeded

ENUMERATION_CAP = 12
PRODUCT_LABEL_SEP = "⊗"  # ⊗


@dataclass(frozen=True)
class AtomSpace:
    """An ordered finite set of distinct atom labels."""

    atoms: tuple[str, ...]

    def __post_init__(self):
        if len(self.atoms) == 0:
            raise ValueError("an atom space needs at least one atom")
        if len(set(self.atoms)) != len(self.atoms):
            raise ValueError("atom labels must be pairwise distinct")

    @staticmethod
    def of(labels) -> "AtomSpace":
        return AtomSpace(tuple(str(x) for x in labels))

    @property
    def size(self) -> int:
        return len(self.atoms)

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def index(self, label: str) -> int:
        return self.atoms.index(label)

    def product(self, other: "AtomSpace") -> "AtomSpace":
        labels = tuple(
            f"{a}{PRODUCT_LABEL_SEP}{b}" for a in self.atoms for b in other.atoms
        )
        return AtomSpace(labels)

    def __repr__(self):
        return f"AtomSpace({list(self.atoms)!r})"


@dataclass(frozen=True)
class Event:
    """A subset of an atom space, stored as a bitmask in atom order."""

    space: AtomSpace
    mask: int

    def __post_init__(self):
        if self.mask < 0 or self.mask > self.space.full_mask:
            raise ValueError("event mask outside the atom space")

    @staticmethod
    def from_members(space: AtomSpace, labels) -> "Event":
        mask = 0
        for label in labels:
            mask |= 1 << space.index(str(label))
        return Event(space, mask)

    @property
    def members(self) -> tuple[str, ...]:
        return tuple(
            a for i, a in enumerate(self.space.atoms) if self.mask >> i & 1
        )

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    @property
    def is_full(self) -> bool:
        return self.mask == self.space.full_mask

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    def complement(self) -> "Event":
        return Event(self.space, self.space.full_mask ^ self.mask)

    def union(self, other: "Event") -> "Event":
        self._check_space(other)
        return Event(self.space, self.mask | other.mask)

    def intersection(self, other: "Event") -> "Event":
        self._check_space(other)
        return Event(self.space, self.mask & other.mask)

    def issubset(self, other: "Event") -> bool:
        self._check_space(other)
        return self.mask & other.mask == self.mask

    def _check_space(self, other: "Event"):
        if self.space != other.space:
            raise ValueError("events belong to different atom spaces")

    def __repr__(self):
        return f"Event({{{', '.join(self.members)}}})"


@dataclass(frozen=True)
class ClosureReport:
    """Outcome of a closure verification; ``witness`` names the violation."""

    ok: bool
    witness: dict | None = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class EventAlgebra:
    """A materialized event collection over one atom space.

    Construction requires the empty and full events and deduplicates;
    full complement/union closure is verified by
    ``verify_algebra_closure`` (and as the first entry of the check
    suite), not silently assumed.
    """

    space: AtomSpace
    events: tuple[Event, ...]
    _mask_set: frozenset[int] = field(repr=False, default=None)

    def __post_init__(self):
        masks = []
        seen = set()
        for ev in self.events:
            if ev.space != self.space:
                raise ValueError("all events must share the algebra's atom space")
            if ev.mask not in seen:
                seen.add(ev.mask)
                masks.append(ev.mask)
        if 0 not in seen or self.space.full_mask not in seen:
            raise ValueError("an event algebra must contain ∅ and Ω")
        ordered = tuple(Event(self.space, m) for m in sorted(masks))
        object.__setattr__(self, "events", ordered)
        object.__setattr__(self, "_mask_set", frozenset(seen))

    @staticmethod
    def from_masks(space: AtomSpace, masks) -> "EventAlgebra":
        return EventAlgebra(space, tuple(Event(space, m) for m in masks))

    @property
    def nondegenerate(self) -> bool:
        return len(self.events) >= 4

    @property
    def empty(self) -> Event:
        return Event(self.space, 0)

    @property
    def full(self) -> Event:
        return Event(self.space, self.space.full_mask)

    def contains_mask(self, mask: int) -> bool:
        return mask in self._mask_set

    def contains(self, event: Event) -> bool:
        return event.space == self.space and event.mask in self._mask_set

    def event(self, mask: int) -> Event:
        return Event(self.space, mask)

    @property
    def is_power_set(self) -> bool:
        return len(self.events) == 1 << self.space.size

    def blocks(self) -> tuple[int, ...]:
        """Minimal nonempty events (as masks): the partition generating
        the algebra.  block(atom) = intersection of all events containing
        the atom."""
        out = []
        seen = set()
        for i in range(self.space.size):
            bit = 1 << i
            block = self.space.full_mask
            for ev in self.events:
                if ev.mask & bit:
                    block &= ev.mask
            if block not in seen:
                seen.add(block)
                out.append(block)
        return tuple(sorted(out))

    def __len__(self):
        return len(self.events)


def build_power_algebra(space: AtomSpace, cap: int = ENUMERATION_CAP) -> EventAlgebra:
    """Full power set of ``space`` as an algebra.

    Raises CapExceeded above ``cap`` atoms: 2^size events are
    materialized.
    """
    if space.size > cap:
        raise CapExceeded(
            f"power set over {space.size} atoms exceeds the cap of {cap}"
        )
    masks = range(1 << space.size)
    return EventAlgebra.from_masks(space, masks)


def verify_algebra_closure(events) -> ClosureReport:
    """Check that a collection of events is an algebra.

    Accepts an EventAlgebra or any sequence of events over one space.
    The verdict carries the failure: a missing ∅/Ω, an event whose
    complement is missing, or a pair whose union is missing.
    """
    if isinstance(events, EventAlgebra):
        seq = events.events
    else:
        seq = tuple(events)
    if not seq:
        return ClosureReport(False, {"reason": "empty collection"})
    space = seq[0].space
    for ev in seq:
        if ev.space != space:
            return ClosureReport(
                False, {"reason": "mixed atom spaces", "event": ev.members}
            )
    masks = sorted({ev.mask for ev in seq})
    mask_set = set(masks)
    full = space.full_mask
    if 0 not in mask_set:
        return ClosureReport(False, {"reason": "missing ∅"})
    if full not in mask_set:
        return ClosureReport(False, {"reason": "missing Ω"})
    # The deduplicated full power set is closed by construction.
    if len(mask_set) == 1 << space.size:
        return ClosureReport(True)
    for m in masks:
        if full ^ m not in mask_set:
            return ClosureReport(
                False,
                {
                    "reason": "complement missing",
                    "event": Event(space, m).members,
                },
            )
    for a, b in itertools.combinations(masks, 2):
        if a | b not in mask_set:
            return ClosureReport(
                False,
                {
                    "reason": "union missing",
                    "left": Event(space, a).members,
                    "right": Event(space, b).members,
                },
            )
    return ClosureReport(True)


@dataclass(frozen=True)
class ProductAlgebra:
    """Lazy product of event algebras, beyond the materialization cap.

    Held as its generating rectangles; membership of an arbitrary event
    is decided through the block partition (an event belongs to the
    generated algebra iff it is a union of product blocks), which is the
    closure-on-demand test.
    """

    factors: tuple[EventAlgebra, ...]
    space: AtomSpace = field(default=None)
    _blocks: tuple[int, ...] = field(repr=False, default=None)

    def __post_init__(self):
        space = self.factors[0].space
        for f in self.factors[1:]:
            space = space.product(f.space)
        object.__setattr__(self, "space", space)
        factor_blocks = [f.blocks() for f in self.factors]
        blocks = []
        for combo in itertools.product(*factor_blocks):
            blocks.append(self.rectangle_mask(combo))
        object.__setattr__(self, "_blocks", tuple(sorted(blocks)))

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(f.space.size for f in self.factors)

    def rectangle_mask(self, factor_masks) -> int:
        """Mask of the rectangle A1×…×An given per-factor masks."""
        sizes = self.sizes
        mask = 0
        for combo in itertools.product(
            *[
                [i for i in range(n) if fm >> i & 1]
                for n, fm in zip(sizes, factor_masks)
            ]
        ):
            idx = 0
            for n, i in zip(sizes, combo):
                idx = idx * n + i
            mask |= 1 << idx
        return mask

    def rectangle(self, factor_events) -> Event:
        return Event(self.space, self.rectangle_mask([e.mask for e in factor_events]))

    def iter_rectangles(self):
        """All per-factor event combinations (not materialized as masks)."""
        return itertools.product(*[f.events for f in self.factors])

    @property
    def event_count(self) -> int:
        return 1 << len(self._blocks)

    @property
    def nondegenerate(self) -> bool:
        return self.event_count >= 4

    def contains_mask(self, mask: int) -> bool:
        for block in self._blocks:
            inter = mask & block
            if inter != 0 and inter != block:
                return False
        return True

    def sample_event_masks(self, count: int, seed: int) -> list[int]:
        rng = random.Random(seed)
        out = []
        for _ in range(count):
            mask = 0
            for block in self._blocks:
                if rng.random() < 0.5:
                    mask |= block
            out.append(mask)
        return out


def product_algebra(f1: EventAlgebra, f2: EventAlgebra, cap: int = ENUMERATION_CAP):
    """Product of two algebras: closure of all rectangles A×B.

    Materialized when the product space fits the cap; otherwise returned
    as a lazy ProductAlgebra.  The closure of the rectangles under
    complement and union is exactly the set of unions of product blocks
    (block(F1) × block(F2)), which is what gets materialized; the small
    cases are cross-checked against a brute fixpoint in the test suite.
    """
    product_size = f1.space.size * f2.space.size
    lazy = ProductAlgebra((f1, f2))
    if product_size > cap:
        return lazy
    blocks = lazy._blocks
    masks = []
    for bits in range(1 << len(blocks)):
        mask = 0
        for i, block in enumerate(blocks):
            if bits >> i & 1:
                mask |= block
        masks.append(mask)
    return EventAlgebra.from_masks(lazy.space, set(masks))
