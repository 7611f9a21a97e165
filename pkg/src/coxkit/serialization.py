"""JSON structure formats and report emission.

Structure files carry an algebra fragment plus the plausibility table::

    {
      "algebra": {"atoms": ["1", "2"], "events": "powerset" | [["1"], ...]},
      "plausibility": [{"of": ["1"], "given": ["1", "2"], "value": "1/2"}, ...],
      "composition": [{"x": "1/2", "y": "1/2", "value": "1/4"}, ...],   # optional
      "negation":    [{"x": "1/2", "value": "1/2"}, ...],               # optional
      "countable":   {"ratio": "1/2", "depth": 20, "tail": "2^-n"}      # optional
    }

Values written as "p/q" strings are exact rationals; bare numbers are
float64.  Explicit composition/negation tables are cross-checked against
the inferred ones when the model is loaded into the check suite.  Report
JSON uses a fixed field order, so identical inputs and seeds produce
byte-identical reports.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .errors import BadParams
from .event_algebra import AtomSpace, Event, EventAlgebra, build_power_algebra
from .plausibility_model import CountableCertificate, PlausibilityModel
from .values import PValue


def value_to_json(v: PValue):
    return v.to_json()


def value_from_json(raw) -> PValue:
    if isinstance(raw, str):
        return PValue.of(Fraction(raw))
    if isinstance(raw, (int, float)):
        return PValue.of(raw if isinstance(raw, float) else Fraction(raw))
    raise BadParams(f"cannot read value {raw!r}")


def algebra_to_json(algebra: EventAlgebra) -> dict:
    out = {"atoms": list(algebra.space.atoms)}
    if algebra.is_power_set:
        out["events"] = "powerset"
    else:
        out["events"] = [list(e.members) for e in algebra.events]
    return out


def algebra_from_json(data: dict) -> EventAlgebra:
    if "atoms" not in data:
        raise BadParams("algebra fragment needs an 'atoms' list")
    space = AtomSpace.of(data["atoms"])
    events = data.get("events", "powerset")
    if events == "powerset":
        return build_power_algebra(space)
    return EventAlgebra(
        space, tuple(Event.from_members(space, members) for members in events)
    )


def model_to_json(model: PlausibilityModel) -> dict:
    out = {"algebra": algebra_to_json(model.algebra)}
    plausibility = []
    for (a_mask, b_mask), v in model.pairs():
        plausibility.append(
            {
                "of": list(Event(model.algebra.space, a_mask).members),
                "given": list(Event(model.algebra.space, b_mask).members),
                "value": v.to_json(),
            }
        )
    out["plausibility"] = plausibility
    if model.explicit_composition:
        out["composition"] = [
            {
                "x": PValue.of(x).to_json(),
                "y": PValue.of(y).to_json(),
                "value": PValue.of(z).to_json(),
            }
            for x, y, z in model.explicit_composition
        ]
    if model.explicit_negation:
        out["negation"] = [
            {"x": PValue.of(x).to_json(), "value": PValue.of(nx).to_json()}
            for x, nx in model.explicit_negation
        ]
    if model.countable is not None:
        out["countable"] = model.countable.to_json()
    return out


def model_from_json(data: dict, tolerance: float = 1e-9) -> PlausibilityModel:
    if "algebra" not in data or "plausibility" not in data:
        raise BadParams("structure needs 'algebra' and 'plausibility' sections")
    algebra = algebra_from_json(data["algebra"])
    table = {}
    for row in data["plausibility"]:
        a = Event.from_members(algebra.space, row["of"])
        b = Event.from_members(algebra.space, row["given"])
        table[(a.mask, b.mask)] = value_from_json(row["value"])
    explicit_comp = tuple(
        (
            value_from_json(row["x"]),
            value_from_json(row["y"]),
            value_from_json(row["value"]),
        )
        for row in data.get("composition", ())
    )
    explicit_neg = tuple(
        (value_from_json(row["x"]), value_from_json(row["value"]))
        for row in data.get("negation", ())
    )
    countable = None
    if "countable" in data:
        countable = CountableCertificate.from_json(data["countable"])
    return PlausibilityModel(
        algebra,
        table,
        tolerance=tolerance,
        explicit_composition=explicit_comp,
        explicit_negation=explicit_neg,
        countable=countable,
    )


def product_to_json(structure, sample_limit: int = 200, seed: int = 1729) -> dict:
    """Product structures emit metadata plus the rectangle table (full
    when small, seed-sampled beyond the limit)."""
    import random

    base = structure.base
    rects = []
    combos = []
    events = base.algebra.events
    nonempty = [e for e in events if not e.is_empty]
    total = (len(events) * len(nonempty)) ** structure.n
    if total <= sample_limit:
        import itertools

        combos = list(
            itertools.product(
                *[[(a, b) for a in events for b in nonempty]] * structure.n
            )
        )
    else:
        rng = random.Random(seed)
        for _ in range(sample_limit):
            combos.append(
                tuple(
                    (rng.choice(events), rng.choice(nonempty))
                    for _ in range(structure.n)
                )
            )
    for combo in combos:
        value = structure.rectangle_value([(a.mask, b.mask) for a, b in combo])
        rects.append(
            {
                "of": [list(a.members) for a, _ in combo],
                "given": [list(b.members) for _, b in combo],
                "value": value.to_json() if value is not None else None,
            }
        )
    atom_count = base.algebra.space.size**structure.n
    if hasattr(structure.algebra, "event_count"):
        event_count = structure.algebra.event_count
    else:
        event_count = len(structure.algebra.events)
    return {
        "kind": "product",
        "n": structure.n,
        "atom_count": atom_count,
        "event_count": event_count,
        "sampled": total > sample_limit,
        "sample_seed": seed if total > sample_limit else None,
        "base": model_to_json(base),
        "consistency": structure.checks,
        "rectangles": rects,
    }


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False, sort_keys=False)
