"""coxkit: mechanical verification and construction for Cox's theorem
on finite conditional plausibility algebras.

Given a finite event algebra with a conditional plausibility assignment
P(A|B), the toolkit checks the axioms of probable reasoning (real
values, sequential continuity in its finite form, decomposability,
negation, consistency under extension) and the lemmas they force
(monotonicity, cancellativity, unique identity, associativity on
constrained and unconstrained triples, convergence of repeated events),
then constructs the explicit isomorphism onto standard conditional
probability: additive generator, affine normalization, negation fixed
point and scaling exponent, the sum rule N(x) = 1 − x, and finite plus
certified-countable additivity.
"""

from .errors import (
    BadParams,
    CapExceeded,
    CoxkitError,
    DegenerateRange,
    ExhaustedBudget,
    ExtensionInconsistent,
    MeshUnreachable,
    NoFixedPoint,
    NonAssociativeData,
    PipelineError,
    PreconditionUnmet,
    UnknownName,
)
from .event_algebra import (
    AtomSpace,
    Event,
    EventAlgebra,
    ProductAlgebra,
    build_power_algebra,
    product_algebra,
    verify_algebra_closure,
)
from .values import PValue
from .plausibility_model import (
    CompositionTable,
    ConflictReport,
    CountableCertificate,
    NegationMap,
    PlausibilityModel,
    classify,
    infer_composition,
    infer_negation,
)
from .structure_checks import (
    CheckEntry,
    CheckReport,
    CoxConfig,
    check_associativity_constrained,
    check_cancellativity,
    check_composition_monotonicity,
    check_inclusion_monotonicity,
    find_identity,
    replay_counterexample,
    run_suite,
)
from .product_extension import (
    CompositionClosure,
    ConvergenceResult,
    ProductStructure,
    check_associativity_unconstrained,
    densified_range,
    extend,
    repeated_event_convergence,
)
from .cox_isomorphism import (
    CanonicalForm,
    GeneratorResult,
    IsomorphismResult,
    ProbabilityModel,
    cox_transform,
    full_pipeline,
    normalize,
    recover_generator,
    scaling_exponent,
    verify_sum_rule,
)
from .gallery import (
    GALLERY,
    GalleryEntry,
    build_gallery,
    model_from_measure,
    search_counterexample,
)
from .serialization import model_from_json, model_to_json, product_to_json

__version__ = "0.1.0"
