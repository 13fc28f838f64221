"""Laboratory for nested (meta-Fibonacci) recurrences."""

from .dsl import ParseError, RecurrenceSpec, SpecError, ValidatedSpec, load, parse, pretty, validate
from .engine import (
    DeathSignal,
    EvalPlan,
    History,
    OverflowSignal,
    ReferenceEvaluator,
    RunOutcome,
    Status,
    compile_plan,
    reference_eval,
    run,
    step,
)
from .families import Family, fibonacci, make_spec
from .genstats import GenerationScheme, GenerationStats, deviations, generation_stats, moments, segment
from .mortality import MortalityRecord, SweepConfig, length_of, sweep

__version__ = "0.1.0"
