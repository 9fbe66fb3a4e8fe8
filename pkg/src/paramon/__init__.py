"""Parametric runtime monitoring: slice event traces per parameter
binding and check each slice against a compiled formula.

The pieces compose left to right: a Spec (parsed from JSON) names a
formula, parameters and events; compile_spec turns it into a stepper
plus metadata; an Engine feeds trace records to one of five monitoring
algorithms and collects violation reports.
"""

from .slicing import (
    BOT,
    IncomparableMaximaError,
    ObjectId,
    ParameterInstance,
    ParametricEvent,
    combine,
    compatible,
    iter_slice,
    less_informative,
    max_less_informative,
    slice_trace,
    strictly_less_informative,
)
from .logics import (
    MATCH,
    UNDETERMINED,
    VIOLATION,
    MonitorTemplate,
    SynthesisError,
    compile_formula,
)
from .specs import (
    Diagnostic,
    Spec,
    SpecError,
    parse_spec,
    serialize_spec,
    synthesize,
    validate_spec,
)
from .analysis import (
    AnalysisError,
    compute_coenable_sets,
    compute_enable_sets,
    dump_coenable_sets,
    dump_enable_sets,
)
from .traceio import (
    ReadIssues,
    TraceDeath,
    TraceError,
    TraceEvent,
    TraceMeta,
    TraceWriter,
    iter_trace,
    load_trace,
    report_to_json,
    report_to_text,
)
from .engine import (
    ALGORITHMS,
    CompiledSpec,
    Engine,
    EngineConfigError,
    EngineResult,
    EngineStats,
    SpecFailure,
    ViolationRecord,
    compile_spec,
    normalize_algorithm,
    run_trace,
)
from .synthgen import synth_records, synth_to_file

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "AnalysisError",
    "BOT",
    "CompiledSpec",
    "Diagnostic",
    "Engine",
    "EngineConfigError",
    "EngineResult",
    "EngineStats",
    "IncomparableMaximaError",
    "MATCH",
    "MonitorTemplate",
    "ObjectId",
    "ParameterInstance",
    "ParametricEvent",
    "ReadIssues",
    "Spec",
    "SpecError",
    "SpecFailure",
    "SynthesisError",
    "TraceDeath",
    "TraceError",
    "TraceEvent",
    "TraceMeta",
    "TraceWriter",
    "UNDETERMINED",
    "VIOLATION",
    "ViolationRecord",
    "combine",
    "compatible",
    "compile_formula",
    "compile_spec",
    "compute_coenable_sets",
    "compute_enable_sets",
    "dump_coenable_sets",
    "dump_enable_sets",
    "iter_slice",
    "iter_trace",
    "less_informative",
    "load_trace",
    "max_less_informative",
    "normalize_algorithm",
    "parse_spec",
    "report_to_json",
    "report_to_text",
    "run_trace",
    "serialize_spec",
    "slice_trace",
    "strictly_less_informative",
    "synth_records",
    "synth_to_file",
    "synthesize",
    "validate_spec",
]
