"""Workbench for OntoClean-based ontology refinement.

Model a class taxonomy, have a language model propose OntoClean
meta-property labels for it, verify the inheritance constraints, score the
labels against curated gold standards, and refine interactively through the
bundled HTTP service and review UI.
"""

from .engine import (
    DependenceValue,
    IdentityValue,
    LabelSet,
    Labeling,
    RigidityValue,
    UnityValue,
    Violation,
    ViolationKind,
    check_constraints,
    check_sortal_individuation,
    explain_violation,
    infer_forced_labels,
    labeling_from_json,
    labeling_to_json,
    merge_labelings,
)
from .harness import (
    AccuracyReport,
    Benchmark,
    PropertyCounts,
    compute_accuracy,
    load_benchmark,
    run_trials,
    write_report,
)
from .labeler import (
    Flat,
    Hierarchical,
    LabelingResult,
    LlmConfig,
    PromptConfig,
    PromptStrategy,
    build_prompt,
    call_llm,
    label_ontology,
    parse_labels,
    render_labels,
)
from .taxonomy import (
    SpanningTree,
    Taxonomy,
    parse_taxonomy,
    random_spanning_tree,
    serialize_taxonomy,
    to_flat_text,
    to_hierarchical_text,
)

__version__ = "0.1.0"
