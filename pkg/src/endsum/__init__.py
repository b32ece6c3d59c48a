"""Classification of presented noncompact surfaces and 1-handles at infinity."""

from .dsl import DescriptorDocument, DslError, parse_dsl, print_document
from .endmodel import (
    Cantor,
    EndLabel,
    Genus,
    Pt,
    Seq,
    Union,
    canonicalize,
    count_ends,
    homeomorphic,
    merge_label,
    quotient_ends,
)
from .errors import *  # noqa: F401,F403
from .handles import (
    EndRef,
    HandleSpec,
    attach_handle_combinatorial,
    exhaustion_oracle,
    isomorphic,
    predict_handle_invariants,
    verify_presentation_invariance,
)
from .invariants import ClassInvariant, GenusValue, Parity, classify, genus_compact
from .surface import Block, BlockAutomaton, CompactPiece, Component, SurfaceDescriptor

__version__ = "0.1.0"
