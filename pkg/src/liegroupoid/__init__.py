"""Lie groupoids in local charts and the Lie algebroids they determine.

Charts are given by a source map ``sigma(u, v)`` and a fiber product
``p(u, v, w)``; truncated Taylor jets turn them into the anchor and the
bracket structure functions of the associated Lie algebroid.
"""

from .axioms import CheckReport, CheckResult, run_groupoid_suite
from .chart import LocalGroupoidChart, SamplePlan, invert_at, read_chart_file, write_chart_file
from .errors import (
    ConvergenceError,
    DomainError,
    GroupoidError,
    OutOfDomainError,
    ParseError,
    SingularJacobianError,
    UnboundVariableError,
)
from .gallery import get_chart, get_entry, list_entries
from .jets import Jet, JetSpec
from .structure import SectionSpec, StructureData, run_algebroid_suite, structure_data_at

__version__ = "0.1.0"
