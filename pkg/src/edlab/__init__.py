"""Entropic-dynamics laboratory.

Stochastic walker ensembles driven by the maximum-entropy transition
kernel, the coupled density/phase field equations with gauge coupling, a
gauge-covariant Crank-Nicolson reference solver, and the circulation /
charge-quantization diagnostics, plus scenario orchestration exposed both
as a CLI and as a FastAPI service.
"""

from .grid import Grid
from .params import ModelParams
from .fields import ComplexField, PhaseRecord, ScalarField, VectorField
from .kernel import GaugeInput
from .ensemble import EnsembleState
from .hamiltonian import HamiltonianBreakdown
from .gauge import LoopPath, QuantizationVerdict

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "ModelParams",
    "ScalarField",
    "VectorField",
    "ComplexField",
    "PhaseRecord",
    "GaugeInput",
    "EnsembleState",
    "HamiltonianBreakdown",
    "LoopPath",
    "QuantizationVerdict",
    "__version__",
]
