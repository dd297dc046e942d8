"""Graphon signal processing: sampling, spectra, Fourier transforms, filters,
homomorphism densities and convergence experiments."""

from .errors import (
    BudgetExceededError,
    DomainError,
    MissingDataError,
    NumericalError,
    ValidationError,
)
from .filters import (
    ConstantResponse,
    LinearResponse,
    PiecewiseLinear,
    PolyFilter,
    SpectralFilterFn,
    apply_graphon_filter,
    apply_poly,
    apply_spectral_graph_filter,
    bandlimit,
    critical_bandwidth,
    lipschitz_verify,
    lowpass,
    normalize_filter,
    parse_filter_spec,
    poly_freq_response,
)
from .graph import Graph, SpectralBasis, eigendecompose, gft, igft, signed_eigenvalues
from .graphon import (
    SBM,
    Constant,
    ExpDistance,
    Graphon,
    GridSampled,
    LatentLabels,
    Step,
    discretize,
    induced_graphon,
    parse_graphon_spec,
    sample_graph,
    sample_latents,
)
from .homdensity import (
    Motif,
    cut_norm_step,
    cycle_density_graph,
    cycle_spectral_identity_check,
    hom_density_graph,
    hom_density_graphon,
    l2_operator_norm,
)
from .spectral import (
    GraphonBasis,
    GraphonSignal,
    eigengap_set,
    graphon_eigs,
    induced_signal,
    iwft,
    lemma1_bridge_check,
    projection_distance,
    subspace_project,
    wft,
)

__all__ = [
    "BudgetExceededError",
    "DomainError",
    "MissingDataError",
    "NumericalError",
    "ValidationError",
    "ConstantResponse",
    "LinearResponse",
    "PiecewiseLinear",
    "PolyFilter",
    "SpectralFilterFn",
    "apply_graphon_filter",
    "apply_poly",
    "apply_spectral_graph_filter",
    "bandlimit",
    "critical_bandwidth",
    "lipschitz_verify",
    "lowpass",
    "normalize_filter",
    "parse_filter_spec",
    "poly_freq_response",
    "Graph",
    "SpectralBasis",
    "eigendecompose",
    "gft",
    "igft",
    "signed_eigenvalues",
    "SBM",
    "Constant",
    "ExpDistance",
    "Graphon",
    "GridSampled",
    "LatentLabels",
    "Step",
    "discretize",
    "induced_graphon",
    "parse_graphon_spec",
    "sample_graph",
    "sample_latents",
    "Motif",
    "cut_norm_step",
    "cycle_density_graph",
    "cycle_spectral_identity_check",
    "hom_density_graph",
    "hom_density_graphon",
    "l2_operator_norm",
    "GraphonBasis",
    "GraphonSignal",
    "eigengap_set",
    "graphon_eigs",
    "induced_signal",
    "iwft",
    "lemma1_bridge_check",
    "projection_distance",
    "subspace_project",
    "wft",
]

__version__ = "0.1.0"
