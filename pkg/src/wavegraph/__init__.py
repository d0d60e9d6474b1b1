"""Wave transport on open metric graphs.

Simulation and analysis toolkit for narrow-band filter graphs built from
regular polygons: two-port scattering spectra with internal absorption,
closed-graph spectra and their Berry-Robnik statistics, and time-domain
pulse propagation with path-based peak attribution.
"""

from .errors import (
    DomainError,
    FileFormatError,
    GraphError,
    SingularSystemError,
    WavegraphError,
)
from .graphs import (
    Bond,
    BondSystem,
    Edge,
    Lead,
    MetricGraph,
    PolygonChainSpec,
    build_polygon_chain,
    directed_bonds,
    split_edge,
    total_length,
)
from .scattering import (
    SPEED_OF_LIGHT,
    EigenvalueList,
    Resonance,
    ScanDefect,
    SpectrumScan,
    TwoPortScattering,
    VertexScattering,
    closed_eigenvalues,
    complexify_wavenumber,
    eigenphases,
    neumann_sigma,
    peak_analysis,
    transmission_scan,
    two_port_smatrix,
    weyl_count,
)
from .oracles import (
    PolygonTransmission,
    independent_solver,
    polygon_transmission,
    t_c3,
    t_c4,
)
from .spectral import (
    Delta3Point,
    FitResult,
    RigidityCurve,
    SpacingSample,
    UnfoldedSpectrum,
    cdf_berry_robnik,
    delta3_br,
    delta3_curve,
    delta3_empirical,
    delta3_goe,
    delta3_poisson,
    delta3_reference_band,
    fit_rho1,
    nnsd_histogram,
    pdf_berry_robnik,
    pdf_goe,
    pdf_poisson,
    sample_berry_robnik,
    sample_berry_robnik_levels,
    sample_goe_levels,
    sample_poisson_levels,
    unfold,
    unfold_wavenumbers,
)
from .timedomain import (
    PathEnumeration,
    PathGroup,
    PathRecord,
    PeakPrediction,
    PulseSpec,
    TimeTrace,
    enumerate_paths,
    gaussian_pulse,
    group_paths,
    predict_peak_ratios,
    synthesize_output,
    trace_peaks,
)
from .fileio import (
    ComparisonReport,
    GraphDocument,
    MeasuredTwoPort,
    compare,
    graph_to_document,
    parse_graph_document,
    parse_graph_file,
    read_touchstone,
    write_touchstone,
)

__version__ = "0.1.0"
