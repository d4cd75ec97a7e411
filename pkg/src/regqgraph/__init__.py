"""Regular quantum graphs: exact roots, periodic-orbit expansions and trace integration."""

__version__ = "0.1.0"

from .errors import (BracketError, ConfigError, DomainError, GraphError, NotRegularError,  # noqa: E402
                     QuadratureError, QuantumGraphError, TunnelingRegimeError)
from .graph import (Boundary, DressedGraph, LinearGraph, build_linear_graph,  # noqa: E402
                    load_graph, parse_graph, reflection_coefficients, validate)
from .scattering import graph_s_matrix, spectral_determinant, vertex_sigma  # noqa: E402
from .spectral import (determine_mu, exact_roots, four_vertex_region, mean_staircase,  # noqa: E402
                       regularity, separators, trig_equation)
from .orbits import (enumerate_orbit_terms, euler_totient, necklace_count, orbit_action,  # noqa: E402
                     orbit_weight, topological_entropy)
from .expansion import (convergence_report, density_fluctuation, eigenvalue_expansion,  # noqa: E402
                        eigenvalue_term, staircase_truncated)
from .tracesum import eigenvalue_numeric, staircase_numeric, trace_power_sum  # noqa: E402

__all__ = [name for name in dir() if not name.startswith("_")]
