"""QoS-aware channel assignment for aggregated quantum networks.

Core layers: network model and QoS metrics (netmodel), the analytic
fidelity engine (fidelity), its Monte Carlo check (montecarlo),
assignment-table enumeration (assignments), operating regimes and
boundary solvers (policy), and the time-slotted router simulation
(routersim). A FastAPI service (service) exposes everything over HTTP
and the CLI (cli) is a thin client of it.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    assignments,
    fidelity,
    montecarlo,
    netmodel,
    policy,
    routersim,
    scenario,
    sweeps,
    validate,
)

__all__ = [
    "__version__",
    "assignments",
    "fidelity",
    "montecarlo",
    "netmodel",
    "policy",
    "routersim",
    "scenario",
    "sweeps",
    "validate",
]
