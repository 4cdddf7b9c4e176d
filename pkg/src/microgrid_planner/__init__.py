"""Microgrid capacity planning with day-ahead pricing and demand response."""
from .core import (
    DispatchSolution,
    InfeasibleModelError,
    MicrogridSpec,
    ModelError,
    NonConvergenceError,
    Portfolio,
    StorageSpec,
    UserSpec,
)
from .dispatch import SolverConfig, run_decentralized, solve_central
from .portfolio import InvestmentSolution, solve_ep1
from .robust import UncertaintySet, solve_rp1, solve_rp2
from .scenarios import Scenario, ScenarioSet, build_scenarios, reduce

__version__ = "0.1.0"
