"""Multi-objective scheduling of community batteries on radial feeders."""

from .assets import BessSpec, BessTrajectory, DerSpec, simulate_schedule, step_soc
from .evaluate import Dispatch, Evaluation, PopulationEvaluator, decode, evaluate, objective_names
from .feeder import Branch, Bus, FeederNetwork, FlowSolution, TopologyError, solve_distflow, validate_radial
from .metrics import (
    AttainmentSurfaces,
    FrontSet,
    attainment_surfaces,
    hypervolume_2d,
    oracle_front,
    pareto_filter,
    voltage_stats,
)
from .moea import RunConfig, RunResult, nsga2_run, run, spea2_run
from .scenario import Scenario, ScenarioError, SynthParams, bundled_path, generate_synthetic, load_scenario

__version__ = "0.1.0"
