"""Sampling-based continuous space-time empowerment as a safety reward for
planar navigation."""
from .dynamics import PiecewiseControl, SystemSpec, SystemState, integrate, sample_control
from .empowerment import EmpowermentEstimate, EmpowermentParams, estimate_empowerment, reachable_set
from .errors import CStepError, ConfigError, ContractViolation, IntegrationError, TrainingError
from .kernels import BACKEND
from .reward import RewardConfig, empowered_reward, nav_reward
from .world import Box, CorridorTemplate, LidarConfig, WorldMap, point_maze

__version__ = "0.1.0"
