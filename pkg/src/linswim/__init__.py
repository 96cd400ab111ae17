"""Linear shape-changing swimmers in the plane.

Low- and high-Reynolds scallop models, a fixed-step integrator for
``q' = F(q, s) s'``, and the universal-cover boundedness criterion.
"""

from .cover import LiftedPath, lift, lift_length, verdict
from .engine import ShapePath, SwimmerField, Trajectory, check_field_contract, integrate, reparameterize
from .geometry import BodyBoundary, ScallopGeometry, build_scallop
from .highre import HighReModel, highre_swimmer, integrate_second_order
from .lowre import GrandMatrices, lowre_swimmer
from .scenarios import Scenario, builtin, parse_config, run
from .se2 import BodyTwist, Pose

__version__ = "0.1.0"

__all__ = [
    "BodyBoundary", "BodyTwist", "GrandMatrices", "HighReModel", "LiftedPath", "Pose", "ScallopGeometry",
    "Scenario", "ShapePath", "SwimmerField", "Trajectory", "build_scallop", "builtin", "check_field_contract",
    "highre_swimmer", "integrate", "integrate_second_order", "lift", "lift_length", "lowre_swimmer",
    "parse_config", "reparameterize", "run", "verdict",
]
