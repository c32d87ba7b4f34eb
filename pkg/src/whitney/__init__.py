"""Rod on a moving platform: never-falling initial angles, found and checked."""

from .classify import (
    Classification,
    EpsilonThreshold,
    Outcome,
    classify,
    classify_many,
    classify_state,
    epsilon_threshold,
)
from .dynamics import ABSORBING, FREE, Mode, RodModel, RodParams, State, energy, rhs, smooth_stick
from .experiments import (
    EndMapTable,
    deviation_demo,
    end_map_sweep,
    smooth_stick_ivt,
    two_week_extrapolation,
)
from .integrate import FallEvent, Options, Side, Trajectory, integrate, locate_crossing
from .profile import MotionProfile, ProfileError, load_profile, make_profile, parse_profile, save_profile
from .search import (
    DecayFit,
    ResolutionError,
    SearchError,
    SurvivalBracket,
    SurvivalWindow,
    decay_fit,
    openness_margin,
    survival_bisect,
    survival_window,
)

__version__ = "0.1.0"
