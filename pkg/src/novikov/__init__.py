"""Level lines and critical levels of quasiperiodic functions."""
from .critical import (CriticalIntervalEstimate, DiameterBoundEstimate, SituationLabel, bounded_diameter_estimate,
                       check_theorem21, check_theorem22, classify_situation, estimate_interval, situation_sweep,
                       transfer_inclusion_check, unboundedness_predicate)
from .embedding import (EmbeddingFrame, QuasiperiodicFunction, classify_direction, identity_frame, integer_shift,
                        make_frame, restrict, transverse_distance)
from .errors import (ConsistencyError, ContradictionError, InputError, NovikovError, ResourceError,
                     UndeterminedError)
from .ndscan import (BoxWindow, classify_situation_nd, estimate_interval_nd, level_components_nd,
                     region_components_nd, uniform_diameter_check_nd)
from .potential import (FrequencyComponent, PeriodicFunction, Wave, cosine_sum, evaluate, from_superposition,
                        gradient, lipschitz_bound, range_estimate)
from .render import render_svg
from .tracer2d import (LevelComponent, RegionComponent, ScalarField, ScaleReport, Window, classify_component,
                       extract_level_components, multiscale_trace, open_line_verdict, region_components,
                       sample_grid)

__version__ = "0.1.0"
