from .stats import EvalReport, error_stats  # noqa: F401
from .fixtures import load_fixture, evaluate_fixture, FIXTURE_NAMES  # noqa: F401
from .probe import ProbeProtocol, run_probe_experiment  # noqa: F401
from .shift import (animation_schedule, baseline_shift_report,  # noqa: F401
                    shift_max_map, run_robustness)
from .deform import apply_deformed_config, rotation_angle_deg  # noqa: F401
