import os
from dotenv import dotenv_values

# __file__ is src/core/config.py → project root is three levels up.
_project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
DEFAULTS_PATH = os.path.join(_project_root, "config", "defaults.env")
TEMPLATES_DIR = os.path.join(_project_root, "templates")
EXPERIMENT_CASES_PATH = os.path.join(TEMPLATES_DIR, "experiment_cases.json")

# Read from the defaults file only; CLI runs never depend on the process environment.
_values = {k: v for k, v in dotenv_values(DEFAULTS_PATH).items() if v is not None} if os.path.exists(DEFAULTS_PATH) else {}


def _get_float(key: str, fallback: float) -> float:
    try:
        return float(_values.get(key, fallback))
    except (TypeError, ValueError):
        return fallback


def _get_int(key: str, fallback: int) -> int:
    try:
        return int(_values.get(key, fallback))
    except (TypeError, ValueError):
        return fallback


OUTPUT_DIR = _values.get("OUTPUT_DIR") or os.path.join(_project_root, "generated_output")
if not os.path.isabs(OUTPUT_DIR):
    OUTPUT_DIR = os.path.join(_project_root, OUTPUT_DIR)
REPORTS_DIR = os.path.join(OUTPUT_DIR, "reports")
MESHES_DIR = os.path.join(OUTPUT_DIR, "meshes")

DEFAULT_TOL = _get_float("DEFAULT_TOL", 1e-4)
DEFAULT_MAX_ITER = _get_int("DEFAULT_MAX_ITER", 2000)
DEFAULT_PENALTY = _get_float("DEFAULT_PENALTY", 10.0)
DEFAULT_SSIM_C1 = _get_float("DEFAULT_SSIM_C1", 0.01)
DEFAULT_SSIM_C2 = _get_float("DEFAULT_SSIM_C2", 0.03)
DEFAULT_SSIM_WINDOW = _get_int("DEFAULT_SSIM_WINDOW", 11)
DEFAULT_SSIM_RADIUS = _get_int("DEFAULT_SSIM_RADIUS", 10)
DEFAULT_NOISE_SIGMA = _get_float("DEFAULT_NOISE_SIGMA", 0.1)
LOG_LEVEL = str(_values.get("LOG_LEVEL", "INFO")).upper()

# Split Bregman penalty on curved surfaces (planar meshes use DEFAULT_PENALTY).
SURFACE_PENALTY = _get_float("SURFACE_PENALTY", 1.0)

# Geometry tolerances (relative).
DEGENERACY_TOL = 1e-14
LINEAR_SOLVE_RTOL = 1e-10


def ensure_output_dirs():
    """Create all required output directories if they do not exist."""
    for d in [OUTPUT_DIR, REPORTS_DIR, MESHES_DIR]:
        os.makedirs(d, exist_ok=True)


__all__ = [
    "OUTPUT_DIR",
    "REPORTS_DIR",
    "MESHES_DIR",
    "TEMPLATES_DIR",
    "EXPERIMENT_CASES_PATH",
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
    "DEFAULT_PENALTY",
    "DEFAULT_SSIM_C1",
    "DEFAULT_SSIM_C2",
    "DEFAULT_SSIM_WINDOW",
    "DEFAULT_SSIM_RADIUS",
    "DEFAULT_NOISE_SIGMA",
    "LOG_LEVEL",
    "SURFACE_PENALTY",
    "DEGENERACY_TOL",
    "LINEAR_SOLVE_RTOL",
    "ensure_output_dirs",
]
