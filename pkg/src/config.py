"""
Centralized configuration for the basilar string-bank simulator.

All environment-variable driven configuration lives here so that:
- grid sizes and truncation can be changed without touching code
- experiments are reproducible (seed is explicit and printed)
- defaults are visible in one place
"""

import os
from dotenv import load_dotenv

# Load variables from a local .env file if present.
# In production, environment variables are expected to be set externally.
load_dotenv()


# ---------------------------------------------------------------------
# Simulation defaults (optional, with defaults)
# ---------------------------------------------------------------------

# Parameter set used when the CLI is not given --params.
# Either a builtin id ("nobili2003", "modified_a03") or a path to a params file.
DEFAULT_PARAMS = os.getenv("BASILAR_PARAMS", "modified_a03")

# Highest mode index kept in modal sums (odd modes 1..N_MAX).
N_MAX = int(os.getenv("BASILAR_N_MAX", "15"))


# ---------------------------------------------------------------------
# Grid defaults (optional, with defaults)
# ---------------------------------------------------------------------

# Number of log-spaced points on the xi axis.
XI_POINTS = int(os.getenv("BASILAR_XI_POINTS", "4096"))

# Samples over one energy period on the t axis.
T_SAMPLES = int(os.getenv("BASILAR_T_SAMPLES", "64"))

# Worker-hint default for grid evaluation.
# Results do not depend on it; only wall time does.
WORKERS = int(os.getenv("BASILAR_WORKERS", "1"))


# ---------------------------------------------------------------------
# Oracle (RK4 cross-check) settings
# ---------------------------------------------------------------------

# Seed for the random (xi, k, n) tuples. Always echoed in reports.
SEED = int(os.getenv("BASILAR_SEED", "20240607"))

# Minimum RK4 steps per period of the fastest of (n*xi, k).
# Raised automatically for lightly damped strings.
STEPS_PER_PERIOD = int(os.getenv("BASILAR_STEPS_PER_PERIOD", "128"))

# Transient cutoff, in units of 1/mu. exp(-mu t / 2) at 40/mu is exp(-20).
TRANSIENT_DECAY = float(os.getenv("BASILAR_TRANSIENT_DECAY", "40"))
