import math

# Threshold constants from the accuracy threshold theorem; both are
# approximate and overridable from the config file.
EPSILON0 = 1e-4
ALPHA0 = 1e-5

DEFAULT_T0 = 1.0
DEFAULT_M = 2

# Subset evaluations allowed when building an eta profile
ENUMERATION_BUDGET = 10**7

# Largest r accepted by the exact partition sum (factorials stay <= 20!)
PARTITION_R_MAX = 20

# Series truncation
SERIES_REL_TOL = 1e-12
SERIES_MAX_TERMS = 10_000
EXTRA_K_TERMS = 40
ZETA_MAX_TERMS = 10**6

# exp() overflows binary64 a little above this
MAX_EXPONENT = 700.0

# Corollary 1 limit: 2 exp((e - 1) / 2) ~ 4.722
COROLLARY1_FACTOR = 2.0 * math.exp((math.e - 1.0) / 2.0)

# Simulation caps
MAX_SYSTEM_QUBITS = 6
MAX_BATH_QUBITS = 4
MAX_DIMENSION = 1024
DEFAULT_MAX_R = 3
MAX_R_HARD_CAP = 12

UNITARITY_TOLERANCE = 1e-12
VIOLATION_TOLERANCE = 1e-12

METRICS = ["euclidean", "manhattan"]
KERNELS = ["exponential", "power_law"]
COUPLING_VARIANTS = ["table", "parametric"]
ENVELOPE_VARIANTS = ["constant_one", "factorial_power", "explicit"]
SWEEP_PARAMETERS = ["lambda_scale", "t0"]

# Exit codes of the command-line tool
EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
