DEPTH = 40
PRECISION_BITS = 384
MIN_PRECISION_BITS = 64
VALIDATION_TOLERANCE = 1e-12

# Jacobi
SWEEP_BUDGET = 50
CONVERGENCE_SLACK_BITS = 8
TRUST_SAFETY_FACTOR = 4

# counting-slope fit
MIN_FIT_POINTS = 5
WINDOW_HEAD = 1e-3
WINDOW_TAIL = 1e3

# quadrature
GAUSS_NODES = 32
QUADRATURE_TOLERANCE = 1e-12
MAX_VARIANCE_GRID = 257
# memoized quadrature covariances, enough for a depth-60 Gram matrix
COVARIANCE_CACHE = 16384

# Monte Carlo
FINE_STEPS = 1024
FOURIER_MODES = 1024
ORACLE_CHUNK = 1024
STEP_COVARIANCE_TOLERANCE = 1e-8
SAMPLE_CHUNK = 16384
N_SAMPLES = 100000
SEED = 0
WORKERS = 1

# saddlepoint
ROOT_ITERATIONS = 200
SADDLEPOINT_DPS = 50

EPS = ("1e-2", "1e-3", "1e-4", "1e-6", "1e-8", "1e-10", "1e-12")
METHODS = ("saddlepoint", "asymptotic")
