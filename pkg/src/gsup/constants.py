"""Numerical tolerances and defaults shared across the package.

Distances tagged "scaled" are measured on points divided by tau.
"""

# q within this distance of 1 takes the Gaussian limit branch
Q_ONE_EPS = 1e-12

# gamma-SUP defaults
DEFAULT_S = 0.025
CONV_EPS = 1e-8  # scaled; max per-point displacement declaring convergence
MERGE_EPS = 1e-4  # scaled; single-linkage radius for cluster extraction
MAX_ITER = 1000
# scaled; representatives closer than this are fused during the run.
# Fused points share every later update, so this only trims work.
COLLAPSE_EPS = 1e-10

# Row block for dense weight computation. Fixed so that results do not
# depend on how blocks are distributed over worker threads.
DENSE_BLOCK = 256
# Above this many distinct representatives, use neighbour lists when the
# support graph is sparse enough.
DENSE_MAX_POINTS = 1500
SPARSE_MAX_FILL = 0.1
# Relative skin added to the support radius when building neighbour lists.
VERLET_SKIN = 0.25
# The skin doubles (up to the cap) when a list lasted fewer sweeps than this.
VERLET_MIN_LIFE = 10
VERLET_MAX_SKIN = 1.0

# baselines
KMEANS_N_INIT = 10  # "best of 10 runs"
KMEANS_MAX_ITER = 300
CL2D_DISMISS = 30
GAP_B_REFS = 10

# tuning
PLATEAU_MIN_LEN = 3
DEFAULT_GRID_POINTS = 40
GRID_LOW_FACTOR = 0.1  # times the mean nearest-neighbour distance
GRID_HIGH_FACTOR = 2.0  # times the data diameter

# gamma-SUP+ default split threshold (6400 images, 128 classes)
PLUS_SIZE_THRESHOLD = 70

# reduce
MPCA_SWEEPS = 5
MPCA_TOL = 1e-8

# datagen
TOY_CENTERS = ((0.0, 0.0), (2.355, 2.355))
TOY_NOISE_RADII = (4.0, 6.0)
# template bank pixel variance; sigma_eps = 40, 50, 60 then gives SNR
# 0.1875, 0.12, 0.083
TEMPLATE_SIGNAL_VAR = 300.0
ROTATION_ANGLES = (7.2, 14.4, 21.6, 28.8, 36.0, 43.2)
