# config/config.py
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Project paths
PROJECT_ROOT = Path(__file__).parent.parent
OUTPUT_DIR = Path(os.getenv('ER_OUTPUT_DIR', PROJECT_ROOT / "output"))
LOG_FILE_NAME = "entity_resolution.log"
LOG_LEVEL = os.getenv('ER_LOG_LEVEL', 'INFO')

# Dual optimal inequalities
DOI_MODE = os.getenv('ER_DOI_MODE', 'flexible')  # none | varying | flexible
DOI_THRESHOLDS = int(os.getenv('ER_K', 5))
DOI_EPSILON = float(os.getenv('ER_EPSILON', 1e-6))
# RMP solves without a new best value before pricing switches to plain duals (0 = never)
DOI_PATIENCE = int(os.getenv('ER_DOI_PATIENCE', 2))

# Pricing
PRICING_STRATEGY = os.getenv('ER_PRICING', 'hybrid')  # exact | heuristic | hybrid
MAX_NEW_COLUMNS = int(os.getenv('ER_MAX_COLUMNS', 50))
HEURISTIC_RESTARTS = int(os.getenv('ER_RESTARTS', 3))
EXACT_SIZE_LIMIT = int(os.getenv('ER_EXACT_SIZE_LIMIT', 24))
PRICING_THREADS = int(os.getenv('ER_THREADS', 1))
RANDOM_SEED = int(os.getenv('ER_SEED', 0))

# Column generation / integerization
MAX_CG_ITERATIONS = 10_000
MAX_BNB_NODES = 20_000

# Ingestion: theta = BIAS - p, so the default reproduces theta = 0.5 - p
PROBABILITY_BIAS = float(os.getenv('ER_BIAS', 0.5))

# Cycle / odd-wheel relaxation (validator only)
CC_SIZE_LIMIT = 10
CC_MAX_RIM = 5
CC_MAX_SEPARATION_ROUNDS = 50

# Numerical tolerances (shared by every solver module)
FEASIBILITY_TOL = 1e-9
SLACKNESS_TOL = 1e-7
DUALITY_GAP_TOL = 1e-6
INTEGRALITY_TOL = 1e-7
REDUCED_COST_TOL = 1e-9
LP_ITERATION_LIMIT = 1_000_000

# Hierarchical-clustering baseline: single | complete | average | weighted
HIERARCHY_METHOD = os.getenv('ER_HIERARCHY_METHOD', 'average')

# Synthetic instances
SYNTH_BLOCKING_RADIUS = 1
SYNTH_INTRA_RANGE = (-1.0, -0.2)
SYNTH_NOISE_RANGE = (-0.2, 0.5)
