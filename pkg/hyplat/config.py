import os

# --- Logging ---
LOG_LEVEL = os.environ.get("HYPLAT_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = os.environ.get("HYPLAT_LOG_FORMAT", "json").lower()

# --- Algorithm limits ---
ORBIT_BUDGET = int(os.environ.get("HYPLAT_ORBIT_BUDGET", "200000"))
RAY_STEP_LIMIT = int(os.environ.get("HYPLAT_RAY_STEP_LIMIT", "400"))
GROUP_ORDER_CAP = int(os.environ.get("HYPLAT_GROUP_ORDER_CAP", str(10**7)))

# --- Batch mode ---
BATCH_WORKERS = int(os.environ.get("HYPLAT_BATCH_WORKERS", "1"))
