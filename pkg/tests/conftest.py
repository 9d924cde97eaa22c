import sys
from pathlib import Path

# Make sibling helper modules (property_suites) importable regardless of
# how pytest was invoked.
sys.path.insert(0, str(Path(__file__).resolve().parent))
