import sys
from pathlib import Path

# the reference oracles live beside the tests, not in the package
sys.path.insert(0, str(Path(__file__).parent))
