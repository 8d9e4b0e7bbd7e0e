import sys
from pathlib import Path

# Allow running the suite from a checkout without installing; an in-place
# extension build (python setup.py build_ext --inplace) is picked up too.
SRC = Path(__file__).resolve().parent.parent / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))
