import sys
from pathlib import Path

# make the shared test fixtures (archetype_corpus) importable regardless
# of how pytest resolves rootdir
sys.path.insert(0, str(Path(__file__).resolve().parent))
