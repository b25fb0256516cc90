"""Paths to the bundled data files."""
from importlib.resources import files
from pathlib import Path

DATA_DIR = Path(str(files("bowmotion") / "data"))
DEFAULT_PRIMITIVES = DATA_DIR / "primitives_default.txt"
DEFAULT_ARM = DATA_DIR / "ur5e_bow.cfg"
CORPUS_DIR = DATA_DIR / "corpus"


def corpus() -> dict[str, Path]:
    """Bundled demo scores by name, in a fixed order."""
    return {p.stem: p for p in sorted(CORPUS_DIR.glob("*.mid"))}
