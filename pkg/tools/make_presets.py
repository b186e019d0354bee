"""Regenerate the shipped exercise presets.

    python3 tools/make_presets.py
"""

from pathlib import Path

from aggbounds.simlab import build_preset

OUT = Path(__file__).resolve().parents[1] / "src" / "aggbounds" / "data"

if __name__ == "__main__":
    for ex in (1, 2, 3):
        path = OUT / f"exercise_{ex}.json"
        build_preset(ex).save(path)
        print(path)
