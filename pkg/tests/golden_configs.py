"""Small command lines whose output is pinned under tests/golden/.

Regenerate with ``python tests/golden_configs.py`` after an intended change.
"""
from pathlib import Path

GOLDEN_DIR = Path(__file__).parent / "golden"

GOLDEN = {
    "settle": ["settle", "--n", "50", "--m", "500", "--steps", "30", "--probes", "10",
               "--comparison", "--seed", "5"],
    "scaling": ["scaling", "--sizes", "64,128", "--queries", "500", "--seed", "5"],
    "worst-case": ["worst-case", "--sizes", "64", "--queries", "200", "--trials", "2",
                   "--seed", "5"],
    "stationary": ["stationary", "--n", "8"],
    "baseline": ["baseline", "--n", "500", "--c-local", "2", "--c-short", "2",
                 "--trials", "500", "--seed", "5"],
    "hierarchy": ["hierarchy", "--n", "256", "--queries", "300", "--seed", "5"],
    "reach": ["reach", "--offsets", "1,37", "--modulus", "1024", "--steps", "10"],
}


def regenerate() -> None:
    from harmonic_dht.cli import main

    GOLDEN_DIR.mkdir(exist_ok=True)
    for name, argv in GOLDEN.items():
        assert main(argv + ["--out", str(GOLDEN_DIR / f"{name}.csv")]) == 0


if __name__ == "__main__":
    regenerate()
