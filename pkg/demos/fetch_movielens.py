"""Download MovieLens 100k into ``data/ml-100k`` next to this repository.

Usage: python3 demos/fetch_movielens.py [target_dir]

Afterwards ``graphonsp experiment movie --data data/ml-100k/u.data`` runs the
transfer experiment on the real ratings.
"""

import io
import sys
import urllib.request
import zipfile
from pathlib import Path

URL = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"


def main(target: Path) -> int:
    dest = target / "ml-100k" / "u.data"
    if dest.is_file():
        print(f"already present: {dest}")
        return 0
    print(f"downloading {URL}")
    try:
        with urllib.request.urlopen(URL, timeout=60) as resp:
            payload = resp.read()
    except OSError as exc:
        print(f"download failed: {exc}\nfetch the zip manually and unzip it into {target}", file=sys.stderr)
        return 3
    with zipfile.ZipFile(io.BytesIO(payload)) as zf:
        zf.extractall(target)
    print(f"wrote {dest}")
    return 0


if __name__ == "__main__":
    root = Path(__file__).resolve().parents[1]
    sys.exit(main(Path(sys.argv[1]) if len(sys.argv) > 1 else root / "data"))
