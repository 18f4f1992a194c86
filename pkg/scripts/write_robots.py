"""Regenerate the robot description files under robots/."""

import json
from pathlib import Path

from cidgik.robots import arm_6dof_document, planar_chain_document

ROOT = Path(__file__).parent.parent / "robots"


def main():
    ROOT.mkdir(exist_ok=True)
    for name, doc in [
        ("planar_2r.json", planar_chain_document([1.0, 1.0])),
        ("arm_6dof.json", arm_6dof_document()),
    ]:
        path = ROOT / name
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
