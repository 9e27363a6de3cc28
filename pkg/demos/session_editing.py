"""Edit a canvas interactively: add objects, remove one, undo it all.

Runs the same session primitives the HTTP service exposes, printing the
object list after every edit and saving the image at each stage so the
exact-undo contract is visible in the files themselves.
"""

import argparse
from pathlib import Path

from layoutlab import (
    BBox,
    BackendConfig,
    Canvas,
    load_image,
    make_backend,
    new_session,
    save_image,
    session_add,
    session_remove,
    session_undo,
)


def show(session, label: str) -> None:
    names = [caption for caption, _ in session.objects] or ["(empty)"]
    print(f"{label:12s} {len(session.history)} edits: {', '.join(names)}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_out/session")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    backend = make_backend(BackendConfig(kind="procedural"))
    session = new_session(Canvas(512, 512))
    show(session, "start")

    adds = [
        ("red metal cube", BBox(40, 60, 200, 220)),
        ("blue rubber sphere", BBox(260, 80, 420, 240)),
        ("green metal cylinder", BBox(150, 290, 310, 470)),
    ]
    for caption, box in adds:
        session = session_add(session, caption, box, backend)
        show(session, "add")
    save_image(session.image, out / "after_adds.png")

    session = session_remove(session, adds[1][1], backend)
    show(session, "remove")
    save_image(session.image, out / "after_remove.png")

    session = session_undo(session)
    show(session, "undo")
    save_image(session.image, out / "after_undo.png")

    restored = (session.image == load_image(out / "after_adds.png")).all()
    print(f"undo restored the pre-remove image exactly: {restored}")
    print(f"wrote stages to {out}/")


if __name__ == "__main__":
    main()
