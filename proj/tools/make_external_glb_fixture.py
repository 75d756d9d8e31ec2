"""Regenerate fixtures/external_textured_box.glb with trimesh.

The GLB and its reference JSON are committed; this script documents how they
were produced. The reference arrays come from trimesh itself (the exporter),
not from our reader.
"""
import io
import json
import sys

import numpy as np
import trimesh
from PIL import Image


def main(out_prefix):
    box = trimesh.creation.box(extents=(40.0, 20.0, 10.0))
    box.unmerge_vertices()
    rng = np.random.default_rng(7)
    uv = rng.uniform(0.0, 1.0, size=(len(box.vertices), 2))
    img = Image.new("RGB", (4, 4))
    for y in range(4):
        for x in range(4):
            img.putpixel((x, y), (x * 60, y * 60, 128))
    box.visual = trimesh.visual.TextureVisuals(uv=uv, image=img)
    data = trimesh.exchange.gltf.export_glb(trimesh.Scene(box), include_normals=False)
    with open(out_prefix + ".glb", "wb") as f:
        f.write(data)

    # what trimesh reports back for its own file
    loaded = trimesh.load(io.BytesIO(data), file_type="glb", force="mesh", process=False)
    ref = {
        "exporter": "trimesh " + trimesh.__version__,
        "positions": np.asarray(loaded.vertices, dtype=float).tolist(),
        "uv": np.asarray(loaded.visual.uv, dtype=float).tolist(),
        "indices": np.asarray(loaded.faces, dtype=int).tolist(),
    }
    with open(out_prefix + ".reference.json", "w") as f:
        json.dump(ref, f, indent=1)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "fixtures/external_textured_box")
