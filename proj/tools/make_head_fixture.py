"""Write a small head asset with numpy and decode it with scipy.

Produces fixtures/py_head.fma.json + .fma.bin (stored in centimeters, to
exercise unit conversion) and fixtures/py_head.reference.json with decoded
vertices and landmarks in millimeters for a few parameter sets. Nothing here
shares code with the C++ reader.
"""
import json
import struct
import sys

import numpy as np
from scipy.spatial.transform import Rotation


def grid_mesh(nx, ny):
    xs, ys = np.meshgrid(np.linspace(-6.0, 6.0, nx), np.linspace(-8.0, 8.0, ny))
    zs = 0.04 * (36.0 - xs**2) + 0.02 * (64.0 - ys**2)
    verts = np.stack([xs.ravel(), ys.ravel(), zs.ravel()], axis=1)
    uv = np.stack([(xs.ravel() + 6.0) / 12.0, (8.0 - ys.ravel()) / 16.0], axis=1)
    tris = []
    for j in range(ny - 1):
        for i in range(nx - 1):
            a = j * nx + i
            tris.append([a, a + 1, a + nx + 1])
            tris.append([a, a + nx + 1, a + nx])
    return verts, np.array(tris, dtype=np.uint32), uv


def decode(t, sb, eb, jj, jw, p):
    v = t + (sb @ p["beta"]).reshape(-1, 3) + (eb @ p["psi"]).reshape(-1, 3)
    rj = Rotation.from_rotvec(p["jaw_pose"]).as_matrix()
    posed = (v - jj) @ rj.T + jj
    v = jw[:, None] * posed + (1.0 - jw[:, None]) * v
    rg = Rotation.from_rotvec(p["global_pose"]).as_matrix()
    return v @ rg.T + p["global_translation"]


def main(prefix):
    rng = np.random.default_rng(11)
    verts_cm, tris, uv = grid_mesh(10, 12)
    n = len(verts_cm)
    n_shape, n_expr = 4, 3
    sb_cm = rng.normal(0.0, 0.3, size=(3 * n, n_shape))
    eb_cm = rng.normal(0.0, 0.2, size=(3 * n, n_expr))
    jaw_joint_cm = np.array([0.0, -3.0, -1.0])
    jw = np.clip((-2.0 - verts_cm[:, 1]) / 5.0, 0.0, 1.0)

    # float32 storage is what the C++ side sees; decode from the rounded values
    f32 = lambda a: np.asarray(a, dtype=np.float32)
    blob = bytearray()
    tensors = {}

    def put(name, arr, dtype):
        nonlocal blob
        offset = len(blob)
        data = np.ascontiguousarray(arr, dtype=dtype)
        blob += data.astype("<u4" if dtype == np.uint32 else "<f4").tobytes()
        tensors[name] = {"dtype": "uint32" if dtype == np.uint32 else "float32",
                         "shape": list(data.shape), "offset": offset}

    put("template_vertices", verts_cm, np.float32)
    put("triangles", tris, np.uint32)
    put("uv", uv, np.float32)
    put("shape_basis", sb_cm, np.float32)
    put("expression_basis", eb_cm, np.float32)
    put("jaw_joint", jaw_joint_cm, np.float32)
    put("jaw_weights", jw, np.float32)

    landmarks = []
    for _ in range(68):
        w = rng.dirichlet([1.0, 1.0, 1.0])
        w[2] = 1.0 - w[0] - w[1]
        landmarks.append({"triangle": int(rng.integers(len(tris))), "barycentric": [float(x) for x in w]})
    groups = {
        "left_eye": [31, 32, 41], "right_eye": [37, 38, 47], "nose_bridge": [54, 55],
        "left_temple": [40, 50], "right_temple": [49, 59], "extra_group": [0, 1, 2],
    }
    manifest = {
        "format_version": 1, "units": "cm", "num_vertices": n,
        "n_shape": n_shape, "n_expression": n_expr, "tensors": tensors,
        "landmark_embedding": landmarks, "vertex_groups": groups,
    }
    with open(prefix + ".fma.json", "w") as f:
        json.dump(manifest, f, indent=1)
    with open(prefix + ".fma.bin", "wb") as f:
        f.write(bytes(blob))

    t = f32(verts_cm).astype(np.float64) * 10.0
    sb = f32(sb_cm).astype(np.float64) * 10.0
    eb = f32(eb_cm).astype(np.float64) * 10.0
    jj = f32(jaw_joint_cm).astype(np.float64) * 10.0
    jw64 = f32(jw).astype(np.float64)
    cases = []
    for k in range(4):
        p = {
            "beta": rng.normal(0.0, 1.0, n_shape) if k else np.zeros(n_shape),
            "psi": rng.normal(0.0, 1.0, n_expr) if k else np.zeros(n_expr),
            "jaw_pose": rng.normal(0.0, 0.2, 3) if k else np.zeros(3),
            "global_pose": rng.normal(0.0, 0.5, 3) if k else np.zeros(3),
            "global_translation": rng.normal(0.0, 20.0, 3) if k else np.zeros(3),
        }
        v = decode(t, sb, eb, jj, jw64, p)
        lm = [sum(l["barycentric"][c] * v[tris[l["triangle"]][c]] for c in range(3)) for l in landmarks]
        cases.append({
            "params": {key: [float(x) for x in val] for key, val in p.items()},
            "vertices": v.tolist(),
            "landmarks": [list(map(float, x)) for x in lm],
        })
    with open(prefix + ".reference.json", "w") as f:
        json.dump({"generator": "numpy %s / scipy Rotation" % np.__version__, "cases": cases}, f)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "fixtures/py_head")
