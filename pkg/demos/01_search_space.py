#!/usr/bin/env python3
"""Walkthrough: conditionally sized search spaces on fixed axes.

Parses the shipped GNN space, shows the static-first axis layout, and
demonstrates decode/encode round trips with controller-driven truncation.
"""

import numpy as np

from evohpo import Setting, load_space

space = load_space("tables/table1.space")

print("Parameters (statics first, dynamics moved backward):")
for p in space.params:
    kind = f"list[<= {p.max_len}] sized by {p.controller}" if p.is_dynamic else "scalar"
    print(f"  {p.name:4s} {kind:28s} {p.domain}")

print(f"\nFlattened to {space.axis_count} axes:")
print(" ", " ".join(a.label for a in space.flatten()))

print("\nEvery axis lives in [0, 1]. Decoding a vector:")
vector = np.full(16, 0.49)
setting = space.decode(vector)
print(f"  all-0.49 vector -> {setting.as_dict()}")
print(f"  note s_g keeps exactly n_g={setting['n_g']} of its 6 sampled axes")

print("\nThe surplus axes are sampled but discarded, so they cannot matter:")
vector2 = vector.copy()
vector2[-3:] = 0.99  # tail s_f axes beyond the kept length
assert space.decode(vector2) == setting
print("  changing s_f[4..6] axes leaves the decoded setting unchanged")

print("\nEncoding is the exact inverse on every populated element:")
tuned = Setting(
    {"n_g": 2, "s_g": [128, 128], "s_d": 256, "n_f": 1, "s_f": [512], "a": "relu"}
)
for fill in (0.0, 0.5, 1.0):
    assert space.decode(space.encode(tuned, fill=fill)) == tuned
print(f"  {tuned.as_dict()}")
print("  round-trips under decode for any fill value of the unused axes")

print("\nOut-of-box optimizer proposals clamp to the boundary before decoding:")
wild = np.full(16, 1.7)
print(f"  all-1.7 vector -> {space.decode(wild).as_dict()}")
