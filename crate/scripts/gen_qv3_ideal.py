"""Example 3-qubit ideal output distribution (Haar-random state, fixed seed).

Usage: python3 scripts/gen_qv3_ideal.py > crates/core/tests/fixtures/qv3_ideal.json
Keys put qubit 0 in the leftmost character.
"""
import json

import numpy as np

rng = np.random.default_rng(20230705)
z = rng.normal(size=8) + 1j * rng.normal(size=8)
p = np.abs(z) ** 2
p /= p.sum()
print(json.dumps({format(i, "03b")[::-1]: float(v) for i, v in enumerate(p)}, indent=2, sort_keys=True))
