import os
import random
import subprocess
import sys

import pytest

from hlinv import _kernels_py as py
from hlinv import kernels

c = pytest.importorskip("hlinv._kernels")


def test_backend_selection():
    forced = os.environ.get("HLINV_KERNELS", "").lower() in ("py", "python", "pure")
    assert kernels.BACKEND == ("python" if forced else "cython")
    out = subprocess.run([sys.executable, "-c", "from hlinv import kernels; print(kernels.BACKEND)"],
                         env={**os.environ, "HLINV_KERNELS": "python"}, capture_output=True, text=True)
    assert out.stdout.strip() == "python"


def test_selection_coefficients_parity():
    rng = random.Random(1)
    for _ in range(200):
        dims = [rng.randint(1, 3) for _ in range(rng.randint(1, 4))]
        n = rng.randint(0, 30)
        levels = [rng.randint(-1, len(dims) - 1) for _ in range(n)]
        circles = [rng.randrange(dims[j]) if j >= 0 else 0 for j in levels]
        signs = [rng.choice([1, -1]) for _ in range(n)]
        assert c.selection_coefficients(levels, circles, signs, dims) == \
            py.selection_coefficients(levels, circles, signs, dims)


def test_low_rank_scan_parity():
    rng = random.Random(2)
    for _ in range(40):
        dims = [rng.randint(1, 3) for _ in range(rng.randint(2, 3))]
        n = 1
        for m in dims:
            n *= m
        residual = [rng.randint(-3, 3) for _ in range(n)]
        vecs = [[[rng.randint(-2, 2) for _ in range(m)] for _ in range(rng.randint(1, 4))] for m in dims]
        total = 1
        for v in vecs:
            total *= len(v)
        for q in (1, 2):
            assert c.low_rank_scan(residual, dims, vecs, 0, total, q) == \
                py.low_rank_scan(residual, dims, vecs, 0, total, q)


def test_rank_one_test_agrees():
    rng = random.Random(3)
    for _ in range(200):
        dims = [rng.randint(1, 3) for _ in range(3)]
        vs = [[rng.randint(-2, 2) for _ in range(m)] for m in dims]
        flat = [a * b * d for a in vs[0] for b in vs[1] for d in vs[2]]
        if rng.random() < 0.5:
            flat[rng.randrange(len(flat))] += 1
        assert py.is_rank_le_one(flat, dims) == py.max_flattening_rank_le(flat, dims, 1)


def test_hyperdet_parity():
    rng = random.Random(4)
    for m, d in [(2, 2), (3, 2), (2, 4), (3, 4), (2, 6)]:
        entries = [rng.randint(-4, 4) for _ in range(m**d)]
        assert c.hyperdet_fixed(entries, m, d) == py.hyperdet_fixed(entries, m, d)


def test_overflow_falls_back_to_python():
    big = 2**40
    levels, circles, signs = [0, 1, 2] * 3, [0] * 9, [1] * 9
    with pytest.raises(OverflowError):
        c.hyperdet_fixed([big, 0, 0, big], 2, 2)
    assert kernels.hyperdet_fixed([big, 0, 0, big], 2, 2) == big * big
    assert kernels.selection_coefficients(levels, circles, signs, [1, 1, 1]) == [10]
    residual = [big * big, big, big, 1]
    vecs = [[[big, 1]], [[big, 1]]]
    with pytest.raises(OverflowError):
        c.low_rank_scan(residual, [2, 2], vecs, 0, 1, 1)
    assert kernels.low_rank_scan(residual, [2, 2], vecs, 0, 1, 1) == py.low_rank_scan(residual, [2, 2], vecs, 0, 1, 1)
    assert py.low_rank_scan(residual, [2, 2], vecs, 0, 1, 1)[0] == [0]
