"""Random inputs shared by several test modules."""
import math
import random

from hlinv.handlebody import ClasperSchema, band_sum, from_clasper_schema, reverse_circle, swap_circles


def random_schema(rng: random.Random, n=None, max_genus=3, terms=4, spread=3):
    n = n or rng.choice([2, 3, 4])
    genera = tuple(rng.randint(1, max_genus) for _ in range(n))
    slots = math.factorial(n - 2) if n > 2 else 1
    counts = {}
    for _ in range(rng.randint(0, terms)):
        key = (rng.randint(1, slots),) + tuple(rng.randint(1, g) for g in genera)
        counts[key] = rng.randint(-spread, spread)
    return ClasperSchema(n, genera, counts)


def scramble(rng: random.Random, pres, steps=2):
    """Apply random basis changes so the longitudes stop looking canonical."""
    for _ in range(steps):
        i = rng.randint(1, pres.n)
        g = pres.genera[i - 1]
        kind = rng.choice(["swap", "rev", "band"]) if g > 1 else "rev"
        if kind == "rev":
            pres = reverse_circle(pres, pres.circle(i, rng.randint(1, g)))
        else:
            l, h = rng.sample(range(1, g + 1), 2)
            pres = (swap_circles if kind == "swap" else band_sum)(pres, i, l, h)
    return pres


def random_presentation(rng: random.Random, **kw):
    return scramble(rng, from_clasper_schema(random_schema(rng, **kw)))
