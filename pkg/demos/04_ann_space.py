"""
Classic LSH tables vs the inverted index
========================================

Same hash family, same planted instance.  The inverted index drops the
lookup tables and recovers buckets by inversion; s trades space for time.
"""

from invann.ann import build_classic, build_inverted, family_for, memory_footprint, query_classic, query_inverted
from invann.core import PlantedSpec, generate_planted

ds, q, planted = generate_planted(PlantedSpec(4096, 256, "hamming", 16, 2, seed=3))
family = family_for(ds, 16, 2)
rho = family.profile.rho
print(f"rho = {rho:.4f}, planted point {planted}")

classic = build_classic(ds, family, seed=1)
res = query_classic(classic, q)
print(f"classic   R={classic.battery.R:4d} found={res.found} candidates={res.candidates_examined}")
print("          bytes:", memory_footprint(classic))

for frac in (0.25, 0.5, 0.75):
    index = build_inverted(ds, family, frac * rho, seed=1)
    res = query_inverted(index, q)
    print(f"s={frac:.2f}rho R={index.battery.R:4d} sigma={index.sigma:3.0f} found={res.found} "
          f"f-evals={res.inverter_f_evals}")
    print("          bytes:", memory_footprint(index))
