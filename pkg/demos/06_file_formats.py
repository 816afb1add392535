"""
File formats: matrices and configs
==================================

Complex matrices round-trip through a small binary format or CSV, and runs
are described by INI-style config files (the same files the command line
reads with ``covad run --config``).
"""

import tempfile
from pathlib import Path

import numpy as np

from covad import draw_scenario
from covad.io import dump_config, parse_config, read_matrix, read_matrix_csv, write_matrix, write_matrix_csv

rc = parse_config("""
[scenario]
D_c = 12
K_c = 80
A_c = 10
M = 48
rng_seed = 9

[solver]
coordinate_order = cyclic

[run]
trials = 20
solvers = ml,nnls
""")
print(dump_config(rc))

sc = draw_scenario(rc.scenario)
tmp = Path(tempfile.mkdtemp())
write_matrix(tmp / "sigma_hat.bin", sc.sigma_hat)
write_matrix_csv(tmp / "pilots.csv", sc.A)
print("binary exact:", np.array_equal(read_matrix(tmp / "sigma_hat.bin"), sc.sigma_hat))
print("csv exact:   ", np.array_equal(read_matrix_csv(tmp / "pilots.csv"), sc.A))
print("first csv entry:", (tmp / "pilots.csv").read_text().split(",")[0])
