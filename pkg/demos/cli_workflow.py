"""
The CLI workflow end to end
===========================

Every operation in the library is also reachable through the console
script: simulate paths to CSV, build certified bounds, estimate
small-ball probabilities, fit decay rates, and verify bounds against
estimates.  Configs are JSON with strict keys; every artifact embeds
the config digest and seed.  This demo drives the entry point in
process, which is exactly what `smallball <command> --config ...` does.
"""

import json
import tempfile
from pathlib import Path

from smallball.cli import main

work = Path(tempfile.mkdtemp(prefix="smallball_demo_"))


def run(command, config, *extra):
    path = work / f"{command}.json"
    path.write_text(json.dumps(config))
    argv = [command, "--config", str(path), *extra]
    print(f"\n$ smallball {' '.join(argv)}")
    code = main(argv)
    print(f"(exit {code})")


# a handful of simulated paths, written as a tidy CSV
run("simulate",
    {"process": {"kind": "fbm", "H": 0.3}, "T": 1.0, "N": 512,
     "n_paths": 3, "seed": 5},
    "--out", str(work / "paths.csv"))
print("CSV header:", (work / "paths.csv").read_text().splitlines()[0])

# certified bounds for the same process at two radii
run("bound",
    {"process": {"kind": "fbm", "H": 0.3}, "T": 1.0,
     "epsilons": [0.02, 0.05]})

# exponent feasibility is a pure computation; infeasible is an answer,
# not an error
run("feasibility", {"H": 0.75, "beta": 0.6, "theta": 0.2})

# the eigenvalue convergence table behind the stationary-increment bound
run("toeplitz", {"H": 0.35, "N": [64, 256]})

# estimate + verify on a small budget (the default suite uses many more
# paths; this keeps the demo quick)
run("verify",
    {"process": {"kind": "bm"}, "T": 1.0, "N": 2048,
     "epsilons": [0.5, 1.0], "n_paths": 2000, "seed": 7},
    "--out", str(work / "report.csv"))
print("report:", (work / "report.csv").read_text().strip().splitlines()[:2])
