"""
Driving the command-line tool
=============================

Generates a definition file for the H = 1 cylinder, verifies it, and runs a
two-level convergence study on a rotational sphere.  The same commands work
from a shell as ``cmclab generate ...`` etc.
"""

import json
import os
import tempfile

from cmclab import cli

work = tempfile.mkdtemp(prefix="cmclab-demo-")
cyl = os.path.join(work, "cylinder.json")
sph = os.path.join(work, "sphere.json")

cli.main(["generate", "cmc_cylinder", "--H", "1", "--grid", "32x17", "-o", cyl])
cli.main(["generate", "rotational_cmc_sphere", "--H", "1", "--grid", "17x16", "-o", sph])

# verify prints a table; the JSON report goes to the -o file
code = cli.main(["verify", cyl, "--published-simons", "--format", "table", "-o", os.path.join(work, "report.json")])
print("verify exit code:", code)
with open(os.path.join(work, "report.json")) as fh:
    report = json.load(fh)
print("flagged:", [(f["id"], f["severity"], f["sup"]) for f in report["status"]["flagged"]])

print()
code = cli.main(["convergence", sph, "--levels", "3", "--format", "table"])
print("convergence exit code:", code)
